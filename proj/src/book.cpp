#include "nmzi/book.hpp"

#include <algorithm>
#include <string>

#include "nmzi/errors.hpp"

namespace nmzi {

namespace {

Ticks floor_div2(Ticks x) { return x >= 0 ? x / 2 : -((-x + 1) / 2); }

} // namespace

std::string_view to_string(Side s) noexcept { return s == Side::Buy ? "buy" : "sell"; }

OrderBook::OrderBook(int levels, Ticks grid_offset)
    : levels_(levels), offset_(grid_offset) {
    if (levels < 4 || levels % 2 != 0) {
        throw InvalidConfiguration("grid size K must be even and >= 4, got " + std::to_string(levels));
    }
    queues_.resize(static_cast<std::size_t>(levels));
    depth_.assign(static_cast<std::size_t>(levels), 0);
    resting_[0].reserve(static_cast<std::size_t>(levels));
    resting_[1].reserve(static_cast<std::size_t>(levels));
    best_bid_ = -1;
    best_ask_ = levels;
    const int half = levels / 2;
    for (int i = 0; i < half; ++i) place_limit_order(Side::Buy, i);
    for (int i = levels - 1; i >= half; --i) place_limit_order(Side::Sell, i);
}

int OrderBook::depth(int level) const {
    if (level < 0 || level >= levels_) return 0;
    return depth_[phys(level)];
}

const std::vector<OrderId>& OrderBook::queue(int level) const {
    if (level < 0 || level >= levels_) throw InvalidConfiguration("level outside grid");
    return queues_[phys(level)];
}

int OrderBook::scan_down(int from) const noexcept {
    for (int i = from; i >= 0; --i) {
        if (depth_[phys(i)] > 0) return i;
    }
    return -1;
}

int OrderBook::scan_up(int from) const noexcept {
    for (int i = from; i < levels_; ++i) {
        if (depth_[phys(i)] > 0) return i;
    }
    return levels_;
}

Ticks OrderBook::gap(Side s) const noexcept {
    if (s == Side::Buy) {
        if (best_bid_ < 0) return 0;
        return best_bid_ - scan_down(best_bid_ - 1);
    }
    if (best_ask_ >= levels_) return 0;
    return scan_up(best_ask_ + 1) - best_ask_;
}

Observables OrderBook::observables() const noexcept {
    Observables o;
    o.best_bid = best_bid();
    o.best_ask = best_ask();
    o.mid = mid();
    o.spread = spread();
    o.gap_bid = gap(Side::Buy);
    o.gap_ask = gap(Side::Sell);
    o.q_best_bid = depth(best_bid_);
    o.q_best_ask = depth(best_ask_);
    o.n_bid = count(Side::Buy);
    o.n_ask = count(Side::Sell);
    return o;
}

BookDelta OrderBook::place_limit_order(Side side, int level) {
    if (side == Side::Buy ? (level < 0 || level >= best_ask_) : (level <= best_bid_ || level >= levels_)) {
        throw RejectedOrder("limit " + std::string(to_string(side)) + " at grid level " + std::to_string(level) +
                            " violates bid " + std::to_string(best_bid_) + " / ask " + std::to_string(best_ask_));
    }
    BookDelta d;
    d.kind = DeltaKind::Limit;
    d.side = side;
    d.price = offset_ + level;
    d.id = next_id_++;
    d.mid_before = mid();

    const std::size_t p = phys(level);
    queues_[p].push_back(d.id);
    ++depth_[p];
    resting_[idx(side)].push_back({d.id, d.price});
    ++placed_;
    if (side == Side::Buy) {
        best_bid_ = std::max(best_bid_, level);
    } else {
        best_ask_ = std::min(best_ask_, level);
    }
    d.mid_after = mid();
    return d;
}

void OrderBook::remove_from_side(Side s, OrderId id) {
    auto& v = resting_[idx(s)];
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].id == id) {
            v[i] = v.back();
            v.pop_back();
            return;
        }
    }
    throw InternalConsistency("order " + std::to_string(id) + " missing from side index");
}

void OrderBook::remove_from_level(int level, OrderId id) {
    const std::size_t p = phys(level);
    auto& q = queues_[p];
    auto it = std::find(q.begin(), q.end(), id);
    if (it == q.end()) {
        throw InternalConsistency("order " + std::to_string(id) + " missing from level " + std::to_string(level));
    }
    q.erase(it);
    --depth_[p];
}

void OrderBook::refresh_best_after_removal(Side s, int level) {
    if (s == Side::Buy) {
        if (level == best_bid_ && depth_[phys(level)] == 0) best_bid_ = scan_down(level - 1);
    } else {
        if (level == best_ask_ && depth_[phys(level)] == 0) best_ask_ = scan_up(level + 1);
    }
}

BookDelta OrderBook::execute_market_order(Side aggressor) {
    const Side resting = opposite(aggressor);
    if (empty(resting)) {
        throw LiquidityExhausted(std::string(to_string(aggressor)) + " market order against an empty " +
                                 (resting == Side::Buy ? "bid" : "ask") + " side");
    }
    const int level = resting == Side::Sell ? best_ask_ : best_bid_;
    auto& q = queues_[phys(level)];

    BookDelta d;
    d.kind = DeltaKind::Market;
    d.side = aggressor;
    d.price = offset_ + level;
    d.id = q.front();
    d.mid_before = mid();

    q.erase(q.begin());
    --depth_[phys(level)];
    remove_from_side(resting, d.id);
    refresh_best_after_removal(resting, level);
    d.mid_after = mid();
    return d;
}

BookDelta OrderBook::cancel_order(OrderId id) {
    for (Side s : {Side::Buy, Side::Sell}) {
        const auto& v = resting_[idx(s)];
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i].id == id) return cancel_resting(s, i);
        }
    }
    throw InternalConsistency("cancel of unknown order " + std::to_string(id));
}

BookDelta OrderBook::cancel_resting(Side s, std::size_t rank) {
    auto& v = resting_[idx(s)];
    if (rank >= v.size()) throw InternalConsistency("cancel rank out of range");
    const Resting r = v[rank];
    const int level = static_cast<int>(r.price - offset_);

    BookDelta d;
    d.kind = DeltaKind::Cancel;
    d.side = s;
    d.price = r.price;
    d.id = r.id;
    d.mid_before = mid();

    remove_from_level(level, r.id);
    v[rank] = v.back();
    v.pop_back();
    refresh_best_after_removal(s, level);
    d.mid_after = mid();
    return d;
}

BookDelta OrderBook::recenter() {
    BookDelta d;
    d.kind = DeltaKind::Recenter;
    d.mid_before = mid();
    d.mid_after = d.mid_before;
    if (empty(Side::Buy) || empty(Side::Sell)) return d;

    const Ticks shift = floor_div2(static_cast<Ticks>(best_bid_) + best_ask_ - (levels_ - 1));
    if (shift == 0) return d;
    d.shift = shift;

    // Levels leaving the grid: [0, shift) when moving up, [K + shift, K) when moving down.
    const int n_leave = static_cast<int>(std::min<Ticks>(shift > 0 ? shift : -shift, levels_));
    const int first = shift > 0 ? 0 : levels_ - n_leave;
    std::int64_t dropped = 0;
    for (int i = first; i < first + n_leave; ++i) {
        const std::size_t p = phys(i);
        dropped += depth_[p];
        queues_[p].clear();
        depth_[p] = 0;
    }
    if (dropped > 0) {
        const Ticks lo = offset_ + shift;
        const Ticks hi = lo + levels_;
        for (auto& v : resting_) {
            std::erase_if(v, [&](const Resting& r) { return r.price < lo || r.price >= hi; });
        }
        truncated_ += dropped;
    }
    d.dropped = dropped;

    const Ticks k = levels_;
    head_ = static_cast<std::size_t>(((static_cast<Ticks>(head_) + shift) % k + k) % k);
    offset_ += shift;
    best_bid_ = empty(Side::Buy) ? -1 : static_cast<int>(best_bid_ - shift);
    best_ask_ = empty(Side::Sell) ? levels_ : static_cast<int>(best_ask_ - shift);
    return d;
}

void OrderBook::apply(const BookDelta& delta) {
    BookDelta got;
    switch (delta.kind) {
    case DeltaKind::Limit:
        got = place_limit_order(delta.side, static_cast<int>(delta.price - offset_));
        break;
    case DeltaKind::Market:
        got = execute_market_order(delta.side);
        break;
    case DeltaKind::Cancel:
        got = cancel_order(delta.id);
        break;
    case DeltaKind::Recenter:
        got = recenter();
        if (got.shift != delta.shift || got.dropped != delta.dropped) {
            throw InternalConsistency("recenter replay diverged");
        }
        return;
    }
    if (got.id != delta.id || got.price != delta.price || got.mid_after != delta.mid_after) {
        throw InternalConsistency("delta replay diverged at order " + std::to_string(delta.id));
    }
}

bool OrderBook::same_state(const OrderBook& other) const {
    if (levels_ != other.levels_ || offset_ != other.offset_ || best_bid_ != other.best_bid_ ||
        best_ask_ != other.best_ask_ || next_id_ != other.next_id_ || truncated_ != other.truncated_) {
        return false;
    }
    for (int i = 0; i < levels_; ++i) {
        if (queues_[phys(i)] != other.queues_[other.phys(i)]) return false;
    }
    for (std::size_t s = 0; s < 2; ++s) {
        if (resting_[s].size() != other.resting_[s].size()) return false;
    }
    return true;
}

void OrderBook::check_invariants() const {
    std::int64_t per_side[2] = {0, 0};
    int max_bid = -1;
    int min_ask = levels_;
    for (int i = 0; i < levels_; ++i) {
        const std::size_t p = phys(i);
        if (static_cast<std::size_t>(depth_[p]) != queues_[p].size()) {
            throw InternalConsistency("depth counter mismatch at level " + std::to_string(i));
        }
        if (depth_[p] == 0) continue;
        // Every order on the level must belong to the same side.
        const bool is_bid = i <= best_bid_;
        if (is_bid) {
            max_bid = i;
            per_side[0] += depth_[p];
        } else {
            if (i < best_ask_) throw InternalConsistency("order between best quotes at level " + std::to_string(i));
            min_ask = std::min(min_ask, i);
            per_side[1] += depth_[p];
        }
    }
    if (max_bid != best_bid_ || min_ask != best_ask_) throw InternalConsistency("best quote tracking mismatch");
    if (best_bid_ >= best_ask_) throw InternalConsistency("crossed book");
    if (per_side[0] != count(Side::Buy) || per_side[1] != count(Side::Sell)) {
        throw InternalConsistency("side counts disagree with queues");
    }
    for (std::size_t s = 0; s < 2; ++s) {
        for (const auto& r : resting_[s]) {
            const Ticks lvl = r.price - offset_;
            if (lvl < 0 || lvl >= levels_) throw InternalConsistency("resting order off grid");
            const auto& q = queues_[phys(static_cast<int>(lvl))];
            if (std::find(q.begin(), q.end(), r.id) == q.end()) {
                throw InternalConsistency("resting order " + std::to_string(r.id) + " not queued");
            }
            if ((s == 0) != (lvl <= best_bid_)) throw InternalConsistency("order on wrong side of the book");
        }
    }
}

} // namespace nmzi
