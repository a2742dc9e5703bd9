#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace nmzi {

using OrderId = std::uint64_t;
using Ticks = std::int64_t;
using HalfTicks = std::int64_t;

enum class Side : std::uint8_t { Buy = 0, Sell = 1 };

constexpr Side opposite(Side s) noexcept { return s == Side::Buy ? Side::Sell : Side::Buy; }
constexpr int sign_of(Side s) noexcept { return s == Side::Buy ? 1 : -1; }
std::string_view to_string(Side s) noexcept;

// Top-of-book state. Prices are absolute ticks; the mid-price is kept in
// half-ticks so it stays integral.
struct Observables {
    Ticks best_bid = 0;
    Ticks best_ask = 0;
    HalfTicks mid = 0;
    Ticks spread = 0;
    Ticks gap_bid = 0;
    Ticks gap_ask = 0;
    std::int64_t q_best_bid = 0;
    std::int64_t q_best_ask = 0;
    std::int64_t n_bid = 0;
    std::int64_t n_ask = 0;
};

enum class DeltaKind : std::uint8_t { Limit, Market, Cancel, Recenter };

// One mutation of the book. A log of deltas replayed through
// OrderBook::apply on a fresh book reproduces the final state.
struct BookDelta {
    DeltaKind kind = DeltaKind::Limit;
    Side side = Side::Buy;  // resting side for Limit/Cancel, aggressor for Market
    Ticks price = 0;        // absolute price touched (unused for Recenter)
    OrderId id = 0;
    HalfTicks mid_before = 0;
    HalfTicks mid_after = 0;
    Ticks shift = 0;         // Recenter: grid displacement in ticks
    std::int64_t dropped = 0; // Recenter: orders pushed off the grid

    HalfTicks mid_change() const noexcept { return mid_after - mid_before; }
};

// Limit order book on a K-level integer tick grid with FIFO unit orders.
//
// Grid index i corresponds to the absolute price grid_offset() + i. An empty
// side is represented by a virtual quote just outside the grid (index -1 for
// bids, K for asks) so the mid-price is always defined.
class OrderBook {
public:
    // One buy order on every level below K/2, one sell order on every level
    // from K/2 upwards. K must be even and >= 4.
    explicit OrderBook(int levels, Ticks grid_offset = 0);

    int levels() const noexcept { return levels_; }
    Ticks grid_offset() const noexcept { return offset_; }

    // Grid indices of the best quotes (-1 / K when the side is empty).
    int best_bid_index() const noexcept { return best_bid_; }
    int best_ask_index() const noexcept { return best_ask_; }
    Ticks best_bid() const noexcept { return offset_ + best_bid_; }
    Ticks best_ask() const noexcept { return offset_ + best_ask_; }
    Ticks spread() const noexcept { return best_ask_ - best_bid_; }
    HalfTicks mid() const noexcept { return 2 * offset_ + best_bid_ + best_ask_; }

    std::int64_t count(Side s) const noexcept { return static_cast<std::int64_t>(resting_[idx(s)].size()); }
    std::int64_t n_orders() const noexcept { return count(Side::Buy) + count(Side::Sell); }
    bool empty(Side s) const noexcept { return resting_[idx(s)].empty(); }

    int depth(int level) const;
    const std::vector<OrderId>& queue(int level) const;

    // Distance from the best quote to the next occupied level on that side.
    Ticks gap(Side s) const noexcept;

    Observables observables() const noexcept;

    BookDelta place_limit_order(Side side, int level);
    // Executes one unit against the best opposite quote; `aggressor` is the
    // market order's side (a buy hits the best ask).
    BookDelta execute_market_order(Side aggressor);
    BookDelta cancel_order(OrderId id);
    // Cancels the rank-th resting order of one side (rank in [0, count(s))).
    BookDelta cancel_resting(Side s, std::size_t rank);
    // Shifts the grid so the mid-price sits at the centre. No-op when either
    // side is empty.
    BookDelta recenter();

    void apply(const BookDelta& delta);

    // Orders removed by recentering since construction.
    std::int64_t truncated() const noexcept { return truncated_; }
    std::int64_t orders_placed() const noexcept { return placed_; }
    OrderId next_order_id() const noexcept { return next_id_; }

    bool same_state(const OrderBook& other) const;
    // Re-derives counters and best quotes from the queues; throws
    // InternalConsistency on any mismatch or a crossed book.
    void check_invariants() const;

private:
    struct Resting {
        OrderId id;
        Ticks price;
    };

    static constexpr std::size_t idx(Side s) noexcept { return static_cast<std::size_t>(s); }
    std::size_t phys(int level) const noexcept {
        std::size_t p = head_ + static_cast<std::size_t>(level);
        return p >= static_cast<std::size_t>(levels_) ? p - static_cast<std::size_t>(levels_) : p;
    }

    void remove_from_side(Side s, OrderId id);
    void remove_from_level(int level, OrderId id);
    void refresh_best_after_removal(Side s, int level);
    int scan_down(int from) const noexcept;  // first occupied level <= from, or -1
    int scan_up(int from) const noexcept;    // first occupied level >= from, or K

    int levels_;
    Ticks offset_;
    std::size_t head_ = 0;
    int best_bid_ = -1;
    int best_ask_ = 0;
    std::vector<std::vector<OrderId>> queues_;
    std::vector<std::int32_t> depth_;
    std::vector<Resting> resting_[2];
    OrderId next_id_ = 1;
    std::int64_t truncated_ = 0;
    std::int64_t placed_ = 0;
};

} // namespace nmzi
