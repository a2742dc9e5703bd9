#include "nmzi/estimation.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

#include "nmzi/errors.hpp"

namespace nmzi {

namespace {

constexpr std::int64_t kNsPerSecond = 1'000'000'000;

std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::int64_t to_int(std::string_view s, long line, const char* field) {
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw ParseError(std::string("malformed ") + field + " '" + std::string(s) + "'", line);
    }
    return v;
}

bool next_line(std::istream& in, std::string& line) {
    if (!std::getline(in, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
}

} // namespace

std::int64_t parse_time(std::string_view text) {
    const std::size_t dot = text.find('.');
    const std::string_view whole = text.substr(0, dot);
    if (whole.empty()) throw ParseError("empty timestamp", 0);
    std::int64_t seconds = 0;
    auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), seconds);
    if (ec != std::errc() || p != whole.data() + whole.size() || seconds < 0) {
        throw ParseError("malformed timestamp '" + std::string(text) + "'", 0);
    }
    std::int64_t ns = 0;
    if (dot != std::string_view::npos) {
        const std::string_view frac = text.substr(dot + 1);
        if (frac.empty() || frac.size() > 9) throw ParseError("malformed timestamp '" + std::string(text) + "'", 0);
        for (char c : frac) {
            if (c < '0' || c > '9') throw ParseError("malformed timestamp '" + std::string(text) + "'", 0);
            ns = ns * 10 + (c - '0');
        }
        for (std::size_t i = frac.size(); i < 9; ++i) ns *= 10;
    }
    return seconds * kNsPerSecond + ns;
}

std::string format_time(std::int64_t time_ns) {
    std::string frac = std::to_string(time_ns % kNsPerSecond);
    frac.insert(0, 9 - frac.size(), '0');
    return std::to_string(time_ns / kNsPerSecond) + "." + frac;
}

LobsterData parse_lobster(std::istream& message, std::istream& orderbook) {
    LobsterData data;
    std::string mline, bline;
    long line = 0;
    int book_columns = -1;
    for (;;) {
        const bool has_m = next_line(message, mline);
        const bool has_b = next_line(orderbook, bline);
        ++line;
        if (has_m != has_b) {
            throw ParseError("message and orderbook files differ in length", line);
        }
        if (!has_m) break;
        if (mline.empty() && bline.empty()) continue;

        const auto m = split_csv(mline);
        if (m.size() != 6) throw ParseError("message row needs 6 columns, got " + std::to_string(m.size()), line);
        MarketEvent ev;
        try {
            ev.time_ns = parse_time(m[0]);
        } catch (const ParseError& e) {
            throw ParseError(e.what(), line);
        }
        ev.type = static_cast<int>(to_int(m[1], line, "event type"));
        ev.order_id = to_int(m[2], line, "order id");
        ev.size = to_int(m[3], line, "size");
        ev.price = to_int(m[4], line, "price");
        ev.direction = static_cast<int>(to_int(m[5], line, "direction"));
        if (ev.type < 1 || ev.type > 7) throw ParseError("unknown event type " + std::to_string(ev.type), line);
        if (ev.direction != 1 && ev.direction != -1) throw ParseError("direction must be 1 or -1", line);
        if (!data.events.empty() && ev.time_ns < data.events.back().time_ns) {
            throw ParseError("timestamps decrease", line);
        }

        const auto b = split_csv(bline);
        if (book_columns < 0) {
            if (b.empty() || b.size() % 4 != 0) {
                throw ParseError("orderbook row needs a multiple of 4 columns, got " + std::to_string(b.size()), line);
            }
            book_columns = static_cast<int>(b.size());
            data.levels = book_columns / 4;
        } else if (static_cast<int>(b.size()) != book_columns) {
            throw ParseError("orderbook row has " + std::to_string(b.size()) + " columns, expected " +
                                 std::to_string(book_columns),
                             line);
        }
        BookSnapshot snap;
        snap.ask.resize(static_cast<std::size_t>(data.levels));
        snap.bid.resize(static_cast<std::size_t>(data.levels));
        for (std::size_t l = 0; l < snap.ask.size(); ++l) {
            snap.ask[l].price = to_int(b[4 * l], line, "ask price");
            snap.ask[l].volume = to_int(b[4 * l + 1], line, "ask volume");
            snap.bid[l].price = to_int(b[4 * l + 2], line, "bid price");
            snap.bid[l].volume = to_int(b[4 * l + 3], line, "bid volume");
        }
        data.events.push_back(ev);
        data.books.push_back(std::move(snap));
    }
    return data;
}

LobsterData parse_lobster(const std::filesystem::path& message_path, const std::filesystem::path& orderbook_path) {
    std::ifstream m(message_path), b(orderbook_path);
    if (!m) throw ParseError("cannot open message file " + message_path.string(), 0);
    if (!b) throw ParseError("cannot open orderbook file " + orderbook_path.string(), 0);
    return parse_lobster(m, b);
}

void write_lobster(const LobsterData& data, std::ostream& message, std::ostream& orderbook) {
    if (data.events.size() != data.books.size()) throw InvalidConfiguration("events and snapshots differ in length");
    for (std::size_t i = 0; i < data.events.size(); ++i) {
        const MarketEvent& e = data.events[i];
        message << format_time(e.time_ns) << ',' << e.type << ',' << e.order_id << ',' << e.size << ',' << e.price
                << ',' << e.direction << '\n';
        const BookSnapshot& s = data.books[i];
        for (std::size_t l = 0; l < s.ask.size(); ++l) {
            if (l) orderbook << ',';
            orderbook << s.ask[l].price << ',' << s.ask[l].volume << ',' << s.bid[l].price << ',' << s.bid[l].volume;
        }
        orderbook << '\n';
    }
}

std::vector<LobsterRecord> to_records(const LobsterData& data) {
    if (data.events.size() != data.books.size()) throw InvalidConfiguration("events and snapshots differ in length");
    std::vector<LobsterRecord> out(data.events.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].event = data.events[i];
        out[i].after = data.books[i];
        if (i > 0) out[i].before = data.books[i - 1];
    }
    return out;
}

CleanedStream preprocess(std::vector<LobsterRecord> records, const CleaningOptions& options) {
    CleanedStream out;
    CleaningReport& rep = out.report;
    rep.input = static_cast<std::int64_t>(records.size());

    // 1. Trading halts: drop everything from a halt marker (price -1) through
    //    the matching resume marker (price 1), and any stray type-7 rows.
    std::vector<LobsterRecord> a;
    a.reserve(records.size());
    bool halted = false;
    for (auto& r : records) {
        if (r.event.type == static_cast<int>(LobsterType::Halt)) {
            if (r.event.price == -1) halted = true;
            if (r.event.price == 1) halted = false;
            ++rep.halted;
            continue;
        }
        if (halted) {
            ++rep.halted;
            continue;
        }
        a.push_back(std::move(r));
    }

    // 2. Auction crosses; 3. crossed books.
    std::vector<LobsterRecord> b;
    b.reserve(a.size());
    for (auto& r : a) {
        if (r.event.type == static_cast<int>(LobsterType::Cross)) {
            ++rep.auctions;
        } else if (r.after.crossed()) {
            ++rep.crossed;
        } else {
            b.push_back(std::move(r));
        }
    }

    // 4. Split executions of one limit order at one timestamp become one.
    //    Hidden executions in between are looked through: they are dropped
    //    next, and grouping across them keeps the pipeline idempotent.
    std::vector<LobsterRecord> c;
    c.reserve(b.size());
    const int exec = static_cast<int>(LobsterType::Execution);
    const int hidden = static_cast<int>(LobsterType::HiddenExecution);
    std::size_t last_visible = 0; // index + 1 in c of the last non-hidden record
    for (auto& r : b) {
        if (r.event.type == exec && last_visible > 0) {
            LobsterRecord& prev = c[last_visible - 1];
            if (prev.event.type == exec && r.event.order_id == prev.event.order_id &&
                r.event.time_ns == prev.event.time_ns) {
                prev.event.size += r.event.size;
                prev.after = std::move(r.after);
                ++rep.grouped;
                continue;
            }
        }
        c.push_back(std::move(r));
        if (c.back().event.type != hidden) last_visible = c.size();
    }

    // 5. Hidden executions; 6. first and last trading hour.
    out.records.reserve(c.size());
    for (auto& r : c) {
        if (r.event.type == static_cast<int>(LobsterType::HiddenExecution)) {
            ++rep.hidden;
        } else if (r.event.time_ns < options.keep_from_ns || r.event.time_ns >= options.keep_until_ns) {
            ++rep.outside_hours;
        } else {
            out.records.push_back(std::move(r));
        }
    }
    rep.output = static_cast<std::int64_t>(out.records.size());
    return out;
}

CleanedStream preprocess(const LobsterData& data, const CleaningOptions& options) {
    return preprocess(to_records(data), options);
}

std::int64_t tick_units(double tick_size) {
    const auto units = static_cast<std::int64_t>(std::llround(tick_size * 1e4));
    if (units < 1 || std::abs(static_cast<double>(units) - tick_size * 1e4) > 1e-6) {
        throw InvalidConfiguration("tick size must be a positive multiple of 0.0001");
    }
    return units;
}

ModelParams EstimatedParams::to_model(int levels) const {
    ModelParams p;
    p.lambda = lambda;
    p.mu = mu;
    p.delta = delta;
    p.q0 = static_cast<int>(std::lround(q0));
    p.levels = levels;
    return p;
}

EstimatedParams estimate_params(const CleanedStream& cleaned, double tick_size) {
    const std::int64_t tick = tick_units(tick_size);
    EstimatedParams est;
    est.tick_size = tick_size;
    EstimationDiagnostics& d = est.diagnostics;

    std::vector<double> lo_sizes, mo_sizes, c_sizes;
    double spread_sum = 0, floor_sum = 0, qb_sum = 0, qa_sum = 0;
    std::int64_t quote_obs = 0;
    for (const auto& r : cleaned.records) {
        const BookSnapshot& s = r.before;
        if (!s.two_sided() || s.crossed()) {
            // Execution sizes do not depend on the quotes.
            if (r.event.type == static_cast<int>(LobsterType::Execution)) mo_sizes.push_back(static_cast<double>(r.event.size));
            continue;
        }
        const std::int64_t bid = s.bid[0].price, ask = s.ask[0].price;
        qb_sum += static_cast<double>(s.bid[0].volume);
        qa_sum += static_cast<double>(s.ask[0].volume);
        ++quote_obs;
        const MarketEvent& e = r.event;
        switch (static_cast<LobsterType>(e.type)) {
        case LobsterType::Submission: {
            const bool inside = e.direction == 1 ? (e.price >= bid && e.price < ask) : (e.price <= ask && e.price > bid);
            if (!inside) break;
            lo_sizes.push_back(static_cast<double>(e.size));
            const double spread = static_cast<double>(ask - bid) / static_cast<double>(tick);
            spread_sum += spread;
            floor_sum += std::floor(spread / 2.0);
            break;
        }
        case LobsterType::Execution: mo_sizes.push_back(static_cast<double>(e.size)); break;
        case LobsterType::PartialCancel:
        case LobsterType::Deletion:
            if ((e.direction == 1 && e.price == bid) || (e.direction == -1 && e.price == ask)) {
                c_sizes.push_back(static_cast<double>(e.size));
            }
            break;
        default: break;
        }
    }

    d.n_limit = static_cast<std::int64_t>(lo_sizes.size());
    d.n_market = static_cast<std::int64_t>(mo_sizes.size());
    d.n_cancel = static_cast<std::int64_t>(c_sizes.size());
    d.n = d.n_limit + d.n_market + d.n_cancel;
    if (d.n_limit == 0) throw EstimationDegenerate("no limit orders at or inside the best quotes");

    auto total = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s;
    };
    const auto n = static_cast<double>(d.n);
    const auto nl = static_cast<double>(d.n_limit);
    est.q0 = total(lo_sizes) / nl;
    d.spread_before_limit = spread_sum / nl;
    d.half_spread_floor_mean = floor_sum / nl;
    d.levels_in_play = 2.0 * (1.0 + d.half_spread_floor_mean);
    d.q_best_bid = quote_obs ? qb_sum / static_cast<double>(quote_obs) : 0.0;
    d.q_best_ask = quote_obs ? qa_sum / static_cast<double>(quote_obs) : 0.0;

    est.lambda = (1.0 / d.levels_in_play) * (total(lo_sizes) / est.q0) / n;
    est.mu = 0.5 * (total(mo_sizes) / est.q0) / n;
    const double q_bar = 0.5 * (d.q_best_bid + d.q_best_ask);
    est.delta = q_bar > 0 ? 0.5 * (total(c_sizes) / q_bar) / n : 0.0;
    if (d.n_market == 0) est.degenerate.emplace_back("mu");
    if (d.n_cancel == 0) est.degenerate.emplace_back("delta");
    return est;
}

ResponseCurve empirical_response(const CleanedStream& cleaned, std::size_t tau_max, double tick_size) {
    if (tau_max == 0) throw InvalidConfiguration("tau_max must be >= 1");
    const auto tick = static_cast<double>(tick_units(tick_size));
    const auto& recs = cleaned.records;
    const std::size_t n = recs.size();
    // mid[t]: mid before record t (ticks), NaN without two-sided quotes.
    std::vector<double> mid(n + 1, std::numeric_limits<double>::quiet_NaN());
    auto mid_of = [&](const BookSnapshot& s) {
        return s.two_sided() ? 0.5 * static_cast<double>(s.ask[0].price + s.bid[0].price) / tick
                             : std::numeric_limits<double>::quiet_NaN();
    };
    for (std::size_t t = 0; t < n; ++t) mid[t] = mid_of(recs[t].before);
    if (n > 0) mid[n] = mid_of(recs[n - 1].after);

    std::vector<double> sum(tau_max, 0.0), sq(tau_max, 0.0);
    std::vector<std::int64_t> count(tau_max, 0);
    std::int64_t orders = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (recs[t].event.type != static_cast<int>(LobsterType::Execution) || std::isnan(mid[t])) continue;
        // The direction column is the side of the executed limit order.
        const double eps = -static_cast<double>(recs[t].event.direction);
        ++orders;
        for (std::size_t tau = 1; tau <= tau_max && t + tau <= n; ++tau) {
            const double m = mid[t + tau];
            if (std::isnan(m)) continue;
            const double v = eps * (m - mid[t]);
            sum[tau - 1] += v;
            sq[tau - 1] += v * v;
            ++count[tau - 1];
        }
    }
    ResponseCurve c;
    c.market_orders = orders;
    c.mean.assign(tau_max, std::numeric_limits<double>::quiet_NaN());
    c.se.assign(tau_max, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < tau_max; ++i) {
        if (count[i] == 0) continue;
        const auto k = static_cast<double>(count[i]);
        c.mean[i] = sum[i] / k;
        c.se[i] = count[i] > 1 ? std::sqrt(std::max(0.0, (sq[i] - k * c.mean[i] * c.mean[i]) / (k - 1)) / k) : 0.0;
    }
    return c;
}

} // namespace nmzi
