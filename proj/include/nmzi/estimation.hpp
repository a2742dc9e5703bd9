#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "nmzi/analysis.hpp"
#include "nmzi/model.hpp"

namespace nmzi {

// LOBSTER event type codes.
enum class LobsterType : int {
    Submission = 1,
    PartialCancel = 2,
    Deletion = 3,
    Execution = 4,
    HiddenExecution = 5,
    Cross = 6,
    Halt = 7,
};

struct MarketEvent {
    std::int64_t time_ns = 0; // since midnight
    int type = 0;
    std::int64_t order_id = 0;
    std::int64_t size = 0;
    std::int64_t price = 0;   // dollars x 10^4
    int direction = 0;        // +1 buy limit order, -1 sell limit order

    bool operator==(const MarketEvent&) const = default;
};

struct BookLevel {
    std::int64_t price = 0;
    std::int64_t volume = 0;
    bool operator==(const BookLevel&) const = default;
};

// Top levels of both sides. Empty levels carry volume 0 (LOBSTER pads them
// with dummy prices).
struct BookSnapshot {
    std::vector<BookLevel> ask;
    std::vector<BookLevel> bid;

    bool has_bid() const noexcept { return !bid.empty() && bid[0].volume > 0; }
    bool has_ask() const noexcept { return !ask.empty() && ask[0].volume > 0; }
    bool two_sided() const noexcept { return has_bid() && has_ask(); }
    bool crossed() const noexcept { return two_sided() && ask[0].price <= bid[0].price; }
    bool operator==(const BookSnapshot&) const = default;
};

// Row j of `books` is the state after event j.
struct LobsterData {
    std::vector<MarketEvent> events;
    std::vector<BookSnapshot> books;
    int levels = 10;
};

LobsterData parse_lobster(const std::filesystem::path& message_path, const std::filesystem::path& orderbook_path);
LobsterData parse_lobster(std::istream& message, std::istream& orderbook);
// Canonical form: times with nine decimals, integers elsewhere.
void write_lobster(const LobsterData& data, std::ostream& message, std::ostream& orderbook);

std::string format_time(std::int64_t time_ns);
std::int64_t parse_time(std::string_view text); // throws ParseError (line 0)

// An event with the book just before and just after it.
struct LobsterRecord {
    MarketEvent event;
    BookSnapshot before;
    BookSnapshot after;
    bool operator==(const LobsterRecord&) const = default;
};

std::vector<LobsterRecord> to_records(const LobsterData& data);

struct CleaningOptions {
    std::int64_t keep_from_ns = 37800LL * 1'000'000'000; // 10:30
    std::int64_t keep_until_ns = 54000LL * 1'000'000'000; // 15:00
};

struct CleaningReport {
    std::int64_t input = 0;
    std::int64_t halted = 0;
    std::int64_t auctions = 0;
    std::int64_t crossed = 0;
    std::int64_t grouped = 0;  // execution rows merged into a previous one
    std::int64_t hidden = 0;
    std::int64_t outside_hours = 0;
    std::int64_t output = 0;
};

struct CleanedStream {
    std::vector<LobsterRecord> records;
    CleaningReport report;
};

// Halts, auctions, crossed books, split executions, hidden executions and
// the first/last trading hour, in that order. Idempotent.
CleanedStream preprocess(std::vector<LobsterRecord> records, const CleaningOptions& options = {});
CleanedStream preprocess(const LobsterData& data, const CleaningOptions& options = {});

struct EstimationDiagnostics {
    std::int64_t n = 0;
    std::int64_t n_limit = 0;
    std::int64_t n_market = 0;
    std::int64_t n_cancel = 0;
    double spread_before_limit = 0;      // mean spread (ticks) before in-spread limit orders
    double half_spread_floor_mean = 0;   // mean of floor(spread / 2) over the same orders
    double levels_in_play = 0;           // 2 (1 + mean floor(spread / 2))
    double q_best_bid = 0;               // mean best-queue volumes (shares)
    double q_best_ask = 0;
};

struct EstimatedParams {
    double q0 = 0;
    double lambda = 0;
    double mu = 0;
    double delta = 0;
    double tick_size = 0.01;
    EstimationDiagnostics diagnostics;
    std::vector<std::string> degenerate; // names of rates with no supporting events

    ModelParams to_model(int levels = kDefaultLevels) const;
};

// Price units (dollars x 10^4) per tick.
std::int64_t tick_units(double tick_size);

// Throws EstimationDegenerate when no limit order qualifies; rates without
// events are set to zero and listed in `degenerate`.
EstimatedParams estimate_params(const CleanedStream& cleaned, double tick_size = 0.01);

ResponseCurve empirical_response(const CleanedStream& cleaned, std::size_t tau_max, double tick_size = 0.01);

} // namespace nmzi
