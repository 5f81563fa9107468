#pragma once

// Tick files to 1-minute order-flow bars: parsing, midpoint-rule trade
// signing and per-session aggregation.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace liqimpact::ingest {

enum class TickKind { trade, quote };

struct TickRecord {
    std::string day;           // YYYY-MM-DD
    std::int64_t time_us = 0;  // microseconds since midnight
    TickKind kind = TickKind::trade;
    double price = 0.0;
    double size = 0.0;
    double bid = 0.0;
    double ask = 0.0;
    double bid_size = 0.0;  // NaN when absent
    double ask_size = 0.0;
    std::size_t line = 0;
};

struct SessionSpec {
    std::int64_t start_us = 9LL * 3600 * 1000000;   // 09:00
    std::int64_t end_us = 15LL * 3600 * 1000000;    // 15:00 (exclusive)
    int bar_seconds = 60;
    double tick_size = 1e-4;

    /// Throws DomainError when end <= start, tick_size <= 0 or the bar width
    /// does not divide the session.
    void validate() const;
    int bar_count() const;
};

/// "HH:MM" or "HH:MM:SS" to microseconds since midnight.
std::int64_t parse_clock(std::string_view text);
std::string format_clock(std::int64_t time_us);

struct MinuteBar {
    std::string day;
    int bar_index = 0;
    double order_flow = 0.0;
    double last_price = 0.0;     // NaN until the day's first trade
    double log_return = 0.0;     // NaN on bar 0 or without a previous price
    int signed_count = 0;
    int unsigned_count = 0;
    double signed_volume = 0.0;  // buys + sells, contracts
    double open_bid_size = 0.0;  // NaN when no quote seen yet
    double open_ask_size = 0.0;
};

struct DayBars {
    std::string day;
    std::vector<MinuteBar> bars;  // empty for a day without in-session trades
    std::size_t buy_trades = 0;
    std::size_t sell_trades = 0;
    std::size_t unsigned_trades = 0;
    std::size_t discarded_trades = 0;  // outside the session
    std::vector<std::string> warnings;
};

/// +1 above the midpoint, -1 below, 0 at it or without a quote. Prices are
/// rounded to integer ticks first so the midpoint comparison is exact.
int sign_trade(double trade_price, std::optional<double> bid, std::optional<double> ask,
               double tick_size = 1e-4);

/// Parses the tick CSV (header ts,kind,price,size,bid,ask,bid_size,ask_size).
/// Throws ParseError with the 1-based line for malformed rows or timestamps
/// that go backwards.
std::vector<TickRecord> parse_ticks(std::string_view text);
std::vector<TickRecord> read_ticks(const std::filesystem::path& path);  // gzip accepted

/// Aggregates ordered ticks into per-day bars. Quote state resets at each new day.
std::vector<DayBars> build_bars(const std::vector<TickRecord>& ticks, const SessionSpec& session);

/// CSV header day,bar,order_flow,last_price,log_return,open_bid_size,open_ask_size.
void write_bars_csv(std::ostream& out, const std::vector<DayBars>& days);
std::string bars_csv(const std::vector<DayBars>& days);

/// Reads a bar CSV written by write_bars_csv. Counts are not stored in the
/// file and come back as zero.
std::vector<DayBars> parse_bars_csv(std::string_view text);
std::vector<DayBars> read_bars(const std::filesystem::path& path);

struct FlowSummary {
    std::size_t n_bars = 0;
    double mean = 0.0;
    double sd = 0.0;  // unbiased, the order-flow volatility
    std::vector<std::string> days;
    std::vector<double> daily_positive;  // sum of max(X, 0)
    std::vector<double> daily_negative;  // sum of max(-X, 0)
    double unsigned_pct = 0.0;           // percent of in-session trades left unsigned
};

/// Throws DomainError for an empty panel.
FlowSummary flow_descriptives(const std::vector<DayBars>& days);

}  // namespace liqimpact::ingest
