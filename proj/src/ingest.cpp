#include "liqimpact/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

#include "liqimpact/errors.hpp"
#include "liqimpact/io.hpp"

namespace liqimpact::ingest {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::int64_t kMicros = 1000000;

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

int two_digits(std::string_view s, std::size_t line, std::string_view what, int max) {
    if (s.size() != 2 || !all_digits(s)) throw ParseError("bad " + std::string(what) + " in timestamp", line);
    const int v = (s[0] - '0') * 10 + (s[1] - '0');
    if (v > max) throw ParseError(std::string(what) + " out of range in timestamp", line);
    return v;
}

// HH:MM[:SS[.ffffff]] to microseconds.
std::int64_t parse_time_part(std::string_view t, std::size_t line) {
    if (t.size() < 5 || t[2] != ':') throw ParseError("bad time '" + std::string(t) + "'", line);
    const int hh = two_digits(t.substr(0, 2), line, "hour", 23);
    const int mm = two_digits(t.substr(3, 2), line, "minute", 59);
    int ss = 0;
    std::int64_t frac = 0;
    if (t.size() > 5) {
        if (t[5] != ':' || t.size() < 8) throw ParseError("bad time '" + std::string(t) + "'", line);
        ss = two_digits(t.substr(6, 2), line, "second", 60);
        if (t.size() > 8) {
            if (t[8] != '.' || t.size() == 9 || !all_digits(t.substr(9)))
                throw ParseError("bad fractional seconds in '" + std::string(t) + "'", line);
            auto digits = t.substr(9);
            std::int64_t scale = 100000;
            for (std::size_t i = 0; i < digits.size() && i < 6; ++i, scale /= 10) frac += (digits[i] - '0') * scale;
        }
    }
    return ((hh * 60LL + mm) * 60LL + ss) * kMicros + frac;
}

void parse_timestamp(std::string_view ts, std::size_t line, std::string& day, std::int64_t& time_us) {
    if (!ts.empty() && (ts.back() == 'Z' || ts.back() == 'z')) ts.remove_suffix(1);
    if (ts.size() < 16 || ts[4] != '-' || ts[7] != '-' || (ts[10] != 'T' && ts[10] != ' '))
        throw ParseError("bad ISO-8601 timestamp '" + std::string(ts) + "'", line);
    auto d = ts.substr(0, 10);
    if (!all_digits(d.substr(0, 4)) || !all_digits(d.substr(5, 2)) || !all_digits(d.substr(8, 2)))
        throw ParseError("bad date in timestamp '" + std::string(ts) + "'", line);
    day.assign(d);
    time_us = parse_time_part(ts.substr(11), line);
}

struct QuoteState {
    bool have = false;
    double bid = kNaN, ask = kNaN, bid_size = kNaN, ask_size = kNaN;
};

class DayBuilder {
public:
    DayBuilder(std::string day, const SessionSpec& session) : session_(session) {
        out_.day = std::move(day);
        n_ = session.bar_count();
        width_ = static_cast<std::int64_t>(session.bar_seconds) * kMicros;
        bars_.resize(static_cast<std::size_t>(n_));
        for (int k = 0; k < n_; ++k) {
            bars_[k].day = out_.day;
            bars_[k].bar_index = k;
            bars_[k].last_price = kNaN;
            bars_[k].log_return = kNaN;
        }
        bar_last_.assign(static_cast<std::size_t>(n_), kNaN);
    }

    void apply(const TickRecord& t) {
        capture_opens_before(t.time_us);
        if (t.kind == TickKind::quote) {
            quote_ = {true, t.bid, t.ask, t.bid_size, t.ask_size};
            return;
        }
        if (t.time_us < session_.start_us || t.time_us >= session_.end_us) {
            ++out_.discarded_trades;
            return;
        }
        const auto k = static_cast<std::size_t>((t.time_us - session_.start_us) / width_);
        const int sign = quote_.have ? sign_trade(t.price, quote_.bid, quote_.ask, session_.tick_size)
                                     : sign_trade(t.price, std::nullopt, std::nullopt, session_.tick_size);
        auto& bar = bars_[k];
        if (sign == 0) {
            ++bar.unsigned_count;
            ++out_.unsigned_trades;
        } else {
            ++bar.signed_count;
            bar.order_flow += sign * t.size;
            bar.signed_volume += t.size;
            ++(sign > 0 ? out_.buy_trades : out_.sell_trades);
        }
        bar_last_[k] = t.price;
        ++in_session_;
    }

    DayBars finish() {
        capture_opens_before(std::numeric_limits<std::int64_t>::max());
        if (in_session_ == 0) {
            out_.warnings.push_back("day " + out_.day + ": no trades inside the session; no bars emitted");
            return std::move(out_);
        }
        double last = kNaN;
        for (int k = 0; k < n_; ++k) {
            auto& bar = bars_[k];
            const double prev = last;
            if (!std::isnan(bar_last_[k])) last = bar_last_[k];
            bar.last_price = last;
            if (k > 0 && !std::isnan(prev) && !std::isnan(last)) bar.log_return = std::log(last) - std::log(prev);
        }
        out_.bars = std::move(bars_);
        return std::move(out_);
    }

private:
    // Bar k's opening sizes are the quote state after every record stamped at
    // or before the bar start.
    void capture_opens_before(std::int64_t time_us) {
        while (cursor_ < n_ && session_.start_us + cursor_ * width_ < time_us) {
            bars_[cursor_].open_bid_size = quote_.have ? quote_.bid_size : kNaN;
            bars_[cursor_].open_ask_size = quote_.have ? quote_.ask_size : kNaN;
            ++cursor_;
        }
    }

    const SessionSpec& session_;
    DayBars out_;
    int n_ = 0;
    std::int64_t width_ = 0;
    std::vector<MinuteBar> bars_;
    std::vector<double> bar_last_;
    QuoteState quote_;
    int cursor_ = 0;
    std::size_t in_session_ = 0;
};

}  // namespace

void SessionSpec::validate() const {
    if (!(end_us > start_us)) throw DomainError("session end must be after session start");
    if (bar_seconds <= 0) throw DomainError("bar width must be positive");
    if (!(tick_size > 0.0) || !std::isfinite(tick_size)) throw DomainError("tick size must be positive");
    const std::int64_t w = static_cast<std::int64_t>(bar_seconds) * kMicros;
    if ((end_us - start_us) % w != 0) throw DomainError("bar width must divide the session length");
}

int SessionSpec::bar_count() const {
    return static_cast<int>((end_us - start_us) / (static_cast<std::int64_t>(bar_seconds) * kMicros));
}

std::int64_t parse_clock(std::string_view text) {
    try {
        return parse_time_part(text, 0);
    } catch (const ParseError& e) {
        throw DomainError(std::string("bad clock time: ") + e.what());
    }
}

std::string format_clock(std::int64_t time_us) {
    const std::int64_t s = time_us / kMicros;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld", static_cast<long long>(s / 3600),
                  static_cast<long long>(s / 60 % 60), static_cast<long long>(s % 60));
    return buf;
}

int sign_trade(double trade_price, std::optional<double> bid, std::optional<double> ask, double tick_size) {
    if (!bid || !ask || std::isnan(*bid) || std::isnan(*ask)) return 0;
    const long long t = std::llround(trade_price / tick_size);
    const long long b = std::llround(*bid / tick_size);
    const long long a = std::llround(*ask / tick_size);
    const long long twice = 2 * t;
    if (twice > a + b) return 1;
    if (twice < a + b) return -1;
    return 0;
}

std::vector<TickRecord> parse_ticks(std::string_view text) {
    const auto lines = io::split_lines(text);
    if (lines.empty()) throw ParseError("empty tick file (missing header)", 1);
    if (lines[0] != "ts,kind,price,size,bid,ask,bid_size,ask_size")
        throw ParseError("unexpected header '" + std::string(lines[0]) + "'", 1);
    std::vector<TickRecord> out;
    out.reserve(lines.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t ln = i + 1;
        if (lines[i].empty()) continue;
        const auto f = io::split_csv(lines[i]);
        if (f.size() != 8) throw ParseError("expected 8 fields, got " + std::to_string(f.size()), ln);
        TickRecord r;
        r.line = ln;
        parse_timestamp(f[0], ln, r.day, r.time_us);
        if (f[1] == "T") {
            r.kind = TickKind::trade;
            r.price = io::parse_double(f[2], ln, "price");
            r.size = io::parse_double(f[3], ln, "size");
            if (!(r.price > 0.0)) throw ParseError("trade price must be > 0", ln);
            if (!(r.size > 0.0)) throw ParseError("trade size must be > 0", ln);
        } else if (f[1] == "Q") {
            r.kind = TickKind::quote;
            r.bid = io::parse_double(f[4], ln, "bid");
            r.ask = io::parse_double(f[5], ln, "ask");
            r.bid_size = io::parse_double(f[6], ln, "bid_size");
            r.ask_size = io::parse_double(f[7], ln, "ask_size");
            if (std::isnan(r.bid) || std::isnan(r.ask)) throw ParseError("quote needs bid and ask", ln);
            if (r.bid > r.ask) throw ParseError("crossed quote (bid > ask)", ln);
            if (r.bid_size < 0.0 || r.ask_size < 0.0) throw ParseError("negative quote size", ln);
        } else {
            throw ParseError("kind must be T or Q, got '" + std::string(f[1]) + "'", ln);
        }
        if (!out.empty()) {
            const auto& prev = out.back();
            if (r.day < prev.day || (r.day == prev.day && r.time_us < prev.time_us))
                throw ParseError("timestamp out of order (earlier than line " + std::to_string(prev.line) + ")", ln);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<TickRecord> read_ticks(const std::filesystem::path& path) {
    const std::string text = io::read_file(path);
    try {
        return parse_ticks(text);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
}

std::vector<DayBars> build_bars(const std::vector<TickRecord>& ticks, const SessionSpec& session) {
    session.validate();
    std::vector<DayBars> days;
    std::optional<DayBuilder> cur;
    const TickRecord* prev = nullptr;
    for (const auto& t : ticks) {
        if (prev && (t.day < prev->day || (t.day == prev->day && t.time_us < prev->time_us)))
            throw ParseError("timestamp out of order", t.line);
        if (!cur || t.day != prev->day) {
            if (cur) days.push_back(cur->finish());
            cur.emplace(t.day, session);
        }
        cur->apply(t);
        prev = &t;
    }
    if (cur) days.push_back(cur->finish());
    return days;
}

void write_bars_csv(std::ostream& out, const std::vector<DayBars>& days) {
    out << "day,bar,order_flow,last_price,log_return,open_bid_size,open_ask_size\n";
    for (const auto& d : days)
        for (const auto& b : d.bars)
            out << b.day << ',' << b.bar_index << ',' << io::format_double(b.order_flow) << ','
                << io::format_double(b.last_price) << ',' << io::format_double(b.log_return) << ','
                << io::format_double(b.open_bid_size) << ',' << io::format_double(b.open_ask_size) << '\n';
}

std::string bars_csv(const std::vector<DayBars>& days) {
    std::ostringstream ss;
    write_bars_csv(ss, days);
    return ss.str();
}

std::vector<DayBars> parse_bars_csv(std::string_view text) {
    const auto lines = io::split_lines(text);
    if (lines.empty() || lines[0] != "day,bar,order_flow,last_price,log_return,open_bid_size,open_ask_size")
        throw ParseError("unexpected bar file header", 1);
    std::vector<DayBars> days;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t ln = i + 1;
        if (lines[i].empty()) continue;
        const auto f = io::split_csv(lines[i]);
        if (f.size() != 7) throw ParseError("expected 7 fields, got " + std::to_string(f.size()), ln);
        MinuteBar b;
        b.day = std::string(f[0]);
        b.bar_index = static_cast<int>(io::parse_int(f[1], ln, "bar"));
        b.order_flow = io::parse_double(f[2], ln, "order_flow");
        if (std::isnan(b.order_flow)) throw ParseError("order_flow is required", ln);
        b.last_price = io::parse_double(f[3], ln, "last_price");
        b.log_return = io::parse_double(f[4], ln, "log_return");
        b.open_bid_size = io::parse_double(f[5], ln, "open_bid_size");
        b.open_ask_size = io::parse_double(f[6], ln, "open_ask_size");
        if (days.empty() || days.back().day != b.day) {
            if (!days.empty() && b.day < days.back().day) throw ParseError("days out of order", ln);
            days.push_back({});
            days.back().day = b.day;
        } else if (b.bar_index <= days.back().bars.back().bar_index) {
            throw ParseError("bar index out of order", ln);
        }
        days.back().bars.push_back(std::move(b));
    }
    return days;
}

std::vector<DayBars> read_bars(const std::filesystem::path& path) {
    try {
        return parse_bars_csv(io::read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
}

FlowSummary flow_descriptives(const std::vector<DayBars>& days) {
    FlowSummary s;
    double sum = 0.0;
    std::size_t trades = 0, unsigned_trades = 0;
    for (const auto& d : days) {
        double pos = 0.0, neg = 0.0;
        for (const auto& b : d.bars) {
            sum += b.order_flow;
            ++s.n_bars;
            pos += std::max(b.order_flow, 0.0);
            neg += std::max(-b.order_flow, 0.0);
        }
        s.days.push_back(d.day);
        s.daily_positive.push_back(pos);
        s.daily_negative.push_back(neg);
        trades += d.buy_trades + d.sell_trades + d.unsigned_trades;
        unsigned_trades += d.unsigned_trades;
    }
    if (s.n_bars == 0) throw DomainError("flow_descriptives needs at least one bar");
    s.mean = sum / static_cast<double>(s.n_bars);
    double ss = 0.0;
    for (const auto& d : days)
        for (const auto& b : d.bars) ss += (b.order_flow - s.mean) * (b.order_flow - s.mean);
    s.sd = s.n_bars > 1 ? std::sqrt(ss / static_cast<double>(s.n_bars - 1)) : 0.0;
    s.unsigned_pct = trades > 0 ? 100.0 * static_cast<double>(unsigned_trades) / static_cast<double>(trades) : 0.0;
    return s;
}

}  // namespace liqimpact::ingest
