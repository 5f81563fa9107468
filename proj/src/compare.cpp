#include "liqimpact/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "liqimpact/errors.hpp"
#include "liqimpact/io.hpp"

namespace liqimpact::cmp {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

nlohmann::json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}
}  // namespace

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::adj_r2: return "adj_r2";
        case Metric::rss: return "rss";
        case Metric::bic: return "bic";
    }
    return "unknown";
}

const std::vector<double>& DailyMetricSeries::values(Metric m) const {
    switch (m) {
        case Metric::adj_r2: return adj_r2;
        case Metric::rss: return rss;
        default: return bic;
    }
}

void DailyMetricSeries::validate() const {
    if (adj_r2.size() != dates.size() || rss.size() != dates.size() || bic.size() != dates.size())
        throw DomainError("metric series " + contract + "/" + model + " has unequal lengths");
    for (std::size_t i = 1; i < dates.size(); ++i)
        if (!(dates[i - 1] < dates[i]))
            throw DomainError("metric series " + contract + "/" + model + " dates not strictly increasing");
}

DailyMetricSeries series_from_fits(const std::string& contract, impact::ImpactModel model,
                                   const std::vector<est::FitRow>& rows, std::size_t* excluded) {
    DailyMetricSeries s;
    s.contract = contract;
    s.model = std::string(impact::to_string(model));
    std::size_t dropped = 0;
    std::vector<const est::FitRow*> picked;
    for (const auto& r : rows) {
        if (r.model != model || r.day == "pooled") continue;
        if (!r.converged) {
            ++dropped;
            continue;
        }
        picked.push_back(&r);
    }
    std::sort(picked.begin(), picked.end(), [](auto* a, auto* b) { return a->day < b->day; });
    for (auto* r : picked) {
        s.dates.push_back(r->day);
        s.adj_r2.push_back(r->adj_r2);
        s.rss.push_back(r->rss);
        s.bic.push_back(r->bic);
    }
    if (excluded) *excluded = dropped;
    s.validate();
    return s;
}

TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DomainError("paired t-test needs equal-length samples");
    const std::size_t n = a.size();
    if (n < 2) throw DomainError("paired t-test needs n >= 2");
    const double nd = static_cast<double>(n);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= nd;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = (a[i] - b[i]) - mean;
        ss += e * e;
    }
    TTestResult t;
    t.n = n;
    t.mean_difference = mean;
    t.sd_difference = std::sqrt(ss / (nd - 1.0));
    if (!(t.sd_difference > 0.0)) {
        t.degenerate = true;
        t.t_statistic = kNaN;
    } else {
        t.t_statistic = mean / (t.sd_difference / std::sqrt(nd));
    }
    return t;
}

TTestResult paired_t_test(const DailyMetricSeries& a, const DailyMetricSeries& b, Metric metric) {
    a.validate();
    b.validate();
    const auto& va = a.values(metric);
    const auto& vb = b.values(metric);
    std::vector<double> xa, xb;
    std::size_t i = 0, j = 0;
    while (i < a.dates.size() && j < b.dates.size()) {
        if (a.dates[i] < b.dates[j]) {
            ++i;
        } else if (b.dates[j] < a.dates[i]) {
            ++j;
        } else {
            xa.push_back(va[i++]);
            xb.push_back(vb[j++]);
        }
    }
    if (xa.empty()) throw DomainError("date join of " + a.model + " and " + b.model + " is empty");
    return paired_t_test(xa, xb);
}

double percentile(std::vector<double> values, double level) {
    if (values.empty()) throw DomainError("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * level / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Descriptives descriptives(const std::vector<double>& values) {
    if (values.empty()) throw DomainError("descriptives of an empty sample");
    Descriptives d;
    d.n = values.size();
    const double n = static_cast<double>(d.n);
    double sum = 0.0;
    for (double v : values) sum += v;
    d.mean = sum / n;
    double ss = 0.0;
    for (double v : values) ss += (v - d.mean) * (v - d.mean);
    d.sd = d.n > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < kPercentileLevels.size(); ++k) {
        const double h = (n - 1.0) * kPercentileLevels[k] / 100.0;
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        d.percentiles[k] = sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    }
    return d;
}

std::vector<DailyDepthFit> depth_fits_from_rows(const std::vector<est::FitRow>& rows) {
    std::vector<DailyDepthFit> out;
    for (const auto& r : rows)
        if (r.model == impact::ImpactModel::sshape && r.day != "pooled")
            out.push_back({r.day, {r.ell, r.p, r.q}, r.converged});
    return out;
}

DepthReport depth_report(const std::string& contract, const std::vector<DailyDepthFit>& fits,
                         const std::vector<ingest::DayBars>& bars) {
    DepthReport rep;
    rep.contract = contract;
    std::set<std::string> days;
    for (const auto& f : fits) {
        if (!f.converged) {
            ++rep.excluded;
            continue;
        }
        rep.dates.push_back(f.date);
        rep.inflections.push_back(impact::inflection_point(f.params));
        days.insert(f.date);
    }
    if (!rep.inflections.empty()) rep.inflection_stats = descriptives(rep.inflections);
    std::vector<double> bid, ask;
    for (const auto& d : bars) {
        if (!days.count(d.day)) continue;
        for (const auto& b : d.bars) {
            if (!std::isnan(b.open_bid_size)) bid.push_back(b.open_bid_size);
            if (!std::isnan(b.open_ask_size)) ask.push_back(b.open_ask_size);
        }
    }
    if (!bid.empty()) rep.open_bid_size = descriptives(bid);
    if (!ask.empty()) rep.open_ask_size = descriptives(ask);
    return rep;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const TTestResult& t) {
    return {{"mean_difference", num(t.mean_difference)},
            {"sd_difference", num(t.sd_difference)},
            {"t_statistic", num(t.t_statistic)},
            {"n", t.n},
            {"degenerate", t.degenerate}};
}

nlohmann::json to_json(const Descriptives& d) {
    nlohmann::json pct;
    for (std::size_t k = 0; k < kPercentileLevels.size(); ++k)
        pct["p" + std::to_string(static_cast<int>(kPercentileLevels[k]))] = num(d.percentiles[k]);
    return {{"n", d.n}, {"mean", num(d.mean)}, {"sd", num(d.sd)}, {"percentiles", pct}};
}

nlohmann::json to_json(const DepthReport& r) {
    nlohmann::json j;
    j["contract"] = r.contract;
    j["excluded_nonconverged"] = r.excluded;
    auto daily = nlohmann::json::array();
    for (std::size_t i = 0; i < r.dates.size(); ++i)
        daily.push_back({{"date", r.dates[i]}, {"inflection", num(r.inflections[i])}});
    j["daily"] = daily;
    j["inflection"] = r.inflection_stats ? to_json(*r.inflection_stats) : nlohmann::json(nullptr);
    j["open_bid_size"] = r.open_bid_size ? to_json(*r.open_bid_size) : nlohmann::json(nullptr);
    j["open_ask_size"] = r.open_ask_size ? to_json(*r.open_ask_size) : nlohmann::json(nullptr);
    return j;
}

std::string ttest_table_csv(const std::vector<TTestRow>& rows) {
    std::ostringstream ss;
    ss << "contract,model_a,model_b,metric,mean_difference,t_statistic,n,degenerate\n";
    for (const auto& r : rows)
        ss << r.contract << ',' << r.model_a << ',' << r.model_b << ',' << to_string(r.metric) << ','
           << io::format_double(r.result.mean_difference) << ',' << io::format_double(r.result.t_statistic) << ','
           << r.result.n << ',' << (r.result.degenerate ? 1 : 0) << '\n';
    return ss.str();
}

std::string descriptive_table_csv(const std::vector<DescriptiveRow>& rows) {
    std::ostringstream ss;
    ss << "contract,statistic,n,mean,sd";
    for (double l : kPercentileLevels) ss << ",p" << static_cast<int>(l);
    ss << '\n';
    for (const auto& r : rows) {
        ss << r.contract << ',' << r.statistic << ',' << r.d.n << ',' << io::format_double(r.d.mean) << ','
           << io::format_double(r.d.sd);
        for (double v : r.d.percentiles) ss << ',' << io::format_double(v);
        ss << '\n';
    }
    return ss.str();
}

}  // namespace liqimpact::cmp
