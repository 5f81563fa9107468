#pragma once

// Cross-model statistics over daily fits: paired t-tests, percentile
// descriptives and market-depth reports.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "liqimpact/estimation.hpp"
#include "liqimpact/ingest.hpp"

namespace liqimpact::cmp {

enum class Metric { adj_r2, rss, bic };
std::string_view to_string(Metric m);

struct DailyMetricSeries {
    std::string contract;
    std::string model;
    std::vector<std::string> dates;  // strictly increasing
    std::vector<double> adj_r2;
    std::vector<double> rss;
    std::vector<double> bic;

    const std::vector<double>& values(Metric m) const;
    /// Throws DomainError for unequal lengths or non-increasing dates.
    void validate() const;
};

/// Converged rows of one model; non-converged days are dropped and counted.
DailyMetricSeries series_from_fits(const std::string& contract, impact::ImpactModel model,
                                   const std::vector<est::FitRow>& rows, std::size_t* excluded = nullptr);

struct TTestResult {
    double mean_difference = 0.0;
    double sd_difference = 0.0;  // unbiased
    double t_statistic = 0.0;    // NaN when degenerate
    std::size_t n = 0;
    bool degenerate = false;     // zero variance of the differences
};

/// Paired test on aligned samples d_t = a_t - b_t. Throws DomainError for
/// unequal lengths or n < 2.
TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// Inner join on dates, then the paired test on the chosen metric.
TTestResult paired_t_test(const DailyMetricSeries& a, const DailyMetricSeries& b, Metric metric);

inline constexpr std::array<double, 7> kPercentileLevels = {1, 5, 10, 50, 90, 95, 99};

struct Descriptives {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // unbiased; 0 for n == 1
    std::array<double, 7> percentiles{};  // at kPercentileLevels
};

/// Percentile by linear interpolation between closest ranks (type 7).
double percentile(std::vector<double> values, double level);

/// Throws DomainError on empty input.
Descriptives descriptives(const std::vector<double>& values);

struct DailyDepthFit {
    std::string date;
    impact::SShapeParams params;
    bool converged = true;
};

struct DepthReport {
    std::string contract;
    std::vector<std::string> dates;
    std::vector<double> inflections;
    std::size_t excluded = 0;  // non-converged days
    std::optional<Descriptives> inflection_stats;
    std::optional<Descriptives> open_bid_size;
    std::optional<Descriptives> open_ask_size;
};

/// Daily -p/q of converged fits, plus bar-start quote sizes from the same days.
DepthReport depth_report(const std::string& contract, const std::vector<DailyDepthFit>& fits,
                         const std::vector<ingest::DayBars>& bars);

std::vector<DailyDepthFit> depth_fits_from_rows(const std::vector<est::FitRow>& rows);

// ---------------------------------------------------------------------------
// Report emission

nlohmann::json to_json(const TTestResult& t);
nlohmann::json to_json(const Descriptives& d);
nlohmann::json to_json(const DepthReport& r);

struct TTestRow {
    std::string contract, model_a, model_b;
    Metric metric = Metric::adj_r2;
    TTestResult result;
};
std::string ttest_table_csv(const std::vector<TTestRow>& rows);

struct DescriptiveRow {
    std::string contract, statistic;
    Descriptives d;
};
std::string descriptive_table_csv(const std::vector<DescriptiveRow>& rows);

}  // namespace liqimpact::cmp
