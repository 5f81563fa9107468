#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "liqimpact/compare.hpp"
#include "liqimpact/errors.hpp"

#include "oracle_values.hpp"

using namespace liqimpact;
using namespace liqimpact::cmp;

namespace {

std::vector<double> column(const double (*rows)[1], std::size_t n) {
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(rows[i][0]);
    return v;
}

DailyMetricSeries series(const std::string& model, std::vector<std::string> dates, std::vector<double> adj) {
    DailyMetricSeries s;
    s.contract = "NK";
    s.model = model;
    s.dates = std::move(dates);
    s.adj_r2 = adj;
    s.rss = adj;
    s.bic = adj;
    return s;
}

}  // namespace

TEST(TTest, MatchesScipy) {
    const auto a = column(oracle::kPairA, std::size(oracle::kPairA));
    const auto b = column(oracle::kPairB, std::size(oracle::kPairB));
    const auto t = paired_t_test(a, b);
    EXPECT_NEAR(t.mean_difference, oracle::kPairT[0], 1e-12 * oracle::kPairT[0]);
    EXPECT_NEAR(t.sd_difference, oracle::kPairT[1], 1e-12 * oracle::kPairT[1]);
    EXPECT_NEAR(t.t_statistic, oracle::kPairT[2], 1e-11 * oracle::kPairT[2]);
    EXPECT_EQ(t.n, a.size());
}

TEST(TTest, IdenticalSeriesDegenerate) {
    const std::vector<double> v{0.2, 0.3, 0.25};
    const auto t = paired_t_test(v, v);
    EXPECT_EQ(t.mean_difference, 0.0);
    EXPECT_TRUE(t.degenerate);
    EXPECT_TRUE(std::isnan(t.t_statistic));
}

TEST(TTest, ConstantShiftWithJitter) {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> jitter(0.0, 1e-9);
    std::vector<double> a(100), b(100);
    for (int i = 0; i < 100; ++i) {
        b[i] = 0.5 + 0.01 * i;
        a[i] = b[i] + 1.0 + jitter(gen);
    }
    const auto t = paired_t_test(a, b);
    EXPECT_NEAR(t.mean_difference, 1.0, 1e-9);
    EXPECT_GT(t.t_statistic, 1e9);
    EXPECT_LT(t.t_statistic, 1e11);
}

TEST(TTest, KnownGapWithinSamplingTolerance) {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> d(0.02, 0.01);
    const int n = 885;
    std::vector<double> a(n), b(n, 0.0);
    for (auto& v : a) v = d(gen);
    const auto t = paired_t_test(a, b);
    // The t statistic has sd close to 1 around its expectation 59.5.
    EXPECT_NEAR(t.t_statistic, 0.02 / (0.01 / std::sqrt(n)), 4.0 + 59.5 * 4.0 / std::sqrt(2.0 * n));
}

TEST(TTest, AntisymmetryAndErrors) {
    const std::vector<double> a{1.0, 2.0, 4.0}, b{0.5, 2.5, 3.0};
    EXPECT_EQ(paired_t_test(a, b).t_statistic, -paired_t_test(b, a).t_statistic);
    EXPECT_THROW(paired_t_test(a, {1.0}), DomainError);
    EXPECT_THROW(paired_t_test({1.0}, {2.0}), DomainError);
}

TEST(TTest, InnerJoinOnDates) {
    const auto a = series("sshape", {"d1", "d2", "d3", "d5"}, {0.5, 0.6, 0.7, 0.9});
    const auto b = series("sqrt", {"d2", "d3", "d4", "d5"}, {0.4, 0.6, 0.0, 0.6});
    const auto t = paired_t_test(a, b, Metric::adj_r2);
    EXPECT_EQ(t.n, 3u);
    EXPECT_NEAR(t.mean_difference, (0.2 + 0.1 + 0.3) / 3.0, 1e-15);
    const auto c = series("linear", {"d7", "d8"}, {0.1, 0.2});
    EXPECT_THROW(paired_t_test(a, c, Metric::rss), DomainError);
}

TEST(Descriptives, MatchesNumpy) {
    const auto a = column(oracle::kPairA, std::size(oracle::kPairA));
    const auto d = descriptives(a);
    EXPECT_NEAR(d.mean, oracle::kMeanSdA[0], 1e-15);
    EXPECT_NEAR(d.sd, oracle::kMeanSdA[1], 1e-14);
    for (std::size_t k = 0; k < kPercentileLevels.size(); ++k)
        EXPECT_NEAR(d.percentiles[k], oracle::kPercentilesA[k], 1e-14) << kPercentileLevels[k];
}

TEST(Descriptives, SpecExamples) {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    const auto d = descriptives(v);
    EXPECT_DOUBLE_EQ(d.percentiles[3], 50.5);
    EXPECT_DOUBLE_EQ(d.percentiles[0], 1.99);
    const auto c = descriptives(std::vector<double>(7, 2.5));
    EXPECT_EQ(c.sd, 0.0);
    for (double p : c.percentiles) EXPECT_EQ(p, 2.5);
    std::mt19937_64 gen(2);
    std::lognormal_distribution<double> ln(0.0, 1.0);
    std::vector<double> skew(2000);
    for (auto& x : skew) x = ln(gen);
    const auto s = descriptives(skew);
    EXPECT_GT(s.mean, s.percentiles[3]);
    EXPECT_THROW(descriptives({}), DomainError);
}

TEST(Depth, InflectionPassThroughAndQuoteSizes) {
    std::vector<DailyDepthFit> fits{{"d1", {1.3e-5, -0.0034, 8.15e-5}, true},
                                    {"d2", {1e-5, 0.0, 1e-4}, true},
                                    {"d3", {1e-5, -0.01, 1e-4}, false}};
    ingest::DayBars b1, b3;
    b1.day = "d1";
    b3.day = "d3";
    for (int k = 0; k < 4; ++k) {
        ingest::MinuteBar m;
        m.day = "d1";
        m.bar_index = k;
        m.open_bid_size = 10.0 + k;
        m.open_ask_size = 20.0;
        b1.bars.push_back(m);
        m.day = "d3";
        m.open_bid_size = 1000.0;
        b3.bars.push_back(m);
    }
    const auto rep = depth_report("NK", fits, {b1, b3});
    ASSERT_EQ(rep.inflections.size(), 2u);
    EXPECT_NEAR(rep.inflections[0], 41.717791411042946, 1e-12);
    EXPECT_EQ(rep.inflections[1], 0.0);
    EXPECT_EQ(rep.excluded, 1u);
    ASSERT_TRUE(rep.open_bid_size);
    EXPECT_EQ(rep.open_bid_size->n, 4u);
    EXPECT_EQ(rep.open_bid_size->mean, 11.5);
}

TEST(Depth, RankingFollowsGeneratingDepth) {
    std::mt19937_64 gen(8);
    std::normal_distribution<double> noise(1.0, 0.05);
    std::vector<DailyDepthFit> a, b;
    for (int i = 0; i < 30; ++i) {
        a.push_back({"d" + std::to_string(i), {1e-5, -0.01 * noise(gen), 1e-5}, true});
        b.push_back({"d" + std::to_string(i), {1e-5, -0.001 * noise(gen), 1e-5}, true});
    }
    const auto ra = depth_report("A", a, {});
    const auto rb = depth_report("B", b, {});
    EXPECT_GT(std::abs(ra.inflection_stats->mean), std::abs(rb.inflection_stats->mean));
}

TEST(Tables, CsvShapes) {
    const std::vector<double> v{1.0, 2.0, 3.0};
    const auto t = paired_t_test(v, {0.0, 1.0, 1.5});
    const auto csv = ttest_table_csv({{"NK", "sshape", "sqrt", Metric::adj_r2, t}});
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "contract,model_a,model_b,metric,mean_difference,t_statistic,n,degenerate");
    const auto d = descriptive_table_csv({{"NK", "ell_bps", descriptives(v)}});
    EXPECT_NE(d.find("NK,ell_bps,3,2,1,"), std::string::npos) << d;
    EXPECT_EQ(to_json(descriptives(v))["percentiles"]["p50"], 2.0);
}
