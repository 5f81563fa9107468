#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "liqimpact/errors.hpp"
#include "liqimpact/estimation.hpp"
#include "liqimpact/ingest.hpp"
#include "liqimpact/sde.hpp"

#include "oracle_values.hpp"

using namespace liqimpact;
using namespace liqimpact::est;
using impact::ImpactModel;

namespace {

RegressionPanel oracle_panel() {
    RegressionPanel p;
    for (const auto& row : oracle::kOlsData) p.obs.push_back({row[0], row[1], row[2]});
    return p;
}

void expect_rel(double got, double want, double tol, const char* what) {
    EXPECT_NEAR(got, want, tol * std::abs(want)) << what;
}

}  // namespace

TEST(Ols, LinearMatchesStatsmodels) {
    const auto fit = fit_ols(oracle_panel(), ImpactModel::linear);
    const auto* o = oracle::kOlsLinear;
    expect_rel(fit.param("a").value, o[0], 1e-10, "a");
    expect_rel(fit.param("alpha").value, o[1], 1e-10, "alpha");
    expect_rel(fit.param("a").se, o[2], 1e-10, "se a");
    expect_rel(fit.param("alpha").se, o[3], 1e-10, "se alpha");
    expect_rel(fit.rss, o[4], 1e-10, "rss");
    expect_rel(fit.r2, o[5], 1e-10, "r2");
    expect_rel(fit.adj_r2, o[6], 1e-10, "adj r2");
    expect_rel(fit.bic, o[7], 1e-10, "bic");
    EXPECT_EQ(fit.k, 2u);
    EXPECT_EQ(fit.n, static_cast<std::size_t>(oracle::kOlsN));
    EXPECT_DOUBLE_EQ(fit.param("alpha").t_stat, fit.param("alpha").value / fit.param("alpha").se);
}

TEST(Ols, SqrtMatchesStatsmodels) {
    const auto fit = fit_ols(oracle_panel(), ImpactModel::sqrt);
    const auto* o = oracle::kOlsSqrt;
    expect_rel(fit.param("a").value, o[0], 1e-10, "a");
    expect_rel(fit.param("alpha").value, o[1], 1e-10, "alpha");
    expect_rel(fit.param("a").se, o[2], 1e-10, "se a");
    expect_rel(fit.param("alpha").se, o[3], 1e-10, "se alpha");
    expect_rel(fit.rss, o[4], 1e-10, "rss");
    expect_rel(fit.adj_r2, o[6], 1e-10, "adj r2");
    expect_rel(fit.bic, o[7], 1e-10, "bic");
}

TEST(Ols, NoiseFreeLinearRecovery) {
    const auto synth = sim::synth_regression_panel(2e-6, impact::LinearParams{3e-6}, {1.0, 0.0, 150.0, 1.0}, 2, 360, 0.0, 3);
    const auto fit = fit_ols(RegressionPanel::from_synthetic(synth), ImpactModel::linear);
    EXPECT_NEAR(fit.param("a").value, 2e-6, 1e-10 * 2e-6);
    EXPECT_NEAR(fit.param("alpha").value, 3e-6, 1e-10 * 3e-6);
}

TEST(Ols, DegenerateDesignNamesColumn) {
    RegressionPanel p;
    for (int i = 0; i < 50; ++i) p.obs.push_back({1e-4 * std::sin(i), 0.0, 0.0});
    try {
        fit_ols(p, ImpactModel::linear);
        FAIL();
    } catch (const EstimationError& e) {
        EXPECT_NE(std::string(e.what()).find("delta_f"), std::string::npos);
    }
    EXPECT_THROW(fit_sshape(p), EstimationError);
}

TEST(Ols, ConstantPriceDayGivesZeroSlope) {
    ingest::DayBars d;
    d.day = "2024-05-01";
    std::mt19937_64 gen(1);
    std::uniform_int_distribution<int> flow(-20, 20);
    for (int k = 0; k < 360; ++k) {
        ingest::MinuteBar b;
        b.day = d.day;
        b.bar_index = k;
        b.order_flow = flow(gen);
        b.last_price = 20000.0;
        b.log_return = k == 0 ? std::nan("") : 0.0;
        d.bars.push_back(b);
    }
    const auto panel = RegressionPanel::from_bars(d);
    EXPECT_EQ(panel.n(), 359u);
    const auto fit = fit_ols(panel, ImpactModel::linear);
    EXPECT_EQ(fit.param("alpha").value, 0.0);
    EXPECT_EQ(fit.rss, 0.0);
}

TEST(SShape, ZeroNoiseRecovery) {
    const impact::SShapeParams truth{1e-5, -3e-3, 8e-5};
    const auto synth = sim::synth_regression_panel(1e-6, truth, {1.0, 0.0, 160.0 * std::sqrt(2.0), 1.0}, 5, 360, 0.0, 21);
    SShapeOptions opt;
    opt.jobs = 1;
    const auto fit = fit_sshape(RegressionPanel::from_synthetic(synth), opt);
    ASSERT_TRUE(fit.converged) << fit.message;
    EXPECT_NEAR(fit.param("ell").value, truth.ell, 1e-4 * truth.ell);
    EXPECT_NEAR(fit.param("p").value, truth.p, 1e-4 * std::abs(truth.p));
    EXPECT_NEAR(fit.param("q").value, truth.q, 1e-4 * truth.q);
    EXPECT_NEAR(fit.a_hat, 1e-6, 1e-4 * 1e-6);
    EXPECT_EQ(fit.k, 4u);
    EXPECT_NEAR(fit.inflection(), 37.5, 1e-2);
    EXPECT_TRUE(impact::is_feasible(std::get<impact::SShapeParams>(fit.impact_params())));
}

TEST(SShape, NoisyFitIsFeasibleAndBeatsLinear) {
    const impact::SShapeParams truth{1.3e-5, -0.0034, 8.15e-5};
    const auto synth = sim::synth_regression_panel(0.0, truth, {1.0, 0.0, 160.0 * std::sqrt(2.0), 1.0}, 20, 360, 2e-4, 4);
    const auto panel = RegressionPanel::from_synthetic(synth);
    SShapeOptions opt;
    opt.jobs = 1;
    const auto s = fit_sshape(panel, opt);
    const auto l = fit_ols(panel, ImpactModel::linear);
    ASSERT_TRUE(s.converged);
    EXPECT_LT(s.rss, l.rss);
    EXPECT_GT(s.adj_r2, l.adj_r2);
    EXPECT_NEAR(s.inflection(), 41.7, 6.0);
    EXPECT_GT(impact::feasibility_margin(std::get<impact::SShapeParams>(s.impact_params())), opt.margin_floor);
}

TEST(SShape, DefaultGridIsScaleAdaptive) {
    const auto synth = sim::synth_regression_panel(0.0, impact::LinearParams{1e-6}, {1.0, 0.0, 100.0, 1.0}, 2, 200, 1e-4, 1);
    const auto grid = default_grid(RegressionPanel::from_synthetic(synth));
    EXPECT_EQ(grid.size(), 35u);
    for (const auto& g : grid) EXPECT_GT(g.q, 0.0);
}

TEST(Ou, MatchesStatsmodelsAR1) {
    std::vector<double> x;
    for (const auto& row : oracle::kOuSeries) x.push_back(row[0]);
    const auto ou = estimate_ou(x);
    const auto* o = oracle::kOuFit;
    expect_rel(ou.beta0, o[0], 1e-10, "beta0");
    expect_rel(ou.beta1, o[1], 1e-10, "beta1");
    expect_rel(ou.beta1_se, o[2], 1e-10, "beta1 se");
    ASSERT_TRUE(ou.c_hat && ou.m_hat && ou.eta_diffusion);
    expect_rel(*ou.c_hat, o[3], 1e-10, "c");
    expect_rel(*ou.m_hat, o[4], 1e-10, "m");
    expect_rel(ou.eta_hat, o[5], 1e-12, "eta_hat");
    expect_rel(*ou.eta_diffusion, o[6], 1e-10, "eta diffusion");
}

TEST(Ou, SegmentsDoNotPairAcrossDays) {
    std::vector<double> x;
    for (const auto& row : oracle::kOuSeries) x.push_back(row[0]);
    std::vector<std::vector<double>> segs{{x.begin(), x.begin() + 100}, {x.begin() + 100, x.end()}};
    EXPECT_EQ(estimate_ou(segs).n, x.size() - 2);
    EXPECT_EQ(estimate_ou(x).n, x.size() - 1);
}

TEST(Ou, DegenerateAndWhiteNoise) {
    EXPECT_THROW(estimate_ou(std::vector<double>(100, 4.0)), EstimationError);
    std::mt19937_64 gen(9);
    std::normal_distribution<double> nd(3.0, 2.0);
    std::vector<double> x(20000);
    for (auto& v : x) v = nd(gen);
    const auto ou = estimate_ou(x);
    EXPECT_NEAR(ou.beta1, 0.0, 4.0 / std::sqrt(20000.0));
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    if (ou.m_hat) {
        EXPECT_NEAR(*ou.m_hat, mean, 0.05);
        EXPECT_GT(*ou.c_hat, 3.0);
    } else {
        EXPECT_FALSE(ou.mean_reverting);
    }
}

TEST(Ou, NonMeanRevertingFlag) {
    std::vector<double> x{1.0};
    for (int i = 1; i < 100; ++i) x.push_back(1.05 * x.back() + (i % 3));
    const auto ou = estimate_ou(x);
    EXPECT_FALSE(ou.mean_reverting);
    EXPECT_FALSE(ou.c_hat.has_value());
}

TEST(Ou, FlowDescriptivesVolatilityOnSyntheticBars) {
    const sim::OUParams flow{2.0, 0.0, 100.0, 1.0};
    const auto synth = sim::synth_regression_panel(0.0, impact::LinearParams{1e-6}, flow, 50, 360, 0.0, 12);
    std::vector<ingest::DayBars> days(50);
    for (const auto& r : synth.rows) {
        auto& d = days[static_cast<std::size_t>(r.day)];
        d.day = std::to_string(r.day);
        d.bars.push_back({d.day, r.bar, r.x});
    }
    const auto s = ingest::flow_descriptives(days);
    const double want = std::sqrt(flow.eta * flow.eta * -std::expm1(-2.0 * flow.c) / (2.0 * flow.c));
    EXPECT_NEAR(s.sd, want, 0.05 * want);
}

TEST(Serialization, JsonRoundTrip) {
    const auto fit = fit_ols(oracle_panel(), ImpactModel::sqrt);
    const auto j = to_json(fit);
    EXPECT_EQ(j.at("model"), "sqrt");
    const auto back = fit_from_json(j);
    EXPECT_EQ(back.model, fit.model);
    EXPECT_EQ(back.param("alpha").value, fit.param("alpha").value);
    EXPECT_EQ(back.rss, fit.rss);
    EXPECT_EQ(back.n, fit.n);
}

TEST(Serialization, CsvRoundTrip) {
    const auto fit = fit_ols(oracle_panel(), ImpactModel::linear);
    const std::string text = fit_csv_header() + "\n" + fit_csv_row("2024-01-04", fit) + "\n";
    const auto rows = parse_fit_csv(text);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].day, "2024-01-04");
    EXPECT_EQ(rows[0].model, ImpactModel::linear);
    EXPECT_EQ(rows[0].alpha, fit.param("alpha").value);
    EXPECT_EQ(rows[0].adj_r2, fit.adj_r2);
    EXPECT_TRUE(rows[0].converged);
}
