#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "liqimpact/bernoulli.hpp"
#include "liqimpact/detail/gaussian_integral.hpp"
#include "liqimpact/errors.hpp"
#include "liqimpact/impact.hpp"
#include "liqimpact/normal.hpp"

#include "oracle_values.hpp"

using namespace liqimpact;
using namespace liqimpact::impact;
using namespace liqimpact::math;

namespace {
constexpr double kNK_ell = 1.3e-5, kNK_p = -0.0034, kNK_q = 8.15e-5;

::testing::AssertionResult rel_near(double got, double want, double tol) {
    const double err = std::abs(got - want) / std::max(std::abs(want), std::numeric_limits<double>::min());
    if (err <= tol || got == want) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << "got " << got << " want " << want << " rel err " << err << " > " << tol;
}
}  // namespace

TEST(Normal, ErfcxMatchesOracle) {
    for (const auto& row : oracle::kErfcx) EXPECT_TRUE(rel_near(erfcx(row[0]), row[1], 2e-14)) << "x=" << row[0];
}

TEST(Normal, LogNormCdfMatchesOracle) {
    for (const auto& row : oracle::kLogNormCdf)
        EXPECT_TRUE(rel_near(log_norm_cdf(row[0]), row[1], 1e-13)) << "x=" << row[0];
}

TEST(Normal, CdfAndSurvivalAreComplementary) {
    for (double x : {-8.0, -1.5, 0.0, 0.7, 4.0}) EXPECT_NEAR(norm_cdf(x) + norm_sf(x), 1.0, 1e-15);
    EXPECT_GT(norm_sf(30.0), 0.0);
}

TEST(Phi, SpecExamples) {
    EXPECT_EQ(phi(0.0, {1e-4, 0.3, 2.0}), 1.0);
    EXPECT_NEAR(phi(1.0, {1e-4, 0.0, 1.0}), std::exp(-0.5), 1e-15);
    EXPECT_NEAR(phi(2.0, {1e-4, 0.1, 0.05}), std::exp(-0.3), 1e-15);
}

TEST(BigPhi, MatchesQuadratureOracleInAllRegimes) {
    for (const auto& row : oracle::kBigPhi) {
        const double x = row[0], p = row[1], q = row[2];
        EXPECT_TRUE(rel_near(big_phi(x, {1e-6, p, q}), row[3], 1e-12)) << "x=" << x << " p=" << p << " q=" << q;
    }
    EXPECT_EQ(big_phi(0.0, {1.0, 3.0, 0.2}), 0.0);
}

TEST(BigPhi, RoutesLargeRatiosToStablePath) {
    detail::PhiRoute route{};
    detail::big_phi_scaled(5e4, -2e-3, 1e-8, &route);
    EXPECT_EQ(route, detail::PhiRoute::stable);
    detail::big_phi_scaled(1e4, -0.0034, 8.15e-5, &route);
    EXPECT_EQ(route, detail::PhiRoute::direct);
    detail::big_phi_scaled(0.5, 0.1, 0.05, &route);
    EXPECT_EQ(route, detail::PhiRoute::short_interval);
}

TEST(BigPhi, StrictlyIncreasingAndBounded) {
    const SShapeParams s{kNK_ell, kNK_p, kNK_q};
    double prev = -std::numeric_limits<double>::infinity();
    for (double x = -5000.0; x <= 5000.0; x += 7.3) {
        // Far tails sit on the finite limits to double precision.
        const double v = big_phi(x, s);
        if (std::abs(x + kNK_p / kNK_q) < 6.0 / std::sqrt(kNK_q))
            EXPECT_GT(v, prev) << x;
        else
            EXPECT_GE(v, prev) << x;
        prev = v;
    }
    EXPECT_TRUE(std::isfinite(big_phi(1e12, s)));
    EXPECT_TRUE(std::isfinite(big_phi(-1e12, s)));
    EXPECT_NEAR(big_phi(1e7, s), big_phi(1e8, s), 1e-12 * big_phi(1e8, s));
}

TEST(BigPhi, MirrorSymmetryAboutTheVertex) {
    // Phi(v + d) - Phi(v) = Phi(v) - Phi(v - d) for the vertex v = -p/q.
    const SShapeParams s{1e-5, -0.02, 1e-4};
    const double v = -s.p / s.q;
    for (double d : {1.0, 30.0, 150.0, 600.0})
        EXPECT_NEAR(big_phi(v + d, s) - big_phi(v, s), big_phi(v, s) - big_phi(v - d, s), 1e-11 * big_phi(v + d, s));
}

TEST(FG, MatchesOracle) {
    for (const auto& row : oracle::kFG) {
        const SShapeParams s{row[1], row[2], row[3]};
        EXPECT_TRUE(rel_near(f_sshape(row[0], s), row[4], 1e-12)) << "x=" << row[0];
        EXPECT_TRUE(rel_near(g_sshape(row[0], s), row[5], 1e-12)) << "x=" << row[0];
    }
}

TEST(FG, SpecExamples) {
    const SShapeParams nk{kNK_ell, kNK_p, kNK_q};
    EXPECT_EQ(f_sshape(0.0, nk), 0.0);
    EXPECT_EQ(g_sshape(0.0, nk), kNK_ell);
    const SShapeParams lin{1e-4, 0.0, 1e-8};
    EXPECT_TRUE(rel_near(f_sshape(10.0, lin), 1e-4 * 10.0, 1e-3));
    EXPECT_LT(g_sshape(1e6, nk), 1e-300 + 1e-12 * kNK_ell);
    EXPECT_LT(g_sshape(-1e6, nk), 1e-12 * kNK_ell);
}

TEST(FG, DerivativeConsistency) {
    const SShapeCurve c({kNK_ell, kNK_p, kNK_q});
    for (double x : {-300.0, -40.0, 0.0, 25.0, 41.7, 120.0, 380.0}) {
        const double h = 1e-3;
        const double fd = (c.f(x + h) - c.f(x - h)) / (2 * h);
        EXPECT_NEAR(fd, c.g(x), 1e-8 * c.g(x) + 1e-16) << x;
        const double gd = (c.g(x + h) - c.g(x - h)) / (2 * h);
        EXPECT_NEAR(gd, c.gprime(x), 1e-6 * std::abs(c.gprime(x)) + 1e-16) << x;
    }
}

TEST(FG, SensitivityMatchesFiniteDifferences) {
    const SShapeParams s{1e-3, -0.02, 1e-4};
    const SShapeCurve c(s);
    for (double x : {-200.0, -10.0, 60.0, 400.0}) {
        const auto d = c.sensitivity(x);
        auto f_at = [&](double ell, double p, double q) { return f_sshape(x, {ell, p, q}); };
        const double he = 1e-7 * s.ell, hp = 1e-7, hq = 1e-7 * s.q;
        EXPECT_NEAR(d.d_ell, (f_at(s.ell + he, s.p, s.q) - f_at(s.ell - he, s.p, s.q)) / (2 * he), 1e-6 * std::abs(d.d_ell));
        EXPECT_NEAR(d.d_p, (f_at(s.ell, s.p + hp, s.q) - f_at(s.ell, s.p - hp, s.q)) / (2 * hp), 1e-6 * std::abs(d.d_p) + 1e-12);
        EXPECT_NEAR(d.d_q, (f_at(s.ell, s.p, s.q + hq) - f_at(s.ell, s.p, s.q - hq)) / (2 * hq), 1e-6 * std::abs(d.d_q) + 1e-9);
    }
}

TEST(FG, PointwiseInfeasibleThrows) {
    const SShapeParams s{1.0, 20.0, 1.0};
    EXPECT_THROW(f_sshape(-1.0, s), DomainError);
    EXPECT_THROW((SShapeCurve{s}), DomainError);
    EXPECT_THROW(f_sshape(1.0, {-1e-3, 0.0, 1.0}), DomainError);
    EXPECT_THROW(f_sshape(1.0, {1e-3, 0.0, 0.0}), DomainError);
}

TEST(Inflection, SpecExamples) {
    EXPECT_NEAR(inflection_point({kNK_ell, kNK_p, kNK_q}), 41.717791411042946, 1e-12);
    EXPECT_EQ(inflection_point({1e-5, 0.0, 1e-4}), 0.0);
    EXPECT_NEAR(inflection_point({1e-5, 1e-3, 1e-5}), -100.0, 1e-12);
}

TEST(Inflection, CurvatureRootMatchesOracle) {
    for (const auto& row : oracle::kCurvatureRoot)
        EXPECT_TRUE(rel_near(curvature_root({row[0], row[1], row[2]}), row[3], 1e-10)) << row[1];
}

TEST(Inflection, SecondDerivativeChangesSignAtCurvatureRoot) {
    const SShapeCurve c({kNK_ell, kNK_p, kNK_q});
    const double r = curvature_root(c.params());
    EXPECT_GT(c.gprime(r - 0.5), 0.0);
    EXPECT_LT(c.gprime(r + 0.5), 0.0);
}

TEST(Feasibility, MatchesOracle) {
    for (const auto& row : oracle::kMargin) {
        const SShapeParams s{row[0], row[1], row[2]};
        EXPECT_TRUE(rel_near(feasibility_log_ratio(s), row[4], 1e-12)) << row[1] << " " << row[2];
        const double m = feasibility_margin(s);
        EXPECT_TRUE(std::isfinite(m));
        EXPECT_TRUE(rel_near(m, row[3], 1e-12)) << row[1] << " " << row[2];
    }
}

TEST(Feasibility, SpecExamples) {
    EXPECT_NEAR(feasibility_margin({1e-300, 0.3, 1.0}), 1.0, 1e-15);
    EXPECT_NEAR(feasibility_margin({0.1, 0.0, 1.0}), 1.0 - 0.1 * std::sqrt(2 * M_PI) * 0.5, 1e-14);
    EXPECT_LT(feasibility_margin({1.0, 20.0, 1.0}), 0.0);
    EXPECT_TRUE(is_feasible({kNK_ell, kNK_p, kNK_q}));
    EXPECT_FALSE(is_feasible({1.0, 20.0, 1.0}));
}

TEST(Feasibility, MarginDecreasesInEll) {
    double prev = 1.0;
    for (double ell = 1e-7; ell < 1e-2; ell *= 3.0) {
        const double m = feasibility_margin({ell, 0.01, 1e-5});
        EXPECT_LT(m, prev);
        prev = m;
    }
}

TEST(Moments, AgreeWithQuadrature) {
    for (auto [x, p, q] : {std::tuple{40.0, -0.0034, 8.15e-5}, {-300.0, -0.0034, 8.15e-5}, {2e3, 1e-3, 1e-6},
                           {-5.0, 0.3, 0.1}}) {
        const auto m = phi_moments(x, p, q);
        const auto ref = detail::phi_moments_quadrature(x, p, q);
        EXPECT_TRUE(rel_near(m.moment0, ref.moment0, 1e-11)) << x;
        EXPECT_TRUE(rel_near(m.moment1, ref.moment1, 1e-9)) << x;
        EXPECT_TRUE(rel_near(m.moment2, ref.moment2, 1e-9)) << x;
    }
}

TEST(LinearAndSqrt, SpecExamples) {
    EXPECT_EQ(f_linear(0.0, {2.93e-6}), 0.0);
    EXPECT_NEAR(f_linear(100.0, {2.93e-6}), 2.93e-4, 1e-18);
    EXPECT_EQ(f_linear(-37.0, {2.93e-6}), -f_linear(37.0, {2.93e-6}));
    EXPECT_EQ(f_sqrt(0.0, {3.691e-5}), 0.0);
    EXPECT_NEAR(f_sqrt(100.0, {3.691e-5}), 3.691e-4, 1e-18);
    EXPECT_EQ(f_sqrt(-4.0, {1.0}), -2.0);
}

TEST(LinearRoot, MatchesOracleAndIdentity) {
    for (const auto& row : oracle::kLinearRoot) {
        const auto r = linear_alpha_from_ps(row[0], row[1]);
        EXPECT_TRUE(rel_near(r.alpha, row[2], 1e-14)) << row[0];
        EXPECT_DOUBLE_EQ(r.beta, row[0] + 2.0 * r.alpha);
    }
    EXPECT_EQ(linear_alpha_from_ps(3.0, 4.0).beta, 5.0);
    EXPECT_THROW(linear_alpha_from_ps(1.0, 0.0), DomainError);
}

TEST(Structural, SpecExamples) {
    StructuralParams sp;
    sp.c = 1.0;
    sp.m = 0.0;
    sp.rho = 0.0;
    sp.eta = 2.0;
    sp.delta = 0.0;
    sp.tau = 3.0;
    sp.sigma_s = 0.7;
    auto pq = structural_to_pq(sp);
    EXPECT_EQ(pq.p, 0.0);
    EXPECT_EQ(pq.q, 1.0);

    sp.m = 4.0;
    sp.rho = 0.3;
    sp.delta = sp.c * sp.m + sp.rho * sp.eta * sp.sigma_s;
    EXPECT_NEAR(structural_to_pq(sp).p, 0.0, 1e-15);
    EXPECT_NEAR(pq.mean_reversion_term + pq.covariance_term + pq.liquidity_term, pq.p, 1e-15);

    sp.tau = 0.5;
    EXPECT_THROW(structural_to_pq(sp), DomainError);
}

TEST(Structural, InflectionFromStructuralIsMinusPOverQ) {
    StructuralParams sp;
    sp.c = 0.4;
    sp.m = 3.0;
    sp.rho = -0.2;
    sp.eta = 50.0;
    sp.sigma_s = 1e-3;
    sp.delta = 2.0;
    sp.tau = 1.1;
    const auto pq = structural_to_pq(sp);
    EXPECT_NEAR(inflection_from_structural(sp), -pq.p / pq.q, 1e-12);
}

TEST(Dynamics, SigmaPSquaredExamples) {
    StructuralParams sp;
    sp.sigma_s = 0.01;
    sp.eta = 100.0;
    sp.rho = 0.3;
    EXPECT_EQ(sigma_p_squared(5.0, 0.0, sp), 1e-4);
    EXPECT_NEAR(sigma_p_squared(5.0, 1e-4, sp), 2.6e-4, 1e-18);
    sp.rho = 1.0;
    EXPECT_NEAR(sigma_p_squared(5.0, 1e-4, sp), std::pow(0.01 + 100.0 * 1e-4, 2), 1e-18);
}

TEST(Dynamics, MuPExamples) {
    StructuralParams sp;
    sp.mu_s = 2e-4;
    sp.c = 0.5;
    sp.m = 7.0;
    sp.eta = 30.0;
    sp.rho = 0.0;
    EXPECT_EQ(mu_p(3.0, sp, 0.0, 0.0), sp.mu_s);
    const double g = 1e-4, gp = -2e-7;
    EXPECT_NEAR(mu_p(sp.m, sp, g, gp), sp.mu_s + 0.5 * sp.eta * sp.eta * (gp + g * g), 1e-18);
}

TEST(Dynamics, NoArbitrageHoldsOnTheSShapeSolution) {
    // g solving the Bernoulli equation with s = 0 zeroes the residual when
    // kappa0 is the market-risk premium implied by the structural block.
    StructuralParams sp;
    sp.mu_s = 3e-4;
    sp.sigma_s = 2e-3;
    sp.rho = 0.25;
    sp.c = 0.3;
    sp.m = 2.0;
    sp.eta = 40.0;
    sp.delta = 1.5;
    sp.tau = 0.9;
    sp.r = 1e-4;
    sp.kappa0 = 0.0;
    const auto pq = structural_to_pq(sp);
    const SShapeCurve c(pq.with_ell(1e-4));
    for (double x : {-50.0, 0.0, 12.0, 80.0}) {
        EXPECT_NEAR(p_of_x(x, sp), pq.p + pq.q * x, 1e-12 * (std::abs(pq.p) + pq.q * std::abs(x)));
        const double res = no_arbitrage_residual(x, sp, c.g(x), c.gprime(x));
        EXPECT_NEAR(res, 0.0, 1e-15) << x;
    }
}

TEST(Bernoulli, ResidualZeroForSShape) {
    const SShapeCurve c({kNK_ell, kNK_p, kNK_q});
    OdeSpec spec{[](double x) { return kNK_p + kNK_q * x; }, [](double) { return 0.0; }, kNK_ell};
    for (double x : {-200.0, 0.0, 41.7, 300.0})
        EXPECT_NEAR(bernoulli_residual(x, spec, c.g(x), c.gprime(x)), 0.0, 1e-20);
    OdeSpec zero{[](double) { return 0.0; }, [](double) { return 0.0; }, 0.0};
    EXPECT_EQ(bernoulli_residual(1.0, zero, 0.0, 0.0), 0.0);
}

TEST(Bernoulli, RK4MatchesClosedForm) {
    const SShapeParams s{kNK_ell, kNK_p, kNK_q};
    OdeSpec spec{[](double x) { return kNK_p + kNK_q * x; }, [](double) { return 0.0; }, s.ell};
    const double w = 5.0 / std::sqrt(s.q);
    const auto sol = solve_ode_numeric(spec, -w, w, 0.01 / std::sqrt(s.q));
    double err = 0.0;
    for (std::size_t i = 0; i < sol.x.size(); ++i) err = std::max(err, std::abs(sol.g[i] - g_sshape(sol.x[i], s)));
    EXPECT_LT(err, 1e-8);
    double ferr = 0.0;
    for (std::size_t i = 0; i < sol.x.size(); ++i) ferr = std::max(ferr, std::abs(sol.f[i] - f_sshape(sol.x[i], s)));
    EXPECT_LT(ferr, 1e-7);
}

TEST(Bernoulli, ConstantAndZeroSolutions) {
    const auto root = linear_alpha_from_ps(0.2, 0.05);
    OdeSpec constant{[](double) { return 0.2; }, [](double) { return 0.05; }, root.alpha};
    const auto sol = solve_ode_numeric(constant, -10.0, 10.0, 0.1);
    for (double g : sol.g) EXPECT_NEAR(g, root.alpha, 1e-14);
    OdeSpec zero{[](double) { return 0.0; }, [](double) { return 0.0; }, 0.0};
    const auto z = solve_ode_numeric(zero, -5.0, 5.0, 0.5);
    for (std::size_t i = 0; i < z.x.size(); ++i) {
        EXPECT_EQ(z.g[i], 0.0);
        EXPECT_EQ(z.f[i], 0.0);
    }
}

TEST(Bernoulli, ErrorsOnBlowUpAndNegativeSource) {
    OdeSpec blow{[](double) { return 0.0; }, [](double) { return 0.0; }, 1.0};
    try {
        solve_ode_numeric(blow, -5.0, 1.0, 1e-3);  // g = 1 / (1 + x) diverges at x = -1
        FAIL() << "expected IntegrationError";
    } catch (const IntegrationError& e) {
        EXPECT_GE(e.last_valid_x(), -1.01);
        EXPECT_LT(e.last_valid_x(), -0.99);
    }
    OdeSpec neg{[](double) { return 0.0; }, [](double) { return -1.0; }, 0.1};
    EXPECT_THROW(solve_ode_numeric(neg, -1.0, 1.0, 0.1), DomainError);
}
