#include "liqimpact/impact.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "liqimpact/detail/gaussian_integral.hpp"
#include "liqimpact/errors.hpp"
#include "liqimpact/normal.hpp"

namespace liqimpact::impact {

using math::erfcx;
using math::kInvSqrt2;
using math::kSqrt2Pi;
using math::kSqrtHalfPi;
using math::norm_cdf;
using math::norm_sf;

namespace {

constexpr double kLogDblMax = 709.782712893384;
// Above this the scaled representation is kept instead of folding into a double.
constexpr double kFoldLimit = 600.0;

detail::Scaled normalize(detail::Scaled s) {
    if (s.log_scale != 0.0 && s.log_scale < kFoldLimit) {
        s.mantissa *= std::exp(s.log_scale);
        s.log_scale = 0.0;
    }
    return s;
}

// Integral over [y0, y1] of y^k exp(-p y - q y^2 / 2), k = 0..2, one 12-point panel.
void gl12_panel(double y0, double y1, double p, double q, double out[3]) {
    const double half = 0.5 * (y1 - y0);
    const double mid = 0.5 * (y1 + y0);
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double w = detail::kGl12Weights[i];
        for (double y : {mid - half * detail::kGl12Nodes[i], mid + half * detail::kGl12Nodes[i]}) {
            const double v = w * std::exp(-y * (p + 0.5 * q * y));
            s0 += v;
            s1 += v * y;
            s2 += v * y * y;
        }
    }
    out[0] += half * s0;
    out[1] += half * s1;
    out[2] += half * s2;
}

// integral_0^w exp(-b t - t^2/2) dt for b, a = b + w both non-negative.
detail::Scaled upper_tail_integral(double b, double a, double w) {
    const double u = b * kInvSqrt2;
    const double v = a * kInvSqrt2;
    const double s = -0.5 * w * (a + b);
    if (w >= 0.0) return {kSqrtHalfPi * (erfcx(u) - std::exp(s) * erfcx(v)), 0.0};
    return {-kSqrtHalfPi * (erfcx(v) - std::exp(-s) * erfcx(u)), s};
}

detail::Scaled stable_integral(double b, double a, double w) {
    if (b >= 0.0 && a >= 0.0) return upper_tail_integral(b, a, w);
    if (b <= 0.0 && a <= 0.0) {
        auto r = upper_tail_integral(-b, -a, -w);
        r.mantissa = -r.mantissa;
        return r;
    }
    return {kSqrt2Pi * (norm_cdf(a) - norm_cdf(b)), 0.5 * b * b};
}

double exponent(double y, double p, double q) { return y * (p + 0.5 * q * y); }

bool finite_params(const SShapeParams& s) {
    return std::isfinite(s.ell) && std::isfinite(s.p) && std::isfinite(s.q);
}

}  // namespace

namespace detail {

double Scaled::value() const {
    if (log_scale == 0.0) return mantissa;
    if (mantissa == 0.0) return 0.0;
    const double lg = std::log(std::abs(mantissa)) + log_scale;
    if (lg >= kLogDblMax) return mantissa > 0.0 ? DBL_MAX : -DBL_MAX;
    return mantissa * std::exp(log_scale);
}

Scaled big_phi_scaled(double x, double p, double q, PhiRoute* route) {
    auto set = [route](PhiRoute r) {
        if (route) *route = r;
    };
    if (x == 0.0) {
        set(PhiRoute::zero);
        return {0.0, 0.0};
    }
    const double px = p * x;
    const double qx2 = q * x * x;
    if (qx2 < 1e-12 * std::abs(px)) {
        set(PhiRoute::small_q);
        if (std::abs(px) < 1e-12) return {x, 0.0};
        if (-px > 700.0) return {-1.0 / p, -px};
        return {-std::expm1(-px) / p, 0.0};
    }
    if (std::abs(px) + 0.5 * qx2 <= 1.0) {
        set(PhiRoute::short_interval);
        double m[3] = {0.0, 0.0, 0.0};
        gl12_panel(0.0, x, p, q, m);
        return {m[0], 0.0};
    }
    const double sq = std::sqrt(q);
    const double b = p / sq;
    const double w = sq * x;
    const double a = b + w;
    if (0.5 * b * b > 300.0 || std::abs(b) > 6.0) {
        set(PhiRoute::stable);
        auto j = stable_integral(b, a, w);
        j.mantissa /= sq;
        return normalize(j);
    }
    set(PhiRoute::direct);
    const double diff = (b > 0.0 && a > 0.0) ? norm_sf(b) - norm_sf(a) : norm_cdf(a) - norm_cdf(b);
    return {kSqrt2Pi / sq * std::exp(0.5 * b * b) * diff, 0.0};
}

double big_phi_naive(double x, double p, double q) {
    const double sq = std::sqrt(q);
    return std::sqrt(2.0 * M_PI / q) * std::exp(p * p / (2.0 * q)) *
           (norm_cdf(sq * (x + p / q)) - norm_cdf(p / sq));
}

double feasibility_margin_naive(double ell, double p, double q) {
    return 1.0 - ell * std::sqrt(2.0 * M_PI / q) * std::exp(p * p / (2.0 * q)) *
                     norm_cdf(p / std::sqrt(q));
}

double log1p_scaled(double ell, const Scaled& big_phi) {
    if (big_phi.log_scale < kFoldLimit) {
        const double t = ell * big_phi.value();
        if (!(t > -1.0)) throw DomainError("1 + ell * Phi(x) <= 0: impact undefined (infeasible parameters)");
        return std::log1p(t);
    }
    if (big_phi.mantissa <= 0.0)
        throw DomainError("1 + ell * Phi(x) <= 0: impact undefined (infeasible parameters)");
    const double lm = std::log(ell) + std::log(big_phi.mantissa);
    return lm + big_phi.log_scale + std::log1p(std::exp(-big_phi.log_scale - lm));
}

FG f_and_g(double x, double ell, double p, double q) {
    const Scaled s = big_phi_scaled(x, p, q);
    FG out;
    out.f = log1p_scaled(ell, s);
    const double lphi = -exponent(x, p, q);
    if (s.log_scale == 0.0 && lphi < 700.0 && out.f < 700.0)
        out.g = ell * std::exp(lphi) / (1.0 + ell * s.mantissa);
    else
        out.g = std::exp(std::log(ell) + lphi - out.f);
    return out;
}

PhiMoments phi_moments_quadrature(double x, double p, double q) {
    PhiMoments out;
    if (x == 0.0) return out;
    const double ex = exponent(x, p, q);
    double cuts[3] = {0.0, x, x};
    int ncuts = 2;
    const double vertex = -p / q;
    if ((vertex > 0.0 && vertex < x) || (vertex < 0.0 && vertex > x)) {
        cuts[1] = vertex;
        cuts[2] = x;
        ncuts = 3;
    }
    double e_min = std::min(0.0, ex);
    if (ncuts == 3) e_min = std::min(e_min, exponent(vertex, p, q));
    if (-e_min > 700.0) throw DomainError("Phi moments overflow double range");
    const double cap = e_min + 50.0;

    double m[3] = {0.0, 0.0, 0.0};
    for (int s = 0; s + 1 < ncuts; ++s) {
        double y0 = cuts[s];
        double y1 = cuts[s + 1];
        double e0 = exponent(y0, p, q);
        double e1 = exponent(y1, p, q);
        if (std::min(e0, e1) > cap) continue;
        if (std::max(e0, e1) > cap) {
            // Exponent is monotone on the segment: cut where it reaches cap.
            const double d = std::sqrt(std::max(0.0, p * p + 2.0 * q * cap));
            const bool right_branch = std::min(y0, y1) >= vertex;
            double yc;
            if (right_branch)
                yc = p > 0.0 ? 2.0 * cap / (p + d) : (-p + d) / q;
            else
                yc = p < 0.0 ? 2.0 * cap / (p - d) : (-p - d) / q;
            if (e0 > cap)
                y0 = yc;
            else
                y1 = yc;
            e0 = exponent(y0, p, q);
            e1 = exponent(y1, p, q);
        }
        const double slope = std::max(std::abs(p + q * y0), std::abs(p + q * y1));
        const int panels =
            static_cast<int>(std::clamp(std::ceil(slope * std::abs(y1 - y0)), 1.0, 4000.0));
        const double h = (y1 - y0) / panels;
        for (int i = 0; i < panels; ++i) gl12_panel(y0 + i * h, i + 1 == panels ? y1 : y0 + (i + 1) * h, p, q, m);
    }
    out.phi_x = std::exp(-ex);
    out.moment0 = m[0];
    out.moment1 = m[1];
    out.moment2 = m[2];
    return out;
}

}  // namespace detail

std::string_view to_string(ImpactModel model) {
    switch (model) {
        case ImpactModel::sshape: return "sshape";
        case ImpactModel::linear: return "linear";
        case ImpactModel::sqrt: return "sqrt";
    }
    return "unknown";
}

ImpactModel impact_model_from_string(std::string_view name) {
    if (name == "sshape" || name == "s-shape") return ImpactModel::sshape;
    if (name == "linear") return ImpactModel::linear;
    if (name == "sqrt") return ImpactModel::sqrt;
    throw DomainError("unknown impact model '" + std::string(name) + "'");
}

ImpactModel model_of(const ImpactParams& params) {
    return static_cast<ImpactModel>(params.index());
}

// ---------------------------------------------------------------------------

void validate(const SShapeParams& params) {
    if (!finite_params(params)) throw DomainError("S-shape parameters must be finite");
    if (!(params.ell > 0.0)) throw DomainError("S-shape parameter ell must be > 0");
    if (!(params.q > 0.0)) throw DomainError("S-shape parameter q must be > 0");
}

double log_phi(double x, const SShapeParams& params) { return -exponent(x, params.p, params.q); }

double phi(double x, const SShapeParams& params) { return std::exp(log_phi(x, params)); }

double big_phi(double x, const SShapeParams& params) {
    if (!(params.q > 0.0)) throw DomainError("big_phi requires q > 0");
    return detail::big_phi_scaled(x, params.p, params.q).value();
}

namespace {

void require_feasible(const SShapeParams& params) {
    validate(params);
    if (!(feasibility_margin(params) > 0.0))
        throw DomainError("S-shape parameters violate the feasibility constraint");
}

}  // namespace

// Pointwise: only 1 + ell * Phi(x) > 0 at this x is required. Global
// feasibility is enforced by SShapeCurve.
double f_sshape(double x, const SShapeParams& params) {
    validate(params);
    return detail::f_and_g(x, params.ell, params.p, params.q).f;
}

double g_sshape(double x, const SShapeParams& params) {
    validate(params);
    return detail::f_and_g(x, params.ell, params.p, params.q).g;
}

double gprime_sshape(double x, const SShapeParams& params) {
    const double g = g_sshape(x, params);
    return -(params.p + params.q * x) * g - g * g;
}

double inflection_point(const SShapeParams& params) {
    if (!(params.q > 0.0)) throw DomainError("inflection_point requires q > 0");
    return -params.p / params.q;
}

double curvature_root(const SShapeParams& params) {
    require_feasible(params);
    const auto [ell, p, q] = params;
    auto h = [&](double x) { return p + q * x + detail::f_and_g(x, ell, p, q).g; };
    const double hi = -p / q;
    double step = std::max(h(hi) / q, 1.0 / std::sqrt(q));
    double lo = hi - step;
    for (int i = 0; h(lo) >= 0.0; ++i) {
        if (i > 200) throw IntegrationError("curvature_root: no sign change below -p/q", lo);
        step *= 2.0;
        lo = hi - step;
    }
    std::uintmax_t iters = 200;
    auto [a, b] = boost::math::tools::toms748_solve(
        h, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (a + b);
}

double feasibility_log_ratio(const SShapeParams& params) {
    const auto [ell, p, q] = params;
    if (!(q > 0.0)) throw DomainError("feasibility requires q > 0");
    const double b = p / std::sqrt(q);
    const double base = std::log(ell) + 0.5 * std::log(2.0 * M_PI / q);
    if (b > 0.0 && (b > 6.0 || 0.5 * b * b > 300.0))
        return base + p * p / (2.0 * q) + math::log_norm_cdf(b);
    // exp(b^2/2) N(b) = erfcx(-b/sqrt2) / 2, finite here.
    return base + std::log(0.5 * erfcx(-b * kInvSqrt2));
}

double feasibility_margin(const SShapeParams& params) {
    const double lr = feasibility_log_ratio(params);
    if (lr >= kLogDblMax) return -DBL_MAX;
    return -std::expm1(lr);
}

bool is_feasible(const SShapeParams& params, double margin_floor) {
    if (!finite_params(params) || !(params.ell > 0.0) || !(params.q > 0.0)) return false;
    return feasibility_margin(params) > margin_floor;
}

PhiMoments phi_moments(double x, double p, double q) {
    PhiMoments out;
    if (x == 0.0) return out;
    const double e = exponent(x, p, q);
    if (std::abs(p * x) + 0.5 * q * x * x <= 1.0) {
        double m[3] = {0.0, 0.0, 0.0};
        gl12_panel(0.0, x, p, q, m);
        return {std::exp(-e), m[0], m[1], m[2]};
    }
    const auto s = detail::big_phi_scaled(x, p, q);
    if (s.log_scale != 0.0 || -e > 700.0) throw DomainError("Phi moments overflow double range");
    const double m0 = s.mantissa;
    const double phx = std::exp(-e);
    // Integration by parts: phi' = -(p + q y) phi, (y phi)' = phi - (p + q y) y phi.
    const double n1 = 1.0 - phx - p * m0;
    const double m1 = n1 / q;
    const double n2 = m0 - x * phx - p * m1;
    const double m2 = n2 / q;
    const double loss1 = std::max({1.0, phx, std::abs(p * m0)}) / std::abs(n1);
    const double loss2 = std::max({std::abs(m0), std::abs(x * phx), std::abs(p * m1)}) / std::abs(n2);
    if (!(loss1 < 1e3) || !(loss2 < 1e3)) return detail::phi_moments_quadrature(x, p, q);
    return {phx, m0, m1, m2};
}

// ---------------------------------------------------------------------------

SShapeCurve::SShapeCurve(const SShapeParams& params) : params_(params) { require_feasible(params); }

double SShapeCurve::phi(double x) const { return impact::phi(x, params_); }

double SShapeCurve::big_phi(double x) const {
    return detail::big_phi_scaled(x, params_.p, params_.q).value();
}

double SShapeCurve::f(double x) const {
    return detail::log1p_scaled(params_.ell, detail::big_phi_scaled(x, params_.p, params_.q));
}

double SShapeCurve::g(double x) const {
    return detail::f_and_g(x, params_.ell, params_.p, params_.q).g;
}

double SShapeCurve::gprime(double x) const {
    const double gx = g(x);
    return -(params_.p + params_.q * x) * gx - gx * gx;
}

SShapeCurve::Sensitivity SShapeCurve::sensitivity(double x) const {
    const auto [ell, p, q] = params_;
    const PhiMoments mo = phi_moments(x, p, q);
    const double den = 1.0 + ell * mo.moment0;
    if (!(den > 0.0)) throw DomainError("1 + ell * Phi(x) <= 0 in sensitivity");
    Sensitivity s;
    s.f = std::log1p(ell * mo.moment0);
    s.d_ell = mo.moment0 / den;
    s.d_p = -ell * mo.moment1 / den;
    s.d_q = -0.5 * ell * mo.moment2 / den;
    return s;
}

// ---------------------------------------------------------------------------

double f_linear(double x, const LinearParams& params) { return params.alpha * x; }

double f_sqrt(double x, const SqrtParams& params) {
    if (x == 0.0) return 0.0;
    return std::copysign(params.alpha * std::sqrt(std::abs(x)), x);
}

LinearRoot linear_alpha_from_ps(double p, double s) {
    if (!(s > 0.0) || !std::isfinite(s) || !std::isfinite(p))
        throw DomainError("linear_alpha_from_ps requires finite p and s > 0");
    const double disc = std::hypot(p, 2.0 * std::sqrt(s));
    // Avoid cancellation in -p + disc when p > 0.
    const double alpha = p > 0.0 ? 2.0 * s / (p + disc) : 0.5 * (disc - p);
    return {alpha, disc};
}

double impact_f(double x, const ImpactParams& params) {
    switch (params.index()) {
        case 0: return f_sshape(x, std::get<SShapeParams>(params));
        case 1: return f_linear(x, std::get<LinearParams>(params));
        default: return f_sqrt(x, std::get<SqrtParams>(params));
    }
}

double impact_g(double x, const ImpactParams& params) {
    switch (params.index()) {
        case 0: return g_sshape(x, std::get<SShapeParams>(params));
        case 1: return std::get<LinearParams>(params).alpha;
        default: {
            const double a = std::get<SqrtParams>(params).alpha;
            if (x == 0.0) return std::numeric_limits<double>::infinity();
            return 0.5 * a / std::sqrt(std::abs(x));
        }
    }
}

double impact_gprime(double x, const ImpactParams& params) {
    switch (params.index()) {
        case 0: return gprime_sshape(x, std::get<SShapeParams>(params));
        case 1: return 0.0;
        default: {
            const double a = std::get<SqrtParams>(params).alpha;
            if (x == 0.0) return std::numeric_limits<double>::quiet_NaN();
            const double ax = std::abs(x);
            return -std::copysign(0.25 * a / (ax * std::sqrt(ax)), x);
        }
    }
}

void validate(const ImpactParams& params) {
    switch (params.index()) {
        case 0: require_feasible(std::get<SShapeParams>(params)); return;
        case 1: {
            const double a = std::get<LinearParams>(params).alpha;
            if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("linear alpha must be finite and > 0");
            return;
        }
        default: {
            const double a = std::get<SqrtParams>(params).alpha;
            if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("sqrt alpha must be finite and > 0");
        }
    }
}

// ---------------------------------------------------------------------------

void validate(const StructuralParams& sp) {
    for (double v : {sp.mu_s, sp.sigma_s, sp.rho, sp.c, sp.m, sp.eta, sp.delta, sp.tau, sp.r, sp.kappa0})
        if (!std::isfinite(v)) throw DomainError("structural parameters must be finite");
    if (sp.sigma_s < 0.0) throw DomainError("sigma_s must be >= 0");
    if (!(sp.eta > 0.0)) throw DomainError("eta must be > 0");
    if (!(sp.c > 0.0)) throw DomainError("c must be > 0");
    if (std::abs(sp.rho) > 1.0) throw DomainError("|rho| must be <= 1");
    if (sp.kappa0 < 0.0) throw DomainError("kappa0 must be >= 0");
}

PqDecomposition structural_to_pq(const StructuralParams& sp) {
    if (!(sp.eta > 0.0)) throw DomainError("structural_to_pq requires eta > 0");
    if (!(sp.tau > sp.c)) throw DomainError("structural_to_pq requires tau > c (q > 0)");
    const double k = 2.0 / (sp.eta * sp.eta);
    PqDecomposition d;
    d.mean_reversion_term = k * sp.c * sp.m;
    d.covariance_term = 2.0 * sp.rho * sp.sigma_s / sp.eta;
    d.liquidity_term = -k * sp.delta;
    d.p = k * (sp.c * sp.m + sp.rho * sp.eta * sp.sigma_s - sp.delta);
    d.q = k * (sp.tau - sp.c);
    return d;
}

double inflection_from_structural(const StructuralParams& sp) {
    if (!(sp.tau > sp.c)) throw DomainError("inflection requires tau > c");
    return (sp.delta - sp.c * sp.m - sp.rho * sp.eta * sp.sigma_s) / (sp.tau - sp.c);
}

double sigma_p_squared(double /*x*/, double g_at_x, const StructuralParams& sp) {
    const double eg = sp.eta * g_at_x;
    return sp.sigma_s * sp.sigma_s + eg * eg + 2.0 * sp.rho * sp.sigma_s * eg;
}

double mu_p(double x, const StructuralParams& sp, double g_at_x, double gprime_at_x) {
    return sp.mu_s + (sp.c * (sp.m - x) + sp.rho * sp.eta * sp.sigma_s) * g_at_x +
           0.5 * sp.eta * sp.eta * (gprime_at_x + g_at_x * g_at_x);
}

double liquidity_risk_price(double x, const StructuralParams& sp) { return -sp.tau * x + sp.delta; }

double market_risk_price(const StructuralParams& sp) {
    if (sp.sigma_s == 0.0) throw DomainError("market price of risk undefined for sigma_s == 0");
    return (sp.mu_s - sp.r + sp.kappa0) / sp.sigma_s;
}

double no_arbitrage_residual(double x, const StructuralParams& sp, double g_at_x,
                             double gprime_at_x) {
    // sigma_s * lambda_z = mu_s - r + kappa0
    return sp.mu_s + sp.kappa0 + g_at_x * liquidity_risk_price(x, sp) -
           mu_p(x, sp, g_at_x, gprime_at_x);
}

double p_of_x(double x, const StructuralParams& sp) {
    const double k = 2.0 / (sp.eta * sp.eta);
    return k * (sp.c * (sp.m - x) + sp.rho * sp.eta * sp.sigma_s - liquidity_risk_price(x, sp));
}

}  // namespace liqimpact::impact
