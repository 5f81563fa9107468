#pragma once

// Price impact functions of order flow: the S-shape solution of the
// Bernoulli equation, its linear special case, the square-root baseline,
// and the structural relations behind them (variance, drift, no-arbitrage).
//
// Units: order flow x in contracts; impact f in natural-log price units
// (multiply by 1e4 for basis points).

#include <string_view>
#include <variant>

namespace liqimpact::impact {

/// S-shape impact f(x) = log(1 + ell * Phi(x)) with
/// Phi(x) = integral_0^x exp(-p y - q y^2 / 2) dy.
struct SShapeParams {
    double ell = 0.0;  // slope at zero flow
    double p = 0.0;    // 1/contracts
    double q = 0.0;    // 1/contracts^2
};

struct LinearParams {
    double alpha = 0.0;  // per contract
};

struct SqrtParams {
    double alpha = 0.0;  // per sqrt(contract)
};

/// Deep parameters of the true-price / order-flow system.
struct StructuralParams {
    double mu_s = 0.0;     // true-price drift, 1/time
    double sigma_s = 0.0;  // true-price volatility, 1/sqrt(time)
    double rho = 0.0;      // correlation of dz and dw
    double c = 1.0;        // order-flow mean reversion speed, 1/time
    double m = 0.0;        // long-run order flow, contracts
    double eta = 1.0;      // order-flow volatility, contracts/sqrt(time)
    double delta = 0.0;    // eta * lambda_w(x) = -tau * x + delta
    double tau = 0.0;      // 1/time
    double r = 0.0;        // risk-free rate, 1/time
    double kappa0 = 0.0;   // informed-trader gain, held constant in x
};

enum class ImpactModel { sshape, linear, sqrt };

std::string_view to_string(ImpactModel model);
ImpactModel impact_model_from_string(std::string_view name);

using ImpactParams = std::variant<SShapeParams, LinearParams, SqrtParams>;

ImpactModel model_of(const ImpactParams& params);

// ---------------------------------------------------------------------------
// S-shape family

/// Throws DomainError unless ell > 0, q > 0 and all fields are finite.
/// Feasibility is checked separately.
void validate(const SShapeParams& params);

/// exp(-p x - q x^2 / 2).
double phi(double x, const SShapeParams& params);

/// Log of phi; finite where phi itself would overflow.
double log_phi(double x, const SShapeParams& params);

/// Phi(x) = sqrt(2 pi / q) e^{p^2/2q} [N(sqrt(q)(x + p/q)) - N(p/sqrt(q))].
/// Saturates at +-DBL_MAX when the exact value is outside the double range.
double big_phi(double x, const SShapeParams& params);

/// Throws DomainError when ell <= 0, q <= 0 or 1 + ell Phi(x) <= 0 at this x.
double f_sshape(double x, const SShapeParams& params);
double g_sshape(double x, const SShapeParams& params);

/// g'(x) = -(p + q x) g - g^2, the curvature of f.
double gprime_sshape(double x, const SShapeParams& params);

/// Market depth -p/q: the zero of the linear coefficient p + q x.
double inflection_point(const SShapeParams& params);

/// Exact sign change of f'': the root of p + q x + g(x) = 0.
/// Lies below inflection_point() by roughly g / q.
double curvature_root(const SShapeParams& params);

/// 1 - ell sqrt(2 pi / q) e^{p^2/2q} N(p/sqrt(q)); positive iff f is defined on all reals.
/// Evaluated in log space for large p^2/2q; saturates at -DBL_MAX instead of overflowing.
double feasibility_margin(const SShapeParams& params);

/// log(ell sqrt(2 pi / q) e^{p^2/2q} N(p/sqrt(q))). Feasible iff negative.
double feasibility_log_ratio(const SShapeParams& params);

bool is_feasible(const SShapeParams& params, double margin_floor = 0.0);

/// Integrals over [0, x] of y^k phi(y) for k = 0, 1, 2, plus phi(x).
/// moment0 is Phi(x). Used for parameter derivatives of f.
struct PhiMoments {
    double phi_x = 1.0;
    double moment0 = 0.0;
    double moment1 = 0.0;
    double moment2 = 0.0;
};

/// Validated S-shape curve. Construction checks the parameter domain and
/// feasibility once; evaluation is then free of per-call checks.
class SShapeCurve {
public:
    explicit SShapeCurve(const SShapeParams& params);

    const SShapeParams& params() const noexcept { return params_; }

    double phi(double x) const;
    double big_phi(double x) const;
    double f(double x) const;
    double g(double x) const;
    double gprime(double x) const;

    /// f and its gradient with respect to (ell, p, q) at x.
    struct Sensitivity {
        double f = 0.0;
        double d_ell = 0.0;
        double d_p = 0.0;
        double d_q = 0.0;
    };
    Sensitivity sensitivity(double x) const;

private:
    SShapeParams params_;
};

/// Phi moments for raw (p, q); throws DomainError when they overflow.
PhiMoments phi_moments(double x, double p, double q);

// ---------------------------------------------------------------------------
// Linear and square-root impact

double f_linear(double x, const LinearParams& params);
double f_sqrt(double x, const SqrtParams& params);

/// Constant special solution of p alpha + alpha^2 = s, with beta = p + 2 alpha.
struct LinearRoot {
    double alpha = 0.0;
    double beta = 0.0;
};

/// Positive root alpha = (-p + sqrt(p^2 + 4 s)) / 2. Throws DomainError for s <= 0.
LinearRoot linear_alpha_from_ps(double p, double s);

// ---------------------------------------------------------------------------
// Dispatch over the three impact models

double impact_f(double x, const ImpactParams& params);
double impact_g(double x, const ImpactParams& params);
double impact_gprime(double x, const ImpactParams& params);

/// Throws DomainError when params are outside their model's domain.
void validate(const ImpactParams& params);

// ---------------------------------------------------------------------------
// Structural relations

/// (p, q) of the S-shape family from deep parameters, with p split into
/// its mean-reversion, covariance and liquidity-risk components.
struct PqDecomposition {
    double p = 0.0;
    double q = 0.0;
    double mean_reversion_term = 0.0;  // 2 c m / eta^2
    double covariance_term = 0.0;      // 2 rho sigma_s / eta
    double liquidity_term = 0.0;       // -2 delta / eta^2

    SShapeParams with_ell(double ell) const { return {ell, p, q}; }
};

/// Throws DomainError unless eta > 0 and tau > c.
PqDecomposition structural_to_pq(const StructuralParams& sp);

/// (delta - c m - rho eta sigma_s) / (tau - c).
double inflection_from_structural(const StructuralParams& sp);

/// Throws DomainError for sigma_s < 0, eta <= 0, c <= 0, |rho| > 1 or kappa0 < 0.
void validate(const StructuralParams& sp);

/// Total instantaneous variance of the log trade price:
/// sigma_s^2 + eta^2 g^2 + 2 rho eta sigma_s g.
double sigma_p_squared(double x, double g_at_x, const StructuralParams& sp);

/// Physical drift of dP/P:
/// mu_s + (c (m - x) + rho eta sigma_s) g + eta^2 / 2 (g' + g^2).
double mu_p(double x, const StructuralParams& sp, double g_at_x, double gprime_at_x);

/// eta * lambda_w(x) = -tau x + delta.
double liquidity_risk_price(double x, const StructuralParams& sp);

/// lambda_z = (mu_s - r + kappa0) / sigma_s. Throws DomainError when sigma_s == 0.
double market_risk_price(const StructuralParams& sp);

/// r - mu_P + sigma_s lambda_z + g eta lambda_w with lambda_z = (mu_s - r + kappa0) / sigma_s,
/// evaluated without dividing by sigma_s. Zero under no arbitrage.
double no_arbitrage_residual(double x, const StructuralParams& sp, double g_at_x,
                             double gprime_at_x);

/// Linear coefficient function p(x) = (2/eta^2)(c (m - x) + rho eta sigma_s - eta lambda_w(x)).
double p_of_x(double x, const StructuralParams& sp);

}  // namespace liqimpact::impact
