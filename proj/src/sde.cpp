#include "liqimpact/sde.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

#include "liqimpact/errors.hpp"
#include "liqimpact/io.hpp"

namespace liqimpact::sim {

std::string_view to_string(Measure m) {
    return m == Measure::physical ? "physical" : "risk-neutral";
}

Measure measure_from_string(std::string_view name) {
    if (name == "physical" || name == "P") return Measure::physical;
    if (name == "risk-neutral" || name == "risk_neutral" || name == "Q") return Measure::risk_neutral;
    throw DomainError("unknown measure '" + std::string(name) + "'");
}

namespace {

// f, g, g' for whichever model, with the S-shape curve validated once.
class ImpactEval {
public:
    // allow_zero admits linear alpha == 0 (no impact), used for panel synthesis.
    explicit ImpactEval(const impact::ImpactParams& params, bool allow_zero = false) : params_(params) {
        if (auto* s = std::get_if<impact::SShapeParams>(&params)) {
            curve_.emplace(*s);
        } else if (auto* l = std::get_if<impact::LinearParams>(&params); allow_zero && l && l->alpha == 0.0) {
            return;
        } else {
            impact::validate(params);
        }
    }

    double f(double x) const {
        if (curve_) return curve_->f(x);
        return impact::impact_f(x, params_);
    }
    double g(double x) const {
        if (curve_) return curve_->g(x);
        return impact::impact_g(x, params_);
    }
    double gprime(double x) const {
        if (curve_) return curve_->gprime(x);
        return impact::impact_gprime(x, params_);
    }

private:
    impact::ImpactParams params_;
    std::optional<impact::SShapeCurve> curve_;
};

void validate_structural_for_sim(const impact::StructuralParams& sp) {
    for (double v : {sp.mu_s, sp.sigma_s, sp.rho, sp.c, sp.m, sp.eta, sp.delta, sp.tau, sp.r, sp.kappa0})
        if (!std::isfinite(v)) throw DomainError("structural parameters must be finite");
    // eta = 0 is allowed here: it gives the noise-free limit.
    if (sp.sigma_s < 0.0) throw DomainError("sigma_s must be >= 0");
    if (sp.eta < 0.0) throw DomainError("eta must be >= 0");
    if (!(sp.c > 0.0)) throw DomainError("c must be > 0");
    if (std::abs(sp.rho) > 1.0) throw DomainError("|rho| must be <= 1");
    if (sp.kappa0 < 0.0) throw DomainError("kappa0 must be >= 0");
}

}  // namespace

void validate(const SimConfig& config) {
    if (!(config.dt > 0.0) || !std::isfinite(config.dt)) throw DomainError("dt must be > 0");
    if (config.n_steps == 0) throw DomainError("n_steps must be >= 1");
    if (!(config.s0 > 0.0) || !std::isfinite(config.s0)) throw DomainError("s0 must be > 0");
    if (!std::isfinite(config.x0)) throw DomainError("x0 must be finite");
    validate_structural_for_sim(config.structural);
    if (std::holds_alternative<impact::SqrtParams>(config.impact))
        throw DomainError("simulation supports sshape or linear impact only");
    impact::validate(config.impact);
}

Increments correlated_increments(double rho, double dt, Rng& rng) {
    const double u = rng.normal();
    const double v = rng.normal();
    const double h = std::sqrt(dt);
    Increments inc;
    inc.dw = h * u;
    inc.dz = h * (rho * u + std::sqrt(std::max(0.0, 1.0 - rho * rho)) * v);
    return inc;
}

std::vector<PathSample> simulate_path(const SimConfig& config) {
    validate(config);
    const auto& sp = config.structural;
    const ImpactEval imp(config.impact);
    Rng rng(config.seed);

    std::vector<PathSample> path;
    path.reserve(config.n_steps + 1);
    double x = config.x0;
    double s = config.s0;
    path.push_back({0.0, s, x, s * std::exp(imp.f(x))});

    const double dt = config.dt;
    const double half_var = 0.5 * sp.sigma_s * sp.sigma_s;
    for (std::size_t i = 1; i <= config.n_steps; ++i) {
        const Increments inc = correlated_increments(sp.rho, dt, rng);
        double x_drift = sp.c * (sp.m - x);
        double s_drift = sp.mu_s;
        if (config.measure == Measure::risk_neutral) {
            const double lw = impact::liquidity_risk_price(x, sp);
            const double g = imp.g(x);
            x_drift -= lw;
            // sigma_s * lambda_z taken from the no-arbitrage condition at x.
            s_drift = sp.mu_s - impact::mu_p(x, sp, g, imp.gprime(x)) + sp.r + g * lw;
        }
        s *= std::exp((s_drift - half_var) * dt + sp.sigma_s * inc.dz);
        x += x_drift * dt + sp.eta * inc.dw;
        if (!std::isfinite(x) || !std::isfinite(s) || !(s > 0.0))
            throw SimulationError("non-finite state at step " + std::to_string(i), i);
        double p;
        try {
            p = s * std::exp(imp.f(x));
        } catch (const DomainError& e) {
            throw SimulationError(std::string("impact evaluation failed: ") + e.what(), i);
        }
        if (!std::isfinite(p) || !(p > 0.0))
            throw SimulationError("non-finite trade price at step " + std::to_string(i), i);
        path.push_back({static_cast<double>(i) * dt, s, x, p});
    }
    return path;
}

// ---------------------------------------------------------------------------

OUParams OUParams::from_structural(const impact::StructuralParams& sp, double dt) {
    return {sp.c, sp.m, sp.eta, dt};
}

double OUParams::stationary_sd() const { return eta / std::sqrt(2.0 * c); }

SyntheticPanel synth_regression_panel(double a, const impact::ImpactParams& impact,
                                      const OUParams& flow, int n_days, int bars_per_day,
                                      double noise_sd, std::uint64_t seed) {
    if (!(noise_sd >= 0.0)) throw DomainError("noise_sd must be >= 0");
    if (bars_per_day < 2) throw DomainError("bars_per_day must be >= 2");
    if (n_days < 1) throw DomainError("n_days must be >= 1");
    if (!(flow.c > 0.0) || !(flow.eta >= 0.0) || !(flow.dt > 0.0))
        throw DomainError("flow parameters need c > 0, eta >= 0, dt > 0");
    const ImpactEval imp(impact, true);

    SyntheticPanel panel;
    panel.truth = {a, impact, flow, noise_sd, n_days, bars_per_day, seed};
    panel.rows.reserve(static_cast<std::size_t>(n_days) * bars_per_day);

    Rng rng(seed);
    const double decay = std::exp(-flow.c * flow.dt);
    const double sd_step = flow.eta * std::sqrt(-std::expm1(-2.0 * flow.c * flow.dt) / (2.0 * flow.c));
    const double sd_stat = flow.stationary_sd();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    for (int d = 0; d < n_days; ++d) {
        double x = flow.m + sd_stat * rng.normal();
        double fx = imp.f(x);
        panel.rows.push_back({d, 0, x, nan});
        for (int b = 1; b < bars_per_day; ++b) {
            const double xn = flow.m + (x - flow.m) * decay + sd_step * rng.normal();
            const double fn = imp.f(xn);
            const double eps = noise_sd * rng.normal();
            panel.rows.push_back({d, b, xn, a + fn - fx + eps});
            x = xn;
            fx = fn;
        }
    }
    return panel;
}

void write_path_csv(std::ostream& out, const std::vector<PathSample>& path) {
    out << "t,s,x,p\n";
    for (const auto& r : path)
        out << io::format_double(r.t) << ',' << io::format_double(r.s) << ','
            << io::format_double(r.x) << ',' << io::format_double(r.p) << '\n';
}

void write_panel_csv(std::ostream& out, const SyntheticPanel& panel) {
    out << "day,bar,x,r\n";
    for (const auto& r : panel.rows)
        out << r.day << ',' << r.bar << ',' << io::format_double(r.x) << ','
            << io::format_double(r.r) << '\n';
}

}  // namespace liqimpact::sim
