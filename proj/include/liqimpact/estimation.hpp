#pragma once

// Fitting the three impact specifications to minute-bar panels
//   r_t = a + f(x_t) - f(x_{t-1}) + e_t
// and AR(1)-based estimation of the order-flow OU parameters.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "liqimpact/impact.hpp"

namespace liqimpact::ingest {
struct DayBars;
}
namespace liqimpact::sim {
struct SyntheticPanel;
}

namespace liqimpact::est {

struct Observation {
    double r = 0.0;       // log return of the bar
    double x = 0.0;       // order flow of the bar, contracts
    double x_prev = 0.0;  // order flow of the previous bar
};

struct RegressionPanel {
    std::vector<Observation> obs;

    std::size_t n() const { return obs.size(); }

    /// Throws EstimationError unless n >= 10 and every value is finite.
    void validate() const;

    /// Rows for bars 1.. of each day that carry a log return.
    static RegressionPanel from_bars(const std::vector<ingest::DayBars>& days);
    static RegressionPanel from_bars(const ingest::DayBars& day);
    static RegressionPanel from_synthetic(const sim::SyntheticPanel& panel);
};

struct ParamEstimate {
    std::string name;
    double value = 0.0;
    double se = 0.0;
    double t_stat = 0.0;
};

struct FitResult {
    impact::ImpactModel model = impact::ImpactModel::linear;
    double a_hat = 0.0;
    std::vector<ParamEstimate> params;  // "a" first, then the model's parameters
    std::vector<std::vector<double>> covariance;  // same order as params
    double rss = 0.0;
    double r2 = 0.0;
    double adj_r2 = 0.0;
    double bic = 0.0;
    std::size_t n = 0;
    std::size_t k = 0;  // free parameters including the intercept
    bool converged = false;
    int starts_tried = 0;
    int starts_converged = 0;
    int iterations = 0;  // of the winning start
    std::string message;

    const ParamEstimate& param(const std::string& name) const;
    impact::ImpactParams impact_params() const;
    /// -p/q for S-shape fits, NaN otherwise.
    double inflection() const;
};

/// OLS of r on an intercept and f(x_t) - f(x_{t-1}) for linear or sqrt impact.
/// Throws EstimationError naming the offending column when the design is rank deficient.
FitResult fit_ols(const RegressionPanel& panel, impact::ImpactModel model);

struct GridPoint {
    double p = 0.0;
    double q = 0.0;
};

/// Scale-adaptive default grid: p = -1e-2 k / s_x, q = 1e-2 10^j / s_x^2,
/// k = -3..3, j = -2..2, with s_x the sd of the panel's order flow.
std::vector<GridPoint> default_grid(const RegressionPanel& panel);

struct SShapeOptions {
    std::vector<GridPoint> grid;    // empty: default_grid
    int max_iterations = 500;
    double rel_rss_tol = 1e-12;
    double grad_tol = 1e-10;        // sup-norm of the scaled gradient (cosine form)
    double margin_floor = 1e-6;     // feasibility margin kept above this
    unsigned jobs = 0;              // worker threads, 0 = hardware concurrency
};

/// Multi-start Levenberg-Marquardt over (a, log ell, p, log q) with explicit
/// feasibility rejection. Returns the lowest-RSS optimum; converged is false
/// when no start converged to a feasible point.
FitResult fit_sshape(const RegressionPanel& panel, const SShapeOptions& options = {});

/// Dispatch to fit_ols or fit_sshape.
FitResult fit_model(const RegressionPanel& panel, impact::ImpactModel model,
                    const SShapeOptions& options = {});

// ---------------------------------------------------------------------------

struct OUEstimate {
    std::size_t n = 0;             // AR(1) pairs used
    double beta0 = 0.0;
    double beta1 = 0.0;
    double beta1_se = 0.0;
    bool mean_reverting = false;   // 0 < beta1 < 1
    std::optional<double> c_hat;   // -ln(beta1) / dt
    std::optional<double> c_se;
    std::optional<double> m_hat;   // beta0 / (1 - beta1)
    std::optional<double> m_se;
    double eta_hat = 0.0;          // unbiased sd of the flows
    double eta_hat_se = 0.0;
    std::optional<double> eta_diffusion;  // residual-implied diffusion coefficient
    std::optional<double> eta_diffusion_se;
};

/// AR(1) regression over day-contiguous segments. Throws EstimationError for
/// fewer than 30 observations or zero variance.
OUEstimate estimate_ou(const std::vector<std::vector<double>>& segments, double dt = 1.0);
OUEstimate estimate_ou(const std::vector<double>& flows, double dt = 1.0);

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const FitResult& fit);
FitResult fit_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OUEstimate& ou);

/// One row per (label, fit) for the comparison tools.
std::string fit_csv_header();
std::string fit_csv_row(const std::string& day, const FitResult& fit);

struct FitRow {
    std::string day;
    impact::ImpactModel model = impact::ImpactModel::linear;
    bool converged = false;
    std::size_t n = 0;
    double a_hat = 0.0, ell = 0.0, p = 0.0, q = 0.0, alpha = 0.0;
    double rss = 0.0, adj_r2 = 0.0, bic = 0.0, inflection = 0.0;
};
std::vector<FitRow> parse_fit_csv(std::string_view text);

}  // namespace liqimpact::est
