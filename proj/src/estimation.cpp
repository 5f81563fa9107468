#include "liqimpact/estimation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "liqimpact/detail/gaussian_integral.hpp"
#include "liqimpact/errors.hpp"
#include "liqimpact/ingest.hpp"
#include "liqimpact/io.hpp"
#include "liqimpact/sde.hpp"

namespace liqimpact::est {

using impact::ImpactModel;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sq(double v) { return v * v; }

void fill_goodness(FitResult& fit, const RegressionPanel& panel) {
    const double n = static_cast<double>(panel.n());
    double mean = 0.0;
    for (const auto& o : panel.obs) mean += o.r;
    mean /= n;
    double tss = 0.0;
    for (const auto& o : panel.obs) tss += sq(o.r - mean);
    const double k = static_cast<double>(fit.k);
    fit.n = panel.n();
    fit.r2 = tss > 0.0 ? 1.0 - fit.rss / tss : kNaN;
    // k counts the intercept, so n - k is the residual degrees of freedom.
    fit.adj_r2 = tss > 0.0 ? 1.0 - (1.0 - fit.r2) * (n - 1.0) / (n - k) : kNaN;
    fit.bic = n * std::log(fit.rss / n) + k * std::log(n);
}

void fill_params(FitResult& fit, const std::vector<std::string>& names, const std::vector<double>& values,
                 const Eigen::MatrixXd& cov) {
    fit.params.clear();
    fit.covariance.assign(names.size(), std::vector<double>(names.size(), kNaN));
    for (std::size_t i = 0; i < names.size(); ++i) {
        const double v = cov.size() ? cov(i, i) : kNaN;
        const double se = v >= 0.0 ? std::sqrt(v) : kNaN;
        fit.params.push_back({names[i], values[i], se, se > 0.0 ? values[i] / se : kNaN});
        for (std::size_t j = 0; j < names.size(); ++j)
            if (cov.size()) fit.covariance[i][j] = cov(i, j);
    }
    fit.a_hat = values[0];
}

double panel_flow_sd(const RegressionPanel& panel) {
    double mean = 0.0;
    for (const auto& o : panel.obs) mean += o.x;
    mean /= static_cast<double>(panel.n());
    double ss = 0.0;
    for (const auto& o : panel.obs) ss += sq(o.x - mean);
    return std::sqrt(ss / static_cast<double>(panel.n() - 1));
}

}  // namespace

// ---------------------------------------------------------------------------

void RegressionPanel::validate() const {
    if (obs.size() < 10) throw EstimationError("regression panel needs at least 10 observations, got " +
                                               std::to_string(obs.size()));
    for (const auto& o : obs)
        if (!std::isfinite(o.r) || !std::isfinite(o.x) || !std::isfinite(o.x_prev))
            throw EstimationError("regression panel contains non-finite values");
}

RegressionPanel RegressionPanel::from_bars(const ingest::DayBars& day) {
    RegressionPanel panel;
    for (std::size_t i = 1; i < day.bars.size(); ++i) {
        const auto& b = day.bars[i];
        const auto& prev = day.bars[i - 1];
        if (std::isnan(b.log_return) || prev.bar_index + 1 != b.bar_index) continue;
        panel.obs.push_back({b.log_return, b.order_flow, prev.order_flow});
    }
    return panel;
}

RegressionPanel RegressionPanel::from_bars(const std::vector<ingest::DayBars>& days) {
    RegressionPanel panel;
    for (const auto& d : days) {
        auto p = from_bars(d);
        panel.obs.insert(panel.obs.end(), p.obs.begin(), p.obs.end());
    }
    return panel;
}

RegressionPanel RegressionPanel::from_synthetic(const sim::SyntheticPanel& synth) {
    RegressionPanel panel;
    const auto& rows = synth.rows;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].bar == 0 || rows[i - 1].day != rows[i].day) continue;
        panel.obs.push_back({rows[i].r, rows[i].x, rows[i - 1].x});
    }
    return panel;
}

const ParamEstimate& FitResult::param(const std::string& name) const {
    for (const auto& p : params)
        if (p.name == name) return p;
    throw EstimationError("fit has no parameter '" + name + "'");
}

impact::ImpactParams FitResult::impact_params() const {
    switch (model) {
        case ImpactModel::sshape:
            return impact::SShapeParams{param("ell").value, param("p").value, param("q").value};
        case ImpactModel::linear: return impact::LinearParams{param("alpha").value};
        case ImpactModel::sqrt: return impact::SqrtParams{param("alpha").value};
    }
    throw EstimationError("unknown model");
}

double FitResult::inflection() const {
    if (model != ImpactModel::sshape) return kNaN;
    return impact::inflection_point({param("ell").value, param("p").value, param("q").value});
}

// ---------------------------------------------------------------------------

FitResult fit_ols(const RegressionPanel& panel, ImpactModel model) {
    if (model == ImpactModel::sshape) throw EstimationError("fit_ols handles linear and sqrt models only");
    panel.validate();
    const std::size_t n = panel.n();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& o = panel.obs[i];
        if (model == ImpactModel::linear)
            d[i] = o.x - o.x_prev;
        else
            d[i] = impact::f_sqrt(o.x, {1.0}) - impact::f_sqrt(o.x_prev, {1.0});
    }
    const double nd = static_cast<double>(n);
    const double dbar = std::accumulate(d.begin(), d.end(), 0.0) / nd;
    double rbar = 0.0;
    for (const auto& o : panel.obs) rbar += o.r;
    rbar /= nd;
    double sdd = 0.0, sdr = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sdd += sq(d[i] - dbar);
        sdr += (d[i] - dbar) * (panel.obs[i].r - rbar);
        d2 += d[i] * d[i];
    }
    if (!(sdd > 1e-24 * d2) || sdd == 0.0)
        throw EstimationError("rank-deficient design: column 'delta_f' (f(x_t) - f(x_{t-1})) is constant");
    const double b1 = sdr / sdd;
    const double b0 = rbar - b1 * dbar;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) rss += sq(panel.obs[i].r - b0 - b1 * d[i]);

    FitResult fit;
    fit.model = model;
    fit.k = 2;
    fit.rss = rss;
    const double s2 = rss / (nd - 2.0);
    Eigen::MatrixXd cov(2, 2);
    cov(0, 0) = s2 * (1.0 / nd + dbar * dbar / sdd);
    cov(1, 1) = s2 / sdd;
    cov(0, 1) = cov(1, 0) = -s2 * dbar / sdd;
    fill_params(fit, {"a", "alpha"}, {b0, b1}, cov);
    fill_goodness(fit, panel);
    fit.converged = true;
    fit.starts_tried = 1;
    fit.starts_converged = 1;
    return fit;
}

std::vector<GridPoint> default_grid(const RegressionPanel& panel) {
    const double sx = panel_flow_sd(panel);
    if (!(sx > 0.0)) throw EstimationError("degenerate design: order flow has zero variance, column 'delta_f' is zero");
    std::vector<GridPoint> grid;
    for (int k = -3; k <= 3; ++k)
        for (int j = -2; j <= 2; ++j) grid.push_back({-1e-2 * k / sx, 1e-2 * std::pow(10.0, j) / (sx * sx)});
    return grid;
}

// ---------------------------------------------------------------------------
// S-shape nonlinear least squares

namespace {

// Panel with order-flow values de-duplicated, so each iteration evaluates the
// impact function once per distinct flow.
struct Prepared {
    std::vector<double> ux;
    std::vector<std::uint32_t> it, ip;
    std::vector<double> r;
    double rss_floor = 0.0;
};

Prepared prepare(const RegressionPanel& panel) {
    Prepared pr;
    std::vector<double> all;
    all.reserve(2 * panel.n());
    double rmax = 0.0;
    for (const auto& o : panel.obs) {
        all.push_back(o.x);
        all.push_back(o.x_prev);
        rmax = std::max(rmax, std::abs(o.r));
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    pr.ux = std::move(all);
    auto index = [&pr](double v) {
        return static_cast<std::uint32_t>(std::lower_bound(pr.ux.begin(), pr.ux.end(), v) - pr.ux.begin());
    };
    for (const auto& o : panel.obs) {
        pr.it.push_back(index(o.x));
        pr.ip.push_back(index(o.x_prev));
        pr.r.push_back(o.r);
    }
    pr.rss_floor = static_cast<double>(panel.n()) * sq(64.0 * std::numeric_limits<double>::epsilon() * rmax);
    return pr;
}

struct Theta {
    double a, u, p, v;  // ell = e^u, q = e^v
    impact::SShapeParams params() const { return {std::exp(u), p, std::exp(v)}; }
};

struct StartResult {
    Theta theta{};
    double rss = std::numeric_limits<double>::infinity();
    bool feasible = false;
    bool converged = false;
    int iterations = 0;
    std::string note;
};

class Problem {
public:
    Problem(const Prepared& pr, const SShapeOptions& opt) : pr_(pr), opt_(opt) {
        f_.resize(pr.ux.size());
        se_.resize(pr.ux.size());
        sp_.resize(pr.ux.size());
        sq_.resize(pr.ux.size());
    }

    bool feasible(const Theta& t) const {
        return std::isfinite(t.u) && std::isfinite(t.v) && impact::is_feasible(t.params(), opt_.margin_floor);
    }

    // RSS at theta; +inf when f cannot be evaluated.
    double rss(const Theta& t) {
        const auto par = t.params();
        try {
            for (std::size_t k = 0; k < pr_.ux.size(); ++k)
                f_[k] = impact::detail::log1p_scaled(par.ell, impact::detail::big_phi_scaled(pr_.ux[k], par.p, par.q));
        } catch (const DomainError&) {
            return std::numeric_limits<double>::infinity();
        }
        double s = 0.0;
        for (std::size_t i = 0; i < pr_.r.size(); ++i) s += sq(pr_.r[i] - t.a - (f_[pr_.it[i]] - f_[pr_.ip[i]]));
        return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
    }

    // Normal equations in theta space. Requires rss(t) to have been called at t.
    bool normal_equations(const Theta& t, Eigen::Matrix4d& a, Eigen::Vector4d& g) {
        const auto par = t.params();
        try {
            for (std::size_t k = 0; k < pr_.ux.size(); ++k) {
                const auto mo = impact::phi_moments(pr_.ux[k], par.p, par.q);
                const double den = 1.0 + par.ell * mo.moment0;
                se_[k] = par.ell * mo.moment0 / den;  // d f / d log ell
                sp_[k] = -par.ell * mo.moment1 / den;
                sq_[k] = -0.5 * par.ell * par.q * mo.moment2 / den;  // d f / d log q
            }
        } catch (const DomainError&) {
            return false;
        }
        a.setZero();
        g.setZero();
        for (std::size_t i = 0; i < pr_.r.size(); ++i) {
            const auto xi = pr_.it[i], pi = pr_.ip[i];
            const double e = pr_.r[i] - t.a - (f_[xi] - f_[pi]);
            const Eigen::Vector4d j(-1.0, -(se_[xi] - se_[pi]), -(sp_[xi] - sp_[pi]), -(sq_[xi] - sq_[pi]));
            a.selfadjointView<Eigen::Lower>().rankUpdate(j);
            g += j * e;
        }
        a = a.selfadjointView<Eigen::Lower>();
        return a.allFinite() && g.allFinite();
    }

    StartResult run(Theta t) {
        StartResult res;
        if (!feasible(t)) {
            res.note = "start infeasible";
            return res;
        }
        double cur = rss(t);
        if (!std::isfinite(cur)) {
            res.note = "objective not finite at start";
            return res;
        }
        res.feasible = true;
        double lambda = 1e-3;
        Eigen::Matrix4d a;
        Eigen::Vector4d g;
        for (int iter = 1; iter <= opt_.max_iterations; ++iter) {
            res.iterations = iter;
            if (!normal_equations(t, a, g)) {
                res.note = "jacobian not finite";
                break;
            }
            const double cos_grad = scaled_gradient(a, g, cur);
            if (cos_grad < opt_.grad_tol || cur <= pr_.rss_floor) {
                res.converged = true;
                break;
            }
            bool accepted = false;
            double rel = 0.0;
            while (lambda <= 1e16) {
                Eigen::Matrix4d m = a;
                for (int i = 0; i < 4; ++i) m(i, i) += lambda * std::max(a(i, i), 1e-300);
                const Eigen::Vector4d d = m.ldlt().solve(-g);
                Theta trial{t.a + d[0], t.u + std::clamp(d[1], -5.0, 5.0), t.p + d[2], t.v + std::clamp(d[3], -5.0, 5.0)};
                double next = std::numeric_limits<double>::infinity();
                if (d.allFinite() && feasible(trial)) next = rss(trial);
                if (next < cur) {
                    rel = (cur - next) / cur;
                    t = trial;
                    cur = next;
                    lambda = std::max(lambda * 0.1, 1e-12);
                    accepted = true;
                    break;
                }
                lambda *= 10.0;
            }
            if (!accepted) {
                // Damping exhausted: stationary up to rounding, or stuck.
                rss(t);
                res.converged = cos_grad < 1e-6;
                if (!res.converged) res.note = "damping exhausted away from a stationary point";
                break;
            }
            if (rel < opt_.rel_rss_tol && cos_grad < 1e-4) {
                res.converged = true;
                break;
            }
        }
        if (!res.converged && res.note.empty()) res.note = "iteration limit reached";
        res.theta = t;
        res.rss = cur;
        return res;
    }

private:
    static double scaled_gradient(const Eigen::Matrix4d& a, const Eigen::Vector4d& g, double rss) {
        double worst = 0.0;
        for (int i = 0; i < 4; ++i) {
            const double den = std::sqrt(a(i, i) * rss);
            if (den > 0.0) worst = std::max(worst, std::abs(g[i]) / den);
        }
        return worst;
    }

    const Prepared& pr_;
    const SShapeOptions& opt_;
    std::vector<double> f_, se_, sp_, sq_;
};

Eigen::MatrixXd sshape_covariance(const RegressionPanel& panel, const impact::SShapeParams& par, double rss) {
    const std::size_t n = panel.n();
    const impact::SShapeCurve curve(par);
    Eigen::MatrixXd j(n, 4);
    for (std::size_t i = 0; i < n; ++i) {
        const auto s1 = curve.sensitivity(panel.obs[i].x);
        const auto s0 = curve.sensitivity(panel.obs[i].x_prev);
        j(i, 0) = 1.0;
        j(i, 1) = s1.d_ell - s0.d_ell;
        j(i, 2) = s1.d_p - s0.d_p;
        j(i, 3) = s1.d_q - s0.d_q;
    }
    // Column equilibration before inverting J^T J.
    Eigen::Vector4d scale = j.colwise().norm().transpose();
    for (int c = 0; c < 4; ++c)
        if (scale[c] > 0.0) j.col(c) /= scale[c];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(j);
    Eigen::Matrix4d cov;
    if (qr.rank() < 4) {
        cov.setConstant(kNaN);
        return cov;
    }
    Eigen::Matrix4d r = qr.matrixR().topLeftCorner(4, 4).triangularView<Eigen::Upper>();
    Eigen::Matrix4d rinv = r.inverse();
    Eigen::Matrix4d inv_perm = rinv * rinv.transpose();
    Eigen::Matrix4d jtj_inv = qr.colsPermutation() * inv_perm * qr.colsPermutation().transpose();
    const double s2 = rss / static_cast<double>(n - 4);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) cov(a, b) = s2 * jtj_inv(a, b) / (scale[a] * scale[b]);
    return cov;
}

}  // namespace

FitResult fit_sshape(const RegressionPanel& panel, const SShapeOptions& options) {
    panel.validate();
    bool all_zero = true;
    for (const auto& o : panel.obs) all_zero = all_zero && o.x == 0.0 && o.x_prev == 0.0;
    if (all_zero) throw EstimationError("degenerate design: order flow is identically zero, column 'delta_f' is zero");

    const auto grid = options.grid.empty() ? default_grid(panel) : options.grid;
    const Prepared pr = prepare(panel);

    // Starting values for ell and a.
    double ell0 = 0.0;
    try {
        ell0 = fit_ols(panel, ImpactModel::linear).param("alpha").value;
    } catch (const EstimationError&) {
    }
    if (!(ell0 > 0.0)) ell0 = std::abs(ell0) > 0.0 ? std::abs(ell0) : 1e-3 / panel_flow_sd(panel);
    double a0 = 0.0;
    for (const auto& o : panel.obs) a0 += o.r;
    a0 /= static_cast<double>(panel.n());

    std::vector<StartResult> results(grid.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        Problem prob(pr, options);
        for (std::size_t s = next++; s < grid.size(); s = next++) {
            impact::SShapeParams start{ell0, grid[s].p, grid[s].q};
            for (int h = 0; h < 400 && !impact::is_feasible(start, options.margin_floor); ++h) start.ell *= 0.5;
            results[s] = prob.run({a0, std::log(start.ell), start.p, std::log(start.q)});
        }
    };
    unsigned jobs = options.jobs ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, grid.size()));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < jobs; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    FitResult fit;
    fit.model = ImpactModel::sshape;
    fit.k = 4;
    fit.starts_tried = static_cast<int>(grid.size());
    const StartResult* best = nullptr;
    for (const auto& r : results) {
        if (r.converged) ++fit.starts_converged;
        if (!r.feasible) continue;
        // Converged optima win over unconverged ones; then lowest RSS.
        if (!best || (r.converged && !best->converged) ||
            (r.converged == best->converged && r.rss < best->rss))
            best = &r;
    }
    if (!best) {
        fit.converged = false;
        fit.message = "no feasible start";
        fit.rss = kNaN;
        fill_params(fit, {"a", "ell", "p", "q"}, {a0, kNaN, kNaN, kNaN}, Eigen::MatrixXd());
        fit.n = panel.n();
        fit.r2 = fit.adj_r2 = fit.bic = kNaN;
        return fit;
    }
    const auto par = best->theta.params();
    fit.converged = best->converged;
    fit.iterations = best->iterations;
    fit.message = best->converged ? "converged" : best->note;
    fit.rss = best->rss;
    Eigen::MatrixXd cov;
    try {
        cov = sshape_covariance(panel, par, best->rss);
    } catch (const DomainError&) {
        cov = Eigen::MatrixXd::Constant(4, 4, kNaN);
    }
    fill_params(fit, {"a", "ell", "p", "q"}, {best->theta.a, par.ell, par.p, par.q}, cov);
    fill_goodness(fit, panel);
    return fit;
}

FitResult fit_model(const RegressionPanel& panel, ImpactModel model, const SShapeOptions& options) {
    if (model == ImpactModel::sshape) return fit_sshape(panel, options);
    return fit_ols(panel, model);
}

// ---------------------------------------------------------------------------

OUEstimate estimate_ou(const std::vector<std::vector<double>>& segments, double dt) {
    if (!(dt > 0.0)) throw EstimationError("dt must be > 0");
    std::size_t total = 0;
    double mean = 0.0;
    for (const auto& s : segments) {
        total += s.size();
        for (double v : s) mean += v;
    }
    if (total < 30) throw EstimationError("estimate_ou needs at least 30 observations");
    mean /= static_cast<double>(total);
    double ss = 0.0;
    for (const auto& s : segments)
        for (double v : s) ss += sq(v - mean);
    if (!(ss > 0.0)) throw EstimationError("degenerate order flow: zero variance");

    // Centered AR(1) sums over within-segment pairs.
    double n = 0.0, mx = 0.0, my = 0.0;
    for (const auto& s : segments)
        for (std::size_t t = 1; t < s.size(); ++t) {
            mx += s[t - 1];
            my += s[t];
            n += 1.0;
        }
    if (n < 3.0) throw EstimationError("estimate_ou needs contiguous pairs");
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& s : segments)
        for (std::size_t t = 1; t < s.size(); ++t) {
            sxx += sq(s[t - 1] - mx);
            sxy += (s[t - 1] - mx) * (s[t] - my);
        }
    if (!(sxx > 0.0)) throw EstimationError("degenerate order flow: zero lagged variance");
    OUEstimate est;
    est.n = static_cast<std::size_t>(n);
    est.beta1 = sxy / sxx;
    est.beta0 = my - est.beta1 * mx;
    double rss = 0.0;
    for (const auto& s : segments)
        for (std::size_t t = 1; t < s.size(); ++t) rss += sq(s[t] - est.beta0 - est.beta1 * s[t - 1]);
    const double s2 = rss / (n - 2.0);
    const double var_b1 = s2 / sxx;
    const double var_b0 = s2 * (1.0 / n + mx * mx / sxx);
    const double cov01 = -s2 * mx / sxx;
    est.beta1_se = std::sqrt(var_b1);

    const double nt = static_cast<double>(total);
    est.eta_hat = std::sqrt(ss / (nt - 1.0));

    est.mean_reverting = est.beta1 > 0.0 && est.beta1 < 1.0;
    if (est.mean_reverting) {
        const double b1 = est.beta1;
        const double c = -std::log(b1) / dt;
        est.c_hat = c;
        est.c_se = est.beta1_se / (b1 * dt);
        const double om = 1.0 - b1;
        est.m_hat = est.beta0 / om;
        const double dm0 = 1.0 / om, dm1 = est.beta0 / (om * om);
        est.m_se = std::sqrt(dm0 * dm0 * var_b0 + 2.0 * dm0 * dm1 * cov01 + dm1 * dm1 * var_b1);
        // Exact transition variance s_u^2 = eta^2 (1 - b1^2) / (2 c).
        const double su = std::sqrt(s2);
        const double eta = su * std::sqrt(2.0 * c / (1.0 - b1 * b1));
        est.eta_diffusion = eta;
        const double dlog_db1 = 0.5 * (-1.0 / (b1 * dt * c) + 2.0 * b1 / (1.0 - b1 * b1));
        const double se_su = su / std::sqrt(2.0 * (n - 2.0));
        est.eta_diffusion_se = std::sqrt(sq(eta * dlog_db1) * var_b1 + sq(eta / su * se_su));
        // Large-sample sd of a sample sd under AR(1) dependence.
        est.eta_hat_se = est.eta_hat * std::sqrt((1.0 + b1 * b1) / (1.0 - b1 * b1) / (2.0 * nt));
    } else {
        est.eta_hat_se = est.eta_hat / std::sqrt(2.0 * (nt - 1.0));
    }
    return est;
}

OUEstimate estimate_ou(const std::vector<double>& flows, double dt) {
    return estimate_ou(std::vector<std::vector<double>>{flows}, dt);
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

nlohmann::json num(const std::optional<double>& v) { return v ? num(*v) : nlohmann::json(nullptr); }

double from_num(const nlohmann::json& j) { return j.is_null() ? kNaN : j.get<double>(); }

}  // namespace

nlohmann::json to_json(const FitResult& fit) {
    nlohmann::json j;
    j["model"] = std::string(impact::to_string(fit.model));
    j["a_hat"] = num(fit.a_hat);
    auto params = nlohmann::json::array();
    for (const auto& p : fit.params)
        params.push_back({{"name", p.name}, {"value", num(p.value)}, {"se", num(p.se)}, {"t_stat", num(p.t_stat)}});
    j["params"] = params;
    auto cov = nlohmann::json::array();
    for (const auto& row : fit.covariance) {
        auto r = nlohmann::json::array();
        for (double v : row) r.push_back(num(v));
        cov.push_back(r);
    }
    j["covariance"] = cov;
    j["rss"] = num(fit.rss);
    j["r2"] = num(fit.r2);
    j["adj_r2"] = num(fit.adj_r2);
    j["bic"] = num(fit.bic);
    j["n"] = fit.n;
    j["k"] = fit.k;
    j["converged"] = fit.converged;
    j["starts_tried"] = fit.starts_tried;
    j["starts_converged"] = fit.starts_converged;
    j["iterations"] = fit.iterations;
    j["message"] = fit.message;
    if (fit.model == ImpactModel::sshape && !fit.params.empty()) {
        j["inflection"] = num(fit.inflection());
        const double ell = fit.param("ell").value;
        j["ell_bps"] = num(ell * 1e4);
    }
    return j;
}

FitResult fit_from_json(const nlohmann::json& j) {
    FitResult fit;
    try {
        fit.model = impact::impact_model_from_string(j.at("model").get<std::string>());
        for (const auto& p : j.at("params"))
            fit.params.push_back({p.at("name").get<std::string>(), from_num(p.at("value")),
                                  from_num(p.value("se", nlohmann::json(nullptr))),
                                  from_num(p.value("t_stat", nlohmann::json(nullptr)))});
        if (j.contains("covariance"))
            for (const auto& row : j.at("covariance")) {
                std::vector<double> r;
                for (const auto& v : row) r.push_back(from_num(v));
                fit.covariance.push_back(r);
            }
        if (j.contains("a_hat"))
            fit.a_hat = from_num(j.at("a_hat"));
        else
            for (const auto& p : fit.params)
                if (p.name == "a") fit.a_hat = p.value;
        fit.rss = from_num(j.value("rss", nlohmann::json(nullptr)));
        fit.r2 = from_num(j.value("r2", nlohmann::json(nullptr)));
        fit.adj_r2 = from_num(j.value("adj_r2", nlohmann::json(nullptr)));
        fit.bic = from_num(j.value("bic", nlohmann::json(nullptr)));
        fit.n = j.value("n", std::size_t{0});
        fit.k = j.value("k", std::size_t{0});
        fit.converged = j.value("converged", false);
        fit.starts_tried = j.value("starts_tried", 0);
        fit.starts_converged = j.value("starts_converged", 0);
        fit.iterations = j.value("iterations", 0);
        fit.message = j.value("message", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed fit JSON: ") + e.what(), 0);
    }
    return fit;
}

nlohmann::json to_json(const OUEstimate& ou) {
    return {{"n", ou.n},
            {"beta0", num(ou.beta0)},
            {"beta1", num(ou.beta1)},
            {"beta1_se", num(ou.beta1_se)},
            {"mean_reverting", ou.mean_reverting},
            {"c_hat", num(ou.c_hat)},
            {"c_se", num(ou.c_se)},
            {"m_hat", num(ou.m_hat)},
            {"m_se", num(ou.m_se)},
            {"eta_hat", num(ou.eta_hat)},
            {"eta_hat_se", num(ou.eta_hat_se)},
            {"eta_diffusion", num(ou.eta_diffusion)},
            {"eta_diffusion_se", num(ou.eta_diffusion_se)}};
}

std::string fit_csv_header() {
    return "day,model,converged,n,k,a_hat,ell,p,q,alpha,t_a,t_ell,t_p,t_q,t_alpha,rss,r2,adj_r2,bic,inflection";
}

std::string fit_csv_row(const std::string& day, const FitResult& fit) {
    auto value = [&fit](const char* name, bool t) -> std::string {
        for (const auto& p : fit.params)
            if (p.name == name) return io::format_double(t ? p.t_stat : p.value);
        return {};
    };
    std::ostringstream ss;
    ss << day << ',' << impact::to_string(fit.model) << ',' << (fit.converged ? 1 : 0) << ',' << fit.n << ','
       << fit.k << ',' << value("a", false) << ',' << value("ell", false) << ',' << value("p", false) << ','
       << value("q", false) << ',' << value("alpha", false) << ',' << value("a", true) << ','
       << value("ell", true) << ',' << value("p", true) << ',' << value("q", true) << ','
       << value("alpha", true) << ',' << io::format_double(fit.rss) << ',' << io::format_double(fit.r2) << ','
       << io::format_double(fit.adj_r2) << ',' << io::format_double(fit.bic) << ','
       << io::format_double(fit.params.empty() ? kNaN : fit.inflection());
    return ss.str();
}

std::vector<FitRow> parse_fit_csv(std::string_view text) {
    const auto lines = io::split_lines(text);
    if (lines.empty()) throw ParseError("empty fit CSV", 1);
    const auto header = io::split_csv(lines[0]);
    std::map<std::string, std::size_t, std::less<>> col;
    for (std::size_t i = 0; i < header.size(); ++i) col.emplace(std::string(header[i]), i);
    for (const char* need : {"day", "model", "converged", "n", "a_hat", "rss", "adj_r2", "bic"})
        if (!col.count(need)) throw ParseError(std::string("fit CSV lacks column '") + need + "'", 1);
    std::vector<FitRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t ln = i + 1;
        if (lines[i].empty()) continue;
        const auto f = io::split_csv(lines[i]);
        if (f.size() != header.size()) throw ParseError("field count does not match header", ln);
        auto get = [&](const char* name) -> double {
            auto it = col.find(name);
            return it == col.end() ? kNaN : io::parse_double(f[it->second], ln, name);
        };
        FitRow r;
        r.day = std::string(f[col.at("day")]);
        try {
            r.model = impact::impact_model_from_string(f[col.at("model")]);
        } catch (const DomainError& e) {
            throw ParseError(e.what(), ln);
        }
        r.converged = get("converged") == 1.0;
        r.n = static_cast<std::size_t>(get("n"));
        r.a_hat = get("a_hat");
        r.ell = get("ell");
        r.p = get("p");
        r.q = get("q");
        r.alpha = get("alpha");
        r.rss = get("rss");
        r.adj_r2 = get("adj_r2");
        r.bic = get("bic");
        r.inflection = get("inflection");
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace liqimpact::est
