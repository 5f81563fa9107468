#include "liqimpact/bernoulli.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "liqimpact/errors.hpp"

namespace liqimpact::impact {

double bernoulli_residual(double x, const OdeSpec& spec, double g_at_x, double gprime_at_x) {
    return -spec.s_fn(x) + gprime_at_x + spec.p_fn(x) * g_at_x + g_at_x * g_at_x;
}

namespace {

struct Branch {
    std::vector<double> x, g, f;
};

double source(const OdeSpec& spec, double x) {
    const double s = spec.s_fn(x);
    if (!(s >= 0.0)) throw DomainError("OdeSpec source s(x) must be >= 0; got " + std::to_string(s) +
                                       " at x = " + std::to_string(x));
    return s;
}

// Integrates from 0 to x_end (either sign) with step magnitude h.
Branch integrate(const OdeSpec& spec, double x_end, double h, double bound) {
    Branch br;
    br.x.push_back(0.0);
    br.g.push_back(spec.ell);
    br.f.push_back(0.0);
    if (x_end == 0.0) return br;

    auto rhs = [&spec](double x, double g) { return source(spec, x) - spec.p_fn(x) * g - g * g; };

    const double dir = x_end > 0.0 ? 1.0 : -1.0;
    const auto n = static_cast<long>(std::ceil(std::abs(x_end) / h - 1e-9));
    double x = 0.0;
    double g = spec.ell;
    double f = 0.0;
    for (long i = 1; i <= n; ++i) {
        const double xn = i == n ? x_end : dir * h * static_cast<double>(i);
        const double dx = xn - x;
        const double k1 = rhs(x, g);
        const double k2 = rhs(x + 0.5 * dx, g + 0.5 * dx * k1);
        const double k3 = rhs(x + 0.5 * dx, g + 0.5 * dx * k2);
        const double k4 = rhs(xn, g + dx * k3);
        const double gn = g + dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(gn) || std::abs(gn) > bound)
            throw IntegrationError("Bernoulli ODE solution blew up beyond |g| = " + std::to_string(bound),
                                   x);
        f += 0.5 * dx * (g + gn);
        x = xn;
        g = gn;
        br.x.push_back(x);
        br.g.push_back(g);
        br.f.push_back(f);
    }
    return br;
}

}  // namespace

OdeSolution solve_ode_numeric(const OdeSpec& spec, double x_min, double x_max, double step,
                              const OdeOptions& options) {
    if (!spec.p_fn || !spec.s_fn) throw DomainError("OdeSpec requires p_fn and s_fn");
    if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("ODE step must be > 0");
    if (!(x_min <= 0.0 && x_max >= 0.0)) throw DomainError("ODE range must contain 0");
    if (!std::isfinite(spec.ell) || spec.ell < 0.0) throw DomainError("OdeSpec ell must be >= 0");

    const Branch right = integrate(spec, x_max, step, options.blowup_bound);
    const Branch left = integrate(spec, x_min, step, options.blowup_bound);

    OdeSolution sol;
    const std::size_t total = left.x.size() + right.x.size() - 1;
    sol.x.reserve(total);
    sol.g.reserve(total);
    sol.f.reserve(total);
    for (std::size_t i = left.x.size(); i-- > 1;) {
        sol.x.push_back(left.x[i]);
        sol.g.push_back(left.g[i]);
        sol.f.push_back(left.f[i]);
    }
    sol.x.insert(sol.x.end(), right.x.begin(), right.x.end());
    sol.g.insert(sol.g.end(), right.g.begin(), right.g.end());
    sol.f.insert(sol.f.end(), right.f.begin(), right.f.end());
    return sol;
}

}  // namespace liqimpact::impact
