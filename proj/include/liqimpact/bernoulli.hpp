#pragma once

// Numeric oracle for the inhomogeneous Bernoulli equation
//   g'(x) = s(x) - p(x) g(x) - g(x)^2,   g(0) = ell,
// whose solution is the impact gradient g = f'.

#include <functional>
#include <vector>

namespace liqimpact::impact {

struct OdeSpec {
    std::function<double(double)> p_fn;
    std::function<double(double)> s_fn;  // must be >= 0 where evaluated
    double ell = 0.0;                    // g(0)
};

/// -s(x) + g' + p(x) g + g^2.
double bernoulli_residual(double x, const OdeSpec& spec, double g_at_x, double gprime_at_x);

struct OdeSolution {
    std::vector<double> x;  // ascending, contains 0
    std::vector<double> g;
    std::vector<double> f;  // f(0) = 0, trapezoidal in g
};

struct OdeOptions {
    double blowup_bound = 1e12;  // |g| above this is a failure
};

/// Classical RK4 from x = 0 out to x_max and, separately, down to x_min.
/// Throws DomainError for bad inputs or negative s, IntegrationError on blow-up.
OdeSolution solve_ode_numeric(const OdeSpec& spec, double x_min, double x_max, double step,
                              const OdeOptions& options = {});

}  // namespace liqimpact::impact
