#include "liqimpact/normal.hpp"

#include <cmath>
#include <limits>

namespace liqimpact::math {

namespace {

// erfc(x) reaches the subnormal range just past 26.5.
constexpr double kErfcTailStart = 26.0;

// Continued fraction exp(x^2) erfc(x) = 1/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
// evaluated bottom-up. At x >= 26 sixty levels are far past convergence.
double erfcx_continued_fraction(double x) {
    double tail = x;
    for (int k = 60; k >= 1; --k) {
        tail = x + (0.5 * k) / tail;
    }
    return kInvSqrtPi / tail;
}

}  // namespace

double exp_square(double x) {
    const double hi = x * x;
    const double lo = std::fma(x, x, -hi);
    return std::exp(hi) * (1.0 + lo);
}

double erfcx(double x) {
    if (std::isnan(x)) return x;
    if (x < 0.0) {
        const double y = -x;
        if (y * y > 709.0) return std::numeric_limits<double>::infinity();
        return 2.0 * exp_square(y) - erfcx(y);
    }
    if (x < 0.5) return std::exp(x * x) * std::erfc(x);
    if (x < kErfcTailStart) return exp_square(x) * std::erfc(x);
    return erfcx_continued_fraction(x);
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double norm_sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double log_norm_cdf(double x) {
    if (x > 0.0) return std::log1p(-norm_sf(x));
    if (x > -5.0) return std::log(norm_cdf(x));
    // N(x) = 0.5 * exp(-x^2/2) * erfcx(-x/sqrt2)
    return -0.5 * x * x + std::log(0.5 * erfcx(-x * kInvSqrt2));
}

}  // namespace liqimpact::math
