#pragma once

// Numerical kernels behind the S-shape family. Exposed for tests and the
// estimator; not part of the stable API.

#include "liqimpact/impact.hpp"

namespace liqimpact::impact::detail {

/// mantissa * exp(log_scale). log_scale is 0 unless the value would overflow.
struct Scaled {
    double mantissa = 0.0;
    double log_scale = 0.0;

    double value() const;
};

/// Which evaluation path big_phi_scaled took. Used by tests.
enum class PhiRoute { zero, small_q, short_interval, stable, direct };

/// Phi(x) for q > 0 (no ell involved), routed for stability.
Scaled big_phi_scaled(double x, double p, double q, PhiRoute* route = nullptr);

/// Textbook closed form sqrt(2 pi / q) e^{p^2/2q} [N(a) - N(b)]. Overflows and
/// cancels in the tails; kept as a reference.
double big_phi_naive(double x, double p, double q);

/// 1 - ell sqrt(2 pi / q) exp(p^2 / 2q) N(p / sqrt(q)) evaluated literally.
double feasibility_margin_naive(double ell, double p, double q);

/// log(1 + ell Phi) from a scaled Phi. Throws DomainError when 1 + ell Phi <= 0.
double log1p_scaled(double ell, const Scaled& big_phi);

/// f and g at x without validation.
struct FG {
    double f = 0.0;
    double g = 0.0;
};
FG f_and_g(double x, double ell, double p, double q);

/// Moments by Gauss-Legendre panels, exponent-aware. Reference for phi_moments.
PhiMoments phi_moments_quadrature(double x, double p, double q);

/// 12-point Gauss-Legendre rule on [-1, 1], positive half.
inline constexpr double kGl12Nodes[6] = {
    0.12523340851146891547, 0.36783149899818019375, 0.5873179542866174473,
    0.76990267419430468704, 0.90411725637047485668, 0.98156063424671925069};
inline constexpr double kGl12Weights[6] = {
    0.249147045813402785,   0.23349253653835480876,  0.20316742672306592175,
    0.16007832854334622633, 0.10693932599531843096, 0.047175336386511827195};

}  // namespace liqimpact::impact::detail
