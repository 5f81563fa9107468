#pragma once

// Normal distribution helpers with full double precision in the tails.

namespace liqimpact::math {

inline constexpr double kSqrt2Pi = 2.50662827463100050241576528481104525;
inline constexpr double kSqrtHalfPi = 1.25331413731550025120788264240552263;
inline constexpr double kInvSqrt2 = 0.707106781186547524400844362104849039;
inline constexpr double kInvSqrtPi = 0.564189583547756286948079451560772586;

/// Scaled complementary error function exp(x^2) * erfc(x).
/// Returns +inf only when the true value exceeds the double range (x < -26.6).
double erfcx(double x);

/// exp(x^2) without the argument rounding of x*x.
double exp_square(double x);

/// Standard normal CDF N(x).
double norm_cdf(double x);

/// Upper tail 1 - N(x), accurate where N(x) rounds to 1.
double norm_sf(double x);

/// log N(x), finite for every finite x.
double log_norm_cdf(double x);

}  // namespace liqimpact::math
