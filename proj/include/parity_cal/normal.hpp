#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace parity_cal {

inline double std_normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Phi(z), accurate in the left tail.
inline double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

// 1 - Phi(z) without cancellation in the right tail.
inline double std_normal_sf(double z) {
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

namespace detail {

// Acklam's rational approximation, relative error about 1e-9. Used only
// as the starting point for the refinement in std_normal_quantile.
inline double acklam_quantile(double p) {
    constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                      -2.759285104469687e+02, 1.383577518672690e+02,
                                      -3.066479806614716e+01, 2.506628277459239e+00};
    constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                      -1.556989798598866e+02, 6.680131188771972e+01,
                                      -1.328068155288572e+01};
    constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                      -2.400758277161838e+00, -2.549732539343734e+00,
                                      4.374664141464968e+00,  2.938163982698783e+00};
    constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                      2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Solves Phi(x) = p for p in (0, 0.5] with a Newton iteration that falls
// back to bisection whenever the step leaves the current bracket.
inline double lower_half_quantile(double p) {
    double lo = -40.0;
    double hi = 0.0;
    double x = std::min(acklam_quantile(p), 0.0);
    for (int iter = 0; iter < 100; ++iter) {
        const double f = std_normal_cdf(x) - p;
        if (f == 0.0) return x;
        if (f < 0.0) lo = x; else hi = x;
        const double dens = std_normal_pdf(x);
        const double newton = dens > 0.0 ? x - f / dens : x;
        const double tol = 1e-15 * std::max(1.0, std::abs(x));
        if (newton >= lo && newton <= hi && std::abs(newton - x) <= tol) return newton;
        x = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
        if (hi - lo <= tol) break;
    }
    return x;
}

}  // namespace detail

/// Inverse of the standard normal cdf. Returns -inf / +inf at p = 0 / 1
/// and NaN outside [0, 1]; callers that need finite endpoints clamp.
inline double std_normal_quantile(double p) {
    if (std::isnan(p) || p < 0.0 || p > 1.0) return std::numeric_limits<double>::quiet_NaN();
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    if (p == 0.5) return 0.0;
    if (p < 0.5) return detail::lower_half_quantile(p);
    // 1 - p is exact for p >= 0.5.
    return -detail::lower_half_quantile(1.0 - p);
}

}  // namespace parity_cal
