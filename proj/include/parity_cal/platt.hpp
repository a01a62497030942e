#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

#include "parity_cal/errors.hpp"

namespace parity_cal {

/// Probabilities are clamped to [eps, 1 - eps] before taking the logit.
inline constexpr double kLogitClamp = 1e-6;

/// Radius of the Euclidean ball that bounds (a, b).
inline constexpr double kParamRadius = 100.0;

/// Ridge weight pulling batch fits toward the identity map (1, 0).
inline constexpr double kFitRidge = 1e-6;

/// Recalibration map p -> sigmoid(a * logit(p) + b).
struct PlattParams {
    double a = 1.0;
    double b = 0.0;

    double norm() const noexcept { return std::hypot(a, b); }
    friend bool operator==(const PlattParams&, const PlattParams&) = default;
};

inline constexpr PlattParams kIdentityParams{1.0, 0.0};

inline double clamp_probability(double p) noexcept {
    return std::clamp(p, kLogitClamp, 1.0 - kLogitClamp);
}

inline double logit(double p) noexcept { return std::log(p) - std::log1p(-p); }

inline double sigmoid(double u) noexcept {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

// log(1 + e^u) without overflow.
inline double softplus(double u) noexcept {
    return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u)));
}

/// Logit feature the Platt map acts on.
inline double platt_feature(double p) noexcept { return logit(clamp_probability(p)); }

inline double platt_apply(const PlattParams& params, double p) noexcept {
    return sigmoid(params.a * platt_feature(p) + params.b);
}

/// Cross-entropy -y log q - (1 - y) log(1 - q) of q = platt_apply(params, p),
/// evaluated on the logit scale so that saturated predictions stay finite.
inline double platt_log_loss(const PlattParams& params, double p, int y) noexcept {
    const double u = params.a * platt_feature(p) + params.b;
    return softplus(u) - (y ? u : 0.0);
}

/// Cross-entropy of a probability q against a binary label; q is clamped
/// to [1e-300, 1 - 1e-16] so that a confident miss costs a large finite loss.
inline double log_loss(double q, int y) noexcept {
    q = std::clamp(q, 1e-300, 1.0 - 1e-16);
    return y ? -std::log(q) : -std::log1p(-q);
}

struct CalibrationPoint {
    double p = 0.5;
    int y = 0;
};

namespace detail {

struct FitObjective {
    double value = 0.0;
    std::array<double, 2> grad{};
    std::array<double, 3> hess{};  // (aa, ab, bb)
};

inline FitObjective fit_objective(std::span<const CalibrationPoint> calset, const PlattParams& th,
                                  bool with_derivatives) {
    FitObjective out;
    for (const auto& pt : calset) {
        const double z = platt_feature(pt.p);
        const double u = th.a * z + th.b;
        out.value += softplus(u) - (pt.y ? u : 0.0);
        if (with_derivatives) {
            const double s = sigmoid(u);
            const double r = s - pt.y;
            const double w = s * (1.0 - s);
            out.grad[0] += r * z;
            out.grad[1] += r;
            out.hess[0] += w * z * z;
            out.hess[1] += w * z;
            out.hess[2] += w;
        }
    }
    const double da = th.a - kIdentityParams.a;
    const double db = th.b - kIdentityParams.b;
    out.value += kFitRidge * (da * da + db * db);
    if (with_derivatives) {
        out.grad[0] += 2.0 * kFitRidge * da;
        out.grad[1] += 2.0 * kFitRidge * db;
        out.hess[0] += 2.0 * kFitRidge;
        out.hess[2] += 2.0 * kFitRidge;
    }
    return out;
}

}  // namespace detail

/// Ridge-regularized batch log-loss objective minimized by platt_fit_batch.
inline double platt_fit_objective(std::span<const CalibrationPoint> calset, const PlattParams& params) {
    return detail::fit_objective(calset, params, false).value;
}

/// Sum of platt_log_loss over a calibration set (no ridge term).
inline double platt_total_log_loss(std::span<const CalibrationPoint> calset, const PlattParams& params) {
    double total = 0.0;
    for (const auto& pt : calset) total += platt_log_loss(params, pt.p, pt.y);
    return total;
}

/// Log-loss-optimal Platt parameters for a calibration set.
///
/// Damped Newton from (1, 0) on the convex objective
///   sum_s l(m^{a,b}(p_s), y_s) + 1e-6 * ||(a, b) - (1, 0)||^2
/// with Armijo backtracking, at most 100 iterations, stopping once the
/// gradient norm drops below 1e-10. If the minimizer lies outside the
/// radius-100 ball, the result is the point where the segment from (1, 0)
/// to the minimizer leaves the ball; by convexity its objective is still no
/// larger than at (1, 0).
inline PlattParams platt_fit_batch(std::span<const CalibrationPoint> calset) {
    if (calset.empty()) throw ValidationError("platt_fit_batch: calibration set is empty");
    for (const auto& pt : calset) {
        if (!(pt.p >= 0.0 && pt.p <= 1.0)) throw ValidationError("platt_fit_batch: p outside [0, 1]");
        if (pt.y != 0 && pt.y != 1) throw ValidationError("platt_fit_batch: label must be 0 or 1");
    }

    PlattParams th = kIdentityParams;
    auto cur = detail::fit_objective(calset, th, true);
    for (int iter = 0; iter < 100; ++iter) {
        const double gnorm = std::hypot(cur.grad[0], cur.grad[1]);
        if (gnorm < 1e-10) break;
        const double haa = cur.hess[0], hab = cur.hess[1], hbb = cur.hess[2];
        const double det = haa * hbb - hab * hab;
        double da, db;
        if (det > 0.0 && std::isfinite(det)) {
            da = -(hbb * cur.grad[0] - hab * cur.grad[1]) / det;
            db = -(haa * cur.grad[1] - hab * cur.grad[0]) / det;
        } else {
            da = -cur.grad[0];
            db = -cur.grad[1];
        }
        const double slope = da * cur.grad[0] + db * cur.grad[1];
        double step = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const PlattParams trial{th.a + step * da, th.b + step * db};
            const double v = detail::fit_objective(calset, trial, false).value;
            if (v <= cur.value + 1e-4 * step * slope) {
                th = trial;
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
        cur = detail::fit_objective(calset, th, true);
    }

    if (!std::isfinite(th.a) || !std::isfinite(th.b)) throw NumericError("platt_fit_batch: non-finite fit");
    if (th.norm() > kParamRadius) {
        // Solve ||start + s (th - start)|| = R for s in (0, 1).
        const double sa = kIdentityParams.a, sb = kIdentityParams.b;
        const double va = th.a - sa, vb = th.b - sb;
        const double qa = va * va + vb * vb;
        const double qb = 2.0 * (sa * va + sb * vb);
        const double qc = sa * sa + sb * sb - kParamRadius * kParamRadius;
        const double s = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
        th = {sa + s * va, sb + s * vb};
    }
    return th;
}

}  // namespace parity_cal
