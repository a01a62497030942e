#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

#include "parity_cal/errors.hpp"
#include "parity_cal/platt.hpp"

namespace parity_cal {

/// Symmetric 2x2 matrix [[aa, ab], [ab, bb]].
struct Sym2 {
    double aa = 0.0;
    double ab = 0.0;
    double bb = 0.0;

    static constexpr Sym2 scaled_identity(double s) noexcept { return {s, 0.0, s}; }

    double det() const noexcept { return aa * bb - ab * ab; }
    double trace() const noexcept { return aa + bb; }

    std::array<double, 2> apply(double x, double y) const noexcept {
        return {aa * x + ab * y, ab * x + bb * y};
    }

    Sym2 inverse() const {
        const double d = det();
        if (!(d > 0.0) || !std::isfinite(d)) throw NumericError("Sym2::inverse: matrix is not positive definite");
        return {bb / d, -ab / d, aa / d};
    }

    // Eigenvalues in ascending order.
    std::array<double, 2> eigenvalues() const noexcept {
        const double half_tr = 0.5 * (aa + bb);
        const double r = std::hypot(0.5 * (aa - bb), ab);
        return {half_tr - r, half_tr + r};
    }

    friend bool operator==(const Sym2&, const Sym2&) = default;
};

/// Minimizer of (x - target)^T metric (x - target) over ||x||_2 <= radius.
///
/// Inside the ball the target is returned unchanged. Otherwise the KKT
/// point x(mu) = (metric + mu I)^{-1} metric target is found by bisection on
/// the multiplier mu in the metric's eigenbasis, and the result is placed
/// exactly on the sphere.
inline PlattParams project_onto_ball(const PlattParams& target, const Sym2& metric, double radius = kParamRadius) {
    if (target.norm() <= radius) return target;

    const double phi = 0.5 * std::atan2(2.0 * metric.ab, metric.aa - metric.bb);
    const double c = std::cos(phi), s = std::sin(phi);
    // Eigenpairs: (l1, (c, s)) and (l2, (-s, c)).
    const double l1 = metric.aa * c * c + 2.0 * metric.ab * c * s + metric.bb * s * s;
    const double l2 = metric.aa * s * s - 2.0 * metric.ab * c * s + metric.bb * c * c;
    const double t1 = c * target.a + s * target.b;
    const double t2 = -s * target.a + c * target.b;

    auto norm_at = [&](double mu) { return std::hypot(l1 * t1 / (l1 + mu), l2 * t2 / (l2 + mu)); };

    double lo = 0.0;
    double hi = std::max(l1, l2) * std::hypot(t1, t2) / radius;
    while (norm_at(hi) > radius) hi *= 2.0;
    for (int iter = 0; iter < 400 && hi - lo > 1e-10 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (norm_at(mid) > radius) lo = mid; else hi = mid;
    }
    const double mu = hi;
    const double e1 = l1 * t1 / (l1 + mu);
    const double e2 = l2 * t2 / (l2 + mu);
    PlattParams out{c * e1 - s * e2, s * e1 + c * e2};
    const double n = out.norm();
    if (n > 0.0) {
        out.a *= radius / n;
        out.b *= radius / n;
    }
    return out;
}

/// Online Newton Step state for Platt parameters.
class OnsState {
public:
    static constexpr double kDefaultGamma = 0.1;
    static constexpr double kDefaultD = 1.0;
    // A^{-1} is rebuilt from A after this many rank-one updates.
    static constexpr std::int64_t kInverseRefreshPeriod = 1'000'000;

    explicit OnsState(double gamma = kDefaultGamma, double D = kDefaultD, PlattParams theta = kIdentityParams)
        : theta_(theta), gamma_(gamma), D_(D) {
        if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ValidationError("ons: gamma must be > 0");
        if (!(D > 0.0) || !std::isfinite(D)) throw ValidationError("ons: D must be > 0");
        if (!(theta.norm() <= kParamRadius)) throw ValidationError("ons: initial parameters outside the ball");
        const double diag = 1.0 / (gamma * D);
        A_ = Sym2::scaled_identity(diag * diag);
        A_inv_ = A_.inverse();
    }

    const PlattParams& theta() const noexcept { return theta_; }
    const Sym2& A() const noexcept { return A_; }
    const Sym2& A_inv() const noexcept { return A_inv_; }
    double gamma() const noexcept { return gamma_; }
    double D() const noexcept { return D_; }
    std::int64_t step_count() const noexcept { return steps_; }

    double predict(double p) const noexcept { return platt_apply(theta_, p); }

    /// Gradient of the log-loss at theta for one observation.
    std::array<double, 2> gradient(double p, int y) const noexcept {
        const double z = platt_feature(p);
        const double r = sigmoid(theta_.a * z + theta_.b) - y;
        return {r * z, r};
    }

    void update(double p, int y) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("ons: p outside [0, 1]");
        if (y != 0 && y != 1) throw ValidationError("ons: label must be 0 or 1");
        const auto g = gradient(p, y);
        if (!std::isfinite(g[0]) || !std::isfinite(g[1])) throw NumericError("ons: non-finite gradient");

        A_.aa += g[0] * g[0];
        A_.ab += g[0] * g[1];
        A_.bb += g[1] * g[1];
        ++steps_;
        if (steps_ % kInverseRefreshPeriod == 0) {
            A_inv_ = A_.inverse();
        } else {
            // Sherman-Morrison: (A + g g^T)^{-1} = A^{-1} - (A^{-1} g)(A^{-1} g)^T / (1 + g^T A^{-1} g).
            const auto u = A_inv_.apply(g[0], g[1]);
            const double denom = 1.0 + g[0] * u[0] + g[1] * u[1];
            A_inv_.aa -= u[0] * u[0] / denom;
            A_inv_.ab -= u[0] * u[1] / denom;
            A_inv_.bb -= u[1] * u[1] / denom;
        }

        const auto dir = A_inv_.apply(g[0], g[1]);
        const PlattParams newton{theta_.a - dir[0] / gamma_, theta_.b - dir[1] / gamma_};
        theta_ = project_onto_ball(newton, A_);
    }

private:
    PlattParams theta_;
    Sym2 A_;
    Sym2 A_inv_;
    double gamma_;
    double D_;
    std::int64_t steps_ = 0;
};

/// Value-semantics form of OnsState::update.
inline OnsState ons_step(OnsState state, double p, int y) {
    state.update(p, y);
    return state;
}

}  // namespace parity_cal
