#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "parity_cal/errors.hpp"
#include "parity_cal/normal.hpp"

namespace parity_cal {

/// Unbounded quantiles at p = 0 and p = 1 are reported as mu -/+ this many
/// standard deviations of the relevant Gaussian piece.
inline constexpr double kQuantileClampSigmas = 8.0;

/// Relative floor applied to a piecewise-Gaussian segment's scale when two
/// adjacent quantile values coincide.
inline constexpr double kSegmentSigmaFloor = 1e-9;

class Gaussian {
public:
    Gaussian(double mu, double sigma) : mu_(mu), sigma_(sigma) {
        if (!std::isfinite(mu)) throw ValidationError("gaussian: mu must be finite");
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw ValidationError("gaussian: sigma must be finite and > 0");
    }

    double mu() const noexcept { return mu_; }
    double sigma() const noexcept { return sigma_; }

    double cdf(double y) const { return std_normal_cdf((y - mu_) / sigma_); }

    double quantile(double p) const {
        const double lo = mu_ - kQuantileClampSigmas * sigma_;
        const double hi = mu_ + kQuantileClampSigmas * sigma_;
        if (p <= 0.0) return lo;
        if (p >= 1.0) return hi;
        return std::clamp(mu_ + sigma_ * std_normal_quantile(p), lo, hi);
    }

private:
    double mu_;
    double sigma_;
};

/// Predictive cdf known only through a finite set of quantiles, filled in
/// by one Gaussian per pair of adjacent quantiles. Each segment k is the
/// normal distribution whose tau_k and tau_{k+1} quantiles are x_k and
/// x_{k+1}; outside the knots the first and last segments extrapolate.
class QuantileSet {
public:
    QuantileSet(std::vector<double> levels, std::vector<double> values)
        : levels_(std::move(levels)), values_(std::move(values)) {
        if (levels_.size() != values_.size())
            throw ValidationError("quantile set: levels and values differ in length");
        if (levels_.size() < 2) throw ValidationError("quantile set: need at least two quantiles");
        for (std::size_t k = 0; k < levels_.size(); ++k) {
            if (!(levels_[k] > 0.0 && levels_[k] < 1.0))
                throw ValidationError("quantile set: levels must lie in (0, 1)");
            if (!std::isfinite(values_[k])) throw ValidationError("quantile set: values must be finite");
            if (k > 0 && !(levels_[k] > levels_[k - 1]))
                throw ValidationError("quantile set: levels must be strictly increasing");
            if (k > 0 && values_[k] < values_[k - 1])
                throw ValidationError("quantile set: values must be non-decreasing");
        }
        z_.reserve(levels_.size());
        for (double tau : levels_) z_.push_back(std_normal_quantile(tau));
        sigma_.reserve(levels_.size() - 1);
        for (std::size_t k = 0; k + 1 < levels_.size(); ++k) {
            const double floor = kSegmentSigmaFloor * std::max(1.0, std::abs(values_[k]));
            const double s = (values_[k + 1] - values_[k]) / (z_[k + 1] - z_[k]);
            sigma_.push_back(std::max(s, floor));
        }
    }

    const std::vector<double>& levels() const noexcept { return levels_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t segments() const noexcept { return sigma_.size(); }

    double segment_sigma(std::size_t k) const { return sigma_.at(k); }
    double segment_mu(std::size_t k) const { return values_.at(k) - sigma_.at(k) * z_.at(k); }

    double cdf(double y) const {
        const std::size_t k = segment_for_value(y);
        // Algebraically (y - mu_k) / sigma_k; this form is exact at the knot.
        const double z = z_[k] + (y - values_[k]) / sigma_[k];
        return std::clamp(std_normal_cdf(z), 0.0, 1.0);
    }

    double quantile(double p) const {
        const std::size_t last = segments() - 1;
        const double lo = segment_mu(0) - kQuantileClampSigmas * sigma_[0];
        const double hi = segment_mu(last) + kQuantileClampSigmas * sigma_[last];
        if (p <= 0.0) return lo;
        if (p >= 1.0) return hi;
        const auto it = std::upper_bound(levels_.begin(), levels_.end(), p);
        std::size_t k = it == levels_.begin() ? 0 : static_cast<std::size_t>(it - levels_.begin()) - 1;
        k = std::min(k, last);
        return std::clamp(values_[k] + sigma_[k] * (std_normal_quantile(p) - z_[k]), lo, hi);
    }

private:
    // Segment k covers x_k <= y < x_{k+1}; the ends extrapolate.
    std::size_t segment_for_value(double y) const {
        const auto it = std::upper_bound(values_.begin(), values_.end(), y);
        if (it == values_.begin()) return 0;
        return std::min(static_cast<std::size_t>(it - values_.begin()) - 1, segments() - 1);
    }

    std::vector<double> levels_;
    std::vector<double> values_;
    std::vector<double> z_;
    std::vector<double> sigma_;
};

/// Normal(mu, sigma) restricted to [lower, upper]; either bound may be infinite.
class TruncatedGaussian {
public:
    TruncatedGaussian(double mu, double sigma, double lower, double upper)
        : mu_(mu), sigma_(sigma), lower_(lower), upper_(upper) {
        if (!std::isfinite(mu)) throw ValidationError("truncated gaussian: mu must be finite");
        if (!(sigma > 0.0) || !std::isfinite(sigma))
            throw ValidationError("truncated gaussian: sigma must be finite and > 0");
        if (std::isnan(lower) || std::isnan(upper) || !(lower < upper))
            throw ValidationError("truncated gaussian: need lower < upper");
        zlo_ = (lower_ - mu_) / sigma_;
        zhi_ = (upper_ - mu_) / sigma_;
        right_tail_ = zlo_ >= 0.0;
        mass_ = right_tail_ ? std_normal_sf(zlo_) - std_normal_sf(zhi_)
                            : std_normal_cdf(zhi_) - std_normal_cdf(zlo_);
        if (!(mass_ > 0.0)) throw ValidationError("truncated gaussian: truncation interval has no mass");
    }

    double mu() const noexcept { return mu_; }
    double sigma() const noexcept { return sigma_; }
    double lower() const noexcept { return lower_; }
    double upper() const noexcept { return upper_; }

    double cdf(double y) const {
        if (y <= lower_) return 0.0;
        if (y >= upper_) return 1.0;
        const double z = (y - mu_) / sigma_;
        const double v = right_tail_ ? (std_normal_sf(zlo_) - std_normal_sf(z)) / mass_
                                     : (std_normal_cdf(z) - std_normal_cdf(zlo_)) / mass_;
        return std::clamp(v, 0.0, 1.0);
    }

    double pdf(double y) const {
        if (y < lower_ || y > upper_) return 0.0;
        return std_normal_pdf((y - mu_) / sigma_) / (sigma_ * mass_);
    }

    // Finite stand-ins for infinite bounds, kQuantileClampSigmas away from
    // the nearest finite anchor.
    double finite_lower() const {
        if (std::isfinite(lower_)) return lower_;
        return std::min(mu_, upper_) - kQuantileClampSigmas * sigma_;
    }
    double finite_upper() const {
        if (std::isfinite(upper_)) return upper_;
        return std::max(mu_, lower_) + kQuantileClampSigmas * sigma_;
    }

    double quantile(double u) const {
        const double lo = finite_lower();
        const double hi = finite_upper();
        if (u <= 0.0) return lo;
        if (u >= 1.0) return hi;
        const double z = right_tail_ ? -std_normal_quantile(std_normal_sf(zlo_) - u * mass_)
                                     : std_normal_quantile(std_normal_cdf(zlo_) + u * mass_);
        return std::clamp(mu_ + sigma_ * z, lo, hi);
    }

private:
    double mu_;
    double sigma_;
    double lower_;
    double upper_;
    double zlo_ = 0.0;
    double zhi_ = 0.0;
    double mass_ = 1.0;
    bool right_tail_ = false;
};

class TruncatedGaussianMixture {
public:
    TruncatedGaussianMixture(std::vector<double> weights, std::vector<TruncatedGaussian> components)
        : weights_(std::move(weights)), components_(std::move(components)) {
        if (weights_.empty() || weights_.size() != components_.size())
            throw ValidationError("mixture: need one weight per component and at least one component");
        double total = 0.0;
        for (double w : weights_) {
            if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("mixture: weights must be >= 0");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) throw ValidationError("mixture: weights must sum to 1");
        lo_ = std::numeric_limits<double>::infinity();
        hi_ = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < components_.size(); ++i) {
            if (weights_[i] == 0.0) continue;
            lo_ = std::min(lo_, components_[i].finite_lower());
            hi_ = std::max(hi_, components_[i].finite_upper());
        }
    }

    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<TruncatedGaussian>& components() const noexcept { return components_; }

    double cdf(double y) const {
        double v = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i)
            if (weights_[i] > 0.0) v += weights_[i] * components_[i].cdf(y);
        return std::clamp(v, 0.0, 1.0);
    }

    double pdf(double y) const {
        double v = 0.0;
        for (std::size_t i = 0; i < components_.size(); ++i)
            if (weights_[i] > 0.0) v += weights_[i] * components_[i].pdf(y);
        return v;
    }

    // Smallest finite lower end and largest finite upper end over the
    // components carrying weight; these are the p = 0 and p = 1 quantiles.
    double support_lower() const noexcept { return lo_; }
    double support_upper() const noexcept { return hi_; }

    double quantile(double p) const {
        if (p <= 0.0) return lo_;
        if (p >= 1.0) return hi_;
        double lo = lo_;
        double hi = hi_;
        if (cdf(lo) >= p) return lo;
        if (cdf(hi) <= p) return hi;
        // Safeguarded Newton on cdf(y) = p; bisection when the density
        // vanishes or the step leaves the bracket.
        double y = 0.5 * (lo + hi);
        for (int iter = 0; iter < 200; ++iter) {
            const double f = cdf(y) - p;
            if (f == 0.0) return y;
            if (f < 0.0) lo = y; else hi = y;
            const double dens = pdf(y);
            const double newton = dens > 0.0 ? y - f / dens : y;
            const double tol = 1e-14 * std::max(1.0, std::abs(y));
            if (newton >= lo && newton <= hi && std::abs(newton - y) <= tol) return newton;
            y = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
            if (hi - lo <= tol) break;
        }
        return y;
    }

private:
    std::vector<double> weights_;
    std::vector<TruncatedGaussian> components_;
    double lo_ = 0.0;
    double hi_ = 0.0;
};

/// The expert already speaks in parity probabilities (binary classifier).
class DirectProbability {
public:
    explicit DirectProbability(double p) : p_(p) {
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("direct probability: p must lie in [0, 1]");
    }
    double p() const noexcept { return p_; }

private:
    double p_;
};

using ForecastDistribution =
    std::variant<Gaussian, QuantileSet, TruncatedGaussianMixture, DirectProbability>;

/// One timestep's parity forecast: prehoc probability, recalibrated
/// probability and the realized outcome 1{y_t <= y_{t-1}}.
struct ParityRecord {
    std::int64_t t = 0;
    double p_raw = 0.5;
    double p_cal = 0.5;
    int outcome = 0;
};

inline void validate_record(const ParityRecord& r) {
    if (!(r.p_raw >= 0.0 && r.p_raw <= 1.0)) throw ValidationError("record: p_raw outside [0, 1]");
    if (!(r.p_cal >= 0.0 && r.p_cal <= 1.0)) throw ValidationError("record: p_cal outside [0, 1]");
    if (r.outcome != 0 && r.outcome != 1) throw ValidationError("record: outcome must be 0 or 1");
}

inline double cdf_eval(const ForecastDistribution& dist, double y) {
    return std::visit(
        [y](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DirectProbability>) {
                throw UnsupportedVariantError("cdf_eval: a direct probability has no cdf");
            } else {
                return d.cdf(y);
            }
        },
        dist);
}

inline double quantile_eval(const ForecastDistribution& dist, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile_eval: p must lie in [0, 1]");
    return std::visit(
        [p](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DirectProbability>) {
                throw UnsupportedVariantError("quantile_eval: a direct probability has no quantiles");
            } else {
                return d.quantile(p);
            }
        },
        dist);
}

/// Implied probability that the next value does not exceed the previous
/// one: F_t(y_{t-1}), or the expert's own probability when it is direct.
inline double parity_prob(const ForecastDistribution& dist, double y_prev) {
    if (const auto* direct = std::get_if<DirectProbability>(&dist)) return direct->p();
    return cdf_eval(dist, y_prev);
}

inline double piecewise_gaussian_parity(std::span<const double> levels, std::span<const double> values,
                                        double y_prev) {
    const QuantileSet qs({levels.begin(), levels.end()}, {values.begin(), values.end()});
    return qs.cdf(y_prev);
}

/// 1 when the series did not increase; ties count as a decrease.
inline int parity_outcome(double y_t, double y_prev) noexcept { return y_t <= y_prev ? 1 : 0; }

/// The seven quantile levels used by the COVID-19 Forecast Hub.
inline const std::vector<double>& covid_hub_levels() {
    static const std::vector<double> levels{0.025, 0.1, 0.25, 0.5, 0.75, 0.9, 0.975};
    return levels;
}

}  // namespace parity_cal
