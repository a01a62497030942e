#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "parity_cal/distributions.hpp"
#include "parity_cal/errors.hpp"
#include "parity_cal/platt.hpp"

namespace parity_cal {

/// Deterministic generator for streams and tests. Variates are derived
/// from raw 64-bit mt19937_64 output by inverse-cdf transforms only, so a
/// seed fixes the stream on every platform.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int bernoulli(double p) { return uniform() < p ? 1 : 0; }

    double normal(double mu = 0.0, double sigma = 1.0) { return mu + sigma * std_normal_quantile(uniform()); }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

/// Standard normal truncated to (-inf, 0).
inline TruncatedGaussian negative_half_normal() {
    return {0.0, 1.0, -std::numeric_limits<double>::infinity(), 0.0};
}

/// Standard normal truncated to [0, inf).
inline TruncatedGaussian positive_half_normal() {
    return {0.0, 1.0, 0.0, std::numeric_limits<double>::infinity()};
}

/// Equal-weight mixture of the two half normals, i.e. the cdf
/// F(y) = F_-(y) / 2 for y < 0 and 1/2 + F_+(y) / 2 for y >= 0.
inline TruncatedGaussianMixture half_normal_mixture() {
    return {{0.5, 0.5}, {negative_half_normal(), positive_half_normal()}};
}

/// Alternating half-normal series paired with the constant mixture
/// forecaster: quantile calibrated, yet maximally parity miscalibrated.
struct SyntheticStream {
    int horizon = 0;
    std::uint64_t seed = 0;
    std::vector<double> outcomes;                    // Y_1..Y_T
    std::vector<ForecastDistribution> forecasts;     // all the mixture
};

/// Y_t ~ N_- for odd t and N_+ for even t (t is 1-based), each drawn by
/// inverse cdf from one uniform variate.
inline SyntheticStream generate(int horizon, std::uint64_t seed) {
    if (horizon < 2) throw ValidationError("generate: horizon must be >= 2");
    SeededRng rng(seed);
    const auto neg = negative_half_normal();
    const auto pos = positive_half_normal();
    const ForecastDistribution forecaster = half_normal_mixture();

    SyntheticStream s;
    s.horizon = horizon;
    s.seed = seed;
    s.outcomes.reserve(static_cast<std::size_t>(horizon));
    s.forecasts.reserve(static_cast<std::size_t>(horizon));
    for (int t = 1; t <= horizon; ++t) {
        const double u = rng.uniform();
        s.outcomes.push_back(t % 2 == 1 ? neg.quantile(u) : pos.quantile(u));
        s.forecasts.push_back(forecaster);
    }
    return s;
}

/// Prehoc records for t = 2..T with p_cal left equal to p_raw.
inline std::vector<ParityRecord> prehoc_records(const SyntheticStream& stream) {
    std::vector<ParityRecord> out;
    if (stream.outcomes.size() < 2) return out;
    out.reserve(stream.outcomes.size() - 1);
    for (std::size_t i = 1; i < stream.outcomes.size(); ++i) {
        const double p = parity_prob(stream.forecasts[i], stream.outcomes[i - 1]);
        out.push_back({static_cast<std::int64_t>(i + 1), p, p, parity_outcome(stream.outcomes[i], stream.outcomes[i - 1])});
    }
    return out;
}

/// n labelled points with p ~ Uniform(p_lo, p_hi) and
/// y ~ Bernoulli(platt_apply(truth, p)).
inline std::vector<CalibrationPoint> sample_platt_calset(std::size_t n, const PlattParams& truth, double p_lo,
                                                         double p_hi, SeededRng& rng) {
    std::vector<CalibrationPoint> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = rng.uniform(p_lo, p_hi);
        out.push_back({p, rng.bernoulli(platt_apply(truth, p))});
    }
    return out;
}

}  // namespace parity_cal
