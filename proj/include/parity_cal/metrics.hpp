#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "parity_cal/distributions.hpp"
#include "parity_cal/errors.hpp"

namespace parity_cal {

inline constexpr int kDefaultParityBins = 30;
inline constexpr int kDefaultQuantileLevels = 100;

struct ReliabilityBin {
    double lo = 0.0;  // bin interval; both equal the level for quantile diagrams
    double hi = 0.0;
    double pred_avg = std::numeric_limits<double>::quiet_NaN();
    double obs_avg = std::numeric_limits<double>::quiet_NaN();
    std::int64_t count = 0;

    bool empty() const noexcept { return count == 0; }
};

/// Per-bin (average prediction, observed frequency, count). For parity
/// diagrams the bins partition [0, 1] and the counts sum to total. For
/// quantile diagrams each entry is one quantile level with count = total.
struct ReliabilityDiagram {
    enum class Kind { Parity, Quantile };

    Kind kind = Kind::Parity;
    std::vector<ReliabilityBin> bins;
    std::int64_t total = 0;
};

inline double prediction_of(const ParityRecord& r, bool use_calibrated) noexcept {
    return use_calibrated ? r.p_cal : r.p_raw;
}

/// Index of the fixed-width bin holding p: [m/n, (m+1)/n) for m < n - 1,
/// with the last bin closed. Values on an edge go to the right-hand bin.
inline std::size_t bin_index(double p, std::size_t n_bins) noexcept {
    const double n = static_cast<double>(n_bins);
    auto m = static_cast<std::int64_t>(std::floor(p * n));
    m = std::clamp<std::int64_t>(m, 0, static_cast<std::int64_t>(n_bins) - 1);
    // floor(p * n) can land one bin off when p is within rounding of an edge.
    if (m + 1 < static_cast<std::int64_t>(n_bins) && p >= static_cast<double>(m + 1) / n) ++m;
    if (m > 0 && p < static_cast<double>(m) / n) --m;
    return static_cast<std::size_t>(m);
}

inline ReliabilityDiagram parity_reliability(std::span<const double> predictions, std::span<const int> outcomes,
                                             int n_bins = kDefaultParityBins) {
    if (predictions.empty()) throw ValidationError("parity_reliability: no records");
    if (predictions.size() != outcomes.size())
        throw ValidationError("parity_reliability: predictions and outcomes differ in length");
    if (n_bins < 1) throw ValidationError("parity_reliability: need at least one bin");

    const auto n = static_cast<std::size_t>(n_bins);
    std::vector<double> pred_sum(n, 0.0), obs_sum(n, 0.0);
    std::vector<double> pred_min(n, 1.0), pred_max(n, 0.0);
    ReliabilityDiagram d;
    d.bins.resize(n);
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const double p = predictions[i];
        if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("parity_reliability: prediction outside [0, 1]");
        if (outcomes[i] != 0 && outcomes[i] != 1) throw ValidationError("parity_reliability: outcome must be 0 or 1");
        const std::size_t m = bin_index(p, n);
        pred_sum[m] += p;
        pred_min[m] = std::min(pred_min[m], p);
        pred_max[m] = std::max(pred_max[m], p);
        obs_sum[m] += outcomes[i];
        ++d.bins[m].count;
    }
    for (std::size_t m = 0; m < n; ++m) {
        auto& bin = d.bins[m];
        bin.lo = static_cast<double>(m) / static_cast<double>(n);
        bin.hi = static_cast<double>(m + 1) / static_cast<double>(n);
        if (bin.count > 0) {
            // Rounding in the sum can push the mean just outside its members' range.
            bin.pred_avg = std::clamp(pred_sum[m] / static_cast<double>(bin.count), pred_min[m], pred_max[m]);
            bin.obs_avg = obs_sum[m] / static_cast<double>(bin.count);
        }
    }
    d.total = static_cast<std::int64_t>(predictions.size());
    return d;
}

inline ReliabilityDiagram parity_reliability(std::span<const ParityRecord> records, int n_bins = kDefaultParityBins,
                                             bool use_calibrated = true) {
    std::vector<double> preds;
    std::vector<int> outs;
    preds.reserve(records.size());
    outs.reserve(records.size());
    for (const auto& r : records) {
        preds.push_back(prediction_of(r, use_calibrated));
        outs.push_back(r.outcome);
    }
    return parity_reliability(preds, outs, n_bins);
}

/// Expected calibration error of a parity diagram; empty bins weigh 0.
inline double pce(const ReliabilityDiagram& d) {
    if (d.total <= 0) throw ValidationError("pce: empty diagram");
    double acc = 0.0;
    for (const auto& b : d.bins)
        if (!b.empty()) acc += static_cast<double>(b.count) / static_cast<double>(d.total) * std::abs(b.obs_avg - b.pred_avg);
    return acc;
}

inline double sharpness(const ReliabilityDiagram& d) {
    if (d.total <= 0) throw ValidationError("sharpness: empty diagram");
    double acc = 0.0;
    for (const auto& b : d.bins)
        if (!b.empty()) acc += static_cast<double>(b.count) / static_cast<double>(d.total) * b.obs_avg * b.obs_avg;
    return acc;
}

/// n equi-spaced levels on [0, 1], endpoints included.
inline std::vector<double> quantile_levels(int n_levels) {
    if (n_levels < 1) throw ValidationError("quantile_levels: need at least one level");
    std::vector<double> levels(static_cast<std::size_t>(n_levels));
    if (n_levels == 1) {
        levels[0] = 0.0;
        return levels;
    }
    for (int i = 0; i < n_levels; ++i) levels[static_cast<std::size_t>(i)] = static_cast<double>(i) / (n_levels - 1);
    return levels;
}

/// Empirical coverage 1/T sum_t 1{y_t <= F_t^{-1}(p_i)} at each level p_i.
inline ReliabilityDiagram quantile_reliability(std::span<const ForecastDistribution> forecasts,
                                               std::span<const double> outcomes,
                                               int n_levels = kDefaultQuantileLevels) {
    if (forecasts.size() != outcomes.size())
        throw ValidationError("quantile_reliability: forecasts and outcomes differ in length");
    if (forecasts.empty()) throw ValidationError("quantile_reliability: no forecasts");
    const auto levels = quantile_levels(n_levels);
    std::vector<std::int64_t> covered(levels.size(), 0);
    for (std::size_t t = 0; t < forecasts.size(); ++t) {
        for (std::size_t i = 0; i < levels.size(); ++i)
            if (outcomes[t] <= quantile_eval(forecasts[t], levels[i])) ++covered[i];
    }
    ReliabilityDiagram d;
    d.kind = ReliabilityDiagram::Kind::Quantile;
    d.total = static_cast<std::int64_t>(forecasts.size());
    d.bins.reserve(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        d.bins.push_back({levels[i], levels[i], levels[i],
                          static_cast<double>(covered[i]) / static_cast<double>(d.total), d.total});
    }
    return d;
}

/// Mean absolute gap between nominal level and observed coverage.
inline double qce(const ReliabilityDiagram& d) {
    if (d.bins.empty()) throw ValidationError("qce: empty diagram");
    double acc = 0.0;
    for (const auto& b : d.bins) acc += std::abs(b.obs_avg - b.pred_avg);
    return acc / static_cast<double>(d.bins.size());
}

/// Fraction of records where 1{p >= 0.5} matches the outcome.
inline double accuracy(std::span<const ParityRecord> records, bool use_calibrated = true) {
    if (records.empty()) throw ValidationError("accuracy: no records");
    std::int64_t hits = 0;
    for (const auto& r : records) hits += ((prediction_of(r, use_calibrated) >= 0.5 ? 1 : 0) == r.outcome);
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

/// Area under the ROC curve via the rank-sum statistic, ties at midrank.
inline double auroc(std::span<const double> predictions, std::span<const int> outcomes) {
    if (predictions.size() != outcomes.size())
        throw ValidationError("auroc: predictions and outcomes differ in length");
    const std::size_t n = predictions.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return predictions[i] < predictions[j]; });

    double pos_rank_sum = 0.0;
    std::int64_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && predictions[order[j + 1]] == predictions[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) {
            if (outcomes[order[k]] == 1) {
                pos_rank_sum += midrank;
                ++n_pos;
            }
        }
        i = j + 1;
    }
    const std::int64_t n_neg = static_cast<std::int64_t>(n) - n_pos;
    if (n_pos == 0 || n_neg == 0) throw UndefinedScoreError("auroc: needs both positive and negative outcomes");
    const double np = static_cast<double>(n_pos);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

inline double auroc(std::span<const ParityRecord> records, bool use_calibrated = true) {
    std::vector<double> preds;
    std::vector<int> outs;
    preds.reserve(records.size());
    outs.reserve(records.size());
    for (const auto& r : records) {
        preds.push_back(prediction_of(r, use_calibrated));
        outs.push_back(r.outcome);
    }
    return auroc(preds, outs);
}

struct MetricsReport {
    std::optional<double> qce;
    double pce = 0.0;
    double sharp = 0.0;
    double acc = 0.0;
    std::optional<double> auroc;  // absent when only one outcome class occurs
};

inline MetricsReport evaluate_records(std::span<const ParityRecord> records, bool use_calibrated = true,
                                      int n_bins = kDefaultParityBins) {
    const auto diagram = parity_reliability(records, n_bins, use_calibrated);
    MetricsReport rep;
    rep.pce = pce(diagram);
    rep.sharp = sharpness(diagram);
    rep.acc = accuracy(records, use_calibrated);
    try {
        rep.auroc = auroc(records, use_calibrated);
    } catch (const UndefinedScoreError&) {
        rep.auroc.reset();
    }
    return rep;
}

}  // namespace parity_cal
