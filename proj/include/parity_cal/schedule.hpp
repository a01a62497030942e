#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parity_cal/distributions.hpp"
#include "parity_cal/errors.hpp"
#include "parity_cal/ons.hpp"
#include "parity_cal/platt.hpp"

namespace parity_cal {

enum class Method { None, IW, MW, OPS };

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::None: return "none";
        case Method::IW: return "iw";
        case Method::MW: return "mw";
        case Method::OPS: return "ops";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    if (s == "none") return Method::None;
    if (s == "iw") return Method::IW;
    if (s == "mw") return Method::MW;
    if (s == "ops") return Method::OPS;
    throw ValidationError("unknown calibration method '" + std::string(s) + "'");
}

struct ScheduleConfig {
    Method method = Method::OPS;
    int uf = 1;     // refit every uf observations (IW, MW)
    int ws = 100;   // moving-window size (MW)
    double gamma = OnsState::kDefaultGamma;
    double D = OnsState::kDefaultD;

    void validate() const {
        if (uf < 1) throw ValidationError("schedule: uf must be >= 1");
        if (ws < 1) throw ValidationError("schedule: ws must be >= 1");
        if (!(gamma > 0.0)) throw ValidationError("schedule: gamma must be > 0");
        if (!(D > 0.0)) throw ValidationError("schedule: D must be > 0");
    }
};

/// Named OPS hyperparameter presets. "default" is gamma = 0.1, D = 1;
/// "covid" is the gamma = 0.001, D = 10 setting used for weekly case counts.
struct OpsPreset {
    double gamma;
    double D;
};

inline std::optional<OpsPreset> find_ops_preset(std::string_view name) {
    if (name == "default") return OpsPreset{OnsState::kDefaultGamma, OnsState::kDefaultD};
    if (name == "covid") return OpsPreset{1e-3, 10.0};
    return std::nullopt;
}

struct StreamPoint {
    std::int64_t t = 0;
    double p_raw = 0.5;
    int outcome = 0;
};

/// Sequential recalibrator. predict() always uses the parameters held
/// before the outcome at that step is observed; observe() then updates.
class ParityCalibrator {
public:
    explicit ParityCalibrator(ScheduleConfig config) : config_(config), ons_(config.gamma, config.D) {
        config_.validate();
    }

    const ScheduleConfig& config() const noexcept { return config_; }

    PlattParams params() const noexcept {
        return config_.method == Method::OPS ? ons_.theta() : params_;
    }

    std::int64_t observed() const noexcept { return observed_; }
    int refit_count() const noexcept { return refits_; }

    double predict(double p_raw) const {
        if (!(p_raw >= 0.0 && p_raw <= 1.0)) throw ValidationError("calibrator: p_raw outside [0, 1]");
        switch (config_.method) {
            case Method::None: return p_raw;
            case Method::OPS: return ons_.predict(p_raw);
            default: return platt_apply(params_, p_raw);
        }
    }

    void observe(double p_raw, int outcome) {
        if (!(p_raw >= 0.0 && p_raw <= 1.0)) throw ValidationError("calibrator: p_raw outside [0, 1]");
        if (outcome != 0 && outcome != 1) throw ValidationError("calibrator: outcome must be 0 or 1");
        ++observed_;
        switch (config_.method) {
            case Method::None: break;
            case Method::OPS: ons_.update(p_raw, outcome); break;
            case Method::IW:
            case Method::MW:
                history_.push_back({p_raw, outcome});
                if (config_.method == Method::MW && history_.size() > static_cast<std::size_t>(config_.ws))
                    history_.erase(history_.begin());
                if (observed_ % config_.uf == 0) {
                    params_ = platt_fit_batch(history_);
                    ++refits_;
                }
                break;
        }
    }

private:
    ScheduleConfig config_;
    OnsState ons_;
    PlattParams params_ = kIdentityParams;
    std::vector<CalibrationPoint> history_;
    std::int64_t observed_ = 0;
    int refits_ = 0;
};

/// Runs one recalibration method over a time-ordered stream of prehoc
/// parity probabilities and outcomes.
inline std::vector<ParityRecord> run_stream(const ScheduleConfig& config, std::span<const StreamPoint> stream) {
    ParityCalibrator cal(config);
    std::vector<ParityRecord> out;
    out.reserve(stream.size());
    for (const auto& pt : stream) {
        out.push_back({pt.t, pt.p_raw, cal.predict(pt.p_raw), pt.outcome});
        cal.observe(pt.p_raw, pt.outcome);
    }
    return out;
}

inline std::vector<StreamPoint> to_stream(std::span<const ParityRecord> records) {
    std::vector<StreamPoint> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back({r.t, r.p_raw, r.outcome});
    return out;
}

/// Prehoc parity stream from a forecast sequence and the observed series:
/// for t >= 2, p_raw = F_t(y_{t-1}) and outcome = 1{y_t <= y_{t-1}}.
/// Timesteps are 1-based unless explicit labels are given.
inline std::vector<StreamPoint> prehoc_stream(std::span<const ForecastDistribution> forecasts,
                                              std::span<const double> outcomes,
                                              std::span<const std::int64_t> timesteps = {}) {
    if (forecasts.size() != outcomes.size())
        throw ValidationError("prehoc_stream: forecasts and outcomes differ in length");
    if (!timesteps.empty() && timesteps.size() != outcomes.size())
        throw ValidationError("prehoc_stream: timestep labels differ in length");
    std::vector<StreamPoint> out;
    if (outcomes.size() < 2) return out;
    out.reserve(outcomes.size() - 1);
    for (std::size_t i = 1; i < outcomes.size(); ++i) {
        const std::int64_t t = timesteps.empty() ? static_cast<std::int64_t>(i + 1) : timesteps[i];
        out.push_back({t, parity_prob(forecasts[i], outcomes[i - 1]), parity_outcome(outcomes[i], outcomes[i - 1])});
    }
    return out;
}

}  // namespace parity_cal
