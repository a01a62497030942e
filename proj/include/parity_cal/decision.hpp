#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parity_cal/distributions.hpp"
#include "parity_cal/errors.hpp"

namespace parity_cal {

/// Restriction levels, ordered from most to least restrictive.
enum class Action { Tight = 0, Mild = 1, None = 2 };

inline constexpr std::array<Action, 3> kActions{Action::Tight, Action::Mild, Action::None};

inline std::string_view to_string(Action a) {
    switch (a) {
        case Action::Tight: return "tight";
        case Action::Mild: return "mild";
        case Action::None: return "none";
    }
    return "?";
}

/// Truth index: the series increased or decreased.
enum class Truth { Increase = 0, Decrease = 1 };

/// 2x3 table of losses l[truth][action]. The entries must satisfy
///   l(dec, None) <= l(dec, Mild) <= l(inc, Tight) <= l(dec, Tight)
///   <= l(inc, Mild) <= l(inc, None),
/// which makes the Bayes action monotone in the probability of increase.
class LossMatrix {
public:
    using Table = std::array<std::array<double, 3>, 2>;

    explicit LossMatrix(const Table& l) : l_(l) {
        for (const auto& row : l_)
            for (double v : row)
                if (!std::isfinite(v)) throw ValidationError("loss matrix: entries must be finite");
        const double chain[] = {at(Truth::Decrease, Action::None), at(Truth::Decrease, Action::Mild),
                                at(Truth::Increase, Action::Tight), at(Truth::Decrease, Action::Tight),
                                at(Truth::Increase, Action::Mild), at(Truth::Increase, Action::None)};
        for (std::size_t i = 0; i + 1 < std::size(chain); ++i)
            if (chain[i] > chain[i + 1])
                throw ValidationError("loss matrix: entries violate the required ordering");
    }

    /// The restriction-policy example: Tight/Mild/None cost 0.3/0.6/1.0 when
    /// cases increase and 0.5/0.2/0.0 when they decrease.
    static LossMatrix restriction_policy() { return LossMatrix(Table{{{0.3, 0.6, 1.0}, {0.5, 0.2, 0.0}}}); }

    double at(Truth truth, Action action) const noexcept {
        return l_[static_cast<std::size_t>(truth)][static_cast<std::size_t>(action)];
    }
    const Table& table() const noexcept { return l_; }

    double expected_loss(Action action, double q_increase) const noexcept {
        return q_increase * at(Truth::Increase, action) + (1.0 - q_increase) * at(Truth::Decrease, action);
    }

private:
    Table l_;
};

struct ActionChoice {
    Action action = Action::Tight;
    bool tied = false;  // another action had the same expected loss
};

/// Argmin of expected loss. Expected losses within a relative 1e-12 of
/// each other count as tied, and ties go to the more restrictive action.
inline ActionChoice choose_action(const LossMatrix& loss, double q_increase) {
    if (!(q_increase >= 0.0 && q_increase <= 1.0))
        throw ValidationError("bayes_action: probability of increase outside [0, 1]");
    double scale = 0.0;
    for (const auto& row : loss.table())
        for (double v : row) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * std::max(scale, std::numeric_limits<double>::min());

    ActionChoice best{kActions[0], false};
    double best_loss = loss.expected_loss(kActions[0], q_increase);
    for (std::size_t i = 1; i < kActions.size(); ++i) {
        const double v = loss.expected_loss(kActions[i], q_increase);
        if (v < best_loss - tol) {
            best = {kActions[i], false};
            best_loss = v;
        } else if (std::abs(v - best_loss) <= tol) {
            best.tied = true;
        }
    }
    return best;
}

inline Action bayes_action(const LossMatrix& loss, double q_increase) {
    return choose_action(loss, q_increase).action;
}

inline Truth truth_of(const ParityRecord& r) noexcept { return r.outcome == 1 ? Truth::Decrease : Truth::Increase; }

struct PolicyResult {
    double cumulative_loss = 0.0;
    std::array<std::int64_t, 3> action_counts{};  // indexed by Action
    std::vector<Action> actions;
    std::int64_t ties = 0;
};

/// Plays the Bayes action for each record, with q = 1 - p since records
/// carry the probability of a decrease.
inline PolicyResult simulate_policy(std::span<const ParityRecord> records, const LossMatrix& loss,
                                    bool use_calibrated = true) {
    if (records.empty()) throw ValidationError("simulate_policy: no records");
    PolicyResult res;
    res.actions.reserve(records.size());
    for (const auto& r : records) {
        const double p = use_calibrated ? r.p_cal : r.p_raw;
        const auto choice = choose_action(loss, 1.0 - p);
        res.actions.push_back(choice.action);
        ++res.action_counts[static_cast<std::size_t>(choice.action)];
        res.ties += choice.tied;
        res.cumulative_loss += loss.at(truth_of(r), choice.action);
    }
    return res;
}

/// Cumulative loss of always playing the same action.
inline PolicyResult fixed_action_policy(std::span<const ParityRecord> records, const LossMatrix& loss, Action action) {
    if (records.empty()) throw ValidationError("fixed_action_policy: no records");
    PolicyResult res;
    res.actions.assign(records.size(), action);
    res.action_counts[static_cast<std::size_t>(action)] = static_cast<std::int64_t>(records.size());
    for (const auto& r : records) res.cumulative_loss += loss.at(truth_of(r), action);
    return res;
}

}  // namespace parity_cal
