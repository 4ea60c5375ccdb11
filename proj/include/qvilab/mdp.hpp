#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qvilab {

inline constexpr double kStochasticTol = 1e-12;
inline constexpr double kBellmanTol = 1e-9;

/// Thrown by validating constructors and loaders; the message names the first
/// violated entry.
class InvalidModel : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Time-dependent finite-horizon MDP with dense tables.
///
/// transitions are indexed (h, s, a, s') and rewards (h, s, a). Instances are
/// immutable after construction and can be shared across threads.
class FiniteHorizonMdp {
public:
    FiniteHorizonMdp(std::size_t num_states, std::size_t num_actions, std::size_t horizon,
                     std::vector<double> transitions, std::vector<double> rewards);

    std::size_t num_states() const noexcept { return states_; }
    std::size_t num_actions() const noexcept { return actions_; }
    std::size_t horizon() const noexcept { return horizon_; }

    /// P_h(. | s, a) as a contiguous row of length S.
    std::span<const double> row(std::size_t h, std::size_t s, std::size_t a) const {
        return {transitions_.data() + ((h * states_ + s) * actions_ + a) * states_, states_};
    }
    double prob(std::size_t h, std::size_t s, std::size_t a, std::size_t next) const {
        return transitions_[((h * states_ + s) * actions_ + a) * states_ + next];
    }
    double reward(std::size_t h, std::size_t s, std::size_t a) const {
        return rewards_[(h * states_ + s) * actions_ + a];
    }

    const std::vector<double>& transitions() const noexcept { return transitions_; }
    const std::vector<double>& rewards() const noexcept { return rewards_; }

    /// Smallest nonzero transition probability over all rows.
    double min_nonzero_probability() const;

private:
    std::size_t states_;
    std::size_t actions_;
    std::size_t horizon_;
    std::vector<double> transitions_;
    std::vector<double> rewards_;
};

/// Deterministic time-indexed decision rule pi(s, h).
class Policy {
public:
    Policy() = default;
    Policy(std::size_t num_states, std::size_t horizon, std::uint32_t fill = 0)
        : states_(num_states), horizon_(horizon), actions_(num_states * horizon, fill) {}

    std::uint32_t operator()(std::size_t s, std::size_t h) const { return actions_[h * states_ + s]; }
    std::uint32_t& operator()(std::size_t s, std::size_t h) { return actions_[h * states_ + s]; }

    std::size_t num_states() const noexcept { return states_; }
    std::size_t horizon() const noexcept { return horizon_; }

    friend bool operator==(const Policy&, const Policy&) = default;

private:
    std::size_t states_ = 0;
    std::size_t horizon_ = 0;
    std::vector<std::uint32_t> actions_;
};

/// V_h(s) for h in [0, H]; layer H is the all-zero terminal layer.
class ValueTable {
public:
    ValueTable() = default;
    ValueTable(std::size_t num_states, std::size_t horizon)
        : states_(num_states), horizon_(horizon), values_((horizon + 1) * num_states, 0.0) {}

    double operator()(std::size_t h, std::size_t s) const { return values_[h * states_ + s]; }
    double& operator()(std::size_t h, std::size_t s) { return values_[h * states_ + s]; }

    std::span<const double> layer(std::size_t h) const { return {values_.data() + h * states_, states_}; }
    std::span<double> layer(std::size_t h) { return {values_.data() + h * states_, states_}; }

    std::size_t num_states() const noexcept { return states_; }
    std::size_t horizon() const noexcept { return horizon_; }

private:
    std::size_t states_ = 0;
    std::size_t horizon_ = 0;
    std::vector<double> values_;
};

/// Q_h(s, a) for h in [0, H).
class QTable {
public:
    QTable() = default;
    QTable(std::size_t num_states, std::size_t num_actions, std::size_t horizon)
        : states_(num_states), actions_(num_actions), horizon_(horizon),
          values_(horizon * num_states * num_actions, 0.0) {}

    double operator()(std::size_t h, std::size_t s, std::size_t a) const {
        return values_[(h * states_ + s) * actions_ + a];
    }
    double& operator()(std::size_t h, std::size_t s, std::size_t a) {
        return values_[(h * states_ + s) * actions_ + a];
    }
    std::span<const double> row(std::size_t h, std::size_t s) const {
        return {values_.data() + (h * states_ + s) * actions_, actions_};
    }

    std::size_t num_states() const noexcept { return states_; }
    std::size_t num_actions() const noexcept { return actions_; }
    std::size_t horizon() const noexcept { return horizon_; }

private:
    std::size_t states_ = 0;
    std::size_t actions_ = 0;
    std::size_t horizon_ = 0;
    std::vector<double> values_;
};

/// Probability vector over a finite set; entries in [0, 1] summing to 1.
class DiscreteDistribution {
public:
    explicit DiscreteDistribution(std::vector<double> probabilities);

    std::span<const double> probabilities() const noexcept { return probabilities_; }
    std::size_t size() const noexcept { return probabilities_.size(); }
    double operator[](std::size_t i) const { return probabilities_[i]; }

private:
    std::vector<double> probabilities_;
};

/// Sum of p[i] * v[i]; compensated (Neumaier) for rows longer than 1000.
double expectation(std::span<const double> p, std::span<const double> v);

/// Index of the largest entry; the smallest index wins ties.
std::size_t argmax_first(std::span<const double> values);

// JSON interchange: {"S","A","H","transitions":[h][s][a][s'],"rewards":[h][s][a]}.
nlohmann::json to_json(const FiniteHorizonMdp& mdp);
FiniteHorizonMdp mdp_from_json(const nlohmann::json& j);
FiniteHorizonMdp load_mdp(const std::string& path);
void save_mdp(const FiniteHorizonMdp& mdp, const std::string& path);

nlohmann::json to_json(const Policy& pi);
nlohmann::json to_json(const ValueTable& v);
nlohmann::json to_json(const QTable& q);

}  // namespace qvilab
