#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qvilab/emulation.hpp"
#include "qvilab/ledger.hpp"
#include "qvilab/qvi.hpp"

namespace qvilab {

inline constexpr std::string_view kResultsVersion = "# qvilab-results v1";

enum class MdpKind : std::uint8_t { file, random, sparse, hard_m1, hard_m2 };

std::string_view mdp_kind_name(MdpKind k);
MdpKind mdp_kind_from_name(std::string_view name);

struct MdpSource {
    MdpKind kind = MdpKind::random;
    std::string path;          // kind == file
    double sparsity = 1.0;     // kind == random
    std::size_t support = 2;   // kind == sparse; min probability is the eta axis value
    /// Same mdp at every point of a trial (only meaningful when S, A, H are fixed).
    bool shared_across_points = false;
};

struct ExperimentConfig {
    Algorithm algorithm = Algorithm::qvi3;
    MdpSource mdp;
    std::vector<std::size_t> S = {4};
    std::vector<std::size_t> A = {2};
    std::vector<std::size_t> H = {4};
    std::vector<double> eps = {0.3};
    std::vector<double> delta = {0.1};
    std::vector<double> eta = {0.25};
    std::size_t trials = 1;
    SubroutineConfig subroutines;
    std::uint64_t master_seed = 0;
    bool record_wall_time = false;
    /// Compare against exact VI (skip for very large sweeps).
    bool evaluate = true;

    void validate() const;
    nlohmann::json to_json() const;
};

struct ExperimentPoint {
    std::size_t index;
    std::size_t S, A, H;
    double eps, delta, eta;
};

std::vector<ExperimentPoint> expand_points(const ExperimentConfig& config);

struct ResultRow {
    std::size_t point = 0;
    std::size_t trial = 0;
    std::string algorithm;
    std::size_t S = 0, A = 0, H = 0;
    double eps = 0.0, delta = 0.0, eta = 0.0;
    std::uint64_t seed = 0;
    bool skipped = false;
    std::string reason;
    bool success = false;
    double value_gap = 0.0;
    double policy_gap = 0.0;
    std::optional<double> q_gap;
    std::vector<std::uint64_t> ledger = std::vector<std::uint64_t>(kNumOracles, 0);
    std::uint64_t ledger_total = 0;
    std::optional<double> wall_seconds;
};

/// Per-(point, trial) seeds. Streams 1 and 2 of the master seed feed the mdp
/// generator and the subroutine rng.
std::uint64_t mdp_seed(std::uint64_t master, std::size_t point, std::size_t trial, bool shared);
std::uint64_t subroutine_seed(std::uint64_t master, std::size_t point, std::size_t trial);

std::vector<ResultRow> run_rows(const ExperimentConfig& config);

std::string results_csv(const std::vector<ResultRow>& rows, bool with_wall_time);
std::vector<ResultRow> parse_results_csv(const std::string& text);

/// Writes the CSV to `path` and the config to `path + ".json"`.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const std::string& path);

enum class Axis : std::uint8_t { S, A, H, eps, inv_eps, delta, eta };
Axis axis_from_name(std::string_view name);
std::string_view axis_name(Axis a);

struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Least squares of log(mean ledger_total) on log(axis value), one sample per
/// distinct axis value, 95% Student-t interval on the slope.
ScalingFit fit_scaling(const std::vector<ResultRow>& rows, Axis axis, double confidence = 0.95);
ScalingFit fit_scaling(const std::vector<double>& x, const std::vector<double>& y, double confidence = 0.95);
ScalingFit fit_scaling_file(const std::string& path, Axis axis, double confidence = 0.95);

}  // namespace qvilab
