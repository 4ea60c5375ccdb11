#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qvilab/bellman.hpp"
#include "qvilab/emulation.hpp"
#include "qvilab/ledger.hpp"
#include "qvilab/mdp.hpp"

namespace qvilab {

enum class Algorithm : std::uint8_t { vi, qvi1, qvi2, qvi3, qvi4, qvi5 };

std::string_view algorithm_name(Algorithm a);
Algorithm algorithm_from_name(std::string_view name);

/// One offset-estimator call. In faithful mode
///   true_value - 2 error <= estimate <= true_value.
struct EstimatorRecord {
    char kind;  // 'z' (QVI-2/3/5), 'x' or 'g' (QVI-4)
    std::size_t k, h, s, a;
    double true_value;
    double estimate;
    double error;
};

struct Qvi4Epoch {
    std::size_t k;
    double eps_k;
    ValueTable v0;  // V^(0)_k on entry
    ValueTable v;   // V_k on exit
    Policy pi;
};

struct QviOptions {
    bool record_estimators = false;
    bool record_epochs = false;
    double qvi4_c = 0.001;
    double qvi4_b = 1.0;
    /// QVI-5: use P'' = P instead of a random perturbation within eps/(4 S H^2).
    bool qvi5_zero_perturbation = false;
};

struct QviResult {
    std::string algorithm;
    Policy policy;
    ValueTable values;
    std::optional<QTable> qvalues;
    QueryLedger ledger;
    std::uint64_t seed = 0;
    SubroutineConfig config;
    double wall_seconds = 0.0;
    std::vector<EstimatorRecord> estimators;
    std::vector<Qvi4Epoch> epochs;

    /// {policy, V, Q?, ledger, config, seed}
    nlohmann::json to_json() const;
};

/// QME2 refused its inputs inside QVI-4.
class Qvi4ContractError : public std::runtime_error {
public:
    Qvi4ContractError(std::size_t k, std::size_t h, std::size_t s, std::size_t a, const std::string& what);
    std::size_t k, h, s, a;
};

// Failure budgets.
double qms_budget(std::size_t S, std::size_t H, double delta, bool literal);
/// delta / (4 c~ S A^1.5 H ln(1/delta)), at most delta.
double estimator_budget(std::size_t S, std::size_t A, std::size_t H, double delta, double c_tilde);
/// ceil(log2(H / eps)) + 1
std::size_t qvi4_epochs(std::size_t H, double eps);
/// delta / (4 K H S A)
double qvi4_budget(std::size_t S, std::size_t A, std::size_t H, double eps, double delta);

QviResult qvi1(const FiniteHorizonMdp& mdp, double delta, SubroutineProvider& provider,
               const QviOptions& options = {});
QviResult qvi2(const FiniteHorizonMdp& mdp, double eps, double delta, SubroutineProvider& provider,
               const QviOptions& options = {});
QviResult qvi3(const FiniteHorizonMdp& mdp, double eps, double delta, SubroutineProvider& provider,
               const QviOptions& options = {});
QviResult qvi4(const FiniteHorizonMdp& mdp, double eps, double delta, SubroutineProvider& provider,
               const QviOptions& options = {});
QviResult qvi5(const FiniteHorizonMdp& mdp, double eps, double delta, double eta, SubroutineProvider& provider,
               const QviOptions& options = {});

/// Exact backward induction wrapped as a result (empty ledger charged S^2 A H to O_M).
QviResult vi_result(const FiniteHorizonMdp& mdp);

struct RunParams {
    double eps = 0.1;
    double delta = 0.1;
    double eta = 0.25;
};

QviResult run_algorithm(Algorithm algo, const FiniteHorizonMdp& mdp, const RunParams& params,
                        SubroutineProvider& provider, const QviOptions& options = {});

}  // namespace qvilab
