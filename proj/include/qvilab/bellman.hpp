#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qvilab/ledger.hpp"
#include "qvilab/mdp.hpp"
#include "qvilab/rng.hpp"

namespace qvilab {

struct Solution {
    Policy policy;
    ValueTable values;
    QTable qvalues;
};

struct BackupRow {
    std::vector<double> values;
    std::vector<std::uint32_t> actions;
};

/// Backward induction. Ties go to the smallest action index.
Solution exact_value_iteration(const FiniteHorizonMdp& mdp);

/// V^pi for every layer, by backward recursion.
ValueTable policy_value(const FiniteHorizonMdp& mdp, const Policy& pi);

/// Q^pi_h(s, a) = r_h(s, a) + P_h(.|s, a) V^pi_{h+1}.
QTable policy_qvalue(const FiniteHorizonMdp& mdp, const Policy& pi);

/// One optimality backup at step h: max and argmax over actions.
BackupRow bellman_backup(const FiniteHorizonMdp& mdp, std::size_t h, std::span<const double> v_next);

/// Fixed-policy backup [T^h_pi u]_s.
std::vector<double> policy_backup(const FiniteHorizonMdp& mdp, const Policy& pi, std::size_t h,
                                  std::span<const double> v_next);

/// Variance of v(s') under P_h(.|s, a), flattened as s * A + a. Negative
/// roundoff is clamped to 0.
std::vector<double> sigma_squared(const FiniteHorizonMdp& mdp, std::size_t h, std::span<const double> v);

/// max over h, s, a of w_h(s, a), where
///   w_h = sigma_h(V^pi_{h+1}) + P_h^pi w_{h+1},  w_{H-1} = sigma_{H-1}(0) = 0,
/// sigma is the standard deviation and (P_h^pi x)(s, a) = sum_s' P_h(s'|s, a) x(s', pi(s', h+1)).
double total_variance_norm(const FiniteHorizonMdp& mdp, const Policy& pi);

struct OptimalityReport {
    double value_gap = 0.0;          // max_h ||V* - V_hat||_inf
    double policy_gap = 0.0;         // max_h ||V* - V^pi||_inf
    std::optional<double> q_gap;     // max_h ||Q* - Q_hat||_inf
    double eps = 0.0;
    bool value_ok = false;
    bool policy_ok = false;
    bool q_ok = true;

    bool ok() const { return value_ok && policy_ok && q_ok; }
};

OptimalityReport eps_optimality_report(const FiniteHorizonMdp& mdp, const Policy& pi,
                                       const ValueTable& v_hat, const QTable* q_hat, double eps);

/// Same, against a precomputed optimal solution.
OptimalityReport eps_optimality_report(const FiniteHorizonMdp& mdp, const Solution& optimal,
                                       const Policy& pi, const ValueTable& v_hat, const QTable* q_hat,
                                       double eps);

/// Draws s' ~ P_h(.|s, a) and charges one classical generative query (G).
std::size_t classical_generative_sample(const FiniteHorizonMdp& mdp, std::size_t h, std::size_t s,
                                        std::size_t a, Rng& rng, QueryLedger* ledger = nullptr);

}  // namespace qvilab
