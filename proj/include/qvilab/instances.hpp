#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qvilab/bellman.hpp"
#include "qvilab/mdp.hpp"

namespace qvilab {

enum class HardVariant : std::uint8_t { M1, M2 };

/// Lower-bound family. States are ordered S_G, S_B, s_N, S_U; actions
/// 0..A-2 form A_U and A-1 is a_N.
struct HardInstanceSpec {
    std::size_t S = 7;
    std::size_t A = 3;
    std::size_t H = 4;
    HardVariant variant = HardVariant::M1;
    std::uint64_t seed = 0;        // picks the S_B successor of each (s, a) in S_U x A_U
    std::size_t s_bar = 0;         // offset inside S_U
    std::size_t a_bar = 0;         // in A_U
    std::size_t target_good = 0;   // offset inside S_G

    std::size_t block() const { return (S - 1) / 3; }
    std::size_t good(std::size_t i) const { return i; }
    std::size_t bad(std::size_t i) const { return block() + i; }
    std::size_t neutral() const { return 2 * block(); }
    std::size_t uncertain(std::size_t i) const { return 2 * block() + 1 + i; }

    void validate() const;
};

FiniteHorizonMdp make_hard_instance(const HardInstanceSpec& spec);

/// Closed-form V*_0 of the instance, in state order.
std::vector<double> hard_instance_optimal_v0(const HardInstanceSpec& spec);

/// Infinite-horizon base (time independent): transitions[s][a][s'], rewards[s][a].
struct DiscountedMdp {
    std::size_t S = 0;
    std::size_t A = 0;
    std::vector<double> transitions;  // (s, a, s')
    std::vector<double> rewards;      // (s, a)

    double prob(std::size_t s, std::size_t a, std::size_t n) const { return transitions[(s * A + a) * S + n]; }
    double reward(std::size_t s, std::size_t a) const { return rewards[s * A + a]; }
    void validate() const;
};

struct HorizonReductionSpec {
    DiscountedMdp base;
    double gamma = 0.9;
    double eps = 0.1;

    /// ceil(2 / (1 - gamma) * ln(2 / eps))
    std::size_t horizon() const;
};

/// Adds the absorbing zero-reward state s0 as the last index.
FiniteHorizonMdp make_horizon_reduction(const HorizonReductionSpec& spec);

/// Seeded random base for reduction tests; rewards uniform, dense Dirichlet rows.
DiscountedMdp random_discounted_mdp(std::size_t S, std::size_t A, std::uint64_t seed);

/// Rewards uniform in [0, 1]; each row supported on ceil(sparsity S) states
/// with Dirichlet(1) weights.
FiniteHorizonMdp random_mdp(std::size_t S, std::size_t A, std::size_t H, double sparsity, std::uint64_t seed);

/// Same, but every nonzero probability is at least eta: support size
/// `support` with weights eta + (1 - support eta) Dirichlet(1).
FiniteHorizonMdp random_sparse_mdp(std::size_t S, std::size_t A, std::size_t H, std::size_t support, double eta,
                                   std::uint64_t seed);

/// Uniformly random deterministic policy.
Policy random_policy(std::size_t S, std::size_t A, std::size_t H, std::uint64_t seed);

/// Exhaustive search over all A^(S H) deterministic policies.
Solution brute_force_optimal(const FiniteHorizonMdp& mdp, double cap = 1e6);

}  // namespace qvilab
