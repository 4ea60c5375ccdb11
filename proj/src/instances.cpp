#include "qvilab/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qvilab/rng.hpp"

namespace qvilab {

namespace {

/// k distinct indices from [0, n), then Dirichlet(1) weights scaled into `row`.
void dirichlet_row(Rng& rng, std::size_t k, double floor, double* row, std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(n - i));
        std::swap(idx[i], idx[j]);
    }
    std::vector<double> w(k);
    double total = 0.0;
    for (auto& x : w) {
        x = rng.exponential();
        total += x;
    }
    const double mass = 1.0 - static_cast<double>(k) * floor;
    for (std::size_t i = 0; i < k; ++i) row[idx[i]] = floor + mass * w[i] / total;
}

std::size_t support_size(std::size_t S, double sparsity) {
    if (!(sparsity > 0.0 && sparsity <= 1.0)) throw std::invalid_argument("sparsity must lie in (0, 1]");
    const auto k = static_cast<std::size_t>(std::ceil(sparsity * static_cast<double>(S) - 1e-9));
    return std::clamp<std::size_t>(k, 1, S);
}

}  // namespace

void HardInstanceSpec::validate() const {
    if (S < 4 || (S - 1) % 3 != 0) throw std::invalid_argument("hard instances need S = 1 mod 3 and S >= 4");
    if (A < 2) throw std::invalid_argument("hard instances need A >= 2");
    if (H < 2) throw std::invalid_argument("hard instances need H >= 2");
    if (s_bar >= block()) throw std::invalid_argument("s_bar outside S_U");
    if (a_bar >= A - 1) throw std::invalid_argument("a_bar outside A_U");
    if (target_good >= block()) throw std::invalid_argument("target outside S_G");
}

FiniteHorizonMdp make_hard_instance(const HardInstanceSpec& spec) {
    spec.validate();
    const auto S = spec.S;
    const auto A = spec.A;
    const auto H = spec.H;
    const auto m = spec.block();
    std::vector<double> P(S * A * S, 0.0);
    std::vector<double> r(S * A, 0.0);
    auto set = [&](std::size_t s, std::size_t a, std::size_t next) { P[(s * A + a) * S + next] = 1.0; };
    for (std::size_t a = 0; a < A; ++a) {
        for (std::size_t i = 0; i < m; ++i) {
            set(spec.good(i), a, spec.good(i));
            r[spec.good(i) * A + a] = 1.0;
            set(spec.bad(i), a, spec.bad(i));
        }
        set(spec.neutral(), a, spec.neutral());
        r[spec.neutral() * A + a] = 0.5;
    }
    Rng rng(stream_seed(spec.seed, 0x4d31));
    for (std::size_t i = 0; i < m; ++i) {
        const auto s = spec.uncertain(i);
        for (std::size_t a = 0; a + 1 < A; ++a) {
            const auto target = spec.bad(static_cast<std::size_t>(rng.below(m)));
            if (spec.variant == HardVariant::M2 && i == spec.s_bar && a == spec.a_bar) {
                set(s, a, spec.good(spec.target_good));
            } else {
                set(s, a, target);
            }
        }
        set(s, A - 1, spec.neutral());
    }
    std::vector<double> transitions;
    std::vector<double> rewards;
    transitions.reserve(H * P.size());
    rewards.reserve(H * r.size());
    for (std::size_t h = 0; h < H; ++h) {
        transitions.insert(transitions.end(), P.begin(), P.end());
        rewards.insert(rewards.end(), r.begin(), r.end());
    }
    return FiniteHorizonMdp(S, A, H, std::move(transitions), std::move(rewards));
}

std::vector<double> hard_instance_optimal_v0(const HardInstanceSpec& spec) {
    spec.validate();
    const double H = static_cast<double>(spec.H);
    const auto m = spec.block();
    std::vector<double> v(spec.S);
    for (std::size_t i = 0; i < m; ++i) {
        v[spec.good(i)] = H;
        v[spec.bad(i)] = 0.0;
        v[spec.uncertain(i)] = (H - 1.0) / 2.0;
    }
    v[spec.neutral()] = H / 2.0;
    if (spec.variant == HardVariant::M2) v[spec.uncertain(spec.s_bar)] = H - 1.0;
    return v;
}

void DiscountedMdp::validate() const {
    if (S == 0 || A == 0) throw std::invalid_argument("empty base mdp");
    if (transitions.size() != S * A * S || rewards.size() != S * A) {
        throw std::invalid_argument("base mdp tables have the wrong size");
    }
}

std::size_t HorizonReductionSpec::horizon() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
    if (!(eps > 0.0 && eps < 0.5)) throw std::invalid_argument("eps must lie in (0, 1/2)");
    return static_cast<std::size_t>(std::ceil(2.0 / (1.0 - gamma) * std::log(2.0 / eps)));
}

FiniteHorizonMdp make_horizon_reduction(const HorizonReductionSpec& spec) {
    spec.base.validate();
    const auto H = spec.horizon();
    const auto Sb = spec.base.S;
    const auto A = spec.base.A;
    const auto S = Sb + 1;
    const auto s0 = Sb;
    std::vector<double> P(S * A * S, 0.0);
    std::vector<double> r(S * A, 0.0);
    for (std::size_t s = 0; s < Sb; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            for (std::size_t n = 0; n < Sb; ++n) P[(s * A + a) * S + n] = spec.gamma * spec.base.prob(s, a, n);
            P[(s * A + a) * S + s0] = 1.0 - spec.gamma;
            r[s * A + a] = spec.base.reward(s, a);
        }
    }
    for (std::size_t a = 0; a < A; ++a) P[(s0 * A + a) * S + s0] = 1.0;
    std::vector<double> transitions;
    std::vector<double> rewards;
    for (std::size_t h = 0; h < H; ++h) {
        transitions.insert(transitions.end(), P.begin(), P.end());
        rewards.insert(rewards.end(), r.begin(), r.end());
    }
    return FiniteHorizonMdp(S, A, H, std::move(transitions), std::move(rewards));
}

DiscountedMdp random_discounted_mdp(std::size_t S, std::size_t A, std::uint64_t seed) {
    Rng rng(seed);
    DiscountedMdp m{S, A, std::vector<double>(S * A * S, 0.0), std::vector<double>(S * A)};
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            m.rewards[s * A + a] = rng.uniform();
            dirichlet_row(rng, S, 0.0, m.transitions.data() + (s * A + a) * S, S);
        }
    }
    return m;
}

FiniteHorizonMdp random_mdp(std::size_t S, std::size_t A, std::size_t H, double sparsity, std::uint64_t seed) {
    const auto k = support_size(S, sparsity);
    Rng rng(seed);
    std::vector<double> transitions(H * S * A * S, 0.0);
    std::vector<double> rewards(H * S * A);
    for (std::size_t i = 0; i < H * S * A; ++i) {
        rewards[i] = rng.uniform();
        dirichlet_row(rng, k, 0.0, transitions.data() + i * S, S);
    }
    return FiniteHorizonMdp(S, A, H, std::move(transitions), std::move(rewards));
}

FiniteHorizonMdp random_sparse_mdp(std::size_t S, std::size_t A, std::size_t H, std::size_t support, double eta,
                                   std::uint64_t seed) {
    if (support < 1 || support > S) throw std::invalid_argument("support must lie in [1, S]");
    if (!(eta >= 0.0 && static_cast<double>(support) * eta <= 1.0)) {
        throw std::invalid_argument("support * eta must not exceed 1");
    }
    Rng rng(seed);
    std::vector<double> transitions(H * S * A * S, 0.0);
    std::vector<double> rewards(H * S * A);
    for (std::size_t i = 0; i < H * S * A; ++i) {
        rewards[i] = rng.uniform();
        dirichlet_row(rng, support, eta, transitions.data() + i * S, S);
    }
    return FiniteHorizonMdp(S, A, H, std::move(transitions), std::move(rewards));
}

Policy random_policy(std::size_t S, std::size_t A, std::size_t H, std::uint64_t seed) {
    Rng rng(seed);
    Policy pi(S, H);
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t s = 0; s < S; ++s) pi(s, h) = static_cast<std::uint32_t>(rng.below(A));
    }
    return pi;
}

Solution brute_force_optimal(const FiniteHorizonMdp& mdp, double cap) {
    const auto S = mdp.num_states();
    const auto A = mdp.num_actions();
    const auto H = mdp.horizon();
    const double count = std::pow(static_cast<double>(A), static_cast<double>(S * H));
    if (count > cap) throw std::invalid_argument("policy space exceeds the brute-force cap");
    const auto total = static_cast<std::uint64_t>(std::llround(count));

    auto decode = [&](std::uint64_t code) {
        Policy pi(S, H);
        for (std::size_t h = 0; h < H; ++h) {
            for (std::size_t s = 0; s < S; ++s) {
                pi(s, h) = static_cast<std::uint32_t>(code % A);
                code /= A;
            }
        }
        return pi;
    };

    // Pass 1: elementwise best value over every layer.
    ValueTable best(S, H);
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t s = 0; s < S; ++s) best(h, s) = -1.0;
    }
    for (std::uint64_t code = 0; code < total; ++code) {
        const auto v = policy_value(mdp, decode(code));
        for (std::size_t h = 0; h < H; ++h) {
            for (std::size_t s = 0; s < S; ++s) best(h, s) = std::max(best(h, s), v(h, s));
        }
    }
    // Pass 2: the optimal set is a product over (s, h), so the first hit in
    // counter order is also the componentwise smallest optimal policy.
    for (std::uint64_t code = 0; code < total; ++code) {
        auto pi = decode(code);
        const auto v = policy_value(mdp, pi);
        bool all = true;
        for (std::size_t h = 0; h < H && all; ++h) {
            for (std::size_t s = 0; s < S && all; ++s) all = v(h, s) >= best(h, s) - kBellmanTol;
        }
        if (!all) continue;
        Solution sol{std::move(pi), v, QTable(S, A, H)};
        for (std::size_t h = 0; h < H; ++h) {
            for (std::size_t s = 0; s < S; ++s) {
                for (std::size_t a = 0; a < A; ++a) {
                    sol.qvalues(h, s, a) = mdp.reward(h, s, a) + expectation(mdp.row(h, s, a), v.layer(h + 1));
                }
            }
        }
        return sol;
    }
    throw std::logic_error("no single policy attains the elementwise optimum");
}

}  // namespace qvilab
