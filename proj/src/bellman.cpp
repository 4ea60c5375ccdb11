#include "qvilab/bellman.hpp"

#include <algorithm>
#include <cmath>

namespace qvilab {

namespace {

double q_entry(const FiniteHorizonMdp& mdp, std::size_t h, std::size_t s, std::size_t a,
               std::span<const double> v_next) {
    return mdp.reward(h, s, a) + expectation(mdp.row(h, s, a), v_next);
}

double sup_gap(std::span<const double> a, std::span<const double> b) {
    double g = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) g = std::max(g, std::abs(a[i] - b[i]));
    return g;
}

}  // namespace

BackupRow bellman_backup(const FiniteHorizonMdp& mdp, std::size_t h, std::span<const double> v_next) {
    const auto S = mdp.num_states();
    const auto A = mdp.num_actions();
    BackupRow out{std::vector<double>(S), std::vector<std::uint32_t>(S)};
    std::vector<double> q(A);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) q[a] = q_entry(mdp, h, s, a, v_next);
        const auto best = argmax_first(q);
        out.values[s] = q[best];
        out.actions[s] = static_cast<std::uint32_t>(best);
    }
    return out;
}

Solution exact_value_iteration(const FiniteHorizonMdp& mdp) {
    const auto S = mdp.num_states();
    const auto A = mdp.num_actions();
    const auto H = mdp.horizon();
    Solution sol{Policy(S, H), ValueTable(S, H), QTable(S, A, H)};
    for (std::size_t h = H; h-- > 0;) {
        const auto v_next = sol.values.layer(h + 1);
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < A; ++a) sol.qvalues(h, s, a) = q_entry(mdp, h, s, a, v_next);
            const auto best = argmax_first(sol.qvalues.row(h, s));
            sol.policy(s, h) = static_cast<std::uint32_t>(best);
            sol.values(h, s) = sol.qvalues(h, s, best);
        }
    }
    return sol;
}

std::vector<double> policy_backup(const FiniteHorizonMdp& mdp, const Policy& pi, std::size_t h,
                                  std::span<const double> v_next) {
    std::vector<double> out(mdp.num_states());
    for (std::size_t s = 0; s < out.size(); ++s) out[s] = q_entry(mdp, h, s, pi(s, h), v_next);
    return out;
}

ValueTable policy_value(const FiniteHorizonMdp& mdp, const Policy& pi) {
    ValueTable v(mdp.num_states(), mdp.horizon());
    for (std::size_t h = mdp.horizon(); h-- > 0;) {
        const auto row = policy_backup(mdp, pi, h, v.layer(h + 1));
        std::copy(row.begin(), row.end(), v.layer(h).begin());
    }
    return v;
}

QTable policy_qvalue(const FiniteHorizonMdp& mdp, const Policy& pi) {
    const auto v = policy_value(mdp, pi);
    QTable q(mdp.num_states(), mdp.num_actions(), mdp.horizon());
    for (std::size_t h = 0; h < mdp.horizon(); ++h) {
        for (std::size_t s = 0; s < mdp.num_states(); ++s) {
            for (std::size_t a = 0; a < mdp.num_actions(); ++a) q(h, s, a) = q_entry(mdp, h, s, a, v.layer(h + 1));
        }
    }
    return q;
}

std::vector<double> sigma_squared(const FiniteHorizonMdp& mdp, std::size_t h, std::span<const double> v) {
    const auto S = mdp.num_states();
    const auto A = mdp.num_actions();
    std::vector<double> sq(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) sq[i] = v[i] * v[i];
    std::vector<double> out(S * A);
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < A; ++a) {
            const auto row = mdp.row(h, s, a);
            const double m = expectation(row, v);
            out[s * A + a] = std::max(0.0, expectation(row, sq) - m * m);
        }
    }
    return out;
}

double total_variance_norm(const FiniteHorizonMdp& mdp, const Policy& pi) {
    const auto S = mdp.num_states();
    const auto A = mdp.num_actions();
    const auto H = mdp.horizon();
    const auto v = policy_value(mdp, pi);
    std::vector<double> w(S * A, 0.0);       // w_{h+1}
    std::vector<double> w_pi(S, 0.0);        // w_{h+1}(s', pi(s', h+1))
    std::vector<double> next(S * A);
    double best = 0.0;
    for (std::size_t h = H; h-- > 0;) {
        const auto var = sigma_squared(mdp, h, v.layer(h + 1));
        for (std::size_t s = 0; s < S; ++s) {
            for (std::size_t a = 0; a < A; ++a) {
                next[s * A + a] = std::sqrt(var[s * A + a]) + expectation(mdp.row(h, s, a), w_pi);
                best = std::max(best, next[s * A + a]);
            }
        }
        w.swap(next);
        for (std::size_t s = 0; s < S; ++s) w_pi[s] = w[s * A + pi(s, h)];
    }
    return best;
}

OptimalityReport eps_optimality_report(const FiniteHorizonMdp& mdp, const Solution& optimal,
                                       const Policy& pi, const ValueTable& v_hat, const QTable* q_hat,
                                       double eps) {
    OptimalityReport rep;
    rep.eps = eps;
    const auto v_pi = policy_value(mdp, pi);
    for (std::size_t h = 0; h < mdp.horizon(); ++h) {
        rep.value_gap = std::max(rep.value_gap, sup_gap(optimal.values.layer(h), v_hat.layer(h)));
        rep.policy_gap = std::max(rep.policy_gap, sup_gap(optimal.values.layer(h), v_pi.layer(h)));
    }
    if (q_hat != nullptr) {
        double g = 0.0;
        for (std::size_t h = 0; h < mdp.horizon(); ++h) {
            for (std::size_t s = 0; s < mdp.num_states(); ++s) {
                g = std::max(g, sup_gap(optimal.qvalues.row(h, s), q_hat->row(h, s)));
            }
        }
        rep.q_gap = g;
        rep.q_ok = g <= eps + kBellmanTol;
    }
    rep.value_ok = rep.value_gap <= eps + kBellmanTol;
    rep.policy_ok = rep.policy_gap <= eps + kBellmanTol;
    return rep;
}

OptimalityReport eps_optimality_report(const FiniteHorizonMdp& mdp, const Policy& pi,
                                       const ValueTable& v_hat, const QTable* q_hat, double eps) {
    return eps_optimality_report(mdp, exact_value_iteration(mdp), pi, v_hat, q_hat, eps);
}

std::size_t classical_generative_sample(const FiniteHorizonMdp& mdp, std::size_t h, std::size_t s,
                                        std::size_t a, Rng& rng, QueryLedger* ledger) {
    if (ledger != nullptr) ledger->charge(Oracle::G, 1);
    const auto row = mdp.row(h, s, a);
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] <= 0.0) continue;
        acc += row[i];
        last = i;
        if (u < acc) return i;
    }
    return last;  // u landed in the roundoff tail
}

}  // namespace qvilab
