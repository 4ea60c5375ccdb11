#include "qvilab/qvi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "qvilab/rng.hpp"

namespace qvilab {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

void check_eps(double eps, double upper, const char* what) {
    if (!(eps > 0.0 && eps <= upper)) {
        throw std::invalid_argument(std::string("eps out of range for ") + what + ": need 0 < eps <= " +
                                    std::to_string(upper));
    }
}

QviResult start(std::string_view name, const FiniteHorizonMdp& mdp, const SubroutineProvider& provider) {
    QviResult r;
    r.algorithm = std::string(name);
    r.policy = Policy(mdp.num_states(), mdp.horizon());
    r.values = ValueTable(mdp.num_states(), mdp.horizon());
    r.config = provider.config();
    r.seed = provider.config().rng_seed;
    return r;
}

/// Returns (z, charged queries) for one (h, s, a); z already carries the offset.
using OffsetEstimator = std::function<NoisyEstimate(std::size_t h, std::size_t s, std::size_t a)>;

/// Shared backward sweep of QVI-1/2/3/5: Q = clip(r + z), action by QMS,
/// V = Q(action). Each (h, s) charges the QMS cost times the cost of one
/// evaluation of the Q row entry to `oracle`.
void offset_sweep(const FiniteHorizonMdp& mdp, double delta, SubroutineProvider& provider,
                  const QviOptions& options, QviResult& r, Oracle oracle, double error,
                  const OffsetEstimator& estimate) {
    const auto S = mdp.num_states();
    const auto A = mdp.num_actions();
    const auto H = mdp.horizon();
    const auto& cfg = provider.config();
    const double zeta_qms = qms_budget(S, H, delta, cfg.literal_qms_budget);
    const auto qms_queries = qms_cost(A, zeta_qms, cfg.qms_constant);
    const double cap = static_cast<double>(H);
    std::vector<double> q(A);
    for (std::size_t h = H; h-- > 0;) {
        for (std::size_t s = 0; s < S; ++s) {
            std::uint64_t per_eval = 0;
            for (std::size_t a = 0; a < A; ++a) {
                const auto z = estimate(h, s, a);
                per_eval = std::max(per_eval, z.charged_queries);
                q[a] = std::clamp(mdp.reward(h, s, a) + z.value, 0.0, cap);
                if (options.record_estimators) {
                    r.estimators.push_back({'z', 0, h, s, a, z.true_value, z.value, error});
                }
            }
            const auto best = provider.qms(q, zeta_qms, nullptr);
            r.ledger.charge(oracle, saturating_mul(qms_queries, per_eval), "qms");
            r.policy(s, h) = static_cast<std::uint32_t>(best);
            r.values(h, s) = q[best];
        }
    }
}

}  // namespace

std::string_view algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::vi: return "vi";
        case Algorithm::qvi1: return "qvi1";
        case Algorithm::qvi2: return "qvi2";
        case Algorithm::qvi3: return "qvi3";
        case Algorithm::qvi4: return "qvi4";
        case Algorithm::qvi5: return "qvi5";
    }
    return "?";
}

Algorithm algorithm_from_name(std::string_view name) {
    for (auto a : {Algorithm::vi, Algorithm::qvi1, Algorithm::qvi2, Algorithm::qvi3, Algorithm::qvi4,
                   Algorithm::qvi5}) {
        if (algorithm_name(a) == name) return a;
    }
    throw std::invalid_argument("unknown algorithm: " + std::string(name));
}

Qvi4ContractError::Qvi4ContractError(std::size_t k_, std::size_t h_, std::size_t s_, std::size_t a_,
                                     const std::string& what)
    : std::runtime_error("QVI-4 estimator contract violated at (k=" + std::to_string(k_) + ", h=" +
                         std::to_string(h_) + ", s=" + std::to_string(s_) + ", a=" + std::to_string(a_) +
                         "): " + what),
      k(k_), h(h_), s(s_), a(a_) {}

double qms_budget(std::size_t S, std::size_t H, double delta, bool literal) {
    check_delta(delta);
    return literal ? delta : delta / (static_cast<double>(S) * static_cast<double>(H));
}

double estimator_budget(std::size_t S, std::size_t A, std::size_t H, double delta, double c_tilde) {
    check_delta(delta);
    const double denom = 4.0 * c_tilde * static_cast<double>(S) * std::pow(static_cast<double>(A), 1.5) *
                         static_cast<double>(H) * std::log(1.0 / delta);
    return std::min(delta, delta / denom);
}

std::size_t qvi4_epochs(std::size_t H, double eps) {
    return static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(H) / eps))) + 1;
}

double qvi4_budget(std::size_t S, std::size_t A, std::size_t H, double eps, double delta) {
    check_delta(delta);
    return delta / (4.0 * static_cast<double>(qvi4_epochs(H, eps)) * static_cast<double>(H) *
                    static_cast<double>(S) * static_cast<double>(A));
}

QviResult qvi1(const FiniteHorizonMdp& mdp, double delta, SubroutineProvider& provider,
               const QviOptions& options) {
    check_delta(delta);
    const auto t0 = Clock::now();
    auto r = start("qvi1", mdp, provider);
    const auto S = mdp.num_states();
    offset_sweep(mdp, delta, provider, options, r, Oracle::O_QM, 0.0,
                 [&](std::size_t h, std::size_t s, std::size_t a) {
                     const double pv = expectation(mdp.row(h, s, a), r.values.layer(h + 1));
                     return NoisyEstimate{pv, S, false, pv};
                 });
    r.wall_seconds = seconds_since(t0);
    return r;
}

QviResult qvi2(const FiniteHorizonMdp& mdp, double eps, double delta, SubroutineProvider& provider,
               const QviOptions& options) {
    const auto S = mdp.num_states();
    const auto A = mdp.num_actions();
    const auto H = mdp.horizon();
    const double Hd = static_cast<double>(H);
    check_eps(eps, Hd, "QVI-2");
    check_delta(delta);
    const auto t0 = Clock::now();
    auto r = start("qvi2", mdp, provider);
    const double zeta = estimator_budget(S, A, H, delta, provider.config().qms_constant);
    const double call_eps = eps / (2.0 * Hd * Hd);
    const double offset = eps / (2.0 * Hd);
    std::vector<double> scaled(S);
    std::size_t scaled_layer = H + 1;
    offset_sweep(mdp, delta, provider, options, r, Oracle::O_QM, offset,
                 [&](std::size_t h, std::size_t s, std::size_t a) {
                     if (scaled_layer != h + 1) {
                         const auto v = r.values.layer(h + 1);
                         for (std::size_t i = 0; i < S; ++i) scaled[i] = std::clamp(v[i] / Hd, 0.0, 1.0);
                         scaled_layer = h + 1;
                     }
                     const auto row = mdp.row(h, s, a);
                     auto e = provider.qmebo(row, scaled, call_eps, zeta, nullptr);
                     e.value = Hd * e.value - offset;
                     e.true_value = expectation(row, r.values.layer(h + 1));
                     return e;
                 });
    r.wall_seconds = seconds_since(t0);
    return r;
}

QviResult qvi3(const FiniteHorizonMdp& mdp, double eps, double delta, SubroutineProvider& provider,
               const QviOptions& options) {
    const auto S = mdp.num_states();
    const auto A = mdp.num_actions();
    const auto H = mdp.horizon();
    const double Hd = static_cast<double>(H);
    check_eps(eps, Hd, "QVI-3");
    check_delta(delta);
    const auto t0 = Clock::now();
    auto r = start("qvi3", mdp, provider);
    const double zeta = estimator_budget(S, A, H, delta, provider.config().qms_constant);
    const double call_eps = eps / (2.0 * Hd);
    offset_sweep(mdp, delta, provider, options, r, Oracle::generative_quantum, call_eps,
                 [&](std::size_t h, std::size_t s, std::size_t a) {
                     const auto row = mdp.row(h, s, a);
                     const auto v = r.values.layer(h + 1);
                     auto e = provider.qme1(row, v, Hd, call_eps, zeta, nullptr);
                     e.value -= call_eps;
                     return e;
                 });
    r.wall_seconds = seconds_since(t0);
    return r;
}

QviResult qvi5(const FiniteHorizonMdp& mdp, double eps, double delta, double eta, SubroutineProvider& provider,
               const QviOptions& options) {
    const auto S = mdp.num_states();
    const auto A = mdp.num_actions();
    const auto H = mdp.horizon();
    const double Hd = static_cast<double>(H);
    check_eps(eps, Hd, "QVI-5");
    check_delta(delta);
    if (!(eta > 0.0 && eta < 0.5)) throw std::invalid_argument("eta must lie in (0, 1/2)");
    if (eta > mdp.min_nonzero_probability()) {
        throw std::invalid_argument("eta exceeds the smallest nonzero transition probability " +
                                    std::to_string(mdp.min_nonzero_probability()));
    }
    const auto t0 = Clock::now();
    auto r = start("qvi5", mdp, provider);
    const double zeta = estimator_budget(S, A, H, delta, provider.config().qms_constant);
    const double call_eps = eps / (4.0 * Hd);
    const double offset = eps / (2.0 * Hd);
    const auto conversion = btp_cost(S, H, eps, eta, &r.ledger);

    // P'': within eps/(4 S H^2) of P on its support.
    std::vector<double> perturbed = mdp.transitions();
    if (!options.qvi5_zero_perturbation) {
        const double width = btp_precision(S, H, eps);
        Rng prng(stream_seed(provider.config().rng_seed, 0x9e5));
        for (auto& x : perturbed) {
            if (x > 0.0) x = std::clamp(x + prng.uniform(-width, width), 0.0, 1.0);
        }
    }
    offset_sweep(mdp, delta, provider, options, r, Oracle::O_QM, offset,
                 [&](std::size_t h, std::size_t s, std::size_t a) {
                     const std::span<const double> row(perturbed.data() + ((h * S + s) * A + a) * S, S);
                     const auto v = r.values.layer(h + 1);
                     auto e = provider.qme1(row, v, Hd, call_eps, zeta, nullptr);
                     e.value -= offset;
                     e.true_value = expectation(mdp.row(h, s, a), v);
                     e.charged_queries = saturating_mul(e.charged_queries, conversion);
                     return e;
                 });
    r.wall_seconds = seconds_since(t0);
    return r;
}

QviResult qvi4(const FiniteHorizonMdp& mdp, double eps, double delta, SubroutineProvider& provider,
               const QviOptions& options) {
    const auto S = mdp.num_states();
    const auto A = mdp.num_actions();
    const auto H = mdp.horizon();
    const double Hd = static_cast<double>(H);
    check_eps(eps, std::sqrt(Hd), "QVI-4");
    check_delta(delta);
    const auto t0 = Clock::now();
    auto r = start("qvi4", mdp, provider);
    const std::size_t K = qvi4_epochs(H, eps);
    const double zeta = qvi4_budget(S, A, H, eps, delta);
    const double c = options.qvi4_c;
    const double b = options.qvi4_b;

    ValueTable v0(S, H);
    Policy pi0(S, H, 0);
    ValueTable v(S, H);
    Policy pi(S, H, 0);
    QTable q(S, A, H);
    std::vector<double> x(H * S * A);
    std::vector<double> sq(S);
    std::vector<double> diff(S);
    std::vector<double> qrow(A);

    for (std::size_t k = 0; k < K; ++k) {
        const double eps_k = Hd / std::ldexp(1.0, static_cast<int>(k));
        for (std::size_t h = 0; h < H; ++h) {
            const auto base = v0.layer(h + 1);
            for (std::size_t i = 0; i < S; ++i) sq[i] = base[i] * base[i];
            for (std::size_t s = 0; s < S; ++s) {
                for (std::size_t a = 0; a < A; ++a) {
                    const auto row = mdp.row(h, s, a);
                    const auto second = provider.qme1(row, sq, Hd * Hd, b, zeta, &r.ledger);
                    const auto first = provider.qme1(row, base, Hd, b / Hd, zeta, &r.ledger);
                    const double y = std::max(second.value - first.value * first.value, 0.0);
                    const double sigma = std::sqrt(y + 4.0 * b);
                    const double ex = c * eps / std::pow(Hd, 1.5) * sigma;
                    NoisyEstimate mean;
                    try {
                        mean = provider.qme2(row, base, sigma, ex, zeta, &r.ledger);
                    } catch (const std::exception& e) {
                        throw Qvi4ContractError(k, h, s, a, e.what());
                    }
                    x[(h * S + s) * A + a] = mean.value - ex;
                    if (options.record_estimators) {
                        r.estimators.push_back({'x', k, h, s, a, mean.true_value, mean.value - ex, ex});
                    }
                }
            }
        }

        if (options.record_epochs) r.epochs.push_back({k, eps_k, v0, ValueTable{}, Policy{}});
        v = ValueTable(S, H);
        pi = Policy(S, H, 0);
        const double eg = c * eps_k / Hd;
        for (std::size_t h = H; h-- > 0;) {
            const auto vn = v.layer(h + 1);
            const auto bn = v0.layer(h + 1);
            double observed = 0.0;
            for (std::size_t i = 0; i < S; ++i) {
                diff[i] = std::max(vn[i] - bn[i], 0.0);
                observed = std::max(observed, diff[i]);
            }
            const double u = std::max(k == 0 ? Hd : 2.0 * eps_k, observed);
            for (std::size_t s = 0; s < S; ++s) {
                for (std::size_t a = 0; a < A; ++a) {
                    const auto g = provider.qme1(mdp.row(h, s, a), diff, u, eg, zeta, &r.ledger);
                    const double gv = g.value - eg;
                    if (options.record_estimators) {
                        r.estimators.push_back({'g', k, h, s, a, g.true_value, gv, eg});
                    }
                    qrow[a] = std::max(mdp.reward(h, s, a) + x[(h * S + s) * A + a] + gv, 0.0);
                    q(h, s, a) = qrow[a];
                }
                const auto best = argmax_first(qrow);
                v(h, s) = qrow[best];
                pi(s, h) = static_cast<std::uint32_t>(best);
                if (v(h, s) <= v0(h, s)) {
                    v(h, s) = v0(h, s);
                    pi(s, h) = pi0(s, h);
                }
            }
        }
        if (options.record_epochs) {
            r.epochs.back().v = v;
            r.epochs.back().pi = pi;
        }
        v0 = v;
        pi0 = pi;
    }
    r.policy = pi;
    r.values = v;
    r.qvalues = q;
    r.wall_seconds = seconds_since(t0);
    return r;
}

QviResult vi_result(const FiniteHorizonMdp& mdp) {
    const auto t0 = Clock::now();
    QviResult r;
    r.algorithm = "vi";
    auto sol = exact_value_iteration(mdp);
    r.policy = std::move(sol.policy);
    r.values = std::move(sol.values);
    r.qvalues = std::move(sol.qvalues);
    const auto S = static_cast<std::uint64_t>(mdp.num_states());
    r.ledger.charge(Oracle::O_M, S * S * mdp.num_actions() * mdp.horizon(), "vi");
    r.wall_seconds = seconds_since(t0);
    return r;
}

QviResult run_algorithm(Algorithm algo, const FiniteHorizonMdp& mdp, const RunParams& params,
                        SubroutineProvider& provider, const QviOptions& options) {
    switch (algo) {
        case Algorithm::vi: return vi_result(mdp);
        case Algorithm::qvi1: return qvi1(mdp, params.delta, provider, options);
        case Algorithm::qvi2: return qvi2(mdp, params.eps, params.delta, provider, options);
        case Algorithm::qvi3: return qvi3(mdp, params.eps, params.delta, provider, options);
        case Algorithm::qvi4: return qvi4(mdp, params.eps, params.delta, provider, options);
        case Algorithm::qvi5: return qvi5(mdp, params.eps, params.delta, params.eta, provider, options);
    }
    throw std::invalid_argument("unknown algorithm");
}

nlohmann::json QviResult::to_json() const {
    nlohmann::json j = {
        {"algorithm", algorithm},
        {"policy", qvilab::to_json(policy)},
        {"V", qvilab::to_json(values)},
        {"ledger", ledger.to_json()},
        {"config",
         {{"noise_mode", std::string(noise_mode_name(config.noise_mode))},
          {"failure_injection", config.failure_injection},
          {"qms_constant", config.qms_constant},
          {"powering_repeats_per_log", config.powering_repeats_per_log},
          {"literal_qms_budget", config.literal_qms_budget}}},
        {"seed", seed},
    };
    if (qvalues) j["Q"] = qvilab::to_json(*qvalues);
    return j;
}

}  // namespace qvilab
