#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "qvilab/statevector.hpp"

using namespace qvilab;

namespace {

const FixedPointFormat kDefault{16, 12};
const FixedPointFormat kSmall{4, 3};

double tv(const std::vector<double>& a, const std::vector<double>& b) {
    double t = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) t += std::abs(a[i] - b[i]);
    return 0.5 * t;
}

}  // namespace

TEST_CASE("fixed point format") {
    CHECK(kDefault.encode(0.25) == 1024);
    CHECK(kDefault.decode(1024) == 0.25);
    CHECK(kDefault.upper() == 16.0);
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform() * 15.99;
        const double back = kDefault.round_trip(x);
        CHECK(back <= x);
        CHECK(x - back < kDefault.resolution());
    }
    CHECK_THROWS(kDefault.encode(16.0));
    CHECK_THROWS(kDefault.encode(-0.1));
    CHECK_THROWS(FixedPointFormat{4, 5}.validate());
}

TEST_CASE("binary oracle is an involution on basis states") {
    const BinaryOracleSpec spec{4, {0.1, 0.5, 0.9, 0.3}, kSmall};
    const auto codes = spec.codes();
    for (std::uint64_t i = 0; i < 4; ++i) {
        for (std::uint64_t t : {0ULL, 5ULL, 15ULL}) {
            PureState st({{"index", 2}, {"val", 4}});
            const std::uint64_t basis = (i << 4) | t;
            st.amplitudes()[0] = 0.0;
            st.amplitudes()[basis] = 1.0;
            apply_binary_oracle(st, "index", "val", codes);
            CHECK(std::abs(st.amplitudes()[(i << 4) | (t ^ codes[i])] - 1.0) < 1e-15);
            apply_binary_oracle(st, "index", "val", codes);
            CHECK(std::abs(st.amplitudes()[basis] - 1.0) < 1e-15);
        }
    }
}

TEST_CASE("U_p construction") {
    {
        const auto up = build_up_hat(std::vector<double>{1.0, 0.0}, kDefault);
        CHECK(up.unitary(0b00, 0).real() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
        CHECK(std::abs(up.unitary(0b10, 0)) < 1e-14);
        CHECK(unitarity_error(up.unitary) <= 1e-10);
    }
    {
        const auto up = build_up_hat(std::vector<double>(4, 0.25), kDefault);
        for (std::size_t i = 0; i < 4; ++i) CHECK(up.unitary(i << 1, 0).real() == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(unitarity_error(up.unitary) <= 1e-10);
    }
    {
        const auto up = build_up_hat(std::vector<double>{0.25, 0.75}, kDefault);
        double w = 0.0;
        for (std::size_t i = 0; i < 2; ++i) w += std::norm(up.unitary(i << 1, 0));
        CHECK(w == doctest::Approx(0.5).epsilon(1e-14));
    }
    {
        const std::vector<double> p = {0.1, 0.2, 0.05, 0.15, 0.3, 0.2};
        const auto up = build_up_hat(p, kDefault);
        CHECK(up.padded_n == 8);
        CHECK(unitarity_error(up.unitary) <= 1e-10);
        CHECK_FALSE(up.coarse_format);
        CHECK(build_up_hat(p, FixedPointFormat{6, 4}).coarse_format);
    }
    CHECK_THROWS(build_up_hat(std::vector<double>{0.01, 0.99}, FixedPointFormat{2, 0}));
}

TEST_CASE("psi2 preparation") {
    const std::vector<double> p = {0.25, 0.75};
    const auto one = prepare_psi2(p, std::vector<double>{1.0, 1.0}, kDefault);
    CHECK(one.weight == doctest::Approx(0.5).epsilon(1e-13));
    const auto zero = prepare_psi2(p, std::vector<double>{0.0, 0.0}, kDefault);
    CHECK(zero.weight < 1e-28);

    const auto psi = prepare_psi2(p, std::vector<double>{0.4, 0.8}, kDefault);
    CHECK(std::abs(psi.weight - 0.34991455078125) < 1e-13);
    CHECK(std::abs(2 * psi.weight - 0.7) <= psi.encoding_bound);
    CHECK(std::abs(psi.state.norm_squared() - 1.0) <= 1e-10);

    // fval is uncomputed: every populated basis state has fval = 0
    double stray = 0.0;
    for (std::uint64_t b = 0; b < psi.state.dimension(); ++b) {
        if (psi.state.field(b, "fval") != 0) stray += std::norm(psi.state.amplitudes()[b]);
    }
    CHECK(stray < 1e-24);
    CHECK_NOTHROW(drop_zero_register(psi.state, "fval"));

    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 2 + t % 7;
        std::vector<double> pp(n), ff(n);
        double sum = 0;
        for (auto& x : pp) sum += (x = rng.exponential());
        for (auto& x : pp) x /= sum;
        for (auto& x : ff) x = rng.uniform();
        const auto s = prepare_psi2(pp, ff, kDefault);
        double mean = 0;
        for (std::size_t i = 0; i < n; ++i) mean += pp[i] * ff[i];
        CHECK(std::abs(static_cast<double>(s.padded_n) * s.weight - mean) <= s.encoding_bound);
    }

    const auto small = prepare_psi2(p, std::vector<double>{0.4, 0.8}, kSmall);
    const auto j = small.state.to_json();
    CHECK(j.size() > 0);
    CHECK(j.begin().key().size() == 1 + 1 + 4 + 1 + 3);
    CHECK_THROWS(psi.state.to_json());
}

TEST_CASE("amplitude estimation boundary cases") {
    const auto d0 = ae_subspace_distribution(0.0, 64);
    CHECK(d0[0] == doctest::Approx(1.0).epsilon(1e-14));
    const auto d1 = ae_subspace_distribution(1.0, 64);
    CHECK(d1[32] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(ae_estimate_from_outcome(32, 64) == doctest::Approx(1.0));

    Rng rng(9);
    for (int i = 0; i < 100; ++i) {
        CHECK(sample_ae(d0, rng).estimate == 0.0);
        CHECK(sample_ae(d1, rng).estimate == doctest::Approx(1.0));
    }
}

TEST_CASE("amplitude estimation at a=0.25, T=64") {
    const std::uint64_t T = 64;
    const auto d = ae_subspace_distribution(0.25, T);
    double total = 0.0, inside = 0.0;
    const double bound = ae_error_bound(0.25, T);
    CHECK(bound == doctest::Approx(2 * std::numbers::pi * std::sqrt(0.1875) / 64 + std::numbers::pi * std::numbers::pi / 4096));
    for (std::uint64_t y = 0; y < T; ++y) {
        total += d[y];
        if (std::abs(ae_estimate_from_outcome(y, T) - 0.25) <= bound) inside += d[y];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(inside - 0.8555131394352513) < 1e-10);

    Rng rng(10);
    const int n = 10000;
    int ok = 0;
    for (int i = 0; i < n; ++i) ok += std::abs(sample_ae(d, rng).estimate - 0.25) <= bound ? 1 : 0;
    const double target = 8 / (std::numbers::pi * std::numbers::pi);
    CHECK(ok / static_cast<double>(n) >= target - oracle::three_sigma(target, n));
}

TEST_CASE("full-register AE matches a literal phase-register simulation") {
    const std::vector<std::pair<std::vector<double>, std::vector<double>>> cases = {
        {{0.25, 0.75}, {0.4, 0.8}}, {{0.5, 0.5}, {0.0, 1.0}}, {{0.125, 0.875}, {0.9, 0.25}}};
    for (const auto& [p, f] : cases) {
        const auto psi = prepare_psi2(p, f, kSmall);
        for (std::uint64_t T : {1ULL, 2ULL, 3ULL, 5ULL, 8ULL, 16ULL}) {
            const auto literal = oracle::literal_phase_estimation(
                psi.state.amplitudes(), [&](std::size_t b) { return psi2_good(psi.state, b); }, T);
            const auto full = ae_full_register_distribution(psi.state, T);
            const auto sub = ae_subspace_distribution(psi.weight, T);
            CHECK(tv(literal, full) <= 1e-10);
            CHECK(tv(literal, sub) <= 1e-10);
        }
    }
}

TEST_CASE("powering median") {
    CHECK(powering_median({0.3}) == 0.3);
    CHECK(powering_median({0.1, 0.9, 0.5}) == 0.5);
    CHECK(powering_median({0.4, 0.1, 0.3, 0.2}) == 0.2);
    CHECK_THROWS(powering_median({}));

    Rng rng(11);
    for (std::size_t K : {9, 27, 45}) {
        const int n = 4000;
        int ok = 0;
        for (int t = 0; t < n; ++t) {
            std::vector<double> trials(K);
            for (auto& x : trials) {
                if (rng.bernoulli(2.0 / 3.0)) {
                    x = 0.5 + rng.uniform(-0.01, 0.01);
                } else {
                    x = rng.bernoulli(0.5) ? rng.uniform(0.6, 1.0) : rng.uniform(0.0, 0.4);
                }
            }
            ok += std::abs(powering_median(trials) - 0.5) <= 0.01 ? 1 : 0;
        }
        const double floor = 1.0 - std::exp(-static_cast<double>(K) / 18.0);
        CHECK(ok / static_cast<double>(n) >= floor);
    }
}

TEST_CASE("grover power rules") {
    CHECK(qmebo_grover_powers(2, 0.05, GroverPowerRule::rigorous) == 281);
    CHECK(qmebo_grover_powers(4, 0.05, GroverPowerRule::rigorous) == 397);
    CHECK(qmebo_grover_powers(8, 0.05, GroverPowerRule::rigorous) == 562);
    CHECK(qmebo_grover_powers(2, 0.05, GroverPowerRule::simple) == 35);
    CHECK(qmebo_grover_powers(4, 0.05, GroverPowerRule::simple) == 49);
    CHECK(qmebo_grover_powers(8, 0.05, GroverPowerRule::simple) == 70);
    for (std::size_t n : {2, 4, 8, 16}) {
        const auto T = static_cast<double>(qmebo_grover_powers(n, 0.03, GroverPowerRule::rigorous));
        const double pi2 = std::numbers::pi * std::numbers::pi;
        const double nd = static_cast<double>(n);
        CHECK(0.03 * T * T - pi2 * std::sqrt(nd) * T - pi2 * nd >= 0);
        CHECK(0.03 * (T - 1) * (T - 1) - pi2 * std::sqrt(nd) * (T - 1) - pi2 * nd < 0);
    }
}

TEST_CASE("qmebo exact") {
    Rng rng(12);
    QmeboOptions opt;
    QueryLedger l;
    const auto z = qmebo_exact(std::vector<double>{0.3, 0.7}, std::vector<double>{0.0, 0.0}, 0.05, 0.1, opt, rng, &l);
    CHECK(z.estimate == 0.0);
    CHECK(z.T == 281);
    CHECK(z.K == 5);
    CHECK(l.count(Oracle::B_p) == 2 * 281 * 5);
    CHECK(l.count(Oracle::B_f) == 2 * 281 * 5);

    const QmeboSampler point(std::vector<double>{1.0, 0.0}, std::vector<double>{0.7, 0.2}, 0.05, 0.1, opt);
    const int n = 500;
    int ok = 0;
    for (int t = 0; t < n; ++t) {
        const auto r = point.run(rng, nullptr);
        ok += (r.estimate >= 0.65 && r.estimate <= 0.75) ? 1 : 0;
    }
    CHECK(ok / static_cast<double>(n) >= 0.9 - oracle::three_sigma(0.9, n));

    const QmeboSampler mixed(std::vector<double>{0.25, 0.75}, std::vector<double>{0.4, 0.8}, 0.05, 0.1, opt);
    ok = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto r = mixed.run(rng, nullptr);
        ok += std::abs(r.estimate - 0.7) <= 0.05 + r.encoding_bound ? 1 : 0;
    }
    CHECK(ok / 1000.0 >= 0.9 - oracle::three_sigma(0.9, 1000));

    Rng a(5), b(5);
    CHECK(mixed.run(a, nullptr).trials == mixed.run(b, nullptr).trials);
}

TEST_CASE("statevector provider") {
    SubroutineConfig cfg;
    cfg.rng_seed = 4;
    QmeboOptions opt;
    StatevectorProvider prov(cfg, opt);
    const std::vector<double> p = {0.2, 0.3, 0.5};
    const int n = 60;
    int ok = 0;
    for (int t = 0; t < n; ++t) {
        const auto e = prov.qme1(p, std::vector<double>{0.5, 2.0, 1.0}, 2.0, 0.2, 0.1, nullptr);
        ok += std::abs(e.value - e.true_value) <= 0.2 + 2.0 * 4 * kDefault.resolution() ? 1 : 0;
    }
    CHECK(ok >= 48);
    CHECK(prov.qms(std::vector<double>{0.1, 0.7, 0.3}, 0.1, nullptr) == 1);
}
