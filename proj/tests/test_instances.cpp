#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qvilab/instances.hpp"

using namespace qvilab;

TEST_CASE("M1 and M2 closed forms") {
    for (std::size_t S : {4, 7, 10}) {
        for (std::size_t H = 2; H <= 8; ++H) {
            HardInstanceSpec spec{S, 3, H, HardVariant::M1, 5};
            const auto m1 = make_hard_instance(spec);
            const auto v1 = exact_value_iteration(m1).values;
            const auto want = hard_instance_optimal_v0(spec);
            for (std::size_t s = 0; s < S; ++s) CHECK(std::abs(v1(0, s) - want[s]) <= 1e-9);
            const double Hd = static_cast<double>(H);
            CHECK(v1(0, spec.good(0)) == doctest::Approx(Hd));
            CHECK(v1(0, spec.bad(0)) == doctest::Approx(0.0));
            CHECK(v1(0, spec.neutral()) == doctest::Approx(Hd / 2));
            CHECK(v1(0, spec.uncertain(0)) == doctest::Approx((Hd - 1) / 2));

            spec.variant = HardVariant::M2;
            spec.s_bar = spec.block() - 1;
            spec.a_bar = 1;
            const auto v2 = exact_value_iteration(make_hard_instance(spec)).values;
            CHECK(std::abs(v2(0, spec.uncertain(spec.s_bar)) - (Hd - 1)) <= 1e-9);
            double gap = 0.0;
            for (std::size_t s = 0; s < S; ++s) gap = std::max(gap, std::abs(v1(0, s) - v2(0, s)));
            CHECK(gap == (Hd - 1) / 2);
        }
    }
}

TEST_CASE("M1 with S=7, A=3, H=4") {
    const auto v = exact_value_iteration(make_hard_instance(HardInstanceSpec{})).values;
    const std::vector<double> want = {4, 4, 0, 0, 2, 1.5, 1.5};
    for (std::size_t s = 0; s < 7; ++s) CHECK(v(0, s) == doctest::Approx(want[s]).epsilon(1e-12));
}

TEST_CASE("M2 differs from M1 only at the distinguished pair") {
    HardInstanceSpec spec{10, 4, 5, HardVariant::M1, 3};
    const auto m1 = make_hard_instance(spec);
    spec.variant = HardVariant::M2;
    spec.s_bar = 1;
    spec.a_bar = 2;
    spec.target_good = 2;
    const auto m2 = make_hard_instance(spec);
    for (std::size_t h = 0; h < 5; ++h)
        for (std::size_t s = 0; s < 10; ++s)
            for (std::size_t a = 0; a < 4; ++a) {
                const bool special = s == spec.uncertain(1) && a == 2;
                bool same = true;
                for (std::size_t k = 0; k < 10; ++k) same = same && m1.prob(h, s, a, k) == m2.prob(h, s, a, k);
                CHECK(same != special);
                if (special) CHECK(m2.prob(h, s, a, spec.good(2)) == 1.0);
            }
    CHECK_THROWS(make_hard_instance(HardInstanceSpec{8, 3, 4}));
    CHECK_THROWS(make_hard_instance(HardInstanceSpec{7, 3, 1}));
}

TEST_CASE("horizon reduction") {
    CHECK(HorizonReductionSpec{random_discounted_mdp(2, 2, 1), 0.9, 0.1}.horizon() == 60);
    CHECK_THROWS(HorizonReductionSpec{random_discounted_mdp(2, 2, 1), 1.0, 0.1}.horizon());
    CHECK_THROWS(HorizonReductionSpec{random_discounted_mdp(2, 2, 1), 0.5, 0.6}.horizon());

    {
        const auto base = random_discounted_mdp(3, 2, 4);
        const auto mdp = make_horizon_reduction({base, 0.0, 0.1});
        const auto v = exact_value_iteration(mdp).values;
        for (std::size_t s = 0; s < 3; ++s) CHECK(v(0, s) == doctest::Approx(std::max(base.reward(s, 0), base.reward(s, 1))));
    }

    for (double gamma : {0.5, 0.8, 0.9}) {
        const auto base = random_discounted_mdp(2, 2, static_cast<std::uint64_t>(gamma * 10));
        const HorizonReductionSpec spec{base, gamma, 0.1};
        const auto mdp = make_horizon_reduction(spec);
        CHECK(mdp.num_states() == 3);
        const auto v = exact_value_iteration(mdp).values;
        const auto vt = oracle::discounted_vi(base.S, base.A, base.transitions, base.rewards, gamma);
        for (std::size_t s = 0; s < 2; ++s) {
            CHECK(v(0, s) <= vt[s] + 1e-9);
            CHECK(vt[s] - 0.1 <= v(0, s));
        }
        for (std::size_t h = 0; h <= mdp.horizon(); ++h) CHECK(v(h, 2) == 0.0);
        for (std::size_t a = 0; a < 2; ++a) {
            CHECK(mdp.prob(0, 0, a, 2) == doctest::Approx(1 - gamma));
            CHECK(mdp.prob(0, 2, a, 2) == 1.0);
        }
    }
}

TEST_CASE("random generators") {
    const auto det = random_mdp(5, 2, 3, 1.0 / 5, 1);
    for (double p : det.transitions()) CHECK((p == 0.0 || p == 1.0));
    CHECK(to_json(random_mdp(4, 3, 2, 0.5, 9)).dump() == to_json(random_mdp(4, 3, 2, 0.5, 9)).dump());
    CHECK(to_json(random_mdp(4, 3, 2, 0.5, 9)).dump() != to_json(random_mdp(4, 3, 2, 0.5, 10)).dump());

    const auto big = random_mdp(50, 10, 20, 0.3, 2);  // 10^4 rows
    std::size_t rows = 0;
    for (std::size_t h = 0; h < 20; ++h)
        for (std::size_t s = 0; s < 50; ++s)
            for (std::size_t a = 0; a < 10; ++a) {
                double t = 0;
                std::size_t support = 0;
                for (double p : big.row(h, s, a)) {
                    t += p;
                    support += p > 0 ? 1 : 0;
                }
                CHECK(std::abs(t - 1.0) <= 1e-12);
                CHECK(support <= 15);
                ++rows;
            }
    CHECK(rows == 10000);

    const auto sp = random_sparse_mdp(8, 3, 4, 3, 0.2, 4);
    CHECK(sp.min_nonzero_probability() >= 0.2);
    CHECK_THROWS(random_sparse_mdp(8, 3, 4, 3, 0.4, 4));
}

TEST_CASE("brute force oracle") {
    {
        const auto mdp = random_mdp(1, 3, 4, 1.0, 8);
        const auto bf = brute_force_optimal(mdp);
        for (std::size_t h = 0; h < 4; ++h) {
            std::vector<double> r = {mdp.reward(h, 0, 0), mdp.reward(h, 0, 1), mdp.reward(h, 0, 2)};
            CHECK(bf.policy(0, h) == argmax_first(r));
        }
    }
    {
        const auto mdp = random_mdp(3, 4, 1, 1.0, 2);
        CHECK(brute_force_optimal(mdp).policy == exact_value_iteration(mdp).policy);
    }
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto mdp = random_mdp(3, 2, 3, 1.0, seed);
        const auto bf = brute_force_optimal(mdp);
        const auto vi = exact_value_iteration(mdp);
        CHECK(bf.policy == vi.policy);
        for (std::size_t h = 0; h <= 3; ++h)
            for (std::size_t s = 0; s < 3; ++s) CHECK(std::abs(bf.values(h, s) - vi.values(h, s)) <= 1e-9);
    }
    CHECK_THROWS(brute_force_optimal(random_mdp(6, 4, 5, 1.0, 1)));
}
