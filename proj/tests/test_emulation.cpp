#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "qvilab/emulation.hpp"

using namespace qvilab;

namespace {

SubroutineConfig faithful(NoiseMode mode = NoiseMode::uniform_interval, std::uint64_t seed = 1) {
    SubroutineConfig c;
    c.noise_mode = mode;
    c.rng_seed = seed;
    return c;
}

}  // namespace

TEST_CASE("cost formulas against independently evaluated values") {
    CHECK(qms_cost(1, 0.1, 1.0) == 3);
    CHECK(qms_cost(16, 0.01, 1.0) == 19);
    CHECK(qme1_cost(3.0, 0.1, 0.05, 2.0) == 216);
    CHECK(qme2_cost(1.0, 0.01, 0.1, 2.0) == 10605);
    CHECK(qme2_cost(1.0, 0.005, 0.1, 2.0) == 28075);
    CHECK(qmebo_cost(4, 0.1, 0.1, 2.0) == 135);
    CHECK(btp_cost(1e-4, 0.25) == 19);
    CHECK(btp_cost(1e-4, 0.125) == 37);
    CHECK(btp_cost(1.0, 0.25) == 1);
    CHECK(powering_repeats(0.1, 2.0) == 5);
    CHECK(qms_cost(5, 0.99, 1.0) == 1);
}

TEST_CASE("qme2 cost doubles when eps halves inside the flat-log regime") {
    CHECK(qme2_cost(1.0, 1.0, 0.1, 2.0) == 5);
    CHECK(qme2_cost(1.0, 0.5, 0.1, 2.0) == 10);
    const auto K = powering_repeats(0.1, 2.0);
    for (double r : {1.05, 1.2, 1.3}) {
        const auto one = qme2_cost(1.0, 1.0 / r, 0.1, 2.0) / K;
        const auto two = qme2_cost(1.0, 0.5 / r, 0.1, 2.0) / K;
        CHECK(two + 1 >= 2 * one - 1);
        CHECK(two <= 2 * one + 1);
    }
    CHECK_THROWS_AS(qme2_cost(1.0, 4.0, 0.1, 2.0), Qme2ContractViolation);
}

TEST_CASE("btp cost doubles when eta halves") {
    for (double prec : {1e-3, 1e-5, 1e-8}) {
        const auto a = btp_cost(prec, 0.3);
        const auto b = btp_cost(prec, 0.15);
        CHECK(b >= 2 * a - 1);
        CHECK(b <= 2 * a);
    }
    CHECK_THROWS(btp_cost(1e-3, 0.5));
    QueryLedger l;
    CHECK(btp_cost(4, 4, 0.1, 0.25, &l) == btp_cost(0.1 / (4.0 * 4 * 16), 0.25));
    CHECK(l.count(Oracle::BTP) == 1);
}

TEST_CASE("cost monotonicity") {
    for (double eps = 0.01; eps < 1.0; eps *= 1.7) {
        CHECK(qme1_cost(2.0, eps * 1.7, 0.1, 2.0) <= qme1_cost(2.0, eps, 0.1, 2.0));
        CHECK(qme1_cost(2.0, eps, 0.2, 2.0) <= qme1_cost(2.0, eps, 0.1, 2.0));
        CHECK(qme1_cost(2.5, eps, 0.1, 2.0) >= qme1_cost(2.0, eps, 0.1, 2.0));
        CHECK(qmebo_cost(8, eps * 1.7, 0.1, 2.0) <= qmebo_cost(8, eps, 0.1, 2.0));
        CHECK(qmebo_cost(9, eps, 0.1, 2.0) >= qmebo_cost(8, eps, 0.1, 2.0));
        CHECK(qme2_cost(1.0, eps * 1.7, 0.1, 2.0) <= qme2_cost(1.0, eps, 0.1, 2.0));
        CHECK(qme2_cost(1.3, eps, 0.1, 2.0) >= qme2_cost(1.0, eps, 0.1, 2.0));
    }
    for (std::size_t n = 1; n < 50; ++n) CHECK(qms_cost(n + 1, 0.05, 1.0) >= qms_cost(n, 0.05, 1.0));
}

TEST_CASE("qms") {
    const auto cfg = faithful();
    Rng rng(1);
    QueryLedger l;
    CHECK(qms_emulated(std::vector<double>{0.5}, 0.1, cfg, rng, &l) == 0);
    CHECK(l.count(Oracle::O_QM) == 3);
    CHECK(qms_emulated(std::vector<double>{1, 3, 2}, 0.1, cfg, rng, &l) == 1);
    CHECK(qms_emulated(std::vector<double>{2, 3, 3}, 0.1, cfg, rng, &l) == 1);
    CHECK_THROWS(qms_emulated(std::vector<double>{}, 0.1, cfg, rng, &l));

    auto inj = cfg;
    inj.failure_injection = true;
    const int n = 10000;
    int right = 0;
    for (int t = 0; t < n; ++t) {
        std::vector<double> f(6);
        for (auto& x : f) x = rng.uniform();
        const auto want = argmax_first(f);
        right += qms_emulated(f, 0.2, inj, rng, nullptr) == want ? 1 : 0;
    }
    CHECK(right / static_cast<double>(n) >= 0.8 - oracle::three_sigma(0.8, n));
}

TEST_CASE("qme1 faithful contract") {
    Rng rng(2);
    for (auto mode : {NoiseMode::exact, NoiseMode::uniform_interval, NoiseMode::adversarial_low,
                      NoiseMode::adversarial_high}) {
        const auto cfg = faithful(mode);
        const std::vector<double> p = {0.25, 0.25, 0.25, 0.25};
        const std::vector<double> f = {0, 1, 2, 3};
        for (int t = 0; t < 100; ++t) {
            const auto e = qme1_emulated(p, f, 3.0, 0.1, 0.05, cfg, rng, nullptr);
            CHECK(e.value >= 1.5 - 0.1 - 1e-12);
            CHECK(e.value <= 1.5 + 0.1 + 1e-12);
            CHECK_FALSE(e.failed);
            CHECK(e.charged_queries == 216);
        }
        const auto c = qme1_emulated(p, std::vector<double>(4, 0.7), 1.0, 0.05, 0.1, cfg, rng, nullptr);
        CHECK(std::abs(c.value - 0.7) <= 0.05 + 1e-12);
        const auto pm = qme1_emulated(std::vector<double>{0, 0, 1}, std::vector<double>{0.1, 0.2, 0.9}, 1.0, 0.05,
                                      0.1, cfg, rng, nullptr);
        CHECK(std::abs(pm.value - 0.9) <= 0.05 + 1e-12);
    }
    CHECK(qme1_emulated(std::vector<double>{0.5, 0.5}, std::vector<double>{0.2, 0.4}, 1.0, 0.1, 0.1,
                        faithful(NoiseMode::adversarial_low), rng, nullptr)
              .value == doctest::Approx(0.2));
    CHECK(qme1_emulated(std::vector<double>{0.5, 0.5}, std::vector<double>{0.2, 0.4}, 1.0, 0.1, 0.1,
                        faithful(NoiseMode::exact), rng, nullptr)
              .value == doctest::Approx(0.3));
    CHECK_THROWS(qme1_emulated(std::vector<double>{1}, std::vector<double>{2.0}, 1.0, 0.1, 0.1, faithful(), rng,
                               nullptr));
    CHECK_THROWS(qme1_emulated(std::vector<double>{1}, std::vector<double>{0.5}, 1.0, 0.0, 0.1, faithful(), rng,
                               nullptr));
}

TEST_CASE("qme2 contract") {
    Rng rng(3);
    const auto cfg = faithful();
    const double eps = 0.06;
    const auto z = qme2_emulated(std::vector<double>{0.3, 0.7}, std::vector<double>{0.4, 0.4}, 4 * eps / 3, eps,
                                 0.1, cfg, rng, nullptr);
    CHECK(std::abs(z.value - 0.4) <= eps);
    for (int t = 0; t < 100; ++t) {
        const auto b = qme2_emulated(std::vector<double>{0.5, 0.5}, std::vector<double>{0, 1}, 0.5, 0.1, 0.1, cfg,
                                     rng, nullptr);
        CHECK(b.value >= 0.4);
        CHECK(b.value <= 0.6);
    }
    CHECK_THROWS_AS(qme2_emulated(std::vector<double>{1}, std::vector<double>{0}, 0.1, 0.4, 0.1, cfg, rng, nullptr),
                    Qme2ContractViolation);
    auto strict = cfg;
    strict.check_variance = true;
    CHECK_THROWS(qme2_emulated(std::vector<double>{0.5, 0.5}, std::vector<double>{0, 1}, 0.3, 0.1, 0.1, strict,
                               rng, nullptr));
}

TEST_CASE("qmebo contract and charge") {
    Rng rng(4);
    QueryLedger l;
    const auto cfg = faithful();
    const auto a = qmebo_emulated(std::vector<double>{1, 0}, std::vector<double>{0.7, 0.2}, 0.05, 0.1, cfg, rng, &l);
    CHECK(std::abs(a.value - 0.7) <= 0.05);
    const auto b = qmebo_emulated(std::vector<double>{0.5, 0.5}, std::vector<double>{0, 1}, 0.05, 0.1, cfg, rng, &l);
    CHECK(std::abs(b.value - 0.5) <= 0.05);
    l = QueryLedger{};
    const std::vector<double> p4(4, 0.25);
    const auto c = qmebo_emulated(p4, std::vector<double>{0.1, 0.2, 0.3, 0.4}, 0.1, 0.1, cfg, rng, &l);
    CHECK(c.charged_queries == 135);
    CHECK(l.count(Oracle::B_p) == 135);
    CHECK(l.count(Oracle::B_f) == 135);
    CHECK_THROWS(qmebo_emulated(p4, std::vector<double>{0.1, 0.2, 0.3, 1.4}, 0.1, 0.1, cfg, rng, &l));
}

TEST_CASE("failure-rate contract") {
    auto cfg = faithful();
    cfg.failure_injection = true;
    Rng rng(5);
    const int n = 20000;
    const double delta = 0.05;
    int failed = 0;
    for (int t = 0; t < n; ++t) {
        const auto e = qme1_emulated(std::vector<double>{0.5, 0.5}, std::vector<double>{0.2, 0.6}, 1.0, 0.01, delta,
                                     cfg, rng, nullptr);
        if (e.failed) {
            ++failed;
            CHECK(e.value >= 0.0);
            CHECK(e.value <= 1.0);
        } else {
            CHECK(std::abs(e.value - 0.4) <= 0.01);
        }
    }
    CHECK(failed / static_cast<double>(n) <= delta + oracle::three_sigma(delta, n));
}

TEST_CASE("determinism") {
    auto run = [] {
        EmulatedProvider prov(faithful(NoiseMode::uniform_interval, 77));
        std::vector<double> out;
        QueryLedger l(true);
        for (int t = 0; t < 50; ++t) {
            out.push_back(prov.qme1(std::vector<double>{0.3, 0.7}, std::vector<double>{0.5, 1.5}, 2.0, 0.1, 0.1, &l)
                              .value);
            out.push_back(static_cast<double>(prov.qms(std::vector<double>{0.1, 0.5, 0.2}, 0.1, &l)));
        }
        return std::make_pair(out, l.log_csv());
    };
    CHECK(run() == run());
}

TEST_CASE("noise mode names") {
    CHECK(noise_mode_from_name("adv-low") == NoiseMode::adversarial_low);
    CHECK(noise_mode_from_name("uniform") == NoiseMode::uniform_interval);
    CHECK(noise_mode_from_name(noise_mode_name(NoiseMode::adversarial_high)) == NoiseMode::adversarial_high);
    CHECK_THROWS(noise_mode_from_name("loud"));
    SubroutineConfig bad;
    bad.powering_repeats_per_log = 0.5;
    CHECK_THROWS(bad.validate());
}
