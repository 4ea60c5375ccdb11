#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "qvilab/experiment.hpp"
#include "qvilab/instances.hpp"

using namespace qvilab;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ResultRow synthetic(double x, double y, Axis axis) {
    ResultRow r;
    r.S = r.A = r.H = 1;
    r.eps = r.delta = r.eta = 0.1;
    switch (axis) {
        case Axis::A: r.A = static_cast<std::size_t>(x); break;
        case Axis::eps: r.eps = x; break;
        default: break;
    }
    r.ledger_total = static_cast<std::uint64_t>(std::llround(y));
    return r;
}

}  // namespace

TEST_CASE("points and seeds") {
    ExperimentConfig c;
    c.S = {3, 4};
    c.A = {2, 3, 4};
    c.eps = {0.1, 0.2};
    const auto pts = expand_points(c);
    CHECK(pts.size() == 12);
    CHECK(pts[5].index == 5);
    CHECK(mdp_seed(1, 0, 3, true) == mdp_seed(1, 7, 3, true));
    CHECK(mdp_seed(1, 0, 3, false) != mdp_seed(1, 7, 3, false));
    CHECK(subroutine_seed(1, 0, 1) != subroutine_seed(1, 1, 0));
    CHECK(subroutine_seed(1, 2, 3) == stream_seed(stream_seed(1, 2), (std::uint64_t{2} << 32) | 3));
}

TEST_CASE("vi baseline rows always succeed") {
    ExperimentConfig c;
    c.algorithm = Algorithm::vi;
    c.S = {3, 5};
    c.trials = 3;
    for (const auto& r : run_rows(c)) {
        CHECK(r.success);
        CHECK(r.value_gap == 0.0);
        CHECK(r.policy_gap == 0.0);
        CHECK(r.ledger_total == r.S * r.S * r.A * r.H);
    }
}

TEST_CASE("qvi1 A sweep ratio") {
    ExperimentConfig c;
    c.algorithm = Algorithm::qvi1;
    c.S = {4};
    c.H = {4};
    c.A = {4, 8, 16};
    const auto rows = run_rows(c);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 1; i < 3; ++i) {
        const double ratio = static_cast<double>(rows[i].ledger_total) / static_cast<double>(rows[i - 1].ledger_total);
        CHECK(ratio >= std::sqrt(2.0) * 0.85);
        CHECK(ratio <= std::sqrt(2.0) * 1.15);
        CHECK(rows[i].success);
    }
}

TEST_CASE("csv is byte identical across reruns and round trips") {
    const auto dir = std::filesystem::temp_directory_path() / "qvilab_experiment_test";
    std::filesystem::create_directories(dir);
    ExperimentConfig c;
    c.algorithm = Algorithm::qvi4;
    c.S = {3};
    c.A = {2};
    c.H = {4};
    c.eps = {0.5, 1.0, 3.0};  // 3.0 > sqrt(4) is infeasible
    c.trials = 2;
    c.master_seed = 99;
    const auto a = run_experiment(c, (dir / "a.csv").string());
    run_experiment(c, (dir / "b.csv").string());
    const auto text = slurp(dir / "a.csv");
    CHECK(text == slurp(dir / "b.csv"));
    CHECK(text.rfind("# qvilab-results v1\n", 0) == 0);
    CHECK(std::filesystem::exists(dir / "a.csv.json"));
    CHECK(nlohmann::json::parse(slurp(dir / "a.csv.json"))["algorithm"] == "qvi4");

    CHECK(a.size() == 6);
    std::size_t skipped = 0, done = 0;
    for (const auto& r : a) {
        if (r.skipped) {
            ++skipped;
            CHECK(r.reason.find("eps") != std::string::npos);
            CHECK(r.reason.find(',') == std::string::npos);
        } else {
            ++done;
            CHECK(r.success);
            CHECK(r.q_gap.has_value());
        }
    }
    CHECK(skipped == 2);
    CHECK(done + skipped == 3 * 2);

    const auto back = parse_results_csv(text);
    REQUIRE(back.size() == a.size());
    CHECK(results_csv(back, false) == text);

    c.master_seed = 100;
    CHECK(results_csv(run_rows(c), false) != text);
    std::filesystem::remove_all(dir);
}

TEST_CASE("wall time column is opt-in") {
    ExperimentConfig c;
    c.algorithm = Algorithm::qvi3;
    c.record_wall_time = true;
    const auto rows = run_rows(c);
    CHECK(rows[0].wall_seconds.has_value());
    const auto csv = results_csv(rows, true);
    CHECK(csv.find("wall_seconds") != std::string::npos);
    CHECK(parse_results_csv(csv)[0].wall_seconds.has_value());
}

TEST_CASE("unreadable mdp file") {
    ExperimentConfig c;
    c.mdp.kind = MdpKind::file;
    c.mdp.path = "/nonexistent/mdp.json";
    CHECK_THROWS(run_rows(c));
    c.mdp.path.clear();
    CHECK_THROWS(run_rows(c));
    c.mdp.kind = MdpKind::random;
    c.trials = 0;
    CHECK_THROWS(run_rows(c));
}

TEST_CASE("hard and sparse sources") {
    ExperimentConfig c;
    c.algorithm = Algorithm::qvi1;
    c.mdp.kind = MdpKind::hard_m1;
    c.S = {7, 8};
    c.A = {3};
    const auto rows = run_rows(c);
    CHECK_FALSE(rows[0].skipped);
    CHECK(rows[0].success);
    CHECK(rows[1].skipped);

    c.algorithm = Algorithm::qvi5;
    c.mdp.kind = MdpKind::sparse;
    c.mdp.support = 2;
    c.S = {6};
    c.eta = {0.3};
    c.eps = {0.4};
    for (const auto& r : run_rows(c)) {
        CHECK_FALSE(r.skipped);
        CHECK(r.success);
        CHECK(r.ledger[static_cast<std::size_t>(Oracle::BTP)] == 1);
    }
}

TEST_CASE("planted slopes") {
    std::vector<ResultRow> rows;
    for (double A : {2.0, 4.0, 8.0, 16.0, 32.0, 64.0}) rows.push_back(synthetic(A, 1e6 * std::sqrt(A), Axis::A));
    auto f = fit_scaling(rows, Axis::A);
    CHECK(std::abs(f.slope - 0.5) <= 0.02);
    CHECK(f.ci_low <= f.slope);
    CHECK(f.ci_high >= f.slope);
    CHECK(f.points == 6);

    rows.clear();
    for (double e : {0.4, 0.2, 0.1, 0.05, 0.025}) rows.push_back(synthetic(e, 1e5 / e, Axis::eps));
    f = fit_scaling(rows, Axis::eps);
    CHECK(std::abs(f.slope + 1.0) <= 0.02);
    CHECK(std::abs(fit_scaling(rows, Axis::inv_eps).slope - 1.0) <= 0.02);

    // with noise the interval widens but still covers the planted exponent
    std::vector<double> xs, ys;
    Rng rng(3);
    for (int i = 1; i <= 8; ++i) {
        xs.push_back(i * 10.0);
        ys.push_back(std::pow(i * 10.0, 1.5) * std::exp(rng.uniform(-0.05, 0.05)));
    }
    f = fit_scaling(xs, ys);
    CHECK(f.ci_low < 1.5);
    CHECK(f.ci_high > 1.5);

    CHECK_THROWS(fit_scaling(std::vector<double>{1, 2}, std::vector<double>{1, 2}));
    CHECK_THROWS(fit_scaling(std::vector<double>{2, 2, 2}, std::vector<double>{1, 2, 3}));
}

TEST_CASE("qvi3 eps sweep slope on a fixed mdp") {
    const auto dir = std::filesystem::temp_directory_path();
    const auto path = (dir / "qvilab_fixed_mdp.json").string();
    save_mdp(random_mdp(5, 3, 4, 1.0, 17), path);
    ExperimentConfig c;
    c.algorithm = Algorithm::qvi3;
    c.mdp.kind = MdpKind::file;
    c.mdp.path = path;
    c.eps = {0.4, 0.2, 0.1, 0.05, 0.025};
    c.trials = 2;
    const auto f = fit_scaling(run_rows(c), Axis::eps);
    CHECK(std::abs(f.slope + 1.0) <= 0.15);
    std::filesystem::remove(path);
}
