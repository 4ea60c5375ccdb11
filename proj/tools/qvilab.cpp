// qvilab command line: solve, sweep, gen, fit.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qvilab/bellman.hpp"
#include "qvilab/emulation.hpp"
#include "qvilab/experiment.hpp"
#include "qvilab/instances.hpp"
#include "qvilab/qvi.hpp"

namespace {

using namespace qvilab;

struct Common {
    std::string algo = "qvi3";
    double eps = 0.1;
    double delta = 0.1;
    double eta = 0.25;
    std::uint64_t seed = 0;
    std::string noise = "uniform";
    bool inject = false;
    std::string out;
};

std::uint64_t effective_seed(std::uint64_t flag) {
    if (const char* env = std::getenv("QVI_SEED"); env != nullptr && *env != '\0') {
        return std::stoull(env);
    }
    return flag;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

SubroutineConfig subroutines(const Common& c) {
    SubroutineConfig s;
    s.noise_mode = noise_mode_from_name(c.noise);
    s.failure_injection = c.inject;
    s.rng_seed = effective_seed(c.seed);
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum value iteration laboratory"};
    app.require_subcommand(1);

    Common c;
    auto add_common = [&c](CLI::App* sub) {
        sub->add_option("--algo", c.algo, "vi, qvi1, qvi2, qvi3, qvi4 or qvi5");
        sub->add_option("--delta", c.delta, "failure probability");
        sub->add_option("--seed", c.seed, "master seed (QVI_SEED overrides)");
        sub->add_option("--noise", c.noise, "exact, uniform, adv-low or adv-high")
            ->check(CLI::IsMember({"exact", "uniform", "adv-low", "adv-high"}));
        sub->add_flag("--inject-failures", c.inject, "inject failures with the per-call budget probability");
        sub->add_option("--out", c.out, "output path (stdout when omitted)");
    };

    // solve
    auto* solve = app.add_subcommand("solve", "run one algorithm on an MDP file");
    std::string mdp_path;
    bool report = false;
    solve->add_option("--mdp", mdp_path, "MDP JSON file")->required();
    solve->add_option("--eps", c.eps, "target accuracy");
    solve->add_option("--eta", c.eta, "QVI-5 lower bound on nonzero probabilities");
    solve->add_flag("--report", report, "add gaps against exact value iteration");
    add_common(solve);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "parameter sweep to CSV");
    ExperimentConfig ec;
    std::string kind = "random";
    std::vector<double> eps_axis = {0.3};
    std::vector<double> eta_axis = {0.25};
    std::vector<double> delta_axis;
    sweep->add_option("--mdp", ec.mdp.path, "MDP JSON file (fixed mdp for every point)");
    sweep->add_option("--kind", kind, "generator: random, sparse, hard-m1, hard-m2")
        ->check(CLI::IsMember({"random", "sparse", "hard-m1", "hard-m2"}));
    sweep->add_option("--S", ec.S, "state counts")->delimiter(',');
    sweep->add_option("--A", ec.A, "action counts")->delimiter(',');
    sweep->add_option("--H", ec.H, "horizons")->delimiter(',');
    sweep->add_option("--eps", eps_axis, "accuracies")->delimiter(',');
    sweep->add_option("--eta", eta_axis, "probability lower bounds")->delimiter(',');
    sweep->add_option("--deltas", delta_axis, "failure probabilities (overrides --delta)")->delimiter(',');
    sweep->add_option("--sparsity", ec.mdp.sparsity, "random generator support fraction");
    sweep->add_option("--support", ec.mdp.support, "sparse generator support size");
    sweep->add_option("--trials", ec.trials, "trials per point");
    sweep->add_flag("--wall-time", ec.record_wall_time, "record wall time (breaks byte-identical reruns)");
    sweep->add_flag("--no-evaluate", "skip comparison against exact value iteration");
    add_common(sweep);

    // gen
    auto* gen = app.add_subcommand("gen", "emit an MDP as JSON");
    std::string gen_kind = "random";
    std::size_t gS = 4, gA = 2, gH = 4, support = 2, s_bar = 0, a_bar = 0, target = 0;
    double sparsity = 1.0, gamma = 0.9, g_eps = 0.1, g_eta = 0.25;
    std::uint64_t g_seed = 0;
    std::string g_out;
    gen->add_option("--kind", gen_kind, "random, sparse, hard-m1, hard-m2 or reduction")
        ->check(CLI::IsMember({"random", "sparse", "hard-m1", "hard-m2", "reduction"}));
    gen->add_option("--S", gS, "states (base states for reduction)");
    gen->add_option("--A", gA, "actions");
    gen->add_option("--H", gH, "horizon");
    gen->add_option("--sparsity", sparsity, "support fraction for random");
    gen->add_option("--support", support, "support size for sparse");
    gen->add_option("--eta", g_eta, "minimum nonzero probability for sparse");
    gen->add_option("--gamma", gamma, "discount of the reduction base");
    gen->add_option("--eps", g_eps, "reduction accuracy");
    gen->add_option("--s-bar", s_bar, "M2 distinguished state (offset in S_U)");
    gen->add_option("--a-bar", a_bar, "M2 distinguished action");
    gen->add_option("--target", target, "M2 good-state target (offset in S_G)");
    gen->add_option("--seed", g_seed, "generator seed (QVI_SEED overrides)");
    gen->add_option("--out", g_out, "output path");

    // fit
    auto* fit = app.add_subcommand("fit", "log-log slope of ledger totals");
    std::string results;
    std::string axis = "A";
    double confidence = 0.95;
    fit->add_option("--results", results, "results CSV")->required();
    fit->add_option("--axis", axis, "S, A, H, eps, inv_eps, delta or eta");
    fit->add_option("--confidence", confidence, "interval level");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*solve) {
            const auto mdp = load_mdp(mdp_path);
            EmulatedProvider provider(subroutines(c));
            const auto result =
                run_algorithm(algorithm_from_name(c.algo), mdp, {c.eps, c.delta, c.eta}, provider);
            auto j = result.to_json();
            if (report) {
                const bool exact = c.algo == "vi" || c.algo == "qvi1";
                const auto rep = eps_optimality_report(mdp, result.policy, result.values,
                                                       result.qvalues ? &*result.qvalues : nullptr,
                                                       exact ? 0.0 : c.eps);
                j["report"] = {{"value_gap", rep.value_gap}, {"policy_gap", rep.policy_gap}, {"ok", rep.ok()}};
                if (rep.q_gap) j["report"]["q_gap"] = *rep.q_gap;
            }
            write_text(c.out, j.dump(2) + "\n");
        } else if (*sweep) {
            ec.algorithm = algorithm_from_name(c.algo);
            ec.eps = eps_axis;
            ec.eta = eta_axis;
            ec.delta = delta_axis.empty() ? std::vector<double>{c.delta} : delta_axis;
            ec.subroutines = subroutines(c);
            ec.master_seed = ec.subroutines.rng_seed;
            ec.evaluate = sweep->count("--no-evaluate") == 0;
            if (!ec.mdp.path.empty()) {
                ec.mdp.kind = MdpKind::file;
            } else {
                ec.mdp.kind = mdp_kind_from_name(kind);
            }
            if (c.out.empty()) {
                std::cout << results_csv(run_rows(ec), ec.record_wall_time);
            } else {
                const auto rows = run_experiment(ec, c.out);
                std::size_t skipped = 0;
                for (const auto& r : rows) skipped += r.skipped ? 1 : 0;
                std::cerr << rows.size() << " rows (" << skipped << " skipped) -> " << c.out << "\n";
            }
        } else if (*gen) {
            const auto seed = effective_seed(g_seed);
            nlohmann::json j;
            if (gen_kind == "random") {
                j = to_json(random_mdp(gS, gA, gH, sparsity, seed));
            } else if (gen_kind == "sparse") {
                j = to_json(random_sparse_mdp(gS, gA, gH, support, g_eta, seed));
            } else if (gen_kind == "reduction") {
                HorizonReductionSpec spec{random_discounted_mdp(gS, gA, seed), gamma, g_eps};
                j = to_json(make_horizon_reduction(spec));
            } else {
                HardInstanceSpec spec;
                spec.S = gS;
                spec.A = gA;
                spec.H = gH;
                spec.seed = seed;
                spec.variant = gen_kind == "hard-m1" ? HardVariant::M1 : HardVariant::M2;
                spec.s_bar = s_bar;
                spec.a_bar = a_bar;
                spec.target_good = target;
                j = to_json(make_hard_instance(spec));
            }
            write_text(g_out, j.dump() + "\n");
        } else if (*fit) {
            const auto f = fit_scaling_file(results, axis_from_name(axis), confidence);
            nlohmann::json j = {{"axis", axis},         {"slope", f.slope},     {"intercept", f.intercept},
                                {"ci_low", f.ci_low},   {"ci_high", f.ci_high}, {"r_squared", f.r_squared},
                                {"points", f.points},   {"confidence", confidence}};
            std::cout << j.dump(2) << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
