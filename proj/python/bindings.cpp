#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qvilab/bellman.hpp"
#include "qvilab/emulation.hpp"
#include "qvilab/experiment.hpp"
#include "qvilab/instances.hpp"
#include "qvilab/qvi.hpp"
#include "qvilab/statevector.hpp"

namespace py = pybind11;
using namespace qvilab;

namespace {

// JSON crosses the boundary as text; the Python side sees plain lists/dicts.
py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::dict solution_dict(const Solution& s) {
    py::dict d;
    d["policy"] = to_py(to_json(s.policy));
    d["V"] = to_py(to_json(s.values));
    d["Q"] = to_py(to_json(s.qvalues));
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Finite-horizon MDP solvers, emulated quantum value iteration and a small statevector QMEBO";

    py::class_<FiniteHorizonMdp>(m, "Mdp")
        .def_static("from_json", [](const std::string& s) { return mdp_from_json(nlohmann::json::parse(s)); })
        .def_static("load", &load_mdp)
        .def("to_json", [](const FiniteHorizonMdp& mdp) { return to_json(mdp).dump(); })
        .def("save", [](const FiniteHorizonMdp& mdp, const std::string& path) { save_mdp(mdp, path); })
        .def_property_readonly("S", &FiniteHorizonMdp::num_states)
        .def_property_readonly("A", &FiniteHorizonMdp::num_actions)
        .def_property_readonly("H", &FiniteHorizonMdp::horizon)
        .def("__repr__", [](const FiniteHorizonMdp& mdp) {
            return "<Mdp S=" + std::to_string(mdp.num_states()) + " A=" + std::to_string(mdp.num_actions()) +
                   " H=" + std::to_string(mdp.horizon()) + ">";
        });

    m.def("random_mdp", &random_mdp, py::arg("S"), py::arg("A"), py::arg("H"), py::arg("sparsity") = 1.0,
          py::arg("seed") = 0);
    m.def("random_sparse_mdp", &random_sparse_mdp, py::arg("S"), py::arg("A"), py::arg("H"), py::arg("support"),
          py::arg("eta"), py::arg("seed") = 0);
    m.def(
        "hard_instance",
        [](std::size_t S, std::size_t A, std::size_t H, const std::string& variant, std::uint64_t seed,
           std::size_t s_bar, std::size_t a_bar, std::size_t target) {
            HardInstanceSpec spec{S, A, H, variant == "M2" ? HardVariant::M2 : HardVariant::M1, seed, s_bar, a_bar,
                                  target};
            return make_hard_instance(spec);
        },
        py::arg("S"), py::arg("A"), py::arg("H"), py::arg("variant") = "M1", py::arg("seed") = 0,
        py::arg("s_bar") = 0, py::arg("a_bar") = 0, py::arg("target") = 0);

    m.def("value_iteration", [](const FiniteHorizonMdp& mdp) { return solution_dict(exact_value_iteration(mdp)); });
    m.def("brute_force_optimal", [](const FiniteHorizonMdp& mdp) { return solution_dict(brute_force_optimal(mdp)); });
    m.def(
        "policy_value",
        [](const FiniteHorizonMdp& mdp, const std::vector<std::vector<std::uint32_t>>& policy) {
            Policy pi(mdp.num_states(), mdp.horizon());
            for (std::size_t h = 0; h < mdp.horizon(); ++h) {
                for (std::size_t s = 0; s < mdp.num_states(); ++s) pi(s, h) = policy.at(h).at(s);
            }
            return to_py(to_json(policy_value(mdp, pi)));
        },
        py::arg("mdp"), py::arg("policy"), "policy is indexed [h][s]");

    m.def(
        "solve",
        [](const FiniteHorizonMdp& mdp, const std::string& algo, double eps, double delta, double eta,
           std::uint64_t seed, const std::string& noise, bool inject_failures) {
            SubroutineConfig cfg;
            cfg.noise_mode = noise_mode_from_name(noise);
            cfg.failure_injection = inject_failures;
            cfg.rng_seed = seed;
            EmulatedProvider provider(cfg);
            return to_py(run_algorithm(algorithm_from_name(algo), mdp, {eps, delta, eta}, provider).to_json());
        },
        py::arg("mdp"), py::arg("algo") = "qvi3", py::arg("eps") = 0.1, py::arg("delta") = 0.1,
        py::arg("eta") = 0.25, py::arg("seed") = 0, py::arg("noise") = "uniform",
        py::arg("inject_failures") = false);

    m.def("qms_cost", &qms_cost, py::arg("n"), py::arg("delta"), py::arg("c_tilde") = 1.0);
    m.def("qme1_cost", &qme1_cost, py::arg("u"), py::arg("eps"), py::arg("delta"), py::arg("kappa") = 2.0);
    m.def("qme2_cost", &qme2_cost, py::arg("sigma"), py::arg("eps"), py::arg("delta"), py::arg("kappa") = 2.0);
    m.def("qmebo_cost", &qmebo_cost, py::arg("n"), py::arg("eps"), py::arg("delta"), py::arg("kappa") = 2.0);
    m.def("btp_cost", py::overload_cast<double, double>(&btp_cost), py::arg("precision"), py::arg("eta"));

    m.def(
        "qmebo_exact",
        [](const std::vector<double>& p, const std::vector<double>& f, double eps, double delta,
           std::uint64_t seed, unsigned q, unsigned frac) {
            QmeboOptions opt;
            opt.format = {q, frac};
            Rng rng(seed);
            const auto r = qmebo_exact(p, f, eps, delta, opt, rng, nullptr);
            py::dict d;
            d["estimate"] = r.estimate;
            d["amplitude"] = r.amplitude;
            d["encoding_bound"] = r.encoding_bound;
            d["T"] = r.T;
            d["K"] = r.K;
            d["charged_queries"] = r.charged_queries;
            return d;
        },
        py::arg("p"), py::arg("f"), py::arg("eps"), py::arg("delta"), py::arg("seed") = 0, py::arg("q") = 16,
        py::arg("p_bits") = 12);

    m.def(
        "fit_slope",
        [](const std::vector<double>& x, const std::vector<double>& y) {
            const auto f = fit_scaling(x, y);
            return py::make_tuple(f.slope, f.ci_low, f.ci_high);
        },
        py::arg("x"), py::arg("y"));
}
