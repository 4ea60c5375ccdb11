#include "qvilab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include <boost/math/distributions/students_t.hpp>

#include "qvilab/bellman.hpp"
#include "qvilab/instances.hpp"
#include "qvilab/rng.hpp"

namespace qvilab {

namespace {

std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string sanitize(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

FiniteHorizonMdp build_mdp(const ExperimentConfig& cfg, const ExperimentPoint& pt, std::uint64_t seed) {
    switch (cfg.mdp.kind) {
        case MdpKind::file: return load_mdp(cfg.mdp.path);
        case MdpKind::random: return random_mdp(pt.S, pt.A, pt.H, cfg.mdp.sparsity, seed);
        case MdpKind::sparse: return random_sparse_mdp(pt.S, pt.A, pt.H, cfg.mdp.support, pt.eta, seed);
        case MdpKind::hard_m1:
        case MdpKind::hard_m2: {
            HardInstanceSpec spec;
            spec.S = pt.S;
            spec.A = pt.A;
            spec.H = pt.H;
            spec.seed = seed;
            spec.variant = cfg.mdp.kind == MdpKind::hard_m1 ? HardVariant::M1 : HardVariant::M2;
            return make_hard_instance(spec);
        }
    }
    throw std::invalid_argument("unknown mdp source");
}

ResultRow run_one(const ExperimentConfig& cfg, const ExperimentPoint& pt, std::size_t trial) {
    ResultRow row;
    row.point = pt.index;
    row.trial = trial;
    row.algorithm = std::string(algorithm_name(cfg.algorithm));
    row.S = pt.S;
    row.A = pt.A;
    row.H = pt.H;
    row.eps = pt.eps;
    row.delta = pt.delta;
    row.eta = pt.eta;
    row.seed = subroutine_seed(cfg.master_seed, pt.index, trial);
    try {
        const auto mdp = build_mdp(cfg, pt, mdp_seed(cfg.master_seed, pt.index, trial, cfg.mdp.shared_across_points));
        SubroutineConfig sub = cfg.subroutines;
        sub.rng_seed = row.seed;
        EmulatedProvider provider(sub);
        const auto result = run_algorithm(cfg.algorithm, mdp, {pt.eps, pt.delta, pt.eta}, provider);
        for (std::size_t i = 0; i < kNumOracles; ++i) row.ledger[i] = result.ledger.count(static_cast<Oracle>(i));
        row.ledger_total = result.ledger.total();
        if (cfg.record_wall_time) row.wall_seconds = result.wall_seconds;
        if (cfg.evaluate) {
            const bool exact = cfg.algorithm == Algorithm::vi || cfg.algorithm == Algorithm::qvi1;
            const auto rep = eps_optimality_report(mdp, result.policy, result.values,
                                                   result.qvalues ? &*result.qvalues : nullptr,
                                                   exact ? 0.0 : pt.eps);
            row.value_gap = rep.value_gap;
            row.policy_gap = rep.policy_gap;
            row.q_gap = rep.q_gap;
            row.success = rep.ok();
        }
    } catch (const std::invalid_argument& e) {
        row.skipped = true;
        row.reason = sanitize(e.what());
    }
    return row;
}

}  // namespace

std::string_view mdp_kind_name(MdpKind k) {
    switch (k) {
        case MdpKind::file: return "file";
        case MdpKind::random: return "random";
        case MdpKind::sparse: return "sparse";
        case MdpKind::hard_m1: return "hard-m1";
        case MdpKind::hard_m2: return "hard-m2";
    }
    return "?";
}

MdpKind mdp_kind_from_name(std::string_view name) {
    for (auto k : {MdpKind::file, MdpKind::random, MdpKind::sparse, MdpKind::hard_m1, MdpKind::hard_m2}) {
        if (mdp_kind_name(k) == name) return k;
    }
    throw std::invalid_argument("unknown mdp kind: " + std::string(name));
}

void ExperimentConfig::validate() const {
    if (S.empty() || A.empty() || H.empty() || eps.empty() || delta.empty() || eta.empty()) {
        throw std::invalid_argument("every sweep axis needs at least one value");
    }
    if (trials < 1) throw std::invalid_argument("trials must be at least 1");
    if (mdp.kind == MdpKind::file && mdp.path.empty()) throw std::invalid_argument("mdp file path missing");
    subroutines.validate();
}

nlohmann::json ExperimentConfig::to_json() const {
    return {
        {"algorithm", std::string(algorithm_name(algorithm))},
        {"mdp",
         {{"kind", std::string(mdp_kind_name(mdp.kind))},
          {"path", mdp.path},
          {"sparsity", mdp.sparsity},
          {"support", mdp.support},
          {"shared_across_points", mdp.shared_across_points}}},
        {"S", S},
        {"A", A},
        {"H", H},
        {"eps", eps},
        {"delta", delta},
        {"eta", eta},
        {"trials", trials},
        {"subroutines",
         {{"noise_mode", std::string(noise_mode_name(subroutines.noise_mode))},
          {"failure_injection", subroutines.failure_injection},
          {"qms_constant", subroutines.qms_constant},
          {"powering_repeats_per_log", subroutines.powering_repeats_per_log},
          {"literal_qms_budget", subroutines.literal_qms_budget}}},
        {"master_seed", master_seed},
        {"record_wall_time", record_wall_time},
        {"evaluate", evaluate},
    };
}

std::vector<ExperimentPoint> expand_points(const ExperimentConfig& c) {
    std::vector<ExperimentPoint> out;
    for (auto S : c.S)
        for (auto A : c.A)
            for (auto H : c.H)
                for (auto e : c.eps)
                    for (auto d : c.delta)
                        for (auto n : c.eta) out.push_back({out.size(), S, A, H, e, d, n});
    return out;
}

std::uint64_t mdp_seed(std::uint64_t master, std::size_t point, std::size_t trial, bool shared) {
    const std::uint64_t coord = shared ? trial : (static_cast<std::uint64_t>(point) << 32) | trial;
    return stream_seed(stream_seed(master, 1), coord);
}

std::uint64_t subroutine_seed(std::uint64_t master, std::size_t point, std::size_t trial) {
    return stream_seed(stream_seed(master, 2), (static_cast<std::uint64_t>(point) << 32) | trial);
}

std::vector<ResultRow> run_rows(const ExperimentConfig& config) {
    config.validate();
    std::vector<ResultRow> rows;
    for (const auto& pt : expand_points(config)) {
        for (std::size_t t = 0; t < config.trials; ++t) rows.push_back(run_one(config, pt, t));
    }
    std::sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
        return std::tie(a.point, a.trial) < std::tie(b.point, b.trial);
    });
    return rows;
}

std::string results_csv(const std::vector<ResultRow>& rows, bool with_wall_time) {
    std::ostringstream os;
    os << kResultsVersion << '\n';
    os << "point,trial,algorithm,S,A,H,eps,delta,eta,seed,status,reason,success,value_gap,policy_gap,q_gap";
    for (std::size_t i = 0; i < kNumOracles; ++i) os << ",ledger_" << oracle_name(static_cast<Oracle>(i));
    os << ",ledger_total";
    if (with_wall_time) os << ",wall_seconds";
    os << '\n';
    for (const auto& r : rows) {
        os << r.point << ',' << r.trial << ',' << r.algorithm << ',' << r.S << ',' << r.A << ',' << r.H << ','
           << fmt_double(r.eps) << ',' << fmt_double(r.delta) << ',' << fmt_double(r.eta) << ',' << r.seed << ','
           << (r.skipped ? "skipped" : "ok") << ',' << r.reason << ',' << (r.success ? 1 : 0) << ','
           << fmt_double(r.value_gap) << ',' << fmt_double(r.policy_gap) << ','
           << (r.q_gap ? fmt_double(*r.q_gap) : "");
        for (auto c : r.ledger) os << ',' << c;
        os << ',' << r.ledger_total;
        if (with_wall_time) os << ',' << (r.wall_seconds ? fmt_double(*r.wall_seconds) : "");
        os << '\n';
    }
    return os.str();
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != kResultsVersion) {
        throw std::invalid_argument("not a qvilab results file (missing version line)");
    }
    if (!std::getline(is, line)) throw std::invalid_argument("results file has no header");
    const auto header = split(line, ',');
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    auto at = [&](const std::vector<std::string>& f, const std::string& name) -> const std::string& {
        const auto it = col.find(name);
        if (it == col.end() || it->second >= f.size()) throw std::invalid_argument("missing column " + name);
        return f[it->second];
    };
    std::vector<ResultRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        ResultRow r;
        r.point = std::stoul(at(f, "point"));
        r.trial = std::stoul(at(f, "trial"));
        r.algorithm = at(f, "algorithm");
        r.S = std::stoul(at(f, "S"));
        r.A = std::stoul(at(f, "A"));
        r.H = std::stoul(at(f, "H"));
        r.eps = std::stod(at(f, "eps"));
        r.delta = std::stod(at(f, "delta"));
        r.eta = std::stod(at(f, "eta"));
        r.seed = std::stoull(at(f, "seed"));
        r.skipped = at(f, "status") == "skipped";
        r.reason = at(f, "reason");
        r.success = at(f, "success") == "1";
        r.value_gap = std::stod(at(f, "value_gap"));
        r.policy_gap = std::stod(at(f, "policy_gap"));
        if (!at(f, "q_gap").empty()) r.q_gap = std::stod(at(f, "q_gap"));
        for (std::size_t i = 0; i < kNumOracles; ++i) {
            r.ledger[i] = std::stoull(at(f, "ledger_" + std::string(oracle_name(static_cast<Oracle>(i)))));
        }
        r.ledger_total = std::stoull(at(f, "ledger_total"));
        if (col.count("wall_seconds") && !at(f, "wall_seconds").empty()) r.wall_seconds = std::stod(at(f, "wall_seconds"));
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const std::string& path) {
    auto rows = run_rows(config);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write results to " + path);
    out << results_csv(rows, config.record_wall_time);
    std::ofstream side(path + ".json", std::ios::binary);
    if (!side) throw std::runtime_error("cannot write config sidecar " + path + ".json");
    side << config.to_json().dump(2) << '\n';
    return rows;
}

Axis axis_from_name(std::string_view name) {
    for (auto a : {Axis::S, Axis::A, Axis::H, Axis::eps, Axis::inv_eps, Axis::delta, Axis::eta}) {
        if (axis_name(a) == name) return a;
    }
    throw std::invalid_argument("unknown axis: " + std::string(name));
}

std::string_view axis_name(Axis a) {
    switch (a) {
        case Axis::S: return "S";
        case Axis::A: return "A";
        case Axis::H: return "H";
        case Axis::eps: return "eps";
        case Axis::inv_eps: return "inv_eps";
        case Axis::delta: return "delta";
        case Axis::eta: return "eta";
    }
    return "?";
}

ScalingFit fit_scaling(const std::vector<double>& x, const std::vector<double>& y, double confidence) {
    if (x.size() != y.size()) throw std::invalid_argument("fit inputs differ in length");
    const std::size_t n = x.size();
    if (n < 3) throw std::invalid_argument("scaling fit needs at least 3 sweep points");
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::invalid_argument("scaling fit needs positive values");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("degenerate sweep: all axis values equal");
    ScalingFit fit;
    fit.points = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    const double sse = std::max(0.0, syy - fit.slope * sxy);
    fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    const double se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    const boost::math::students_t dist(static_cast<double>(n - 2));
    const double t = boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
    fit.ci_low = fit.slope - t * se;
    fit.ci_high = fit.slope + t * se;
    return fit;
}

ScalingFit fit_scaling(const std::vector<ResultRow>& rows, Axis axis, double confidence) {
    std::map<double, std::pair<double, std::size_t>> groups;
    for (const auto& r : rows) {
        if (r.skipped) continue;
        double x = 0.0;
        switch (axis) {
            case Axis::S: x = static_cast<double>(r.S); break;
            case Axis::A: x = static_cast<double>(r.A); break;
            case Axis::H: x = static_cast<double>(r.H); break;
            case Axis::eps: x = r.eps; break;
            case Axis::inv_eps: x = 1.0 / r.eps; break;
            case Axis::delta: x = r.delta; break;
            case Axis::eta: x = r.eta; break;
        }
        auto& g = groups[x];
        g.first += static_cast<double>(r.ledger_total);
        g.second += 1;
    }
    std::vector<double> xs, ys;
    for (const auto& [x, g] : groups) {
        xs.push_back(x);
        ys.push_back(g.first / static_cast<double>(g.second));
    }
    return fit_scaling(xs, ys, confidence);
}

ScalingFit fit_scaling_file(const std::string& path, Axis axis, double confidence) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read results file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fit_scaling(parse_results_csv(ss.str()), axis, confidence);
}

}  // namespace qvilab
