#include "qvilab/emulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qvilab/mdp.hpp"

namespace qvilab {

namespace {

constexpr std::uint64_t kMaxCount = std::numeric_limits<std::uint64_t>::max();

std::uint64_t ceil_count(double x) {
    if (!(x < 1.8e19)) return kMaxCount;
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(x)));
}

void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

void check_eps(double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
}

void check_lengths(std::span<const double> p, std::span<const double> f) {
    if (p.empty() || p.size() != f.size()) {
        throw std::invalid_argument("distribution and function must be nonempty and of equal length");
    }
}

void check_range(std::span<const double> f, double lo, double hi, const char* what) {
    const double slack = 1e-12 * std::max(1.0, hi);
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(f[i] >= lo - slack && f[i] <= hi + slack)) {
            std::ostringstream os;
            os << what << ": f[" << i << "] = " << f[i] << " outside [" << lo << ", " << hi << "]";
            throw std::invalid_argument(os.str());
        }
    }
}

/// Applies the configured noise (or an injected failure) to an exact mean.
NoisyEstimate perturb(double mean, double eps, double delta, double lo, double hi,
                      const SubroutineConfig& config, Rng& rng) {
    NoisyEstimate out;
    out.true_value = mean;
    if (config.failure_injection && rng.bernoulli(delta)) {
        out.failed = true;
        out.value = lo < hi ? rng.uniform(lo, hi) : lo;
        return out;
    }
    switch (config.noise_mode) {
        case NoiseMode::exact: out.value = mean; break;
        case NoiseMode::uniform_interval: out.value = mean + rng.uniform(-eps, eps); break;
        case NoiseMode::adversarial_low: out.value = mean - eps; break;
        case NoiseMode::adversarial_high: out.value = mean + eps; break;
    }
    return out;
}

}  // namespace

std::string_view noise_mode_name(NoiseMode m) {
    switch (m) {
        case NoiseMode::exact: return "exact";
        case NoiseMode::uniform_interval: return "uniform_interval";
        case NoiseMode::adversarial_low: return "adversarial_low";
        case NoiseMode::adversarial_high: return "adversarial_high";
    }
    return "?";
}

NoiseMode noise_mode_from_name(std::string_view name) {
    if (name == "exact") return NoiseMode::exact;
    if (name == "uniform" || name == "uniform_interval") return NoiseMode::uniform_interval;
    if (name == "adv-low" || name == "adversarial_low") return NoiseMode::adversarial_low;
    if (name == "adv-high" || name == "adversarial_high") return NoiseMode::adversarial_high;
    throw std::invalid_argument("unknown noise mode: " + std::string(name));
}

void SubroutineConfig::validate() const {
    if (!(qms_constant > 0.0)) throw std::invalid_argument("qms constant must be positive");
    if (!(powering_repeats_per_log >= 1.0)) throw std::invalid_argument("powering repeats per log must be >= 1");
}

Qme2ContractViolation::Qme2ContractViolation(double e, double s)
    : std::domain_error("QME2 requires eps < 4 sigma (eps=" + std::to_string(e) +
                        ", sigma=" + std::to_string(s) + ")"),
      eps(e),
      sigma(s) {}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > kMaxCount / a) return kMaxCount;
    return a * b;
}

std::uint64_t powering_repeats(double delta, double kappa) {
    check_delta(delta);
    return ceil_count(kappa * std::log(1.0 / delta));
}

std::uint64_t qms_cost(std::size_t n, double delta, double c_tilde) {
    check_delta(delta);
    return ceil_count(c_tilde * std::sqrt(static_cast<double>(n)) * std::log(1.0 / delta));
}

std::uint64_t qme1_cost(double u, double eps, double delta, double kappa) {
    check_eps(eps);
    const double r = u / eps;
    return saturating_mul(ceil_count(r + std::sqrt(r)), powering_repeats(delta, kappa));
}

std::uint64_t qme2_cost(double sigma, double eps, double delta, double kappa) {
    check_eps(eps);
    if (!(eps < 4.0 * sigma)) throw Qme2ContractViolation(eps, sigma);
    const double r = sigma / eps;
    const double l = std::max(1.0, std::log(r));
    return saturating_mul(ceil_count(r * l * l), powering_repeats(delta, kappa));
}

std::uint64_t qmebo_cost(std::size_t n, double eps, double delta, double kappa) {
    check_eps(eps);
    const double nd = static_cast<double>(n);
    return saturating_mul(ceil_count(std::sqrt(nd) / eps + std::sqrt(nd / eps)), powering_repeats(delta, kappa));
}

std::uint64_t btp_cost(double precision, double eta) {
    if (!(eta > 0.0 && eta < 0.5)) throw std::invalid_argument("eta must lie in (0, 1/2)");
    if (!(precision > 0.0)) throw std::invalid_argument("conversion precision must be positive");
    return ceil_count(std::log(1.0 / std::sqrt(precision)) / eta);
}

double btp_precision(std::size_t S, std::size_t H, double eps) {
    const double h = static_cast<double>(H);
    return eps / (4.0 * static_cast<double>(S) * h * h);
}

std::uint64_t btp_cost(std::size_t S, std::size_t H, double eps, double eta, QueryLedger* ledger) {
    const auto c = btp_cost(btp_precision(S, H, eps), eta);
    if (ledger != nullptr) ledger->charge(Oracle::BTP, 1, "btp");
    return c;
}

std::size_t qms_emulated(std::span<const double> f, double delta, const SubroutineConfig& config, Rng& rng,
                         QueryLedger* ledger, Oracle oracle) {
    if (f.empty()) throw std::invalid_argument("QMS over an empty sequence");
    const auto cost = qms_cost(f.size(), delta, config.qms_constant);
    if (ledger != nullptr) ledger->charge(oracle, cost, "qms");
    if (config.failure_injection && rng.bernoulli(delta)) return rng.below(f.size());
    return argmax_first(f);
}

NoisyEstimate qme1_emulated(std::span<const double> p, std::span<const double> f, double u, double eps,
                            double delta, const SubroutineConfig& config, Rng& rng, QueryLedger* ledger) {
    check_lengths(p, f);
    check_eps(eps);
    if (!(u > 0.0)) throw std::invalid_argument("QME1 range bound u must be positive");
    check_range(f, 0.0, u, "QME1");
    const auto cost = qme1_cost(u, eps, delta, config.powering_repeats_per_log);
    if (ledger != nullptr) ledger->charge(Oracle::generative_quantum, cost, "qme1");
    auto out = perturb(expectation(p, f), eps, delta, 0.0, u, config, rng);
    out.charged_queries = cost;
    return out;
}

NoisyEstimate qme2_emulated(std::span<const double> p, std::span<const double> f, double sigma, double eps,
                            double delta, const SubroutineConfig& config, Rng& rng, QueryLedger* ledger) {
    check_lengths(p, f);
    check_eps(eps);
    const auto cost = qme2_cost(sigma, eps, delta, config.powering_repeats_per_log);
    const double mean = expectation(p, f);
    if (config.check_variance) {
        double var = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) var += p[i] * (f[i] - mean) * (f[i] - mean);
        if (var > sigma * sigma * (1.0 + 1e-9) + 1e-15) {
            throw std::invalid_argument("QME2 variance bound violated: Var(f)=" + std::to_string(var) +
                                        " > sigma^2=" + std::to_string(sigma * sigma));
        }
    }
    if (ledger != nullptr) ledger->charge(Oracle::generative_quantum, cost, "qme2");
    const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    auto out = perturb(mean, eps, delta, *lo, *hi, config, rng);
    out.charged_queries = cost;
    return out;
}

NoisyEstimate qmebo_emulated(std::span<const double> p, std::span<const double> f, double eps, double delta,
                             const SubroutineConfig& config, Rng& rng, QueryLedger* ledger) {
    check_lengths(p, f);
    check_eps(eps);
    check_range(f, 0.0, 1.0, "QMEBO");
    const auto cost = qmebo_cost(f.size(), eps, delta, config.powering_repeats_per_log);
    if (ledger != nullptr) {
        ledger->charge(Oracle::B_p, cost, "qmebo");
        ledger->charge(Oracle::B_f, cost, "qmebo");
    }
    auto out = perturb(expectation(p, f), eps, delta, 0.0, 1.0, config, rng);
    out.charged_queries = cost;
    return out;
}

EmulatedProvider::EmulatedProvider(SubroutineConfig config) : config_(config), rng_(config.rng_seed) {
    config_.validate();
}

std::size_t EmulatedProvider::qms(std::span<const double> f, double delta, QueryLedger* ledger) {
    return qms_emulated(f, delta, config_, rng_, ledger);
}

NoisyEstimate EmulatedProvider::qme1(std::span<const double> p, std::span<const double> f, double u, double eps,
                                     double delta, QueryLedger* ledger) {
    return qme1_emulated(p, f, u, eps, delta, config_, rng_, ledger);
}

NoisyEstimate EmulatedProvider::qme2(std::span<const double> p, std::span<const double> f, double sigma,
                                     double eps, double delta, QueryLedger* ledger) {
    return qme2_emulated(p, f, sigma, eps, delta, config_, rng_, ledger);
}

NoisyEstimate EmulatedProvider::qmebo(std::span<const double> p, std::span<const double> f, double eps,
                                      double delta, QueryLedger* ledger) {
    return qmebo_emulated(p, f, eps, delta, config_, rng_, ledger);
}

}  // namespace qvilab
