#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qvilab/ledger.hpp"
#include "qvilab/rng.hpp"

namespace qvilab {

enum class NoiseMode : std::uint8_t { exact, uniform_interval, adversarial_low, adversarial_high };

std::string_view noise_mode_name(NoiseMode m);
/// Accepts both the long names and the CLI spellings (uniform, adv-low, adv-high).
NoiseMode noise_mode_from_name(std::string_view name);

struct SubroutineConfig {
    NoiseMode noise_mode = NoiseMode::uniform_interval;
    bool failure_injection = false;
    double qms_constant = 1.0;               // c~
    double powering_repeats_per_log = 2.0;   // kappa
    std::uint64_t rng_seed = 0;
    /// Use the pseudocode's QMS budget delta instead of delta/(SH).
    bool literal_qms_budget = false;
    /// Verify Var(f) <= sigma^2 on every QME2 call by exact enumeration.
    bool check_variance = false;

    void validate() const;
};

struct NoisyEstimate {
    double value = 0.0;
    /// Queries charged by this call (per oracle for QMEBO, which charges B_p and B_f alike).
    std::uint64_t charged_queries = 0;
    bool failed = false;
    double true_value = 0.0;
};

/// Raised when QME2 is asked for eps >= 4 sigma.
class Qme2ContractViolation : public std::domain_error {
public:
    Qme2ContractViolation(double eps, double sigma);
    double eps;
    double sigma;
};

// Closed-form query costs. Natural log, ceiling, at least 1.
std::uint64_t powering_repeats(double delta, double kappa);
std::uint64_t qms_cost(std::size_t n, double delta, double c_tilde);
std::uint64_t qme1_cost(double u, double eps, double delta, double kappa);
std::uint64_t qme2_cost(double sigma, double eps, double delta, double kappa);
std::uint64_t qmebo_cost(std::size_t n, double eps, double delta, double kappa);
/// ceil(ln(1/sqrt(precision)) / eta) oracle calls per converted probability-oracle use.
std::uint64_t btp_cost(double precision, double eta);
/// The precision handed to the conversion in QVI-5: eps / (4 S H^2).
double btp_precision(std::size_t S, std::size_t H, double eps);
/// btp_cost at btp_precision(S, H, eps), charged once to BTP in the ledger when given.
std::uint64_t btp_cost(std::size_t S, std::size_t H, double eps, double eta, QueryLedger* ledger);

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b);

// Query-model emulators. Each charges the closed-form cost to `ledger` when non-null.

/// Smallest argmax; with failure injection a uniform index with probability delta.
std::size_t qms_emulated(std::span<const double> f, double delta, const SubroutineConfig& config, Rng& rng,
                         QueryLedger* ledger, Oracle oracle = Oracle::O_QM);

/// Mean of f under p with 0 <= f <= u.
NoisyEstimate qme1_emulated(std::span<const double> p, std::span<const double> f, double u, double eps,
                            double delta, const SubroutineConfig& config, Rng& rng, QueryLedger* ledger);

/// Mean of f under p with Var(f) <= sigma^2; requires eps < 4 sigma.
NoisyEstimate qme2_emulated(std::span<const double> p, std::span<const double> f, double sigma, double eps,
                            double delta, const SubroutineConfig& config, Rng& rng, QueryLedger* ledger);

/// Mean of f in [0,1]^N under p via binary oracles; charges B_p and B_f.
NoisyEstimate qmebo_emulated(std::span<const double> p, std::span<const double> f, double eps, double delta,
                             const SubroutineConfig& config, Rng& rng, QueryLedger* ledger);

/// The estimator contract QVI is written against.
class SubroutineProvider {
public:
    virtual ~SubroutineProvider() = default;
    virtual const SubroutineConfig& config() const = 0;
    virtual std::size_t qms(std::span<const double> f, double delta, QueryLedger* ledger) = 0;
    virtual NoisyEstimate qme1(std::span<const double> p, std::span<const double> f, double u, double eps,
                               double delta, QueryLedger* ledger) = 0;
    virtual NoisyEstimate qme2(std::span<const double> p, std::span<const double> f, double sigma, double eps,
                               double delta, QueryLedger* ledger) = 0;
    virtual NoisyEstimate qmebo(std::span<const double> p, std::span<const double> f, double eps, double delta,
                                QueryLedger* ledger) = 0;
};

class EmulatedProvider final : public SubroutineProvider {
public:
    explicit EmulatedProvider(SubroutineConfig config);

    const SubroutineConfig& config() const override { return config_; }
    std::size_t qms(std::span<const double> f, double delta, QueryLedger* ledger) override;
    NoisyEstimate qme1(std::span<const double> p, std::span<const double> f, double u, double eps, double delta,
                       QueryLedger* ledger) override;
    NoisyEstimate qme2(std::span<const double> p, std::span<const double> f, double sigma, double eps,
                       double delta, QueryLedger* ledger) override;
    NoisyEstimate qmebo(std::span<const double> p, std::span<const double> f, double eps, double delta,
                        QueryLedger* ledger) override;

private:
    SubroutineConfig config_;
    Rng rng_;
};

}  // namespace qvilab
