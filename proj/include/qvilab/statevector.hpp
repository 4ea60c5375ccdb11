#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qvilab/emulation.hpp"
#include "qvilab/ledger.hpp"
#include "qvilab/mdp.hpp"
#include "qvilab/rng.hpp"

namespace qvilab {

using Amplitude = std::complex<double>;

/// Unsigned fixed point with q total bits, p of them fractional.
struct FixedPointFormat {
    unsigned total_bits = 16;
    unsigned fractional_bits = 12;

    void validate() const;
    double resolution() const;             // 2^-p
    double upper() const;                  // 2^(q-p), exclusive
    std::uint64_t encode(double x) const;  // floor(x 2^p); throws outside [0, upper)
    double decode(std::uint64_t code) const;
    double round_trip(double x) const { return decode(encode(x)); }
};

struct Register {
    std::string name;
    unsigned width;
};

/// Dense state over named registers. The first register is the most
/// significant part of the basis index.
class PureState {
public:
    /// |0...0> over the given layout.
    explicit PureState(std::vector<Register> layout);

    const std::vector<Register>& layout() const noexcept { return layout_; }
    unsigned total_width() const noexcept { return width_; }
    std::size_t dimension() const noexcept { return amps_.size(); }

    std::vector<Amplitude>& amplitudes() noexcept { return amps_; }
    const std::vector<Amplitude>& amplitudes() const noexcept { return amps_; }

    std::size_t register_index(const std::string& name) const;
    unsigned shift(const std::string& name) const;
    unsigned width(const std::string& name) const;
    std::uint64_t field(std::uint64_t basis, const std::string& name) const;

    double norm_squared() const;

    /// Basis string (registers separated by '|') -> [re, im] for nonzero
    /// amplitudes; widths up to 12 qubits.
    nlohmann::json to_json() const;

private:
    std::vector<Register> layout_;
    std::vector<unsigned> shifts_;
    unsigned width_ = 0;
    std::vector<Amplitude> amps_;
};

/// Dense square matrix, row major.
struct Unitary {
    std::size_t dim = 0;
    std::vector<Amplitude> entries;

    Amplitude operator()(std::size_t r, std::size_t c) const { return entries[r * dim + c]; }
    Amplitude& operator()(std::size_t r, std::size_t c) { return entries[r * dim + c]; }
};

/// max |U^dagger U - I| entrywise.
double unitarity_error(const Unitary& u);

/// |i>|y> -> |i>|y xor b(f_i)>; entries past N encode 0.
struct BinaryOracleSpec {
    std::size_t domain_size = 0;
    std::vector<double> values;
    FixedPointFormat format;

    std::vector<std::uint64_t> codes() const;
};

// Gates on a PureState.
void apply_hadamards(PureState& state, const std::string& reg);
void apply_binary_oracle(PureState& state, const std::string& index_reg, const std::string& target_reg,
                         std::span<const std::uint64_t> codes);
/// Rotates single-qubit register `target` by R(v) = [[sqrt v, -sqrt(1-v)], [sqrt(1-v), sqrt v]]
/// with v = format.decode(control) clamped to [0, 1]; `inverse` applies R(v)^T.
void apply_controlled_rotation(PureState& state, const std::string& control_reg, const std::string& target,
                               const FixedPointFormat& format, bool inverse = false);
/// Applies a dense unitary to the leading (most significant) qubits.
void apply_leading(PureState& state, const Unitary& u);
/// Removes a register that must be |0>; throws if any amplitude outside 0 exceeds tol.
PureState drop_zero_register(const PureState& state, const std::string& reg, double tol = 1e-12);

/// Smallest power of two >= n.
std::size_t padded_size(std::size_t n);

struct UpHat {
    Unitary unitary;           // over index (n qubits) x flag, flag least significant
    std::size_t padded_n = 0;
    unsigned index_width = 0;
    std::vector<double> encoded_p;  // decoded fixed-point probabilities, padded
    bool coarse_format = false;     // 2^-p > min nonzero p_i / 4
};

/// U_p|0>|0> = sum_i sqrt(p_i/N)|i>|0> + sqrt((1-p_i)/N)|i>|1>, assembled from
/// Hadamards, B_p into a scratch register, R_p on the flag, and B_p^dagger.
UpHat build_up_hat(std::span<const double> p, const FixedPointFormat& format);

struct Psi2 {
    PureState state;
    std::size_t padded_n = 0;
    double weight = 0.0;           // <psi|P|psi>, P = flag=fval=rot=0
    double encoding_bound = 0.0;   // |N weight - p^T f| bound
    bool coarse_format = false;
};

/// Registers index(n), flag, fval(q), rot.
Psi2 prepare_psi2(std::span<const double> p, std::span<const double> f, const FixedPointFormat& format);

/// Projector onto flag = fval = rot = 0 in a psi2 layout.
bool psi2_good(const PureState& state, std::uint64_t basis);
double projection_weight(const PureState& state);

enum class AEMode : std::uint8_t { subspace_exact, full_register };

struct AEConfig {
    std::uint64_t grover_powers = 1;     // T; outcomes y in [0, T)
    std::uint64_t powering_repeats = 1;  // K
    AEMode mode = AEMode::subspace_exact;

    void validate() const;
};

/// Outcome law of phase estimation on the Grover operator, from a = sin^2(theta).
std::vector<double> ae_subspace_distribution(double a, std::uint64_t T);
/// Same law from the full-register Grover dynamics on psi2.
std::vector<double> ae_full_register_distribution(const PureState& psi, std::uint64_t T);

double ae_estimate_from_outcome(std::uint64_t y, std::uint64_t T);
double ae_error_bound(double a, std::uint64_t T);

struct AEOutcome {
    double estimate = 0.0;
    std::uint64_t outcome = 0;
    std::uint64_t reflections = 0;  // 2T
};

/// Samples an outcome from a precomputed law.
AEOutcome sample_ae(std::span<const double> distribution, Rng& rng);
AEOutcome amplitude_estimation(const Psi2& psi, std::uint64_t T, AEMode mode, Rng& rng);

/// Lower median for even K.
double powering_median(std::vector<double> trials);

enum class GroverPowerRule : std::uint8_t { rigorous, simple };

/// Smallest T with eps T^2 - pi^2 sqrt(N) T - pi^2 N >= 0, or ceil(sqrt(N)/eps + sqrt(N/eps)).
std::uint64_t qmebo_grover_powers(std::size_t n, double eps, GroverPowerRule rule);

struct QmeboOptions {
    FixedPointFormat format;
    double kappa = 2.0;
    GroverPowerRule rule = GroverPowerRule::rigorous;
    AEMode mode = AEMode::subspace_exact;
};

struct QmeboResult {
    double estimate = 0.0;
    double amplitude = 0.0;        // encoded weight a
    double encoding_bound = 0.0;
    std::uint64_t T = 0;
    std::uint64_t K = 0;
    std::size_t padded_n = 0;
    std::uint64_t charged_queries = 0;  // 2 T K to each of B_p and B_f
    std::vector<double> trials;         // per-repeat AE estimates
    bool coarse_format = false;
};

QmeboResult qmebo_exact(std::span<const double> p, std::span<const double> f, double eps, double delta,
                        const QmeboOptions& options, Rng& rng, QueryLedger* ledger);

/// Same, reusing a prepared state and outcome law across many calls.
class QmeboSampler {
public:
    QmeboSampler(std::span<const double> p, std::span<const double> f, double eps, double delta,
                 const QmeboOptions& options);
    QmeboResult run(Rng& rng, QueryLedger* ledger) const;

    const Psi2& psi() const noexcept { return psi_; }
    const std::vector<double>& distribution() const noexcept { return distribution_; }
    std::uint64_t grover_powers() const noexcept { return T_; }
    std::uint64_t repeats() const noexcept { return K_; }

private:
    Psi2 psi_;
    std::uint64_t T_;
    std::uint64_t K_;
    std::vector<double> distribution_;
    std::vector<double> cdf_;
};

/// Provider backed by the statevector QMEBO. QME1/QME2 run QMEBO on f scaled
/// into [0, 1]; QMS stays emulated. Tiny instances only.
class StatevectorProvider final : public SubroutineProvider {
public:
    StatevectorProvider(SubroutineConfig config, QmeboOptions options);

    const SubroutineConfig& config() const override { return config_; }
    std::size_t qms(std::span<const double> f, double delta, QueryLedger* ledger) override;
    NoisyEstimate qme1(std::span<const double> p, std::span<const double> f, double u, double eps, double delta,
                       QueryLedger* ledger) override;
    NoisyEstimate qme2(std::span<const double> p, std::span<const double> f, double sigma, double eps,
                       double delta, QueryLedger* ledger) override;
    NoisyEstimate qmebo(std::span<const double> p, std::span<const double> f, double eps, double delta,
                        QueryLedger* ledger) override;

private:
    NoisyEstimate scaled(std::span<const double> p, std::span<const double> f, double scale, double eps,
                         double delta, QueryLedger* ledger);

    SubroutineConfig config_;
    QmeboOptions options_;
    Rng rng_;
};

}  // namespace qvilab
