#include "qvilab/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qvilab {

namespace {

constexpr double kPi = std::numbers::pi;

unsigned log2_exact(std::size_t n) { return static_cast<unsigned>(std::countr_zero(n)); }

}  // namespace

// ---------------------------------------------------------------- fixed point

void FixedPointFormat::validate() const {
    if (total_bits == 0 || total_bits > 30) throw std::invalid_argument("fixed point needs 1..30 total bits");
    if (fractional_bits > total_bits) throw std::invalid_argument("fractional bits exceed total bits");
}

double FixedPointFormat::resolution() const { return std::ldexp(1.0, -static_cast<int>(fractional_bits)); }

double FixedPointFormat::upper() const {
    return std::ldexp(1.0, static_cast<int>(total_bits) - static_cast<int>(fractional_bits));
}

std::uint64_t FixedPointFormat::encode(double x) const {
    if (!(x >= 0.0 && x < upper())) {
        std::ostringstream os;
        os << "value " << x << " not representable in [0, " << upper() << ")";
        throw std::out_of_range(os.str());
    }
    return static_cast<std::uint64_t>(std::floor(std::ldexp(x, static_cast<int>(fractional_bits))));
}

double FixedPointFormat::decode(std::uint64_t code) const {
    return std::ldexp(static_cast<double>(code), -static_cast<int>(fractional_bits));
}

// ---------------------------------------------------------------- state

PureState::PureState(std::vector<Register> layout) : layout_(std::move(layout)) {
    for (const auto& r : layout_) width_ += r.width;
    if (width_ > 30) throw std::invalid_argument("state too wide for dense simulation");
    shifts_.resize(layout_.size());
    unsigned below = width_;
    for (std::size_t i = 0; i < layout_.size(); ++i) {
        below -= layout_[i].width;
        shifts_[i] = below;
    }
    amps_.assign(std::size_t{1} << width_, Amplitude{0.0, 0.0});
    amps_[0] = 1.0;
}

std::size_t PureState::register_index(const std::string& name) const {
    for (std::size_t i = 0; i < layout_.size(); ++i) {
        if (layout_[i].name == name) return i;
    }
    throw std::invalid_argument("no register named " + name);
}

unsigned PureState::shift(const std::string& name) const { return shifts_[register_index(name)]; }
unsigned PureState::width(const std::string& name) const { return layout_[register_index(name)].width; }

std::uint64_t PureState::field(std::uint64_t basis, const std::string& name) const {
    const auto i = register_index(name);
    return (basis >> shifts_[i]) & ((std::uint64_t{1} << layout_[i].width) - 1);
}

double PureState::norm_squared() const {
    double t = 0.0;
    for (const auto& a : amps_) t += std::norm(a);
    return t;
}

nlohmann::json PureState::to_json() const {
    if (width_ > 12) throw std::invalid_argument("amplitude dump limited to 12 qubits");
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t b = 0; b < amps_.size(); ++b) {
        if (std::abs(amps_[b]) < 1e-15) continue;
        std::string key;
        for (std::size_t i = 0; i < layout_.size(); ++i) {
            if (i > 0) key += '|';
            for (unsigned k = layout_[i].width; k-- > 0;) key += ((b >> (shifts_[i] + k)) & 1U) ? '1' : '0';
        }
        j[key] = {amps_[b].real(), amps_[b].imag()};
    }
    return j;
}

double unitarity_error(const Unitary& u) {
    double worst = 0.0;
    for (std::size_t i = 0; i < u.dim; ++i) {
        for (std::size_t j = 0; j < u.dim; ++j) {
            Amplitude acc = 0.0;
            for (std::size_t k = 0; k < u.dim; ++k) acc += std::conj(u(k, i)) * u(k, j);
            if (i == j) acc -= 1.0;
            worst = std::max(worst, std::abs(acc));
        }
    }
    return worst;
}

std::vector<std::uint64_t> BinaryOracleSpec::codes() const {
    if (values.size() > domain_size) throw std::invalid_argument("oracle table longer than its domain");
    std::vector<std::uint64_t> out(domain_size, 0);
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = format.encode(values[i]);
    return out;
}

// ---------------------------------------------------------------- gates

void apply_hadamards(PureState& state, const std::string& reg) {
    const unsigned lo = state.shift(reg);
    const unsigned hi = lo + state.width(reg);
    auto& a = state.amplitudes();
    const double r = std::numbers::sqrt2 / 2.0;
    for (unsigned bit = lo; bit < hi; ++bit) {
        const std::size_t stride = std::size_t{1} << bit;
        for (std::size_t b = 0; b < a.size(); ++b) {
            if (b & stride) continue;
            const Amplitude x = a[b];
            const Amplitude y = a[b | stride];
            a[b] = r * (x + y);
            a[b | stride] = r * (x - y);
        }
    }
}

void apply_binary_oracle(PureState& state, const std::string& index_reg, const std::string& target_reg,
                         std::span<const std::uint64_t> codes) {
    const unsigned tshift = state.shift(target_reg);
    const std::uint64_t tmask = (std::uint64_t{1} << state.width(target_reg)) - 1;
    for (auto c : codes) {
        if (c > tmask) throw std::invalid_argument("oracle code wider than target register");
    }
    auto& a = state.amplitudes();
    for (std::uint64_t b = 0; b < a.size(); ++b) {
        const auto i = state.field(b, index_reg);
        const std::uint64_t c = i < codes.size() ? codes[i] : 0;
        const std::uint64_t partner = b ^ (c << tshift);
        if (b < partner) std::swap(a[b], a[partner]);
    }
}

void apply_controlled_rotation(PureState& state, const std::string& control_reg, const std::string& target,
                               const FixedPointFormat& format, bool inverse) {
    if (state.width(target) != 1) throw std::invalid_argument("rotation target must be one qubit");
    const std::size_t tbit = std::size_t{1} << state.shift(target);
    auto& a = state.amplitudes();
    for (std::uint64_t b = 0; b < a.size(); ++b) {
        if (b & tbit) continue;
        const double v = std::clamp(format.decode(state.field(b, control_reg)), 0.0, 1.0);
        const double s = std::sqrt(v);
        const double c = std::sqrt(1.0 - v);
        const Amplitude x0 = a[b];
        const Amplitude x1 = a[b | tbit];
        if (!inverse) {
            a[b] = s * x0 - c * x1;
            a[b | tbit] = c * x0 + s * x1;
        } else {
            a[b] = s * x0 + c * x1;
            a[b | tbit] = -c * x0 + s * x1;
        }
    }
}

void apply_leading(PureState& state, const Unitary& u) {
    auto& a = state.amplitudes();
    if (u.dim == 0 || a.size() % u.dim != 0) throw std::invalid_argument("unitary does not fit the state");
    const std::size_t rest = a.size() / u.dim;
    std::vector<Amplitude> x(u.dim);
    for (std::size_t l = 0; l < rest; ++l) {
        bool any = false;
        for (std::size_t j = 0; j < u.dim; ++j) {
            x[j] = a[j * rest + l];
            any = any || x[j] != Amplitude{};
        }
        if (!any) continue;
        for (std::size_t r = 0; r < u.dim; ++r) {
            Amplitude acc = 0.0;
            for (std::size_t j = 0; j < u.dim; ++j) acc += u(r, j) * x[j];
            a[r * rest + l] = acc;
        }
    }
}

PureState drop_zero_register(const PureState& state, const std::string& reg, double tol) {
    std::vector<Register> layout;
    for (const auto& r : state.layout()) {
        if (r.name != reg) layout.push_back(r);
    }
    PureState out(layout);
    out.amplitudes()[0] = 0.0;
    const unsigned sh = state.shift(reg);
    const unsigned w = state.width(reg);
    const std::uint64_t low_mask = (std::uint64_t{1} << sh) - 1;
    const auto& a = state.amplitudes();
    for (std::uint64_t b = 0; b < a.size(); ++b) {
        if (state.field(b, reg) != 0) {
            if (std::abs(a[b]) > tol) {
                throw std::runtime_error("register " + reg + " was not returned to |0>");
            }
            continue;
        }
        const std::uint64_t nb = ((b >> (sh + w)) << sh) | (b & low_mask);
        out.amplitudes()[nb] = a[b];
    }
    return out;
}

std::size_t padded_size(std::size_t n) {
    // At least one index qubit, so N = 1 pads to 2.
    return std::max<std::size_t>(2, std::bit_ceil(n));
}

// ---------------------------------------------------------------- U_p, psi2

UpHat build_up_hat(std::span<const double> p, const FixedPointFormat& format) {
    format.validate();
    if (p.empty()) throw std::invalid_argument("empty distribution");
    UpHat out;
    out.padded_n = padded_size(p.size());
    out.index_width = log2_exact(out.padded_n);
    BinaryOracleSpec oracle{out.padded_n, std::vector<double>(p.begin(), p.end()), format};
    const auto codes = oracle.codes();
    out.encoded_p.resize(out.padded_n);
    double min_nonzero = 1.0;
    bool any = false;
    for (std::size_t i = 0; i < out.padded_n; ++i) {
        out.encoded_p[i] = format.decode(codes[i]);
        any = any || codes[i] != 0;
        if (i < p.size() && p[i] > 0.0) min_nonzero = std::min(min_nonzero, p[i]);
    }
    if (!any) throw std::invalid_argument("fixed-point format too coarse: every probability encodes to 0");
    out.coarse_format = format.resolution() > min_nonzero / 4.0;

    const std::size_t dim = 2 * out.padded_n;
    out.unitary.dim = dim;
    out.unitary.entries.assign(dim * dim, Amplitude{});
    const std::vector<Register> layout = {
        {"index", out.index_width}, {"flag", 1}, {"pval", format.total_bits}};
    for (std::size_t col = 0; col < dim; ++col) {
        PureState st(layout);
        st.amplitudes()[0] = 0.0;
        st.amplitudes()[col << format.total_bits] = 1.0;
        apply_hadamards(st, "index");
        apply_binary_oracle(st, "index", "pval", codes);
        apply_controlled_rotation(st, "pval", "flag", format);
        apply_binary_oracle(st, "index", "pval", codes);
        const auto reduced = drop_zero_register(st, "pval");
        for (std::size_t row = 0; row < dim; ++row) out.unitary(row, col) = reduced.amplitudes()[row];
    }
    return out;
}

bool psi2_good(const PureState& state, std::uint64_t basis) {
    return state.field(basis, "flag") == 0 && state.field(basis, "fval") == 0 && state.field(basis, "rot") == 0;
}

double projection_weight(const PureState& state) {
    double w = 0.0;
    const auto& a = state.amplitudes();
    for (std::uint64_t b = 0; b < a.size(); ++b) {
        if (psi2_good(state, b)) w += std::norm(a[b]);
    }
    return w;
}

Psi2 prepare_psi2(std::span<const double> p, std::span<const double> f, const FixedPointFormat& format) {
    if (p.size() != f.size()) throw std::invalid_argument("p and f differ in length");
    for (double x : f) {
        if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("f must lie in [0, 1]");
    }
    const auto up = build_up_hat(p, format);
    BinaryOracleSpec oracle{up.padded_n, std::vector<double>(f.begin(), f.end()), format};
    const auto codes = oracle.codes();

    PureState st({{"index", up.index_width}, {"flag", 1}, {"fval", format.total_bits}, {"rot", 1}});
    apply_leading(st, up.unitary);
    apply_binary_oracle(st, "index", "fval", codes);
    apply_controlled_rotation(st, "fval", "rot", format);
    apply_binary_oracle(st, "index", "fval", codes);

    Psi2 out{std::move(st), up.padded_n, 0.0, 0.0, up.coarse_format};
    out.weight = projection_weight(out.state);
    out.encoding_bound = static_cast<double>(p.size() + 1) * format.resolution();
    return out;
}

// ---------------------------------------------------------------- AE

void AEConfig::validate() const {
    if (grover_powers < 1 || powering_repeats < 1) throw std::invalid_argument("T and K must be positive");
}

std::vector<double> ae_subspace_distribution(double a, std::uint64_t T) {
    if (T < 1) throw std::invalid_argument("T must be positive");
    const double theta = std::asin(std::sqrt(std::clamp(a, 0.0, 1.0)));
    const double M = static_cast<double>(T);
    auto fejer = [M](double x) {
        const double s = std::sin(kPi * x);
        if (std::abs(s) < 1e-13) return 1.0;
        const double n = std::sin(M * kPi * x);
        return (n * n) / (M * M * s * s);
    };
    std::vector<double> out(T);
    for (std::uint64_t y = 0; y < T; ++y) {
        const double frac = static_cast<double>(y) / M;
        out[y] = 0.5 * (fejer(theta / kPi - frac) + fejer(-theta / kPi - frac));
    }
    return out;
}

std::vector<double> ae_full_register_distribution(const PureState& psi, std::uint64_t T) {
    if (T < 1) throw std::invalid_argument("T must be positive");
    const auto& a = psi.amplitudes();
    std::vector<char> good(a.size());
    for (std::uint64_t b = 0; b < a.size(); ++b) good[b] = psi2_good(psi, b) ? 1 : 0;

    // c_d = <psi| Q^d |psi>, Q = (2|psi><psi| - I)(I - 2P)
    std::vector<Amplitude> c(T);
    std::vector<Amplitude> phi(a.begin(), a.end());
    for (std::uint64_t d = 0; d < T; ++d) {
        Amplitude overlap = 0.0;
        for (std::size_t b = 0; b < a.size(); ++b) overlap += std::conj(a[b]) * phi[b];
        c[d] = overlap;
        if (d + 1 == T) break;
        for (std::size_t b = 0; b < a.size(); ++b) {
            if (good[b]) phi[b] = -phi[b];
        }
        Amplitude proj = 0.0;
        for (std::size_t b = 0; b < a.size(); ++b) proj += std::conj(a[b]) * phi[b];
        for (std::size_t b = 0; b < a.size(); ++b) phi[b] = 2.0 * proj * a[b] - phi[b];
    }

    const double M = static_cast<double>(T);
    std::vector<double> out(T);
    for (std::uint64_t y = 0; y < T; ++y) {
        double acc = M * c[0].real();
        for (std::uint64_t d = 1; d < T; ++d) {
            const double ang = -2.0 * kPi * static_cast<double>(d * y % T) / M;
            acc += 2.0 * (M - static_cast<double>(d)) * (std::polar(1.0, ang) * c[d]).real();
        }
        out[y] = std::max(0.0, acc / (M * M));
    }
    return out;
}

double ae_estimate_from_outcome(std::uint64_t y, std::uint64_t T) {
    const double s = std::sin(kPi * static_cast<double>(y) / static_cast<double>(T));
    return s * s;
}

double ae_error_bound(double a, std::uint64_t T) {
    const double t = static_cast<double>(T);
    return 2.0 * kPi * std::sqrt(std::max(0.0, a * (1.0 - a))) / t + kPi * kPi / (t * t);
}

namespace {

std::vector<double> cumulative(std::span<const double> dist) {
    std::vector<double> cdf(dist.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        acc += dist[i];
        cdf[i] = acc;
    }
    return cdf;
}

std::uint64_t sample_cdf(const std::vector<double>& cdf, Rng& rng) {
    const double u = rng.uniform() * cdf.back();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf.begin(),
                                                               static_cast<std::ptrdiff_t>(cdf.size()) - 1));
}

}  // namespace

AEOutcome sample_ae(std::span<const double> distribution, Rng& rng) {
    const auto cdf = cumulative(distribution);
    const auto T = static_cast<std::uint64_t>(distribution.size());
    const auto y = sample_cdf(cdf, rng);
    return {ae_estimate_from_outcome(y, T), y, 2 * T};
}

AEOutcome amplitude_estimation(const Psi2& psi, std::uint64_t T, AEMode mode, Rng& rng) {
    const auto dist = mode == AEMode::subspace_exact ? ae_subspace_distribution(psi.weight, T)
                                                     : ae_full_register_distribution(psi.state, T);
    return sample_ae(dist, rng);
}

double powering_median(std::vector<double> trials) {
    if (trials.empty()) throw std::invalid_argument("median of no trials");
    const auto mid = trials.begin() + static_cast<std::ptrdiff_t>((trials.size() - 1) / 2);
    std::nth_element(trials.begin(), mid, trials.end());
    return *mid;
}

// ---------------------------------------------------------------- QMEBO

std::uint64_t qmebo_grover_powers(std::size_t n, double eps, GroverPowerRule rule) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    const double nd = static_cast<double>(n);
    if (rule == GroverPowerRule::simple) {
        return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(std::sqrt(nd) / eps + std::sqrt(nd / eps))));
    }
    const double pi2 = kPi * kPi;
    auto ok = [&](double t) { return eps * t * t - pi2 * std::sqrt(nd) * t - pi2 * nd >= 0.0; };
    const double root = (pi2 * std::sqrt(nd) + std::sqrt(pi2 * pi2 * nd + 4.0 * eps * pi2 * nd)) / (2.0 * eps);
    auto t = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(root)));
    while (t > 1 && ok(static_cast<double>(t - 1))) --t;
    while (!ok(static_cast<double>(t))) ++t;
    return t;
}

QmeboSampler::QmeboSampler(std::span<const double> p, std::span<const double> f, double eps, double delta,
                           const QmeboOptions& options)
    : psi_(prepare_psi2(p, f, options.format)),
      T_(qmebo_grover_powers(psi_.padded_n, eps, options.rule)),
      K_(powering_repeats(delta, options.kappa)) {
    distribution_ = options.mode == AEMode::subspace_exact ? ae_subspace_distribution(psi_.weight, T_)
                                                           : ae_full_register_distribution(psi_.state, T_);
    cdf_ = cumulative(distribution_);
}

QmeboResult QmeboSampler::run(Rng& rng, QueryLedger* ledger) const {
    QmeboResult r;
    r.amplitude = psi_.weight;
    r.encoding_bound = psi_.encoding_bound;
    r.T = T_;
    r.K = K_;
    r.padded_n = psi_.padded_n;
    r.coarse_format = psi_.coarse_format;
    r.trials.reserve(K_);
    for (std::uint64_t k = 0; k < K_; ++k) r.trials.push_back(ae_estimate_from_outcome(sample_cdf(cdf_, rng), T_));
    r.estimate = static_cast<double>(psi_.padded_n) * powering_median(r.trials);
    r.charged_queries = saturating_mul(2 * T_, K_);
    if (ledger != nullptr) {
        ledger->charge(Oracle::B_p, r.charged_queries, "qmebo_exact");
        ledger->charge(Oracle::B_f, r.charged_queries, "qmebo_exact");
    }
    return r;
}

QmeboResult qmebo_exact(std::span<const double> p, std::span<const double> f, double eps, double delta,
                        const QmeboOptions& options, Rng& rng, QueryLedger* ledger) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
    return QmeboSampler(p, f, eps, delta, options).run(rng, ledger);
}

// ---------------------------------------------------------------- provider

StatevectorProvider::StatevectorProvider(SubroutineConfig config, QmeboOptions options)
    : config_(config), options_(options), rng_(config.rng_seed) {
    config_.validate();
}

std::size_t StatevectorProvider::qms(std::span<const double> f, double delta, QueryLedger* ledger) {
    return qms_emulated(f, delta, config_, rng_, ledger);
}

NoisyEstimate StatevectorProvider::scaled(std::span<const double> p, std::span<const double> f, double scale,
                                          double eps, double delta, QueryLedger* ledger) {
    NoisyEstimate out;
    out.true_value = expectation(p, f);
    std::vector<double> g(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) g[i] = std::clamp(f[i] / scale, 0.0, 1.0);
    const auto r = qmebo_exact(p, g, eps / scale, delta, options_, rng_, ledger);
    out.value = scale * r.estimate;
    out.charged_queries = r.charged_queries;
    return out;
}

NoisyEstimate StatevectorProvider::qme1(std::span<const double> p, std::span<const double> f, double u,
                                        double eps, double delta, QueryLedger* ledger) {
    return scaled(p, f, u, eps, delta, ledger);
}

NoisyEstimate StatevectorProvider::qme2(std::span<const double> p, std::span<const double> f, double sigma,
                                        double eps, double delta, QueryLedger* ledger) {
    if (!(eps < 4.0 * sigma)) throw Qme2ContractViolation(eps, sigma);
    const double hi = f.empty() ? 0.0 : *std::max_element(f.begin(), f.end());
    if (hi <= 0.0) return {0.0, 0, false, expectation(p, f)};
    return scaled(p, f, hi, eps, delta, ledger);
}

NoisyEstimate StatevectorProvider::qmebo(std::span<const double> p, std::span<const double> f, double eps,
                                         double delta, QueryLedger* ledger) {
    return scaled(p, f, 1.0, eps, delta, ledger);
}

}  // namespace qvilab
