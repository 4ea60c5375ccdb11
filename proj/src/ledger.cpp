#include "qvilab/ledger.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

namespace qvilab {

namespace {

constexpr std::array<std::string_view, kNumOracles> kNames = {
    "O_M", "O_QM", "G", "generative_quantum", "B_p", "B_f", "BTP"};

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    const auto max = std::numeric_limits<std::uint64_t>::max();
    return a > max - b ? max : a + b;
}

}  // namespace

std::string_view oracle_name(Oracle o) { return kNames[static_cast<std::size_t>(o)]; }

Oracle oracle_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i) {
        if (kNames[i] == name) return static_cast<Oracle>(i);
    }
    throw std::invalid_argument("unknown oracle: " + std::string(name));
}

void QueryLedger::charge(Oracle o, std::uint64_t cost, std::string_view tag) {
    auto& c = counts_[static_cast<std::size_t>(o)];
    c = saturating_add(c, cost);
    if (keep_log_) log_.push_back({o, cost, std::string(tag)});
}

std::uint64_t QueryLedger::total() const {
    std::uint64_t t = 0;
    for (auto c : counts_) t = saturating_add(t, c);
    return t;
}

void QueryLedger::merge(const QueryLedger& other) {
    for (std::size_t i = 0; i < kNumOracles; ++i) {
        counts_[i] = saturating_add(counts_[i], other.counts_[i]);
    }
    if (keep_log_) log_.insert(log_.end(), other.log_.begin(), other.log_.end());
}

nlohmann::json QueryLedger::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t i = 0; i < kNumOracles; ++i) j[std::string(kNames[i])] = counts_[i];
    return j;
}

std::string QueryLedger::log_csv() const {
    std::ostringstream os;
    os << "oracle,cost,tag\n";
    for (const auto& e : log_) os << oracle_name(e.oracle) << ',' << e.cost << ',' << e.tag << '\n';
    return os.str();
}

}  // namespace qvilab
