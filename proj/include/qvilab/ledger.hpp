#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qvilab {

enum class Oracle : std::uint8_t { O_M, O_QM, G, generative_quantum, B_p, B_f, BTP };

inline constexpr std::size_t kNumOracles = 7;

std::string_view oracle_name(Oracle o);
Oracle oracle_from_name(std::string_view name);

/// Per-run query counters. Counts only increase; the call log is off unless
/// enabled because QVI runs can issue millions of charges.
class QueryLedger {
public:
    struct Entry {
        Oracle oracle;
        std::uint64_t cost;
        std::string tag;
    };

    explicit QueryLedger(bool keep_log = false) : keep_log_(keep_log) {}

    void charge(Oracle o, std::uint64_t cost, std::string_view tag = {});

    std::uint64_t count(Oracle o) const { return counts_[static_cast<std::size_t>(o)]; }
    std::uint64_t total() const;
    const std::vector<Entry>& log() const noexcept { return log_; }
    bool keeps_log() const noexcept { return keep_log_; }

    /// Adds another ledger's counts (and log) into this one.
    void merge(const QueryLedger& other);

    nlohmann::json to_json() const;
    std::string log_csv() const;

    friend bool operator==(const QueryLedger& a, const QueryLedger& b) { return a.counts_ == b.counts_; }

private:
    std::array<std::uint64_t, kNumOracles> counts_{};
    bool keep_log_;
    std::vector<Entry> log_;
};

}  // namespace qvilab
