// Scenario generator and simulation driver.
//
// A run is `rounds` independent rounds over one shared ledger. Each round
// draws a fresh population, feeds it through the registry in a seeded arrival
// order, runs a full escrow session for every engagement as it happens, and
// settles everything before the next round starts.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgetrade/domain.hpp"
#include "edgetrade/gasmeter.hpp"
#include "edgetrade/ledger.hpp"

namespace edgetrade {

struct ScenarioConfig {
    std::uint32_t users_per_role = 25;
    std::uint32_t cities = 2;
    Money budget_base = Money::dollars(5);
    std::uint32_t rounds = 10;
    std::uint64_t seed = 1;
    std::uint32_t replication = 2;
    std::uint32_t storage_rate_pct = 20;
    std::string gas_table;  // path; empty keeps the built-in table
    GasTable gas;
    Rational condition_density{1, 2};
    std::uint32_t condition_length = 4;
    std::uint32_t storage_per_city = 4;
    Rational aligned_share{17, 20};
    std::uint32_t max_service_ticks = 20;
    std::uint32_t data_bytes = 256;
    std::uint32_t chunk_size = 32;
    Rational tamper_rate{1, 20};
    std::string crypto = "toy";
    std::string digest = "sha256";
    CostArgs cost;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    // Unknown keys are errors. A gas_table key loads that file, resolved
    // against base_dir when relative.
    static ScenarioConfig from_entries(const std::map<std::string, std::string>& entries,
                                       const std::string& base_dir = "");
    static ScenarioConfig load_file(const std::string& path);
};

// Consumers, compute providers and storage providers for one round. Every
// user's attributes come from its own stream keyed by (seed, round, role,
// index), so growing users_per_role keeps the first users unchanged.
struct Population {
    std::vector<UserSpec> consumers;
    std::vector<UserSpec> compute_providers;
    std::vector<UserSpec> storage_providers;
    // Consumers and compute providers interleaved: (role, index into its list).
    std::vector<std::pair<Role, std::uint32_t>> arrivals;
};

Population generate_population(const ScenarioConfig& cfg, std::uint32_t round);

struct RunMetrics {
    std::vector<Rational> eng_rates;  // one per round
    PairStats eng_rate;
    std::vector<std::uint64_t> latencies;    // ticks, every engagement
    std::vector<std::uint64_t> comparisons;  // per engagement
    // Matching-side gas per engaged pair: the consumer's and the compute
    // provider's accounts (registration, search, queueing, deregistration).
    std::vector<std::uint64_t> pair_gas;
    std::vector<std::uint64_t> consumer_gas;
    std::vector<std::uint64_t> provider_gas;
    std::vector<std::uint64_t> session_gas;
    // lambda per pair: both accounts plus the escrow session.
    std::vector<GasReceipt> pair_receipts;

    std::uint64_t sessions_settled = 0;
    std::uint64_t sessions_aborted = 0;
    std::uint64_t storage_shortfalls = 0;
    std::uint64_t conservation_failures = 0;
    std::uint64_t paid_before_verify = 0;
    std::uint64_t result_failures = 0;

    std::uint64_t descents = 0;
    std::uint64_t descent_bound_violations = 0;
    std::int64_t max_descent_excess = 0;  // max(comparisons - bound), <= 0 when the bound holds

    bool chain_ok = false;
    bool audit_ok = false;  // Settled + Aborted == Deposit
    Ledger ledger;

    std::optional<PairStats> latency() const;
    std::optional<PairStats> comparison_stats() const;
    std::optional<PairStats> gas() const;
};

RunMetrics run_scenario(const ScenarioConfig& cfg);

struct SweepSpec {
    std::vector<std::uint32_t> users{25, 50, 75, 100, 125};
    std::vector<std::uint32_t> cities{2, 4};
    std::vector<std::uint64_t> budgets_usd{5, 50};
    std::uint32_t rounds = 10;
    std::uint64_t seed = 1;
};

struct SweepRow {
    std::string combo_id;
    ScenarioConfig cfg;
    RunMetrics metrics;
};

// Cities outermost, then budget, then users.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const ScenarioConfig& base = {});

// "lo:hi:step", inclusive.
std::vector<std::uint32_t> parse_range(std::string_view s);

std::string combo_id(const ScenarioConfig& cfg);

extern const char* const kCsvHeader;
std::string csv_row(const std::string& combo, const ScenarioConfig& cfg, const RunMetrics& m);
void emit_csv(const std::vector<SweepRow>& rows, std::ostream& out);
// Throws std::runtime_error when the file cannot be written.
void emit_csv(const std::vector<SweepRow>& rows, const std::string& path);

// Per-pair receipts of a full run under the given cost arguments.
std::vector<GasReceipt> evaluate_pairs(ScenarioConfig cfg, const CostArgs& args);

}  // namespace edgetrade
