// Operating-cost model: every contract primitive is metered against a gas
// table, receipts are aggregated per consumer/provider pair, and a grid of
// cost arguments is searched for the penalized minimum J = avg + zeta * var.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgetrade/domain.hpp"

namespace edgetrade {

enum class GasKind : std::uint8_t {
    StorageWrite,
    StorageRead,
    MapInsert,
    MapDelete,
    TreeNodeTouch,
    Comparison,
    SignatureVerify,
    MessageEmit,
    ContractSetup,
};

inline constexpr std::size_t kGasKindCount = 9;

std::string_view gas_kind_name(GasKind k);
std::optional<GasKind> parse_gas_kind(std::string_view name);

struct GasTable {
    // Loosely EVM-shaped magnitudes; only their ratios matter.
    std::array<std::uint64_t, kGasKindCount> cost{20000, 200, 5000, 5000, 200, 3, 3000, 375, 32000};

    std::uint64_t operator[](GasKind k) const;
    std::uint64_t& operator[](GasKind k);

    // Throws std::invalid_argument if any entry is zero.
    void validate() const;

    // Keys are gas kind names ("storage_write", ...). Missing keys keep their
    // defaults; unknown keys are errors.
    static GasTable from_entries(const std::map<std::string, std::string>& entries);
    static GasTable load_file(const std::string& path);

    friend bool operator==(const GasTable&, const GasTable&) = default;
};

class GasReceipt {
public:
    // Throws std::invalid_argument for n == 0 or an unknown kind.
    GasReceipt& charge(const GasTable& table, GasKind kind, std::uint64_t n);

    // Folds another receipt into this one; totals stay exact sums.
    GasReceipt& merge(const GasReceipt& other);

    std::uint64_t count(GasKind k) const { return counts_[static_cast<std::size_t>(k)]; }
    std::uint64_t total() const { return total_; }

    // Recomputes the total from the breakdown against a table.
    std::uint64_t recompute(const GasTable& table) const;

private:
    std::array<std::uint64_t, kGasKindCount> counts_{};
    std::uint64_t total_ = 0;
};

// Receipts per account: one per user, one per escrow session, one for the
// system itself. Zero-count charges are ignored at this level.
class GasMeter {
public:
    explicit GasMeter(GasTable table = {});

    const GasTable& table() const { return table_; }

    void charge_user(UserId id, GasKind kind, std::uint64_t n);
    void charge_session(std::uint64_t session, GasKind kind, std::uint64_t n);
    void charge_system(GasKind kind, std::uint64_t n);

    const GasReceipt& user(UserId id) const;
    const GasReceipt& session(std::uint64_t session) const;
    const GasReceipt& system() const { return system_; }

    std::uint64_t grand_total() const;

private:
    GasTable table_;
    std::map<std::uint64_t, GasReceipt> users_;
    std::map<std::uint64_t, GasReceipt> sessions_;
    GasReceipt system_;
};

struct PairStats {
    Rational avg;
    Rational var;  // population variance
};

// Throws std::invalid_argument on an empty set.
PairStats pair_stats(const std::vector<GasReceipt>& receipts);
PairStats stats_of(const std::vector<std::uint64_t>& values);

// Tunables behind the cost factors. op_drain_limit bounds how many waiting
// consumers one provider arrival re-tries (0 = all); eng_batch groups
// engagement notifications; comm_interval is ticks between status messages;
// setup_share is how many sessions share one intermediary contract setup.
struct CostArgs {
    std::uint32_t op_drain_limit = 0;
    std::uint32_t eng_batch = 1;
    std::uint32_t comm_interval = 1;
    std::uint32_t setup_share = 1;

    void validate() const;
    std::string to_string() const;

    friend bool operator==(const CostArgs&, const CostArgs&) = default;
};

// Cartesian grid over the four tunables, enumerated with op_drain_limit
// outermost and setup_share innermost.
struct CostGrid {
    std::vector<std::uint32_t> op_drain_limit{0};
    std::vector<std::uint32_t> eng_batch{1};
    std::vector<std::uint32_t> comm_interval{1};
    std::vector<std::uint32_t> setup_share{1};

    std::vector<CostArgs> candidates() const;

    static CostGrid from_entries(const std::map<std::string, std::string>& entries);
    static CostGrid load_file(const std::string& path);
};

struct CandidateScore {
    CostArgs args;
    PairStats stats;
    Rational objective;  // avg + zeta * var
};

struct OptimizeResult {
    std::size_t optimal = 0;
    std::size_t args_avg = 0;
    std::size_t args_var = 0;
    std::vector<CandidateScore> scores;

    const CostArgs& optimal_args() const { return scores.at(optimal).args; }
};

using PairEvaluator = std::function<std::vector<GasReceipt>(const CostArgs&)>;

// Exhaustive search; ties go to the earliest candidate.
OptimizeResult optimize(const std::vector<CostArgs>& candidates, const PairEvaluator& evaluate,
                        const Rational& zeta);

Rational objective(const PairStats& s, const Rational& zeta);

}  // namespace edgetrade
