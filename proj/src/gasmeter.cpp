#include "edgetrade/gasmeter.hpp"

#include <sstream>
#include <stdexcept>

#include "edgetrade/kv.hpp"

namespace edgetrade {

namespace {

constexpr std::array<std::string_view, kGasKindCount> kGasKindNames{
    "storage_write", "storage_read", "map_insert",       "map_delete",     "tree_node_touch",
    "comparison",    "signature_verify", "message_emit", "contract_setup",
};

std::size_t checked_index(GasKind k) {
    const auto i = static_cast<std::size_t>(k);
    if (i >= kGasKindCount) throw std::invalid_argument("unknown gas kind");
    return i;
}

}  // namespace

std::string_view gas_kind_name(GasKind k) { return kGasKindNames[checked_index(k)]; }

std::optional<GasKind> parse_gas_kind(std::string_view name) {
    for (std::size_t i = 0; i < kGasKindCount; ++i)
        if (kGasKindNames[i] == name) return static_cast<GasKind>(i);
    return std::nullopt;
}

std::uint64_t GasTable::operator[](GasKind k) const { return cost[checked_index(k)]; }
std::uint64_t& GasTable::operator[](GasKind k) { return cost[checked_index(k)]; }

void GasTable::validate() const {
    for (std::size_t i = 0; i < kGasKindCount; ++i)
        if (cost[i] == 0)
            throw std::invalid_argument("gas cost for " + std::string(kGasKindNames[i]) + " must be > 0");
}

GasTable GasTable::from_entries(const std::map<std::string, std::string>& entries) {
    GasTable t;
    for (const auto& [key, value] : entries) {
        auto kind = parse_gas_kind(key);
        if (!kind) throw std::invalid_argument("unknown gas table key '" + key + "'");
        t[*kind] = parse_u64(value);
    }
    t.validate();
    return t;
}

GasTable GasTable::load_file(const std::string& path) { return from_entries(load_key_values(path)); }

GasReceipt& GasReceipt::charge(const GasTable& table, GasKind kind, std::uint64_t n) {
    const auto i = checked_index(kind);
    if (n == 0) throw std::invalid_argument("gas charge count must be >= 1");
    counts_[i] += n;
    total_ += n * table.cost[i];
    return *this;
}

GasReceipt& GasReceipt::merge(const GasReceipt& other) {
    for (std::size_t i = 0; i < kGasKindCount; ++i) counts_[i] += other.counts_[i];
    total_ += other.total_;
    return *this;
}

std::uint64_t GasReceipt::recompute(const GasTable& table) const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < kGasKindCount; ++i) t += counts_[i] * table.cost[i];
    return t;
}

GasMeter::GasMeter(GasTable table) : table_(table) { table_.validate(); }

void GasMeter::charge_user(UserId id, GasKind kind, std::uint64_t n) {
    if (n) users_[id.value].charge(table_, kind, n);
}

void GasMeter::charge_session(std::uint64_t session, GasKind kind, std::uint64_t n) {
    if (n) sessions_[session].charge(table_, kind, n);
}

void GasMeter::charge_system(GasKind kind, std::uint64_t n) {
    if (n) system_.charge(table_, kind, n);
}

const GasReceipt& GasMeter::user(UserId id) const {
    static const GasReceipt kEmpty;
    auto it = users_.find(id.value);
    return it == users_.end() ? kEmpty : it->second;
}

const GasReceipt& GasMeter::session(std::uint64_t session) const {
    static const GasReceipt kEmpty;
    auto it = sessions_.find(session);
    return it == sessions_.end() ? kEmpty : it->second;
}

std::uint64_t GasMeter::grand_total() const {
    std::uint64_t t = system_.total();
    for (const auto& [_, r] : users_) t += r.total();
    for (const auto& [_, r] : sessions_) t += r.total();
    return t;
}

PairStats stats_of(const std::vector<std::uint64_t>& values) {
    if (values.empty()) throw std::invalid_argument("statistics of an empty set");
    using boost::multiprecision::cpp_int;
    cpp_int sum = 0;
    cpp_int sum_sq = 0;
    for (auto v : values) {
        sum += v;
        sum_sq += cpp_int(v) * v;
    }
    const cpp_int n = values.size();
    PairStats s;
    s.avg = Rational(sum, n);
    s.var = Rational(n * sum_sq - sum * sum, n * n);
    return s;
}

PairStats pair_stats(const std::vector<GasReceipt>& receipts) {
    std::vector<std::uint64_t> totals;
    totals.reserve(receipts.size());
    for (const auto& r : receipts) totals.push_back(r.total());
    return stats_of(totals);
}

void CostArgs::validate() const {
    if (eng_batch == 0) throw std::invalid_argument("eng_batch must be >= 1");
    if (comm_interval == 0) throw std::invalid_argument("comm_interval must be >= 1");
    if (setup_share == 0) throw std::invalid_argument("setup_share must be >= 1");
}

std::string CostArgs::to_string() const {
    std::ostringstream os;
    os << "op_drain_limit=" << op_drain_limit << " eng_batch=" << eng_batch
       << " comm_interval=" << comm_interval << " setup_share=" << setup_share;
    return os.str();
}

std::vector<CostArgs> CostGrid::candidates() const {
    std::vector<CostArgs> out;
    for (auto d : op_drain_limit)
        for (auto b : eng_batch)
            for (auto c : comm_interval)
                for (auto s : setup_share) {
                    CostArgs a{d, b, c, s};
                    a.validate();
                    out.push_back(a);
                }
    return out;
}

CostGrid CostGrid::from_entries(const std::map<std::string, std::string>& entries) {
    CostGrid g;
    for (const auto& [key, value] : entries) {
        auto list = parse_u32_list(value);
        if (key == "op_drain_limit") g.op_drain_limit = list;
        else if (key == "eng_batch") g.eng_batch = list;
        else if (key == "comm_interval") g.comm_interval = list;
        else if (key == "setup_share") g.setup_share = list;
        else throw std::invalid_argument("unknown grid key '" + key + "'");
    }
    return g;
}

CostGrid CostGrid::load_file(const std::string& path) { return from_entries(load_key_values(path)); }

Rational objective(const PairStats& s, const Rational& zeta) { return s.avg + zeta * s.var; }

OptimizeResult optimize(const std::vector<CostArgs>& candidates, const PairEvaluator& evaluate,
                        const Rational& zeta) {
    if (candidates.empty()) throw std::invalid_argument("optimize needs at least one candidate");
    if (zeta < 0) throw std::invalid_argument("penalty zeta must be non-negative");
    OptimizeResult res;
    res.scores.reserve(candidates.size());
    for (const auto& args : candidates) {
        args.validate();
        auto stats = pair_stats(evaluate(args));
        auto j = objective(stats, zeta);
        res.scores.push_back({args, std::move(stats), std::move(j)});
    }
    for (std::size_t i = 1; i < res.scores.size(); ++i) {
        const auto& s = res.scores[i];
        if (s.objective < res.scores[res.optimal].objective) res.optimal = i;
        if (s.stats.avg < res.scores[res.args_avg].stats.avg) res.args_avg = i;
        if (s.stats.var < res.scores[res.args_var].stats.var) res.args_var = i;
    }
    return res;
}

}  // namespace edgetrade
