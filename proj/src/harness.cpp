#include "edgetrade/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "edgetrade/crypto.hpp"
#include "edgetrade/digest.hpp"
#include "edgetrade/escrow.hpp"
#include "edgetrade/kv.hpp"
#include "edgetrade/registry.hpp"
#include "edgetrade/rng.hpp"
#include "edgetrade/vault.hpp"

namespace edgetrade {

namespace {

// Stream labels.
constexpr std::uint64_t kConsumerStream = 1;
constexpr std::uint64_t kComputeStream = 2;
constexpr std::uint64_t kStorageStream = 3;
constexpr std::uint64_t kKeyStream = 4;
constexpr std::uint64_t kDataStream = 5;
constexpr std::uint64_t kSessionStream = 6;

// Consumer windows live inside [200, 800); aligned provider windows cover all
// of it, misaligned ones lie entirely outside it.
constexpr Tick kConsumerStartLo = 200;
constexpr Tick kConsumerStartSpan = 500;
constexpr Tick kConsumerLenLo = 40;
constexpr Tick kConsumerLenSpan = 61;
constexpr Tick kCoverStart = 200;
constexpr Tick kCoverEnd = 800;

std::uint32_t to_u32(const std::string& key, std::string_view v) {
    const auto x = parse_u64(v);
    if (x > UINT32_MAX) throw std::invalid_argument(key + " is out of range");
    return static_cast<std::uint32_t>(x);
}

Money parse_dollars(std::string_view v) {
    const Rational r = parse_rational(v) * Money::kMicrosPerDollar;
    if (r < 0 || boost::multiprecision::denominator(r) != 1)
        throw std::invalid_argument("budget_base must be a non-negative amount with at most 6 decimals");
    const auto micros = boost::multiprecision::numerator(r);
    if (micros > UINT64_MAX) throw std::invalid_argument("budget_base is out of range");
    return Money{static_cast<std::uint64_t>(micros)};
}

void check_probability(const Rational& p, const char* name) {
    if (p < 0 || p > 1) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

ConditionVector draw_conditions(Rng& rng, const ScenarioConfig& cfg) {
    std::uint64_t mask = 0;
    for (std::uint32_t i = 0; i < cfg.condition_length; ++i)
        if (rng.bernoulli(cfg.condition_density)) mask |= std::uint64_t{1} << i;
    return ConditionVector(cfg.condition_length, mask);
}

TimeWindow draw_provider_window(Rng& rng, const ScenarioConfig& cfg) {
    if (rng.bernoulli(cfg.aligned_share))
        return TimeWindow(rng.below(kCoverStart), kCoverEnd + rng.below(200));
    // Length <= 150, placed wholly before 200 or wholly after 800.
    const Tick len = 1 + rng.below(150);
    if (rng.below(2) == 0) {
        const Tick start = rng.below(kCoverStart - len + 1);
        return TimeWindow(start, start + len);
    }
    const Tick start = kCoverEnd + rng.below(50);
    return TimeWindow(start, start + len);
}

std::uint64_t full_mask(std::uint32_t k) { return k == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << k) - 1; }

Bytes synthetic_data(std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    Bytes out(n);
    for (auto& b : out) b = static_cast<std::uint8_t>(rng.next() >> 56);
    return out;
}

PairStats stats_of_rationals(const std::vector<Rational>& xs) {
    if (xs.empty()) throw std::invalid_argument("stats of an empty set");
    Rational sum = 0;
    for (const auto& x : xs) sum += x;
    const Rational avg = sum / static_cast<long long>(xs.size());
    Rational ss = 0;
    for (const auto& x : xs) ss += (x - avg) * (x - avg);
    return {avg, ss / static_cast<long long>(xs.size())};
}

std::optional<PairStats> maybe_stats(const std::vector<std::uint64_t>& xs) {
    if (xs.empty()) return std::nullopt;
    return stats_of(xs);
}

}  // namespace

void ScenarioConfig::validate() const {
    if (users_per_role == 0) throw std::invalid_argument("users_per_role must be >= 1");
    if (cities == 0) throw std::invalid_argument("cities must be >= 1");
    if (rounds == 0) throw std::invalid_argument("rounds must be >= 1");
    if (budget_base.is_zero()) throw std::invalid_argument("budget_base must be positive");
    if (replication == 0) throw std::invalid_argument("replication must be >= 1");
    if (storage_rate_pct > 100) throw std::invalid_argument("storage_rate_pct must be <= 100");
    if (condition_length == 0 || condition_length > ConditionVector::kMaxLength)
        throw std::invalid_argument("condition_length must lie in 1..64");
    check_probability(condition_density, "condition_density");
    check_probability(aligned_share, "aligned_share");
    check_probability(tamper_rate, "tamper_rate");
    if (max_service_ticks == 0) throw std::invalid_argument("max_service_ticks must be >= 1");
    if (data_bytes == 0) throw std::invalid_argument("data_bytes must be >= 1");
    if (chunk_size == 0) throw std::invalid_argument("chunk_size must be >= 1");
    if (crypto != "toy" && crypto != "sodium") throw std::invalid_argument("crypto must be toy or sodium");
    if (digest != kDigestName) throw std::invalid_argument("digest must be " + std::string(kDigestName));
    gas.validate();
    cost.validate();
}

ScenarioConfig ScenarioConfig::from_entries(const std::map<std::string, std::string>& entries,
                                            const std::string& base_dir) {
    ScenarioConfig c;
    for (const auto& [key, v] : entries) {
        if (key == "users_per_role") c.users_per_role = to_u32(key, v);
        else if (key == "cities") c.cities = to_u32(key, v);
        else if (key == "budget_base") c.budget_base = parse_dollars(v);
        else if (key == "rounds") c.rounds = to_u32(key, v);
        else if (key == "seed") c.seed = parse_u64(v);
        else if (key == "replication") c.replication = to_u32(key, v);
        else if (key == "storage_rate_pct") c.storage_rate_pct = to_u32(key, v);
        else if (key == "gas_table") c.gas_table = v;
        else if (key == "condition_density") c.condition_density = parse_rational(v);
        else if (key == "condition_length") c.condition_length = to_u32(key, v);
        else if (key == "storage_per_city") c.storage_per_city = to_u32(key, v);
        else if (key == "aligned_share") c.aligned_share = parse_rational(v);
        else if (key == "max_service_ticks") c.max_service_ticks = to_u32(key, v);
        else if (key == "data_bytes") c.data_bytes = to_u32(key, v);
        else if (key == "chunk_size") c.chunk_size = to_u32(key, v);
        else if (key == "tamper_rate") c.tamper_rate = parse_rational(v);
        else if (key == "crypto") c.crypto = v;
        else if (key == "digest") c.digest = v;
        else if (key == "op_drain_limit") c.cost.op_drain_limit = to_u32(key, v);
        else if (key == "eng_batch") c.cost.eng_batch = to_u32(key, v);
        else if (key == "comm_interval") c.cost.comm_interval = to_u32(key, v);
        else if (key == "setup_share") c.cost.setup_share = to_u32(key, v);
        else throw std::invalid_argument("unknown config key '" + key + "'");
    }
    if (!c.gas_table.empty()) {
        std::filesystem::path p(c.gas_table);
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        c.gas = GasTable::load_file(p.string());
    }
    c.validate();
    return c;
}

ScenarioConfig ScenarioConfig::load_file(const std::string& path) {
    return from_entries(load_key_values(path), std::filesystem::path(path).parent_path().string());
}

Population generate_population(const ScenarioConfig& cfg, std::uint32_t round) {
    Population pop;
    const std::uint64_t base = cfg.budget_base.micros();
    // (arrival key, role, index) sorted gives a uniform interleaving.
    std::vector<std::tuple<std::uint64_t, Role, std::uint32_t>> order;

    for (std::uint32_t i = 0; i < cfg.users_per_role; ++i) {
        Rng rng(derive_seed(cfg.seed, {round, kConsumerStream, i}));
        order.emplace_back(rng.next(), Role::Consumer, i);
        UserSpec u;
        u.role = Role::Consumer;
        u.region = Region{static_cast<std::uint32_t>(rng.below(cfg.cities))};
        u.price = Money{base + rng.below(Money::kMicrosPerDollar)};
        u.budget = u.price;
        u.conditions = draw_conditions(rng, cfg);
        const Tick start = kConsumerStartLo + rng.below(kConsumerStartSpan);
        u.window = TimeWindow(start, start + kConsumerLenLo + rng.below(kConsumerLenSpan));
        pop.consumers.push_back(u);
    }
    for (std::uint32_t i = 0; i < cfg.users_per_role; ++i) {
        Rng rng(derive_seed(cfg.seed, {round, kComputeStream, i}));
        order.emplace_back(rng.next(), Role::ComputeProvider, i);
        UserSpec u;
        u.role = Role::ComputeProvider;
        u.region = Region{static_cast<std::uint32_t>(rng.below(cfg.cities))};
        u.price = Money{base / 2 + rng.below(base)};
        u.conditions = draw_conditions(rng, cfg);
        u.window = draw_provider_window(rng, cfg);
        pop.compute_providers.push_back(u);
    }
    for (std::uint32_t c = 0; c < cfg.cities; ++c) {
        for (std::uint32_t j = 0; j < cfg.storage_per_city; ++j) {
            Rng rng(derive_seed(cfg.seed, {round, kStorageStream, c, j}));
            UserSpec u;
            u.role = Role::StorageProvider;
            u.region = Region{c};
            u.price = Money{base / 5};
            u.conditions = ConditionVector(cfg.condition_length, full_mask(cfg.condition_length));
            u.window = TimeWindow(rng.below(kCoverStart), kCoverEnd + rng.below(200));
            pop.storage_providers.push_back(u);
        }
    }

    std::sort(order.begin(), order.end());
    for (const auto& [_, role, idx] : order) pop.arrivals.emplace_back(role, idx);
    return pop;
}

std::optional<PairStats> RunMetrics::latency() const { return maybe_stats(latencies); }
std::optional<PairStats> RunMetrics::comparison_stats() const { return maybe_stats(comparisons); }
std::optional<PairStats> RunMetrics::gas() const { return maybe_stats(pair_gas); }

namespace {

struct RoundContext {
    const ScenarioConfig& cfg;
    std::uint32_t round;
    const CryptoScheme& scheme;
    Ledger& ledger;
    GasMeter& gas;
    Registry& registry;
    Escrow& escrow;
    Vault& vault;
    RunMetrics& m;
};

// Runs the six-step handshake, service ticks, settlement and result check for
// one engagement; returns the session id.
std::uint64_t run_session(RoundContext& ctx, const Engagement& e) {
    const auto& cfg = ctx.cfg;
    const auto consumer = *ctx.registry.lookup(e.consumer);
    const auto sid = ctx.escrow.open_session(e, consumer.budget);
    ctx.registry.enter_session(e.consumer);
    ctx.registry.enter_session(e.compute_provider);
    for (auto sp : e.storage_providers) ctx.registry.enter_session(sp);

    Rng rng(derive_seed(cfg.seed, {ctx.round, kSessionStream, e.consumer.value}));
    const auto ck = ctx.scheme.keygen(derive_seed(cfg.seed, {ctx.round, kKeyStream, e.consumer.value}));
    const auto pk = ctx.scheme.keygen(derive_seed(cfg.seed, {ctx.round, kKeyStream, e.compute_provider.value}));
    ctx.escrow.record_key_exchange(sid, ck.pub, pk.pub);

    const Bytes data = synthetic_data(derive_seed(cfg.seed, {ctx.round, kDataStream, e.consumer.value}), cfg.data_bytes);
    AccessPolicy policy;
    policy.trusted.emplace(e.compute_provider, pk.pub);
    const auto chunks = encrypt_and_sign(chunk_data(data, cfg.chunk_size), sid, ck, policy, ctx.scheme);

    // With no admissible storage provider the compute provider hosts the data.
    std::vector<PeerId> nodes = e.storage_providers;
    if (nodes.empty()) {
        ctx.vault.add_storage_node(e.compute_provider);
        nodes.push_back(e.compute_provider);
    }
    const auto r = std::min<std::uint32_t>(cfg.replication, static_cast<std::uint32_t>(nodes.size()));
    const auto dht = ctx.vault.distribute(sid, chunks, nodes, r, policy);

    auto signed_dht = sign_dht(dht, ck, ctx.scheme);
    if (rng.bernoulli(cfg.tamper_rate)) {
        const auto pos = rng.below(signed_dht.canonical.size());
        signed_dht.canonical[pos] ^= static_cast<std::uint8_t>(1 + rng.below(255));
    }
    ctx.escrow.record_distribution(sid, std::move(signed_dht));
    if (ctx.escrow.session(sid).paid_total() > Money{}) ++ctx.m.paid_before_verify;

    std::optional<Settlement> done = ctx.escrow.verify_and_start(sid);
    if (!done) {
        const auto checkout_at = 1 + rng.below(cfg.max_service_ticks);
        for (std::uint64_t t = 0; t < checkout_at && !done; ++t) done = ctx.escrow.tick(sid);
        if (!done) done = ctx.escrow.checkout(sid);

        std::vector<Chunk> fetched;
        bool ok = true;
        for (const auto& [task, _] : dht.entries()) {
            const auto got = ctx.vault.fetch_chunk(e.compute_provider, sid, task);
            const auto* chunk = std::get_if<TaskChunk>(&got);
            if (!chunk || !verify_chunk(*chunk, ck.pub, ctx.scheme)) {
                ok = false;
                break;
            }
            auto plain = open_chunk(*chunk, sid, e.compute_provider, pk.priv, ctx.scheme);
            if (!plain) {
                ok = false;
                break;
            }
            fetched.push_back({task, std::move(*plain)});
        }
        if (ok) {
            Bytes result = reassemble(std::move(fetched));
            ok = result == data;
            std::reverse(result.begin(), result.end());
            const auto d = result_digest(result);
            const auto idx = ctx.ledger.append(TxKind::ResultDigest, Bytes(d.begin(), d.end()));
            ctx.gas.charge_session(sid, GasKind::StorageWrite, 1);
            ok = ok && ctx.ledger.verify_result(result, idx);
        }
        if (!ok) ++ctx.m.result_failures;
    }

    const auto& s = ctx.escrow.session(sid);
    if (done->total() != s.deposit) ++ctx.m.conservation_failures;
    if (!s.verified && s.paid_total() > Money{}) ++ctx.m.paid_before_verify;
    if (done->aborted)
        ++ctx.m.sessions_aborted;
    else
        ++ctx.m.sessions_settled;

    ctx.registry.leave_session(e.consumer);
    ctx.registry.leave_session(e.compute_provider);
    for (auto sp : e.storage_providers) ctx.registry.leave_session(sp);
    return sid;
}

}  // namespace

RunMetrics run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    RunMetrics m;
    const auto scheme = make_scheme(cfg.crypto);
    std::uint64_t next_session = 0;

    for (std::uint32_t round = 0; round < cfg.rounds; ++round) {
        const auto pop = generate_population(cfg, round);
        GasMeter gas(cfg.gas);
        RegistryConfig rc;
        rc.cities = cfg.cities;
        rc.condition_length = cfg.condition_length;
        rc.match = MatchPolicy{cfg.replication, cfg.cost.op_drain_limit, cfg.cost.eng_batch};
        Registry registry(rc, m.ledger, gas);
        Escrow escrow(EscrowConfig{cfg.storage_rate_pct, cfg.cost.comm_interval, cfg.cost.setup_share, next_session},
                      *scheme, m.ledger, gas);
        Vault vault;
        RoundContext ctx{cfg, round, *scheme, m.ledger, gas, registry, escrow, vault, m};

        for (std::uint32_t c = 0; c < cfg.cities; ++c) {
            registry.network(Region{c}).set_descent_observer([&m, k = cfg.condition_length](const DescentRecord& d) {
                ++m.descents;
                const auto excess = static_cast<std::int64_t>(d.comparisons) -
                                    static_cast<std::int64_t>(descent_comparison_bound(d.book_size, k));
                if (excess > 0) ++m.descent_bound_violations;
                if (m.descents == 1 || excess > m.max_descent_excess) m.max_descent_excess = excess;
            });
        }

        for (const auto& sp : pop.storage_providers) {
            const auto id = registry.register_user(sp);
            registry.allocate(id);
            vault.add_storage_node(id);
        }

        std::vector<std::pair<Engagement, std::uint64_t>> engaged;
        std::vector<UserId> arrivals;
        for (const auto& [role, idx] : pop.arrivals) {
            const auto& spec = role == Role::Consumer ? pop.consumers[idx] : pop.compute_providers[idx];
            const auto id = registry.register_user(spec);
            arrivals.push_back(id);
            registry.allocate(id);
            for (auto& e : registry.take_engagements()) {
                const auto sid = run_session(ctx, e);
                engaged.emplace_back(std::move(e), sid);
            }
        }
        for (std::uint32_t c = 0; c < cfg.cities; ++c) registry.network(Region{c}).flush_notifications();
        for (auto id : registry.user_ids()) registry.deregister(id);

        for (const auto& [e, sid] : engaged) {
            m.latencies.push_back(e.latency_ticks);
            m.comparisons.push_back(e.comparisons_used);
            if (e.storage_shortfall > 0) ++m.storage_shortfalls;
            const auto& cg = gas.user(e.consumer);
            const auto& pg = gas.user(e.compute_provider);
            m.consumer_gas.push_back(cg.total());
            m.provider_gas.push_back(pg.total());
            m.pair_gas.push_back(cg.total() + pg.total());
            m.session_gas.push_back(gas.session(sid).total());
            GasReceipt lambda = cg;
            lambda.merge(pg).merge(gas.session(sid));
            m.pair_receipts.push_back(std::move(lambda));
        }
        m.eng_rates.push_back(eng_rate(engaged.size(), cfg.users_per_role));
        next_session += escrow.session_count();
    }

    m.eng_rate = stats_of_rationals(m.eng_rates);
    m.chain_ok = m.ledger.verify_chain();
    m.audit_ok = m.ledger.count(TxKind::Settled) + m.ledger.count(TxKind::Aborted) == m.ledger.count(TxKind::Deposit);
    return m;
}

std::vector<std::uint32_t> parse_range(std::string_view s) {
    const auto a = s.find(':');
    const auto b = a == std::string_view::npos ? a : s.find(':', a + 1);
    if (a == std::string_view::npos || b == std::string_view::npos)
        throw std::invalid_argument("range must look like lo:hi:step");
    const auto lo = parse_u64(s.substr(0, a));
    const auto hi = parse_u64(s.substr(a + 1, b - a - 1));
    const auto step = parse_u64(s.substr(b + 1));
    if (step == 0 || lo > hi || hi > UINT32_MAX) throw std::invalid_argument("range needs lo <= hi and step >= 1");
    std::vector<std::uint32_t> out;
    for (auto v = lo; v <= hi; v += step) out.push_back(static_cast<std::uint32_t>(v));
    return out;
}

std::string combo_id(const ScenarioConfig& cfg) {
    std::ostringstream os;
    os << "U" << cfg.users_per_role << "-C" << cfg.cities << "-B"
       << format_decimal(Rational(cfg.budget_base.micros(), Money::kMicrosPerDollar), 0);
    return os.str();
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const ScenarioConfig& base) {
    std::vector<SweepRow> rows;
    for (auto cities : spec.cities) {
        for (auto budget : spec.budgets_usd) {
            for (auto users : spec.users) {
                ScenarioConfig cfg = base;
                cfg.users_per_role = users;
                cfg.cities = cities;
                cfg.budget_base = Money::dollars(budget);
                cfg.rounds = spec.rounds;
                cfg.seed = spec.seed;
                SweepRow row{combo_id(cfg), cfg, run_scenario(cfg)};
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

const char* const kCsvHeader =
    "combo_id,users_per_role,cities,budget_base_usd,round_count,eng_rate_avg,eng_rate_var,latency_avg_ticks,"
    "latency_var,comparisons_avg,comparisons_var,gas_avg,gas_var,sessions_settled,sessions_aborted";

std::string csv_row(const std::string& combo, const ScenarioConfig& cfg, const RunMetrics& m) {
    constexpr unsigned kDigits = 6;
    auto pair = [](const std::optional<PairStats>& s) {
        if (!s) return std::string("NA,NA");
        return format_decimal(s->avg, kDigits) + "," + format_decimal(s->var, kDigits);
    };
    std::ostringstream os;
    os << combo << ',' << cfg.users_per_role << ',' << cfg.cities << ','
       << format_decimal(Rational(cfg.budget_base.micros(), Money::kMicrosPerDollar), 2) << ','
       << m.eng_rates.size() << ',' << format_decimal(m.eng_rate.avg, kDigits) << ','
       << format_decimal(m.eng_rate.var, kDigits) << ',' << pair(m.latency()) << ',' << pair(m.comparison_stats())
       << ',' << pair(m.gas()) << ',' << m.sessions_settled << ',' << m.sessions_aborted;
    return os.str();
}

void emit_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& r : rows) out << csv_row(r.combo_id, r.cfg, r.metrics) << '\n';
}

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    emit_csv(rows, f);
    f.flush();
    if (!f) throw std::runtime_error("failed writing " + path);
}

std::vector<GasReceipt> evaluate_pairs(ScenarioConfig cfg, const CostArgs& args) {
    cfg.cost = args;
    return run_scenario(cfg).pair_receipts;
}

}  // namespace edgetrade
