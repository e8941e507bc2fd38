// Acceptance run: one PASS/FAIL line per criterion. Tolerances and time
// limits are fixed here; the exit code is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "edgetrade/harness.hpp"
#include "edgetrade/kv.hpp"
#include "edgetrade/rng.hpp"
#include "support/chain_fixture.hpp"
#include "support/escrow_fuzz.hpp"
#include "support/reference_matcher.hpp"
#include "support/vault_roundtrip.hpp"

using namespace edgetrade;
namespace fs = std::filesystem;

namespace {

constexpr double kOracleSeconds = 30;
constexpr double kSweepSeconds = 120;
constexpr double kMinRSquared = 0.98;
constexpr double kMaxComparisonGrowth = 5;
constexpr std::size_t kOracleScenarios = 100;
constexpr std::size_t kMaxOracleUsers = 200;
constexpr std::size_t kEscrowSessions = 1000;
constexpr std::size_t kVaultDatasets = 100;
constexpr std::size_t kMaxDatasetBytes = 1 << 20;
constexpr std::size_t kChainLength = 50;
constexpr std::uint64_t kSweepSeed = 1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fixed(double v, int digits = 4) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

double to_double(const Rational& r) { return static_cast<double>(r); }

// --- c1 ---------------------------------------------------------------------

Outcome oracle_equivalence() {
    const auto t0 = Clock::now();
    Rng rng(derive_seed(kSweepSeed, {0xc1}));
    std::size_t mismatches = 0, engagements = 0, largest = 0;
    std::string first_bad;
    for (std::size_t s = 0; s < kOracleScenarios; ++s) {
        ScenarioConfig cfg;
        cfg.seed = rng.next();
        cfg.rounds = 1;
        cfg.cities = 1 + static_cast<std::uint32_t>(rng.below(4));
        cfg.storage_per_city = static_cast<std::uint32_t>(rng.below(6));
        const auto storage = cfg.cities * cfg.storage_per_city;
        cfg.users_per_role = 1 + static_cast<std::uint32_t>(rng.below((kMaxOracleUsers - storage) / 2));
        cfg.replication = 1 + static_cast<std::uint32_t>(rng.below(3));
        cfg.cost.op_drain_limit = static_cast<std::uint32_t>(rng.below(4));
        cfg.condition_density = Rational(static_cast<long long>(rng.below(5)), 4);
        cfg.budget_base = Money::dollars(rng.below(2) ? 5 : 50);
        cfg.tamper_rate = 0;
        largest = std::max<std::size_t>(largest, 2 * cfg.users_per_role + storage);

        // Ids are handed out in registration order: storage first, then arrivals.
        const auto pop = generate_population(cfg, 0);
        std::vector<UserSpec> users;
        std::uint64_t next = 0;
        for (auto u : pop.storage_providers) {
            u.id = UserId{next++};
            users.push_back(u);
        }
        for (const auto& [role, idx] : pop.arrivals) {
            auto u = role == Role::Consumer ? pop.consumers[idx] : pop.compute_providers[idx];
            u.id = UserId{next++};
            users.push_back(u);
        }
        const auto want = reference::run(users, cfg.cities, cfg.replication, cfg.cost.op_drain_limit);

        const auto m = run_scenario(cfg);
        std::set<reference::Match> got;
        for (const auto& tx : m.ledger.transactions()) {
            if (tx.kind != TxKind::Engaged) continue;
            const auto r = EngagedRecord::decode(tx.payload);
            std::vector<std::uint64_t> st;
            for (auto id : r.storage_providers) st.push_back(id.value);
            got.insert({r.consumer.value, r.compute_provider.value, st, r.tick});
        }
        engagements += got.size();
        if (got != want) {
            ++mismatches;
            if (first_bad.empty()) first_bad = " first mismatch in scenario " + std::to_string(s);
        }
    }
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = mismatches == 0 && secs < kOracleSeconds;
    o.detail = std::to_string(kOracleScenarios) + " scenarios (<= " + std::to_string(largest) + " users), " +
               std::to_string(engagements) + " engagements, " + std::to_string(mismatches) + " mismatches, " +
               fixed(secs, 2) + " s (limit " + fixed(kOracleSeconds, 0) + " s)" + first_bad;
    return o;
}

// --- sweep-based criteria ---------------------------------------------------

struct Combo {
    std::uint32_t cities;
    std::uint64_t budget;
    std::map<std::uint32_t, const SweepRow*> by_users;
};

std::vector<Combo> group(const std::vector<SweepRow>& rows) {
    std::vector<Combo> out;
    for (const auto& r : rows) {
        const auto budget = r.cfg.budget_base.micros() / Money::kMicrosPerDollar;
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const Combo& c) { return c.cities == r.cfg.cities && c.budget == budget; });
        if (it == out.end()) {
            out.push_back({r.cfg.cities, budget, {}});
            it = out.end() - 1;
        }
        it->by_users[r.cfg.users_per_role] = &r;
    }
    return out;
}

std::string combo_name(const Combo& c) {
    return "C" + std::to_string(c.cities) + "-B" + std::to_string(c.budget);
}

Outcome eng_rate_trend(const std::vector<Combo>& combos, double sweep_secs) {
    Outcome o{true, ""};
    for (const auto& c : combos) {
        const auto& u = c.by_users;
        const bool grows = u.at(125)->metrics.eng_rate.avg > u.at(25)->metrics.eng_rate.avg;
        bool monotone = true;
        for (std::uint32_t n = 75; n <= 125; n += 25)
            monotone = monotone && u.at(n)->metrics.eng_rate.avg >= u.at(n - 25)->metrics.eng_rate.avg;
        o.pass = o.pass && grows && monotone;
        o.detail += combo_name(c) + " [";
        for (const auto& [n, row] : u) o.detail += (n == 25 ? "" : " ") + format_decimal(row->metrics.eng_rate.avg, 4);
        o.detail += std::string("]") + (grows ? "" : " 125<=25") + (monotone ? "" : " non-monotone") + "; ";
    }
    o.pass = o.pass && sweep_secs < kSweepSeconds;
    o.detail += "sweep " + fixed(sweep_secs, 2) + " s (limit " + fixed(kSweepSeconds, 0) + " s)";
    return o;
}

Outcome eng_rate_variance(const std::vector<Combo>& combos) {
    Outcome o{true, ""};
    for (const auto& c : combos) {
        const auto& v125 = c.by_users.at(125)->metrics.eng_rate.var;
        const auto& v50 = c.by_users.at(50)->metrics.eng_rate.var;
        const bool ok = v125 <= v50;
        o.pass = o.pass && ok;
        o.detail += combo_name(c) + " var(125)=" + format_decimal(v125, 6) + (ok ? " <= " : " > ") +
                    "var(50)=" + format_decimal(v50, 6) + "; ";
    }
    return o;
}

Outcome comparison_bound(const std::vector<SweepRow>& rows, const std::vector<Combo>& combos) {
    std::uint64_t descents = 0, violations = 0;
    std::int64_t worst = INT64_MIN;
    for (const auto& r : rows) {
        descents += r.metrics.descents;
        violations += r.metrics.descent_bound_violations;
        worst = std::max(worst, r.metrics.max_descent_excess);
    }
    Outcome o;
    o.pass = violations == 0;
    o.detail = std::to_string(descents) + " descents, " + std::to_string(violations) +
               " over 2*ceil(log2(n+1))+K+2 (max excess " + std::to_string(worst) + "); ";
    for (const auto& c : combos) {
        const auto a = c.by_users.at(25)->metrics.comparison_stats();
        const auto b = c.by_users.at(125)->metrics.comparison_stats();
        if (!a || !b) {
            o.pass = false;
            o.detail += combo_name(c) + " has no engagements; ";
            continue;
        }
        const double ratio = to_double(b->avg / a->avg);
        o.pass = o.pass && ratio < kMaxComparisonGrowth;
        o.detail += combo_name(c) + " cmp(125)/cmp(25)=" + fixed(ratio, 3) + "; ";
    }
    return o;
}

struct Fit {
    double slope = 0, intercept = 0, r2 = 0;
};

Fit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    Fit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.slope * x[i] + f.intercept);
        ss_res += e * e;
    }
    f.r2 = syy == 0 ? 1 : 1 - ss_res / syy;
    return f;
}

Outcome gas_linearity(const std::vector<SweepRow>& rows, const std::vector<Combo>& combos) {
    // Per-pair gas pooled over the four combos at each size, against |C+P|.
    std::map<std::uint32_t, std::vector<std::uint64_t>> pooled;
    std::vector<std::uint64_t> consumer, provider;
    for (const auto& r : rows) {
        auto& v = pooled[r.cfg.users_per_role];
        v.insert(v.end(), r.metrics.pair_gas.begin(), r.metrics.pair_gas.end());
        consumer.insert(consumer.end(), r.metrics.consumer_gas.begin(), r.metrics.consumer_gas.end());
        provider.insert(provider.end(), r.metrics.provider_gas.begin(), r.metrics.provider_gas.end());
    }
    std::vector<double> x, y;
    for (const auto& [n, v] : pooled) {
        x.push_back(2.0 * n);
        y.push_back(v.empty() ? 0 : to_double(stats_of(v).avg));
    }
    const auto fit = least_squares(x, y);
    const auto cs = stats_of(consumer), ps = stats_of(provider);
    const bool var_ok = cs.var > ps.var;

    Outcome o;
    o.pass = fit.r2 >= kMinRSquared && var_ok;
    o.detail = "pooled R^2=" + fixed(fit.r2) + " (min " + fixed(kMinRSquared, 2) + ", slope " + fixed(fit.slope, 1) +
               " gas per user); per-combo R^2";
    for (const auto& c : combos) {
        std::vector<double> cx, cy;
        for (const auto& [n, row] : c.by_users) {
            if (const auto g = row->metrics.gas()) {
                cx.push_back(2.0 * n);
                cy.push_back(to_double(g->avg));
            }
        }
        o.detail += " " + combo_name(c) + "=" + fixed(least_squares(cx, cy).r2, 3);
    }
    o.detail += "; consumer var " + fixed(to_double(cs.var), 0) + (var_ok ? " > " : " <= ") + "provider var " +
                fixed(to_double(ps.var), 0);
    return o;
}

// --- c6 ---------------------------------------------------------------------

Outcome escrow_conservation() {
    const auto rep = fuzz::run(derive_seed(kSweepSeed, {0xc6}), kEscrowSessions);
    Outcome o;
    o.pass = rep.sessions == kEscrowSessions && rep.conservation_failures == 0 && rep.paid_before_verify == 0 &&
             rep.oracle_mismatches == 0 && rep.order_violations_accepted == 0 && rep.mutated_by_rejected_call == 0;
    o.detail = std::to_string(rep.sessions) + " sessions (" + std::to_string(rep.aborted) + " aborted at verify), " +
               std::to_string(rep.conservation_failures) + " conservation failures, " +
               std::to_string(rep.paid_before_verify) + " paid before verification, " +
               std::to_string(rep.oracle_mismatches) + " oracle mismatches, " +
               std::to_string(rep.order_violations_accepted + rep.mutated_by_rejected_call) + " state-machine faults";
    return o;
}

// --- c7 ---------------------------------------------------------------------

Outcome vault_resilience() {
    ToyScheme scheme;
    Rng rng(derive_seed(kSweepSeed, {0xc7}));
    const PeerId provider{1}, stranger{2};
    std::size_t failed_recoveries = 0, recoveries = 0, leaks = 0, probes = 0;
    std::uint64_t bytes_total = 0;
    for (std::size_t d = 0; d < kVaultDatasets; ++d) {
        Vault vault;
        std::vector<PeerId> nodes;
        const auto n_nodes = 2 + rng.below(5);
        for (std::uint64_t i = 0; i < n_nodes; ++i) {
            nodes.push_back(PeerId{100 + i});
            vault.add_storage_node(nodes.back());
        }
        const auto ck = scheme.keygen(rng.next()), pk = scheme.keygen(rng.next()), sk = scheme.keygen(rng.next());
        AccessPolicy policy;
        policy.trusted.emplace(provider, pk.pub);

        Bytes data(1 + rng.below(kMaxDatasetBytes));
        for (auto& b : data) b = static_cast<std::uint8_t>(rng.next());
        bytes_total += data.size();
        const auto chunk = std::size_t{1} << (10 + rng.below(7));  // 1 KiB .. 64 KiB
        const auto tasks = encrypt_and_sign(chunk_data(data, chunk), d, ck, policy, scheme);
        const auto dht = vault.distribute(d, tasks, nodes, 2, policy);

        for (auto down : nodes) {
            vault.set_node_up(down, false);
            ++recoveries;
            if (roundtrip::fetch_all(vault, d, dht, provider, pk, ck.pub, scheme) != data) ++failed_recoveries;
            vault.set_node_up(down, true);
        }

        // Denials for existing ids, missing ids and missing datasets must be identical.
        const FetchResult denied = AccessDenied{};
        const auto n_tasks = static_cast<std::uint32_t>(tasks.size());
        for (std::uint32_t t : {0u, n_tasks - 1, n_tasks, n_tasks + 7}) {
            probes += 3;
            if (!(vault.fetch_chunk(stranger, d, t) == denied)) ++leaks;
            if (!(vault.fetch_chunk(stranger, d + 1, t) == denied)) ++leaks;
            if (t >= n_tasks && !(vault.fetch_chunk(provider, d, t) == denied)) ++leaks;
        }
        if (roundtrip::fetch_all(vault, d, dht, stranger, sk, ck.pub, scheme)) ++leaks;
    }
    Outcome o;
    o.pass = failed_recoveries == 0 && leaks == 0;
    o.detail = std::to_string(kVaultDatasets) + " datasets (" + std::to_string(bytes_total >> 20) + " MiB), " +
               std::to_string(recoveries - failed_recoveries) + "/" + std::to_string(recoveries) +
               " single-failure recoveries, " + std::to_string(leaks) + " distinguishable denials in " +
               std::to_string(probes) + " probes";
    return o;
}

// --- c8 ---------------------------------------------------------------------

Outcome chain_tamper() {
    const auto chain = fixture::mixed_chain(kChainLength, derive_seed(kSweepSeed, {0xc8}));
    const auto bytes = chain.serialize();
    std::uint64_t mutations = 0, missed = 0;
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        auto m = bytes;
        for (int v = 1; v < 256; ++v) {
            m[i] = static_cast<std::uint8_t>(bytes[i] ^ v);
            ++mutations;
            if (!fixture::tamper_detected(m)) ++missed;
        }
    }
    Outcome o;
    o.pass = chain.verify_chain() && missed == 0;
    o.detail = std::to_string(kChainLength) + "-tx chain, " + std::to_string(bytes.size()) + " bytes, " +
               std::to_string(mutations) + " single-byte mutations, " + std::to_string(missed) + " undetected";
    return o;
}

// --- c9 ---------------------------------------------------------------------

Outcome optimizer_argmin() {
    ScenarioConfig cfg;
    cfg.users_per_role = 30;
    cfg.rounds = 2;
    cfg.seed = derive_seed(kSweepSeed, {0xc9});
    CostGrid grid;
    grid.op_drain_limit = {0, 1, 2, 4};
    grid.eng_batch = {1, 4};
    grid.comm_interval = {1, 5};
    grid.setup_share = {1, 2, 4, 16};
    const auto cands = grid.candidates();

    // Independent side: totals per candidate, J in exact rationals.
    std::vector<std::vector<std::uint64_t>> totals;
    for (const auto& a : cands) {
        std::vector<std::uint64_t> t;
        for (const auto& r : evaluate_pairs(cfg, a)) t.push_back(r.total());
        totals.push_back(std::move(t));
    }
    auto brute = [&](const Rational& zeta) {
        std::size_t best = 0;
        Rational best_j;
        for (std::size_t i = 0; i < totals.size(); ++i) {
            Rational sum = 0, sq = 0;
            for (auto v : totals[i]) {
                sum += v;
                sq += Rational(v) * v;
            }
            const Rational n = static_cast<long long>(totals[i].size());
            const Rational avg = sum / n;
            const Rational j = avg + zeta * (sq / n - avg * avg);
            if (i == 0 || j < best_j) {
                best_j = j;
                best = i;
            }
        }
        return best;
    };

    Outcome o{true, std::to_string(cands.size()) + " candidates;"};
    for (const Rational& zeta : {Rational(0), Rational(1, 100000), Rational(1, 1000), Rational(1, 10), Rational(10)}) {
        const auto res = optimize(cands, [&](const CostArgs& a) { return evaluate_pairs(cfg, a); }, zeta);
        const auto want = brute(zeta);
        bool ok = res.optimal == want;
        if (zeta == 0) ok = ok && res.optimal == res.args_avg;
        o.pass = o.pass && ok;
        o.detail += " zeta=" + format_decimal(zeta, 5) + " -> #" + std::to_string(res.optimal) +
                    (ok ? "" : " (exhaustive #" + std::to_string(want) + ")");
    }
    return o;
}

// --- c10 --------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome sweep_determinism() {
    const fs::path work = fs::current_path() / "acceptance_sweeps";
    fs::remove_all(work);
    std::vector<std::string> csv, heads;
    for (int i = 0; i < 2; ++i) {
        const auto out = work / ("run" + std::to_string(i));
        const std::string cmd = std::string("\"") + EDGETRADE_CLI_PATH +
                                "\" sweep --users 25:125:25 --cities 2,4 --budgets 5,50 --rounds 10 --seed " +
                                std::to_string(kSweepSeed) + " --out \"" + out.string() + "\" > /dev/null";
        if (std::system(cmd.c_str()) != 0) return {false, "CLI sweep failed: " + cmd};
        csv.push_back(slurp(out / "sweep.csv"));
        heads.push_back(slurp(out / "heads.txt"));
    }
    Outcome o;
    o.pass = !csv[0].empty() && csv[0] == csv[1] && heads[0] == heads[1];
    o.detail = "sweep.csv " + std::to_string(csv[0].size()) + " bytes " + (csv[0] == csv[1] ? "identical" : "DIFFER") +
               ", chain heads " + (heads[0] == heads[1] ? "identical" : "DIFFER");
    return o;
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, std::function<Outcome()>>> checks;

    std::vector<SweepRow> rows;
    double sweep_secs = 0;
    std::vector<Combo> combos;
    auto ensure_sweep = [&] {
        if (!rows.empty()) return;
        const auto t0 = Clock::now();
        rows = run_sweep(SweepSpec{{25, 50, 75, 100, 125}, {2, 4}, {5, 50}, 10, kSweepSeed});
        sweep_secs = seconds_since(t0);
        combos = group(rows);
    };

    checks.emplace_back("c1 oracle equivalence", oracle_equivalence);
    checks.emplace_back("c2 engagement rate grows with users", [&] {
        ensure_sweep();
        return eng_rate_trend(combos, sweep_secs);
    });
    checks.emplace_back("c3 engagement rate variance shrinks", [&] {
        ensure_sweep();
        return eng_rate_variance(combos);
    });
    checks.emplace_back("c4 comparison bound per descent", [&] {
        ensure_sweep();
        return comparison_bound(rows, combos);
    });
    checks.emplace_back("c5 gas grows linearly with users", [&] {
        ensure_sweep();
        return gas_linearity(rows, combos);
    });
    checks.emplace_back("c6 escrow conservation", escrow_conservation);
    checks.emplace_back("c7 vault recovery and access isolation", vault_resilience);
    checks.emplace_back("c8 chain tamper evidence", chain_tamper);
    checks.emplace_back("c9 optimizer equals exhaustive argmin", optimizer_argmin);
    checks.emplace_back("c10 sweep determinism", sweep_determinism);

    int failed = 0;
    for (const auto& [name, fn] : checks) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << fixed(seconds_since(t0), 2)
                  << " s]" << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
