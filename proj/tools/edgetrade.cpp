// Command-line front end: run, sweep, optimize, verify.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "edgetrade/digest.hpp"
#include "edgetrade/gasmeter.hpp"
#include "edgetrade/harness.hpp"
#include "edgetrade/kv.hpp"
#include "edgetrade/ledger.hpp"

namespace fs = std::filesystem;
using namespace edgetrade;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    if (!f.flush()) throw std::runtime_error("failed writing " + path.string());
}

std::string head_line(const std::string& combo, const Ledger& ledger) {
    return combo + "," + to_hex(ledger.head()) + "," + std::to_string(ledger.size()) + "\n";
}

int cmd_run(const std::string& config, std::uint64_t seed, const fs::path& out) {
    auto cfg = ScenarioConfig::load_file(config);
    cfg.seed = seed;
    const auto m = run_scenario(cfg);
    fs::create_directories(out);
    const auto combo = combo_id(cfg);
    write_text(out / "metrics.csv", std::string(kCsvHeader) + "\n" + csv_row(combo, cfg, m) + "\n");
    m.ledger.export_file(out / "chain.bin");
    write_text(out / "head.txt", head_line(combo, m.ledger));
    std::cout << combo << ": eng_rate_avg " << format_decimal(m.eng_rate.avg, 6) << ", settled "
              << m.sessions_settled << ", aborted " << m.sessions_aborted << ", chain "
              << (m.chain_ok ? "ok" : "BROKEN") << " (" << m.ledger.size() << " tx)\n";
    return m.chain_ok && m.audit_ok && m.conservation_failures == 0 ? 0 : 1;
}

int cmd_sweep(const std::string& users, const std::string& cities, const std::string& budgets,
              std::uint32_t rounds, std::uint64_t seed, const std::string& config, const fs::path& out) {
    SweepSpec spec;
    spec.users = parse_range(users);
    spec.cities = parse_u32_list(cities);
    spec.budgets_usd.clear();
    for (auto b : parse_u32_list(budgets)) spec.budgets_usd.push_back(b);
    spec.rounds = rounds;
    spec.seed = seed;
    const ScenarioConfig base = config.empty() ? ScenarioConfig{} : ScenarioConfig::load_file(config);

    const auto rows = run_sweep(spec, base);
    fs::create_directories(out);
    emit_csv(rows, (out / "sweep.csv").string());
    std::string heads = "combo_id,chain_head,tx_count\n";
    bool ok = true;
    for (const auto& r : rows) {
        heads += head_line(r.combo_id, r.metrics.ledger);
        ok = ok && r.metrics.chain_ok && r.metrics.audit_ok && r.metrics.conservation_failures == 0;
    }
    write_text(out / "heads.txt", heads);
    std::cout << "wrote " << rows.size() << " rows to " << (out / "sweep.csv").string() << "\n";
    return ok ? 0 : 1;
}

int cmd_optimize(const std::string& config, const std::string& zeta_text, const std::string& grid_file) {
    const auto cfg = ScenarioConfig::load_file(config);
    const auto zeta = parse_rational(zeta_text);
    const auto candidates = CostGrid::load_file(grid_file).candidates();
    const auto res = optimize(candidates, [&](const CostArgs& a) { return evaluate_pairs(cfg, a); }, zeta);

    std::cout << "candidate,op_drain_limit,eng_batch,comm_interval,setup_share,avg,var,objective\n";
    for (std::size_t i = 0; i < res.scores.size(); ++i) {
        const auto& s = res.scores[i];
        std::cout << i << ',' << s.args.op_drain_limit << ',' << s.args.eng_batch << ',' << s.args.comm_interval
                  << ',' << s.args.setup_share << ',' << format_decimal(s.stats.avg, 6) << ','
                  << format_decimal(s.stats.var, 6) << ',' << format_decimal(s.objective, 6) << '\n';
    }
    std::cout << "optimal: " << res.optimal << " (" << res.optimal_args().to_string() << ")\n"
              << "args_avg: " << res.args_avg << " (" << res.scores[res.args_avg].args.to_string() << ")\n"
              << "args_var: " << res.args_var << " (" << res.scores[res.args_var].args.to_string() << ")\n";
    return 0;
}

int cmd_verify(const std::string& chain) {
    const auto ledger = Ledger::import_file(chain);
    const bool ok = ledger.verify_chain();
    std::cout << (ok ? "valid" : "INVALID") << ": " << ledger.size() << " transactions, head "
              << to_hex(ledger.head()) << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Edge compute marketplace simulator"};
    app.require_subcommand(1);

    std::string config, out, zeta, grid, chain, users = "25:125:25", cities = "2,4", budgets = "5,50";
    std::uint64_t seed = 1;
    std::uint32_t rounds = 10;

    auto* run = app.add_subcommand("run", "Run one scenario from a config file");
    run->add_option("--config", config, "key=value scenario file")->required();
    run->add_option("--seed", seed, "64-bit seed")->required();
    run->add_option("--out", out, "output directory")->required();

    auto* sweep = app.add_subcommand("sweep", "Run the users x cities x budgets grid");
    sweep->add_option("--users", users, "lo:hi:step users per role");
    sweep->add_option("--cities", cities, "comma-separated city counts");
    sweep->add_option("--budgets", budgets, "comma-separated budget bases in dollars");
    sweep->add_option("--rounds", rounds, "rounds per combination");
    sweep->add_option("--seed", seed, "64-bit seed")->required();
    sweep->add_option("--config", config, "base scenario file for the remaining settings");
    sweep->add_option("--out", out, "output directory")->required();

    auto* opt = app.add_subcommand("optimize", "Search a cost-argument grid for the minimum of avg + zeta*var");
    opt->add_option("--config", config, "key=value scenario file")->required();
    opt->add_option("--zeta", zeta, "non-negative rational penalty, e.g. 1/1000")->required();
    opt->add_option("--grid", grid, "key=value grid file")->required();

    auto* verify = app.add_subcommand("verify", "Audit an exported chain file");
    verify->add_option("--chain", chain, "chain file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config, seed, out);
        if (*sweep) return cmd_sweep(users, cities, budgets, rounds, seed, config, out);
        if (*opt) return cmd_optimize(config, zeta, grid);
        if (*verify) return cmd_verify(chain);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
