// Command-line front end: run / sweep / polytope / value-map / verify.
//
// Exit codes: 0 success, 1 configuration or I/O error, 2 failed certificate.

#include "ipelab/harness.hpp"
#include "ipelab/polytope.hpp"
#include "ipelab/theory.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

namespace {

using namespace ipelab;

/// Short form for console messages; files keep full precision.
std::string brief(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

struct GlobalOptions {
    std::string out;
    bool quiet = false;

    std::optional<std::string> out_dir() const {
        return out.empty() ? std::nullopt : std::optional<std::string>(out);
    }
};

int cmd_run(const GlobalOptions& g, const std::string& config_path) {
    const ExperimentConfig cfg = load_config(config_path);
    const auto dir = resolve_output_dir(g.out_dir(), cfg);
    const ExperimentSummary s = run_experiment(cfg, dir);
    if (!g.quiet)
        std::cout << "run: " << s.n_runs << " run(s), mean avg reward "
                  << brief(s.mean_avg_reward) << " (stderr "
                  << brief(s.stderr_avg_reward) << "), mean final RMSE "
                  << brief(s.mean_final_rmse) << "\n"
                  << "outputs in " << dir.string() << "\n";
    return 0;
}

int cmd_sweep(const GlobalOptions& g, const std::string& config_path) {
    const ExperimentConfig cfg = load_config(config_path);
    const auto dir = resolve_output_dir(g.out_dir(), cfg);
    const SweepResult result = run_sweep(cfg);
    write_sweep_outputs(result, dir);
    if (!g.quiet) {
        std::cout << "sweep over " << result.axis << " (" << result.behavior << ")\n";
        for (const auto& row : result.rows)
            std::cout << "  " << result.axis << "=" << brief(row.value)
                      << "  reward " << brief(row.summary.mean_avg_reward) << " +- "
                      << brief(row.summary.stderr_avg_reward) << "  rmse "
                      << brief(row.summary.mean_final_rmse) << "\n";
        std::cout << "spearman(reward, rmse) = " << brief(result.reward_rmse_spearman())
                  << "\n";
    }
    return 0;
}

int cmd_polytope(const GlobalOptions& g, const std::string& config_path) {
    const ExperimentConfig cfg = load_config(config_path);
    const PolytopeSample sample = sample_polytope(cfg.mdp, cfg.polytope_resolution);
    const auto dir = resolve_output_dir(g.out_dir(), cfg);
    ensure_dir(dir);
    std::ostringstream csv;
    write_polytope_csv(csv, sample);
    write_text(dir / "polytope.csv", csv.str());
    if (!g.quiet)
        std::cout << "polytope: " << sample.points.size() << " points -> "
                  << (dir / "polytope.csv").string() << "\n";
    return 0;
}

int cmd_value_map(const GlobalOptions& g, const std::string& config_path) {
    const ExperimentConfig cfg = load_config(config_path);
    const auto grid = value_grid(cfg.value_map.v0, cfg.value_map.v1);
    std::vector<ValueMapArrow> arrows;
    for (ArrowKind kind : cfg.value_map.kinds) {
        auto part = value_map(cfg.mdp, grid, kind);
        arrows.insert(arrows.end(), part.begin(), part.end());
    }
    const auto dir = resolve_output_dir(g.out_dir(), cfg);
    ensure_dir(dir);
    std::ostringstream csv;
    write_value_map_csv(csv, arrows);
    write_text(dir / "value_map.csv", csv.str());
    if (!g.quiet)
        std::cout << "value-map: " << arrows.size() << " arrows -> "
                  << (dir / "value_map.csv").string() << "\n";
    return 0;
}

struct VerifyOptions {
    bool props = false;
    bool thms = false;
    std::optional<int> instances;
    std::uint64_t seed = 0;
    int k_max = 30;
};

int cmd_verify(const GlobalOptions& g, const VerifyOptions& v) {
    const bool both = !v.props && !v.thms;
    std::vector<BoundCertificate> certs;
    auto report = [&](const char* label, const std::vector<BoundCertificate>& part) {
        std::size_t failed = 0;
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& c : part) {
            failed += c.pass() ? 0 : 1;
            worst = std::min(worst, c.slack);
        }
        if (!g.quiet)
            std::cout << (failed == 0 ? "PASS " : "FAIL ") << label << ": " << part.size()
                      << " certificates, " << failed << " failing, min slack "
                      << brief(worst) << "\n";
        certs.insert(certs.end(), part.begin(), part.end());
    };
    if (v.props || both) report("props", prop_sweep(v.instances.value_or(100), v.seed));
    if (v.thms || both) report("thms", thm_sweep(v.instances.value_or(50), v.seed, v.k_max));

    std::optional<std::string> cli_out = g.out_dir();
    ExperimentConfig defaults;
    const auto dir = resolve_output_dir(cli_out, defaults);
    ensure_dir(dir);
    std::ostringstream jsonl;
    write_certificates_jsonl(jsonl, certs);
    write_text(dir / "certificates.jsonl", jsonl.str());

    std::size_t failed = 0;
    for (const auto& c : certs) failed += c.pass() ? 0 : 1;
    if (!g.quiet)
        std::cout << certs.size() - failed << "/" << certs.size() << " certificates pass -> "
                  << (dir / "certificates.jsonl").string() << "\n";
    return failed == 0 ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inverse policy evaluation lab"};
    app.require_subcommand(1);
    GlobalOptions g;
    app.add_option("--out", g.out, "Output directory (falls back to config, then IPE_LAB_OUT)");
    app.add_flag("--quiet", g.quiet, "Suppress progress output");

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run an experiment (one CSV per seed + summary)");
    run->add_option("config", config_path, "Config JSON")->required();
    auto* sweep = app.add_subcommand("sweep", "Sweep one behavior hyperparameter");
    sweep->add_option("config", config_path, "Config JSON")->required();
    auto* poly = app.add_subcommand("polytope", "Sample the value polytope of a 2-state MDP");
    poly->add_option("config", config_path, "Config JSON")->required();
    auto* vmap = app.add_subcommand("value-map", "Map fixed value functions back to the polytope");
    vmap->add_option("config", config_path, "Config JSON")->required();

    VerifyOptions vopts;
    int instances = 0;
    auto* verify = app.add_subcommand("verify", "Certify the IPE bounds on random instances");
    verify->add_flag("--props", vopts.props, "Q-estimate policy-gap bound sweeps");
    verify->add_flag("--thms", vopts.thms, "Value-iteration bound sweeps");
    auto* inst_opt = verify->add_option("--instances", instances, "Instances per sweep");
    verify->add_option("--seed", vopts.seed, "Base seed");
    verify->add_option("--k-max", vopts.k_max, "Value-iteration steps per certificate sequence");

    // Global flags are accepted after the subcommand too.
    for (auto* sub : {run, sweep, poly, vmap, verify}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    if (*inst_opt) vopts.instances = instances;

    try {
        if (*run) return cmd_run(g, config_path);
        if (*sweep) return cmd_sweep(g, config_path);
        if (*poly) return cmd_polytope(g, config_path);
        if (*vmap) return cmd_value_map(g, config_path);
        if (*verify) return cmd_verify(g, vopts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
