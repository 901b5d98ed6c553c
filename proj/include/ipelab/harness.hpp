#pragma once

#include "ipelab/bellman.hpp"
#include "ipelab/control.hpp"
#include "ipelab/environments.hpp"
#include "ipelab/format.hpp"
#include "ipelab/mdp_json.hpp"
#include "ipelab/parallel.hpp"
#include "ipelab/polytope.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace ipelab {

/// Raised when outputs cannot be written.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RmseTarget { Q, V };

struct ValueMapSettings {
    std::vector<double> v0 = value_range(-6.0, 18.0, 2.0);
    std::vector<double> v1 = value_range(-6.0, 22.0, 2.0);
    std::vector<ArrowKind> kinds = {ArrowKind::Evaluation, ArrowKind::Greedy};
};

struct SweepAxis {
    std::string axis;
    std::vector<double> values;
};

struct ExperimentConfig {
    TabularMdp mdp = switch_stay();
    BehaviorSpec behavior;
    long t_max = 500;
    int n_runs = 1;
    std::uint64_t base_seed = 0;
    std::optional<long> snapshot_interval;
    std::optional<std::string> output_dir;
    double q_init = 0.0;
    RmseTarget rmse_target = RmseTarget::Q;
    std::optional<SweepAxis> sweep;
    double polytope_resolution = 0.01;
    ValueMapSettings value_map;
    /// Parsed document, used for the config hash.
    nlohmann::json source = nlohmann::json::object();

    long effective_snapshot_interval() const {
        return snapshot_interval ? *snapshot_interval : default_snapshot_interval(mdp);
    }
};

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

namespace detail {

inline void allow_keys(const nlohmann::json& j, const std::string& where,
                       std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ConfigError(where + ": unknown field '" + key + "'");
}

template <class T>
T get_or(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(where + ": field '" + key + "' has the wrong type");
    }
}

inline TabularMdp parse_mdp(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "switch_stay") return switch_stay();
        throw ConfigError("mdp: unknown builtin '" + name + "'");
    }
    if (j.is_object() && j.contains("random")) {
        allow_keys(j, "mdp", {"random"});
        const auto& r = j.at("random");
        allow_keys(r, "mdp.random", {"n_states", "n_actions", "seed", "gamma"});
        const auto n = get_or<Index>(r, "n_states", 0, "mdp.random");
        const auto na = get_or<Index>(r, "n_actions", 0, "mdp.random");
        if (n < 1 || na < 1)
            throw ConfigError("mdp.random: n_states and n_actions must be positive");
        const auto seed = get_or<std::uint64_t>(r, "seed", 0, "mdp.random");
        const double gamma = get_or<double>(r, "gamma", 0.9, "mdp.random");
        try {
            return random_mdp(n, na, seed, gamma);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("mdp.random: ") + e.what());
        }
    }
    return mdp_from_json(j);
}

inline BehaviorSpec parse_behavior(const nlohmann::json& j) {
    const std::string where = "behavior";
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    const auto kind = get_or<std::string>(j, "kind", "", where);
    BehaviorSpec spec;
    spec.alpha_q = get_or<double>(j, "alpha_q", 0.5, where);
    if (kind == "eps_greedy") {
        allow_keys(j, where, {"kind", "alpha_q", "epsilon"});
        spec.kind = EpsGreedyFixed{get_or<double>(j, "epsilon", 0.1, where)};
    } else if (kind == "eps_anneal") {
        allow_keys(j, where, {"kind", "alpha_q", "epsilon_start", "epsilon_end", "anneal_steps"});
        spec.kind = EpsGreedyAnneal{get_or<double>(j, "epsilon_start", 1.0, where),
                                    get_or<double>(j, "epsilon_end", 0.1, where),
                                    get_or<int>(j, "anneal_steps", 100, where)};
    } else if (kind == "boltzmann") {
        allow_keys(j, where, {"kind", "alpha_q", "tau"});
        spec.kind = Boltzmann{get_or<double>(j, "tau", 1.0, where)};
    } else if (kind == "ipe") {
        allow_keys(j, where, {"kind", "alpha_q", "alpha_pi"});
        spec.kind = IpeDirect{get_or<double>(j, "alpha_pi", 0.05, where)};
    } else if (kind == "eps_ipe") {
        allow_keys(j, where,
                   {"kind", "alpha_q", "alpha_pi", "epsilon_matching", "lookup_resolution"});
        EpsIpe k;
        k.alpha_pi = get_or<double>(j, "alpha_pi", 0.05, where);
        const auto matching = get_or<std::string>(j, "epsilon_matching", "bisection", where);
        if (matching == "bisection") k.matching = EpsilonMatching::Bisection;
        else if (matching == "lookup") k.matching = EpsilonMatching::Lookup;
        else throw ConfigError(where + ": epsilon_matching must be 'bisection' or 'lookup'");
        k.lookup_resolution = get_or<double>(j, "lookup_resolution", 1e-3, where);
        spec.kind = k;
    } else {
        throw ConfigError(where + ": field 'kind' must be one of eps_greedy, eps_anneal, "
                                  "boltzmann, ipe, eps_ipe");
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return spec;
}

inline std::vector<double> parse_range(const nlohmann::json& j, const std::string& where) {
    if (j.is_array()) {
        try {
            return j.get<std::vector<double>>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(where + ": expected an array of numbers");
        }
    }
    allow_keys(j, where, {"start", "stop", "step"});
    try {
        return value_range(get_or<double>(j, "start", 0.0, where),
                           get_or<double>(j, "stop", 0.0, where),
                           get_or<double>(j, "step", 1.0, where));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

} // namespace detail

/**
 * Parses an experiment config. Top-level fields (all optional):
 *
 *   mdp                "switch_stay" | inline MDP document | {"random": {...}}
 *   gamma              discount override
 *   behavior           {"kind": ..., "alpha_q": ..., kind-specific fields}
 *   t_max, n_runs, base_seed, snapshot_interval, output_dir, q_init
 *   rmse_target        "q" (default) or "v"
 *   sweep              {"axis": epsilon|anneal_steps|alpha_pi|tau|alpha_q, "values": [...]}
 *   polytope           {"resolution": 0.01}
 *   value_map          {"v0": range, "v1": range, "kinds": ["evaluation", "greedy"]}
 *
 * Unknown fields anywhere are errors.
 */
inline ExperimentConfig parse_config(const nlohmann::json& j) {
    using detail::allow_keys;
    using detail::get_or;
    allow_keys(j, "config",
               {"mdp", "gamma", "behavior", "t_max", "n_runs", "base_seed", "snapshot_interval",
                "output_dir", "q_init", "rmse_target", "sweep", "polytope", "value_map"});
    ExperimentConfig cfg;
    cfg.source = j;
    if (j.contains("mdp")) cfg.mdp = detail::parse_mdp(j.at("mdp"));
    if (j.contains("gamma")) {
        const double g = get_or<double>(j, "gamma", 0.9, "config");
        try {
            cfg.mdp = cfg.mdp.with_gamma(g);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: gamma: ") + e.what());
        }
    }
    if (j.contains("behavior")) cfg.behavior = detail::parse_behavior(j.at("behavior"));
    cfg.t_max = get_or<long>(j, "t_max", 500, "config");
    if (cfg.t_max < 1) throw ConfigError("config: field 't_max' must be >= 1");
    cfg.n_runs = get_or<int>(j, "n_runs", 1, "config");
    if (cfg.n_runs < 1) throw ConfigError("config: field 'n_runs' must be >= 1");
    cfg.base_seed = get_or<std::uint64_t>(j, "base_seed", 0, "config");
    if (j.contains("snapshot_interval")) {
        cfg.snapshot_interval = get_or<long>(j, "snapshot_interval", 1, "config");
        if (*cfg.snapshot_interval < 0)
            throw ConfigError("config: field 'snapshot_interval' must be >= 0");
    }
    if (j.contains("output_dir"))
        cfg.output_dir = get_or<std::string>(j, "output_dir", "", "config");
    cfg.q_init = get_or<double>(j, "q_init", 0.0, "config");
    const auto target = get_or<std::string>(j, "rmse_target", "q", "config");
    if (target == "q") cfg.rmse_target = RmseTarget::Q;
    else if (target == "v") cfg.rmse_target = RmseTarget::V;
    else throw ConfigError("config: field 'rmse_target' must be 'q' or 'v'");

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        allow_keys(s, "sweep", {"axis", "values"});
        SweepAxis axis;
        axis.axis = get_or<std::string>(s, "axis", "", "sweep");
        if (!s.contains("values")) throw ConfigError("sweep: missing field 'values'");
        axis.values = detail::parse_range(s.at("values"), "sweep.values");
        if (axis.values.empty()) throw ConfigError("sweep: field 'values' is empty");
        cfg.sweep = std::move(axis);
    }
    if (j.contains("polytope")) {
        const auto& p = j.at("polytope");
        allow_keys(p, "polytope", {"resolution"});
        cfg.polytope_resolution = get_or<double>(p, "resolution", 0.01, "polytope");
        try {
            grid_cells(cfg.polytope_resolution);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("polytope: ") + e.what());
        }
    }
    if (j.contains("value_map")) {
        const auto& v = j.at("value_map");
        allow_keys(v, "value_map", {"v0", "v1", "kinds"});
        if (v.contains("v0")) cfg.value_map.v0 = detail::parse_range(v.at("v0"), "value_map.v0");
        if (v.contains("v1")) cfg.value_map.v1 = detail::parse_range(v.at("v1"), "value_map.v1");
        if (v.contains("kinds")) {
            cfg.value_map.kinds.clear();
            for (const auto& k : v.at("kinds")) {
                const auto name = k.is_string() ? k.get<std::string>() : std::string();
                if (name == "evaluation") cfg.value_map.kinds.push_back(ArrowKind::Evaluation);
                else if (name == "greedy") cfg.value_map.kinds.push_back(ArrowKind::Greedy);
                else throw ConfigError("value_map: kinds must be 'evaluation' or 'greedy'");
            }
        }
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

/// FNV-1a 64-bit hash of the canonical (key-sorted) config, excluding
/// output_dir, as 16 hex digits.
inline std::string config_hash(const nlohmann::json& source) {
    nlohmann::json canonical = source;
    if (canonical.is_object()) canonical.erase("output_dir");
    const std::string text = canonical.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Output directory precedence: explicit argument, config field, the
/// IPE_LAB_OUT environment variable, then "ipelab_out".
inline std::filesystem::path resolve_output_dir(const std::optional<std::string>& cli,
                                                const ExperimentConfig& cfg) {
    if (cli && !cli->empty()) return *cli;
    if (cfg.output_dir && !cfg.output_dir->empty()) return *cfg.output_dir;
    if (const char* env = std::getenv("IPE_LAB_OUT"); env && *env) return env;
    return "ipelab_out";
}

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw OutputError("cannot create output directory " + dir.string() + ": " + ec.message());
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot write " + path.string());
    out << text;
    if (!out) throw OutputError("write failed: " + path.string());
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

inline double final_rmse(const ActionValueFn& q, const OptimalSolution& opt, RmseTarget target) {
    if (target == RmseTarget::V) return norm_of(max_value(q).values - opt.v.values, Norm::L2Uniform);
    return norm_of(q.values - opt.q.values, Norm::L2Uniform);
}

inline double mean_of(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Standard error of the mean with the n - 1 sample variance; 0 for n < 2.
inline double stderr_of(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double m = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(x.size() - 1)) / std::sqrt(static_cast<double>(x.size()));
}

/// Ranks starting at 1, ties receiving the average rank.
inline std::vector<double> average_ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Spearman rank correlation (Pearson correlation of average ranks). NaN when
/// either input is constant or the sizes differ or are below 2.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return std::nan("");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double mx = mean_of(rx);
    const double my = mean_of(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return std::nan("");
    return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct RunSummary {
    std::uint64_t seed = 0;
    double avg_reward = 0.0;
    double final_rmse = 0.0;
};

struct ExperimentSummary {
    std::string config_hash;
    int n_runs = 0;
    double mean_avg_reward = 0.0;
    double stderr_avg_reward = 0.0;
    double mean_final_rmse = 0.0;
    std::vector<RunSummary> runs;
};

inline ExperimentSummary summarize(std::string hash, std::vector<RunSummary> runs) {
    ExperimentSummary s;
    s.config_hash = std::move(hash);
    s.n_runs = static_cast<int>(runs.size());
    std::vector<double> rewards, rmses;
    for (const auto& r : runs) {
        rewards.push_back(r.avg_reward);
        rmses.push_back(r.final_rmse);
    }
    s.mean_avg_reward = mean_of(rewards);
    s.stderr_avg_reward = stderr_of(rewards);
    s.mean_final_rmse = mean_of(rmses);
    s.runs = std::move(runs);
    return s;
}

inline nlohmann::ordered_json summary_to_json(const ExperimentSummary& s) {
    return {{"config_hash", s.config_hash},
            {"n_runs", s.n_runs},
            {"mean_avg_reward", s.mean_avg_reward},
            {"stderr_avg_reward", s.stderr_avg_reward},
            {"mean_final_rmse", s.mean_final_rmse}};
}

/// Runs every seed base_seed + i without writing per-run files.
inline ExperimentSummary aggregate_runs(const ExperimentConfig& cfg, unsigned workers = 0) {
    const OptimalSolution opt = solve_optimal(cfg.mdp);
    std::vector<RunSummary> runs(static_cast<std::size_t>(cfg.n_runs));
    RunOptions opts;
    opts.snapshot_interval = 0;
    opts.q_init = cfg.q_init;
    parallel_for(
        runs.size(),
        [&](std::size_t i) {
            const std::uint64_t seed = cfg.base_seed + i;
            const RunRecord rec = run_vi_ipe(cfg.mdp, cfg.behavior, cfg.t_max, seed, opts);
            runs[i] = {seed, rec.average_reward(), final_rmse(rec.final_q, opt, cfg.rmse_target)};
        },
        workers);
    return summarize(config_hash(cfg.source), std::move(runs));
}

/**
 * Runs all seeds and writes, into out_dir:
 *   run_seed<k>.csv        per-step log
 *   snapshots_seed<k>.csv  Q and behavior-policy values (when snapshots are on)
 *   runs.csv               seed, avg_reward, final_rmse
 *   summary.json
 */
inline ExperimentSummary run_experiment(const ExperimentConfig& cfg,
                                        const std::filesystem::path& out_dir,
                                        unsigned workers = 0) {
    ensure_dir(out_dir);
    const OptimalSolution opt = solve_optimal(cfg.mdp);
    RunOptions opts;
    opts.snapshot_interval = cfg.effective_snapshot_interval();
    opts.q_init = cfg.q_init;
    const Index ns = cfg.mdp.n_states();
    const Index na = cfg.mdp.n_actions();

    std::vector<RunSummary> runs(static_cast<std::size_t>(cfg.n_runs));
    constexpr std::size_t batch = 64;
    for (std::size_t lo = 0; lo < runs.size(); lo += batch) {
        const std::size_t hi = std::min(runs.size(), lo + batch);
        std::vector<std::string> steps_csv(hi - lo), snaps_csv(hi - lo);
        parallel_for(
            hi - lo,
            [&](std::size_t j) {
                const std::size_t i = lo + j;
                const std::uint64_t seed = cfg.base_seed + i;
                const RunRecord rec = run_vi_ipe(cfg.mdp, cfg.behavior, cfg.t_max, seed, opts);
                runs[i] = {seed, rec.average_reward(), final_rmse(rec.final_q, opt, cfg.rmse_target)};
                std::ostringstream a, b;
                write_steps_csv(a, rec);
                steps_csv[j] = a.str();
                if (opts.snapshot_interval > 0) {
                    write_snapshots_csv(b, rec, ns, na);
                    snaps_csv[j] = b.str();
                }
            },
            workers);
        for (std::size_t j = 0; j < hi - lo; ++j) {
            const std::string tag = std::to_string(cfg.base_seed + lo + j);
            write_text(out_dir / ("run_seed" + tag + ".csv"), steps_csv[j]);
            if (opts.snapshot_interval > 0)
                write_text(out_dir / ("snapshots_seed" + tag + ".csv"), snaps_csv[j]);
        }
    }

    ExperimentSummary summary = summarize(config_hash(cfg.source), std::move(runs));
    std::ostringstream table;
    table << "seed,avg_reward,final_rmse\n";
    for (const auto& r : summary.runs)
        table << r.seed << ',' << format_double(r.avg_reward) << ',' << format_double(r.final_rmse)
              << '\n';
    write_text(out_dir / "runs.csv", table.str());
    write_text(out_dir / "summary.json", summary_to_json(summary).dump(2) + "\n");
    return summary;
}

/// Copy of `spec` with one hyperparameter replaced. Throws ConfigError when
/// the axis does not apply to the behavior kind.
inline BehaviorSpec apply_axis(const BehaviorSpec& spec, const std::string& axis, double value) {
    BehaviorSpec out = spec;
    bool ok = false;
    if (axis == "alpha_q") {
        out.alpha_q = value;
        ok = true;
    } else if (axis == "epsilon") {
        if (auto* k = std::get_if<EpsGreedyFixed>(&out.kind)) k->epsilon = value, ok = true;
    } else if (axis == "anneal_steps") {
        if (auto* k = std::get_if<EpsGreedyAnneal>(&out.kind))
            k->steps = static_cast<int>(std::lround(value)), ok = true;
    } else if (axis == "tau") {
        if (auto* k = std::get_if<Boltzmann>(&out.kind)) k->tau = value, ok = true;
    } else if (axis == "alpha_pi") {
        if (auto* k = std::get_if<IpeDirect>(&out.kind)) k->alpha_pi = value, ok = true;
        if (auto* k = std::get_if<EpsIpe>(&out.kind)) k->alpha_pi = value, ok = true;
    } else {
        throw ConfigError("sweep: unknown axis '" + axis + "'");
    }
    if (!ok)
        throw ConfigError("sweep: axis '" + axis + "' does not apply to behavior '" +
                          behavior_name(spec) + "'");
    try {
        out.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("sweep: " + axis + "=" + format_double(value) + ": " + e.what());
    }
    return out;
}

struct SweepRow {
    double value = 0.0;
    ExperimentSummary summary;
};

struct SweepResult {
    std::string axis;
    std::string behavior;
    std::string config_hash;
    std::vector<SweepRow> rows;

    /// Spearman correlation of mean average reward against mean final RMSE.
    double reward_rmse_spearman() const {
        std::vector<double> r, e;
        for (const auto& row : rows) {
            r.push_back(row.summary.mean_avg_reward);
            e.push_back(row.summary.mean_final_rmse);
        }
        return spearman(r, e);
    }
};

inline SweepResult run_sweep(const ExperimentConfig& cfg, unsigned workers = 0) {
    if (!cfg.sweep) throw ConfigError("sweep: config has no 'sweep' section");
    SweepResult result;
    result.axis = cfg.sweep->axis;
    result.behavior = behavior_name(cfg.behavior);
    result.config_hash = config_hash(cfg.source);
    for (double value : cfg.sweep->values) {
        ExperimentConfig setting = cfg;
        setting.behavior = apply_axis(cfg.behavior, cfg.sweep->axis, value);
        setting.sweep.reset();
        ExperimentSummary s = aggregate_runs(setting, workers);
        s.config_hash = result.config_hash;
        result.rows.push_back({value, std::move(s)});
    }
    return result;
}

inline void write_sweep_outputs(const SweepResult& result, const std::filesystem::path& out_dir) {
    ensure_dir(out_dir);
    std::ostringstream table;
    table << "axis,value,n_runs,mean_avg_reward,stderr_avg_reward,mean_final_rmse\n";
    for (const auto& row : result.rows)
        table << result.axis << ',' << format_double(row.value) << ',' << row.summary.n_runs << ','
              << format_double(row.summary.mean_avg_reward) << ','
              << format_double(row.summary.stderr_avg_reward) << ','
              << format_double(row.summary.mean_final_rmse) << '\n';
    write_text(out_dir / "sweep.csv", table.str());

    nlohmann::ordered_json j;
    j["config_hash"] = result.config_hash;
    j["behavior"] = result.behavior;
    j["axis"] = result.axis;
    const double rho = result.reward_rmse_spearman();
    j["spearman_reward_rmse"] = std::isnan(rho) ? nlohmann::ordered_json(nullptr)
                                                : nlohmann::ordered_json(rho);
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : result.rows) {
        auto s = summary_to_json(row.summary);
        s["value"] = row.value;
        j["rows"].push_back(std::move(s));
    }
    write_text(out_dir / "sweep_summary.json", j.dump(2) + "\n");
}

} // namespace ipelab
