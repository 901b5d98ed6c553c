// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
//
// Usage: acceptance <path-to-ipelab_cli> [scratch-dir]

#include "ipelab/harness.hpp"
#include "ipelab/polytope.hpp"
#include "ipelab/theory.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

using namespace ipelab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
    std::vector<std::string> notes;
};

int failures = 0;

void report(const std::string& name, const Outcome& o) {
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << "\n";
    for (const auto& n : o.notes) std::cout << "    " << n << "\n";
    std::cout.flush();
    if (!o.pass) ++failures;
}

std::string fmt(double x, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

// ---------------------------------------------------------------------------

Outcome bound_certification(const fs::path& cli, const fs::path& scratch) {
    Outcome o;
    o.pass = true;
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t total = 0;
    std::size_t failing = 0;
    for (const auto& [flag, n] : {std::pair<std::string, int>{"--props", 100}, {"--thms", 50}}) {
        const fs::path out = scratch / ("verify" + flag.substr(2));
        const int code = shell(quote(cli) + " --quiet --out " + quote(out) + " verify " + flag +
                               " --instances " + std::to_string(n));
        std::istringstream lines(slurp(out / "certificates.jsonl"));
        std::string line;
        std::size_t count = 0, bad = 0;
        while (std::getline(lines, line)) {
            const json c = json::parse(line);
            ++count;
            if (!(c["slack"].get<double>() >= -1e-6)) ++bad;
        }
        total += count;
        failing += bad;
        o.notes.push_back("verify " + flag + " --instances " + std::to_string(n) + ": exit " +
                          std::to_string(code) + ", " + std::to_string(count) +
                          " certificates, " + std::to_string(bad) + " failing");
        if (code != 0 || bad != 0 || count == 0) o.pass = false;
    }
    const double secs = seconds_since(t0);
    if (secs >= 60.0) o.pass = false;
    o.detail = std::to_string(total) + " certificates, " + std::to_string(failing) +
               " failing, " + fmt(secs, "%.1f") + " s";
    return o;
}

Outcome exact_vi_geometric_decay() {
    const TabularMdp mdp = switch_stay(0.9);
    const auto certs = check_thm1(mdp, ValueFn(Eigen::VectorXd::Zero(2)), 30);
    const double scale = certs[0].rhs / 0.9;
    double worst_ratio = 0.0;
    double min_slack = 1e300;
    bool ok = certs.size() == 30;
    for (std::size_t i = 0; i < certs.size(); ++i) {
        const int k = certs[i].k;
        ok = ok && std::abs(certs[i].rhs - std::pow(0.9, k) * scale) <= 1e-9 * scale;
        if (i > 0) {
            const double err = std::abs(certs[i].rhs / certs[i - 1].rhs - 0.9);
            worst_ratio = std::max(worst_ratio, err);
        }
        min_slack = std::min(min_slack, certs[i].rhs - certs[i].lhs);
        ok = ok && certs[i].lhs <= certs[i].rhs;
    }
    ok = ok && worst_ratio <= 1e-9;
    return {ok,
            "rhs scale " + fmt(scale) + ", max |ratio - gamma| " + fmt(worst_ratio) +
                ", min slack " + fmt(min_slack) + " over k = 1..30",
            {}};
}

double squared_td(const Eigen::MatrixXd& logits, const ActionValueFn& q, const Transition& tr,
                  double gamma) {
    const Index s2 = tr.next_state;
    double z = 0.0, expected = 0.0;
    for (Index b = 0; b < logits.cols(); ++b) z += std::exp(logits(s2, b));
    for (Index b = 0; b < logits.cols(); ++b) expected += std::exp(logits(s2, b)) / z * q(s2, b);
    const double delta = tr.reward + gamma * expected - q(tr.state, tr.action);
    return delta * delta;
}

Outcome gradient_oracle() {
    Rng rng(2024);
    double worst = 0.0;
    int bad = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Index n = 1 + static_cast<Index>(rng.below(5));
        const Index na = 2 + static_cast<Index>(rng.below(4));
        Eigen::MatrixXd logits(n, na), q(n, na);
        for (Index i = 0; i < logits.size(); ++i) logits(i) = rng.uniform(-2, 2);
        for (Index i = 0; i < q.size(); ++i) q(i) = rng.uniform(-5, 5);
        const Transition tr{static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))),
                            static_cast<Index>(rng.below(static_cast<std::uint64_t>(na))),
                            rng.uniform(-1, 1),
                            static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)))};
        const double alpha = rng.uniform(0.01, 1.0);
        const double gamma = rng.uniform(0.1, 0.99);
        const ActionValueFn qf(q);
        const auto next = ipe_gradient_step(SoftmaxPolicy(logits), qf, tr, alpha, gamma).first;
        const auto f = [&](const Eigen::MatrixXd& x) { return squared_td(x, qf, tr, gamma); };
        Eigen::MatrixXd expected(n, na);
        for (Index s = 0; s < n; ++s)
            for (Index b = 0; b < na; ++b)
                expected(s, b) = -alpha * oracle::central_difference(f, logits, s, b, 1e-6);
        const double err = (next.logits - logits - expected).norm();
        const double rel = err / std::max(expected.norm(), 1e-12);
        if (expected.norm() > 1e-12) worst = std::max(worst, rel);
        if (!(err <= 1e-4 * expected.norm() + 1e-12)) ++bad;
    }
    return {bad == 0, "200 instances, max relative error " + fmt(worst), {}};
}

Outcome evaluation_solvers() {
    Outcome o;
    Rng rng(77);
    // Q-solver against a 0.01 grid on 2x2 instances.
    double q_worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const TabularMdp mdp = random_mdp(2, 2, 5000 + static_cast<std::uint64_t>(trial));
        Eigen::MatrixXd q(2, 2);
        for (Index i = 0; i < 4; ++i) q(i) = rng.uniform(-3, 3);
        const double mine = solve_evaluation_policy_q(mdp, ActionValueFn(q)).residual;
        double grid = 1e300;
        for (int i = 0; i <= 100; ++i)
            for (int j = 0; j <= 100; ++j) {
                Eigen::MatrixXd p(2, 2);
                p << i / 100.0, 1 - i / 100.0, j / 100.0, 1 - j / 100.0;
                grid = std::min(grid, oracle::l2_residual(mdp, p, q));
            }
        q_worst = std::max(q_worst, std::abs(mine - grid));
    }
    // V-solver per state against a 0.01 grid.
    double v_margin = 1e300;
    for (int trial = 0; trial < 50; ++trial) {
        const TabularMdp mdp = random_mdp(3, 3, 6000 + static_cast<std::uint64_t>(trial));
        Eigen::VectorXd v(3);
        for (Index s = 0; s < 3; ++s) v(s) = rng.uniform(-12, 12);
        const StochasticPolicy pi = solve_evaluation_policy_v(mdp, ValueFn(v));
        const ActionValueFn look = one_step_lookahead(mdp, ValueFn(v));
        for (Index s = 0; s < 3; ++s) {
            const Eigen::RowVectorXd q_s = look.values.row(s);
            const double mine = std::abs(pi.probs.row(s).dot(q_s) - v(s));
            oracle::for_each_simplex_point(3, 100, [&](const Eigen::RowVectorXd& p) {
                v_margin = std::min(v_margin, std::abs(p.dot(q_s) - v(s)) - mine);
            });
        }
    }
    // Q = Q* on Switch-Stay.
    const TabularMdp ss = switch_stay(0.9);
    const ActionValueFn q_star = one_step_lookahead(ss, ValueFn(oracle::optimal_values(ss)));
    const StochasticPolicy pi = solve_evaluation_policy_q(ss, q_star).policy;
    const double tv = std::max(0.5 * (std::abs(pi(0, 0) - 0.0) + std::abs(pi(0, 1) - 1.0)),
                               0.5 * (std::abs(pi(1, 0) - 1.0) + std::abs(pi(1, 1) - 0.0)));
    o.pass = q_worst <= 1e-3 && v_margin >= -1e-6 && tv <= 1e-3;
    o.detail = "Q-solver max |residual - grid| " + fmt(q_worst) + ", V-solver min margin " +
               fmt(v_margin) + ", Switch-Stay TV " + fmt(tv);
    return o;
}

Outcome entropy_matching() {
    Rng rng(99);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Index n = 2 + static_cast<Index>(rng.below(9));
        const double h = rng.uniform(0.0, std::log(static_cast<double>(n)));
        const double eps = match_epsilon_to_entropy(h, n);
        Eigen::RowVectorXd q = Eigen::RowVectorXd::Zero(n);
        q(n - 1) = 1.0;
        worst = std::max(worst, std::abs(oracle::entropy(epsilon_greedy_row(q, eps)) - h));
    }
    return {worst <= 1e-5, "1000 targets, n in 2..10, max |H - h| " + fmt(worst), {}};
}

ExperimentConfig sweep_config(const std::string& kind, const std::string& axis,
                              const std::vector<double>& values) {
    return parse_config({{"mdp", "switch_stay"},
                         {"behavior", {{"kind", kind}, {"alpha_q", 0.5}}},
                         {"t_max", 500},
                         {"n_runs", 1000},
                         {"sweep", {{"axis", axis}, {"values", values}}}});
}

std::string sweep_table(const SweepResult& r) {
    std::string s;
    for (const auto& row : r.rows)
        s += r.axis + "=" + fmt(row.value) + " reward " + fmt(row.summary.mean_avg_reward) +
             " rmse " + fmt(row.summary.mean_final_rmse) + "; ";
    return s;
}

Outcome sweep_correlation_signs() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const SweepResult eps =
        run_sweep(sweep_config("eps_greedy", "epsilon", {0.01, 0.05, 0.1, 0.2, 0.4, 0.8}));
    const std::vector<double> alphas = {0.005, 0.01, 0.05, 0.1, 0.5};
    const SweepResult ipe = run_sweep(sweep_config("ipe", "alpha_pi", alphas));
    const SweepResult eps_ipe = run_sweep(sweep_config("eps_ipe", "alpha_pi", alphas));
    const double secs = seconds_since(t0);

    const double r_eps = eps.reward_rmse_spearman();
    const double r_ipe = ipe.reward_rmse_spearman();
    const double r_eps_ipe = eps_ipe.reward_rmse_spearman();
    const bool eps_ok = r_eps < 0.0;
    const bool ipe_ok = r_ipe > 0.0 && r_eps_ipe > 0.0;
    o.pass = eps_ok && ipe_ok && secs < 600.0;
    o.detail = "spearman(reward, rmse): eps grid " + fmt(r_eps) + " (want < 0), ipe " +
               fmt(r_ipe) + " and eps-ipe " + fmt(r_eps_ipe) + " (want > 0), " +
               fmt(secs, "%.1f") + " s";
    o.notes = {"eps_greedy: " + sweep_table(eps), "ipe: " + sweep_table(ipe),
               "eps_ipe: " + sweep_table(eps_ipe),
               "spearman(reward, -rmse): eps grid " + fmt(-r_eps) + ", ipe " + fmt(-r_ipe) +
                   ", eps-ipe " + fmt(-r_eps_ipe)};
    return o;
}

std::vector<double> max_jumps(const BehaviorSpec& spec, int seeds) {
    const TabularMdp mdp = switch_stay(0.9);
    std::vector<double> out(static_cast<std::size_t>(seeds));
    parallel_for(out.size(), [&](std::size_t i) {
        const RunRecord r = run_vi_ipe(mdp, spec, 500, i, {1, 0.0});
        double worst = 0.0;
        for (std::size_t t = 1; t < r.snapshots.size(); ++t)
            worst = std::max(worst, (r.snapshots[t].v_behavior.values -
                                     r.snapshots[t - 1].v_behavior.values)
                                        .norm());
        out[i] = worst;
    });
    return out;
}

Outcome smoothness() {
    BehaviorSpec anneal;
    anneal.kind = EpsGreedyAnneal{1.0, 0.1, 100};
    BehaviorSpec eps_ipe;
    eps_ipe.kind = EpsIpe{0.05};
    const auto a = max_jumps(anneal, 100);
    const auto e = max_jumps(eps_ipe, 100);
    const double ma = mean_of(a), me = mean_of(e);
    Outcome o;
    o.pass = me < ma;
    o.detail = "mean max jump: eps-ipe " + fmt(me) + " (stderr " + fmt(stderr_of(e)) +
               ") vs annealed eps-greedy " + fmt(ma) + " (stderr " + fmt(stderr_of(a)) + ")";
    if (!o.pass) {
        auto dump = [](const char* name, const std::vector<double>& x) {
            std::string s = name;
            for (double v : x) s += " " + fmt(v, "%.4g");
            return s;
        };
        o.notes = {dump("eps-ipe:", e), dump("annealed:", a)};
    }
    return o;
}

Outcome polytope_vertices() {
    const PolytopeSample s = sample_polytope(switch_stay(0.9), 0.01);
    const std::vector<std::array<double, 2>> want = {
        {10.0, 20.0}, {10.0, 9.0}, {17.0, 20.0}, {-1.0 / 0.19, -0.9 / 0.19}};
    double worst = 0.0;
    for (const auto& w : want) {
        double best = 1e300;
        for (const auto& p : s.points)
            best = std::min(best, std::max(std::abs(p.v0 - w[0]), std::abs(p.v1 - w[1])));
        worst = std::max(worst, best);
    }
    return {worst <= 1e-3, std::to_string(s.points.size()) +
                               " points, max distance to the 4 vertices " + fmt(worst),
            {}};
}

Outcome determinism(const fs::path& cli, const fs::path& scratch) {
    const fs::path cfg_dir = scratch / "configs";
    fs::create_directories(cfg_dir);
    {
        std::ofstream(cfg_dir / "run.json")
            << R"({"mdp": "switch_stay", "behavior": {"kind": "eps_ipe", "alpha_pi": 0.05},
                   "t_max": 500, "n_runs": 20, "base_seed": 5})";
        std::ofstream(cfg_dir / "sweep.json")
            << R"({"mdp": {"random": {"n_states": 4, "n_actions": 3, "seed": 2}},
                   "behavior": {"kind": "eps_greedy"}, "t_max": 300, "n_runs": 50,
                   "sweep": {"axis": "epsilon", "values": [0.05, 0.2, 0.5]}})";
    }
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"run", "run " + quote(cfg_dir / "run.json")},
        {"sweep", "sweep " + quote(cfg_dir / "sweep.json")},
        {"verify", "verify --instances 20 --seed 11 --k-max 15"},
    };
    Outcome o;
    o.pass = true;
    std::size_t files = 0;
    for (const auto& [name, args] : commands) {
        std::vector<std::map<std::string, std::string>> outputs;
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = scratch / ("det_" + name + std::to_string(rep));
            fs::remove_all(out);
            const fs::path log = scratch / ("det_" + name + std::to_string(rep) + ".stdout");
            const int code =
                shell(quote(cli) + " --out " + quote(out) + " " + args + " > " + quote(log));
            if (code != 0) {
                o.pass = false;
                o.notes.push_back(name + ": exit " + std::to_string(code));
            }
            std::map<std::string, std::string> bytes;
            for (const auto& entry : fs::directory_iterator(out))
                bytes[entry.path().filename().string()] = slurp(entry.path());
            std::string text = slurp(log);
            // The stdout names the output directory, which differs between repeats.
            for (std::size_t pos; (pos = text.find(out.string())) != std::string::npos;)
                text.replace(pos, out.string().size(), "<out>");
            bytes["<stdout>"] = text;
            outputs.push_back(std::move(bytes));
        }
        files += outputs[0].size();
        if (outputs[0] != outputs[1]) {
            o.pass = false;
            o.notes.push_back(name + ": outputs differ between repeats");
        }
    }
    o.detail = "run, sweep and verify repeated twice; " + std::to_string(files) +
               " outputs compared byte for byte";
    return o;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <ipelab_cli> [scratch-dir]\n";
        return 2;
    }
    const fs::path cli = fs::absolute(argv[1]);
    const fs::path scratch =
        argc > 2 ? fs::absolute(argv[2]) : fs::temp_directory_path() / "ipelab_acceptance";
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    report("bound_certification", bound_certification(cli, scratch));
    report("exact_vi_geometric_decay", exact_vi_geometric_decay());
    report("gradient_oracle", gradient_oracle());
    report("evaluation_policy_solvers", evaluation_solvers());
    report("entropy_matching", entropy_matching());
    report("sweep_correlation_signs", sweep_correlation_signs());
    report("smoothness_proxy", smoothness());
    report("polytope_vertices", polytope_vertices());
    report("determinism", determinism(cli, scratch));

    std::cout << (failures == 0 ? "all acceptance criteria pass"
                                : std::to_string(failures) + " acceptance criteria failed")
              << "\n";
    return failures == 0 ? 0 : 1;
}
