#pragma once

#include "ipelab/bellman.hpp"
#include "ipelab/format.hpp"
#include "ipelab/ipe.hpp"
#include "ipelab/mdp.hpp"

#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ipelab {

/// Raised when a polytope operation is given a model it cannot visualize.
class PolytopeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require_two_state(const TabularMdp& mdp) {
    if (mdp.n_states() != 2) throw PolytopeError("polytope requires 2 states");
    if (mdp.n_actions() != 2) throw PolytopeError("polytope requires 2 actions");
}

struct PolytopePoint {
    double v0 = 0.0;
    double v1 = 0.0;
    /// pi(a0 | s0), pi(a0 | s1).
    double pi0 = 0.0;
    double pi1 = 0.0;
};

struct PolytopeSample {
    std::vector<PolytopePoint> points;
    double policy_grid_resolution = 0.01;
};

/// Number of grid cells for a probability step; 1 / resolution must be
/// (close to) an integer.
inline int grid_cells(double resolution) {
    if (!(resolution > 0.0 && resolution <= 1.0))
        throw std::invalid_argument("grid resolution must lie in (0, 1]");
    const double cells = 1.0 / resolution;
    const long rounded = std::lround(cells);
    if (std::abs(cells - static_cast<double>(rounded)) > 1e-6)
        throw std::invalid_argument("1 / resolution must be an integer");
    return static_cast<int>(rounded);
}

/**
 * Exact values of every policy on a grid over pi(a0|s0) x pi(a0|s1).
 * Grid endpoints are included, so the four deterministic policies are always
 * present. Points are ordered row-major with pi(a0|s0) as the outer index.
 */
inline PolytopeSample sample_polytope(const TabularMdp& mdp, double resolution = 0.01) {
    require_two_state(mdp);
    const int cells = grid_cells(resolution);
    PolytopeSample out;
    out.policy_grid_resolution = resolution;
    out.points.reserve(static_cast<std::size_t>(cells + 1) * static_cast<std::size_t>(cells + 1));
    for (int i = 0; i <= cells; ++i) {
        const double p0 = static_cast<double>(i) / cells;
        for (int j = 0; j <= cells; ++j) {
            const double p1 = static_cast<double>(j) / cells;
            Eigen::MatrixXd probs(2, 2);
            probs << p0, 1.0 - p0, p1, 1.0 - p1;
            const ValueFn v = exact_policy_evaluation(mdp, StochasticPolicy(probs)).v;
            out.points.push_back({v(0), v(1), p0, p1});
        }
    }
    return out;
}

inline void write_polytope_csv(std::ostream& out, const PolytopeSample& sample) {
    out << "v0,v1,pi0,pi1\n";
    for (const auto& p : sample.points)
        out << format_double(p.v0) << ',' << format_double(p.v1) << ',' << format_double(p.pi0)
            << ',' << format_double(p.pi1) << '\n';
}

enum class ArrowKind { Evaluation, Greedy };

inline const char* arrow_kind_name(ArrowKind kind) {
    return kind == ArrowKind::Evaluation ? "evaluation" : "greedy";
}

struct ValueMapArrow {
    std::array<double, 2> from{};
    std::array<double, 2> to{};
    ArrowKind kind = ArrowKind::Evaluation;
    std::array<double, 2> derived_policy_entropy{};
};

/// Inclusive arithmetic range start, start + step, ..., <= stop.
inline std::vector<double> value_range(double start, double stop, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("range step must be positive");
    std::vector<double> out;
    for (long i = 0;; ++i) {
        const double x = start + static_cast<double>(i) * step;
        if (x > stop + 1e-9 * step) break;
        out.push_back(x);
    }
    return out;
}

/// Row-major grid of value vectors (v0 outer).
inline std::vector<ValueFn> value_grid(const std::vector<double>& v0s,
                                       const std::vector<double>& v1s) {
    std::vector<ValueFn> grid;
    grid.reserve(v0s.size() * v1s.size());
    for (double a : v0s)
        for (double b : v1s) {
            Eigen::VectorXd v(2);
            v << a, b;
            grid.emplace_back(std::move(v));
        }
    return grid;
}

/// Where each fixed value function lands when its derived policy is evaluated:
/// the evaluation policy for ArrowKind::Evaluation, the greedy policy of the
/// one-step lookahead for ArrowKind::Greedy.
inline std::vector<ValueMapArrow> value_map(const TabularMdp& mdp, const std::vector<ValueFn>& grid,
                                            ArrowKind kind) {
    require_two_state(mdp);
    std::vector<ValueMapArrow> arrows;
    arrows.reserve(grid.size());
    for (const auto& v : grid) {
        const StochasticPolicy pi = kind == ArrowKind::Evaluation
                                        ? solve_evaluation_policy_v(mdp, v)
                                        : greedy_policy(one_step_lookahead(mdp, v));
        const ValueFn to = exact_policy_evaluation(mdp, pi).v;
        arrows.push_back({{v(0), v(1)},
                          {to(0), to(1)},
                          kind,
                          {policy_entropy(pi, 0), policy_entropy(pi, 1)}});
    }
    return arrows;
}

inline void write_value_map_csv(std::ostream& out, const std::vector<ValueMapArrow>& arrows) {
    out << "from_v0,from_v1,to_v0,to_v1,kind,entropy_s0,entropy_s1\n";
    for (const auto& a : arrows)
        out << format_double(a.from[0]) << ',' << format_double(a.from[1]) << ','
            << format_double(a.to[0]) << ',' << format_double(a.to[1]) << ','
            << arrow_kind_name(a.kind) << ',' << format_double(a.derived_policy_entropy[0]) << ','
            << format_double(a.derived_policy_entropy[1]) << '\n';
}

} // namespace ipelab
