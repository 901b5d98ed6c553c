#pragma once

#include "ipelab/mdp.hpp"
#include "ipelab/noise.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ipelab {

/// Raised when the policy-evaluation linear system cannot be solved accurately.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual, double grad_norm = 0.0)
        : std::runtime_error(what + " (residual " + std::to_string(residual) +
                             ", gradient norm " + std::to_string(grad_norm) + ")"),
          residual_(residual), grad_norm_(grad_norm) {}

    double residual() const noexcept { return residual_; }
    double grad_norm() const noexcept { return grad_norm_; }

private:
    double residual_;
    double grad_norm_;
};

/// q_s(a) = r(s, a) + gamma * sum_s' p(s'|s, a) V(s'), as an S x A matrix.
inline ActionValueFn one_step_lookahead(const TabularMdp& mdp, const ValueFn& v) {
    mdp.check_values(v);
    const Eigen::VectorXd next = mdp.transition() * v.values; // (S*A)
    Eigen::MatrixXd q(mdp.n_states(), mdp.n_actions());
    for (Index s = 0; s < mdp.n_states(); ++s)
        for (Index a = 0; a < mdp.n_actions(); ++a)
            q(s, a) = mdp.reward(s, a) + mdp.gamma() * next(s * mdp.n_actions() + a);
    return ActionValueFn(std::move(q));
}

/// sum_a pi(a|s) Q(s, a) for every s.
inline ValueFn expected_value(const StochasticPolicy& pi, const ActionValueFn& q) {
    return ValueFn(pi.probs.cwiseProduct(q.values).rowwise().sum());
}

/// max_a Q(s, a) for every s.
inline ValueFn max_value(const ActionValueFn& q) {
    return ValueFn(q.values.rowwise().maxCoeff());
}

/// Deterministic policy greedy in Q, ties to the lowest action index.
inline StochasticPolicy greedy_policy(const ActionValueFn& q) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(q.n_states(), q.n_actions());
    for (Index s = 0; s < q.n_states(); ++s) p(s, argmax(q.values.row(s))) = 1.0;
    return StochasticPolicy(std::move(p));
}

/// (T^pi Q)(s,a) = r(s,a) + gamma sum_s' p(s'|s,a) sum_a' pi(a'|s') Q(s',a').
inline ActionValueFn bellman_pi(const TabularMdp& mdp, const StochasticPolicy& pi,
                                const ActionValueFn& q) {
    mdp.check_policy(pi);
    mdp.check_values(q);
    return one_step_lookahead(mdp, expected_value(pi, q));
}

/// (T^pi V)(s) = sum_a pi(a|s) [r(s,a) + gamma sum_s' p(s'|s,a) V(s')].
inline ValueFn bellman_pi(const TabularMdp& mdp, const StochasticPolicy& pi,
                          const ValueFn& v) {
    mdp.check_policy(pi);
    return expected_value(pi, one_step_lookahead(mdp, v));
}

inline ActionValueFn bellman_opt(const TabularMdp& mdp, const ActionValueFn& q) {
    mdp.check_values(q);
    return one_step_lookahead(mdp, max_value(q));
}

inline ValueFn bellman_opt(const TabularMdp& mdp, const ValueFn& v) {
    return max_value(one_step_lookahead(mdp, v));
}

struct PolicyValues {
    ValueFn v;
    ActionValueFn q;
};

/// Solves V = r_pi + gamma P_pi V with a dense LU factorization, then
/// Q = r + gamma P V.
inline PolicyValues exact_policy_evaluation(const TabularMdp& mdp, const StochasticPolicy& pi) {
    mdp.check_policy(pi);
    const Index n = mdp.n_states();
    const Index na = mdp.n_actions();
    Eigen::MatrixXd p_pi = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd r_pi = Eigen::VectorXd::Zero(n);
    for (Index s = 0; s < n; ++s)
        for (Index a = 0; a < na; ++a) {
            const double w = pi(s, a);
            if (w == 0.0) continue;
            p_pi.row(s) += w * mdp.next_dist(s, a);
            r_pi(s) += w * mdp.reward(s, a);
        }
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - mdp.gamma() * p_pi;
    ValueFn v(system.partialPivLu().solve(r_pi));
    const double residual = (system * v.values - r_pi).cwiseAbs().maxCoeff();
    if (!v.values.allFinite() || !(residual <= 1e-9 * (1.0 + r_pi.cwiseAbs().maxCoeff())))
        throw SolverError("policy evaluation linear solve failed", residual);
    ActionValueFn q = one_step_lookahead(mdp, v);
    return {std::move(v), std::move(q)};
}

/// V_0 .. V_k with V_{i+1} = T* V_i (+ eps_{i+1} when a noise schedule is given).
inline std::vector<ValueFn> value_iteration(const TabularMdp& mdp, const ValueFn& v0, int k,
                                            const std::optional<NoiseSchedule>& noise = {}) {
    if (k < 0) throw std::invalid_argument("iteration count must be nonnegative");
    mdp.check_values(v0);
    std::vector<ValueFn> out;
    out.reserve(static_cast<std::size_t>(k) + 1);
    out.push_back(v0);
    const bool perturbed = noise && !noise->is_zero();
    const auto eps = perturbed ? noise->vectors(mdp.n_states(), k)
                               : std::vector<Eigen::VectorXd>{};
    for (int i = 1; i <= k; ++i) {
        ValueFn next = bellman_opt(mdp, out.back());
        if (perturbed) next.values += eps[static_cast<std::size_t>(i)];
        out.push_back(std::move(next));
    }
    return out;
}

struct OptimalSolution {
    ValueFn v;
    ActionValueFn q;
    StochasticPolicy policy;
};

/**
 * Optimal values by value iteration to a 1e-12 sup-norm step, then policy
 * iteration from the greedy policy so the result is an exact linear solve.
 */
inline OptimalSolution solve_optimal(const TabularMdp& mdp) {
    ValueFn v(Eigen::VectorXd::Zero(mdp.n_states()));
    for (int it = 0; it < 100000; ++it) {
        ValueFn next = bellman_opt(mdp, v);
        const double step = (next.values - v.values).cwiseAbs().maxCoeff();
        v = std::move(next);
        if (step <= 1e-12) break;
    }
    StochasticPolicy pi = greedy_policy(one_step_lookahead(mdp, v));
    for (int it = 0; it < 1000; ++it) {
        PolicyValues pv = exact_policy_evaluation(mdp, pi);
        // Only switch actions on a strict improvement so the loop terminates.
        Eigen::MatrixXd next = pi.probs;
        bool changed = false;
        for (Index s = 0; s < mdp.n_states(); ++s) {
            const Index cur = argmax(pi.probs.row(s));
            const Index best = argmax(pv.q.values.row(s));
            if (pv.q(s, best) > pv.q(s, cur) + 1e-12) {
                next.row(s).setZero();
                next(s, best) = 1.0;
                changed = true;
            }
        }
        if (!changed) return {std::move(pv.v), std::move(pv.q), std::move(pi)};
        pi = StochasticPolicy(std::move(next));
    }
    throw SolverError("policy iteration did not converge", 0.0);
}

} // namespace ipelab
