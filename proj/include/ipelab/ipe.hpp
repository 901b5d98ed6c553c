#pragma once

#include "ipelab/bellman.hpp"
#include "ipelab/mdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ipelab {

/// Numerically stable softmax of one row of logits.
template <class Derived>
Eigen::RowVectorXd softmax_row(const Eigen::MatrixBase<Derived>& logits) {
    const double top = logits.maxCoeff();
    Eigen::RowVectorXd e = (logits.array() - top).exp().matrix();
    return e / e.sum();
}

/// Tabular softmax policy pi(a|s) proportional to exp(theta(s, a)).
struct SoftmaxPolicy {
    Eigen::MatrixXd logits;

    SoftmaxPolicy() = default;
    explicit SoftmaxPolicy(Eigen::MatrixXd theta) : logits(std::move(theta)) {}

    static SoftmaxPolicy uniform(Index n_states, Index n_actions) {
        return SoftmaxPolicy(Eigen::MatrixXd::Zero(n_states, n_actions));
    }

    Index n_states() const { return logits.rows(); }
    Index n_actions() const { return logits.cols(); }

    Eigen::RowVectorXd row(Index s) const { return softmax_row(logits.row(s)); }

    StochasticPolicy policy() const {
        Eigen::MatrixXd p(logits.rows(), logits.cols());
        for (Index s = 0; s < logits.rows(); ++s) p.row(s) = row(s);
        return StochasticPolicy(std::move(p));
    }
};

/// Shannon entropy in nats of a probability row, with 0 log 0 = 0.
template <class Derived>
double entropy(const Eigen::MatrixBase<Derived>& probs) {
    double h = 0.0;
    for (Index i = 0; i < probs.size(); ++i) {
        const double p = probs(i);
        if (p > 0.0) h -= p * std::log(p);
    }
    return std::max(h, 0.0);
}

inline double policy_entropy(const StochasticPolicy& pi, Index s) {
    return entropy(pi.probs.row(s));
}

inline double policy_entropy(const SoftmaxPolicy& theta, Index s) {
    return entropy(theta.row(s));
}

// ---------------------------------------------------------------------------
// The IPE objective
// ---------------------------------------------------------------------------

/// ||T^pi Q - Q|| under the given norm.
inline double bellman_residual(const TabularMdp& mdp, const ActionValueFn& q,
                               const StochasticPolicy& pi, Norm norm) {
    return norm_of(bellman_pi(mdp, pi, q).values - q.values, norm);
}

/// ||T^pi V - V|| under the given norm.
inline double bellman_residual(const TabularMdp& mdp, const ValueFn& v,
                               const StochasticPolicy& pi, Norm norm) {
    mdp.check_values(v);
    return norm_of(bellman_pi(mdp, pi, v).values - v.values, norm);
}

// ---------------------------------------------------------------------------
// V-form evaluation policy (states decouple)
// ---------------------------------------------------------------------------

/**
 * Minimizer of |<pi_s, q_s> - target| over the simplex.
 *
 * Outside [min q_s, max q_s] the nearest deterministic row is returned
 * (argmax above, argmin below, ties to the lowest index). Inside, the
 * maximum-entropy row with <pi_s, q_s> = target is the exponential tilt
 * pi_s proportional to exp(lambda q_s); lambda is found by bisection.
 */
inline Eigen::RowVectorXd evaluation_row(const Eigen::RowVectorXd& q_s, double target,
                                         double tol = 1e-10) {
    const Index n = q_s.size();
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
    const double hi_q = q_s.maxCoeff();
    const double lo_q = q_s.minCoeff();
    if (target >= hi_q) {
        row(argmax(q_s)) = 1.0;
        return row;
    }
    if (target <= lo_q) {
        row(argmin(q_s)) = 1.0;
        return row;
    }
    auto tilt = [&](double lambda) -> Eigen::RowVectorXd {
        return softmax_row((lambda * q_s).eval());
    };
    auto mean_at = [&](double lambda) { return tilt(lambda).dot(q_s); };

    // mean_at is increasing in lambda, from min q_s to max q_s.
    const double scale = 1.0 / std::max(hi_q - lo_q, 1e-300);
    double lo = -scale;
    double hi = scale;
    while (mean_at(lo) > target) lo *= 2.0;
    while (mean_at(hi) < target) hi *= 2.0;
    if (!(mean_at(lo) <= target && mean_at(hi) >= target))
        throw std::logic_error("evaluation_row: tilt parameter not bracketed");

    for (int it = 0; it < 2000; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (!(lo < mid && mid < hi)) break;
        const double m = mean_at(mid);
        if (std::abs(m - target) <= tol) return tilt(mid);
        if (m < target) lo = mid;
        else hi = mid;
    }
    // Bracket collapsed to adjacent doubles; take the closer end.
    return std::abs(mean_at(lo) - target) <= std::abs(mean_at(hi) - target) ? tilt(lo)
                                                                             : tilt(hi);
}

/// Evaluation policy of a state-value function. Each row minimizes its own
/// state's residual, so the result is optimal under every norm.
inline StochasticPolicy solve_evaluation_policy_v(const TabularMdp& mdp, const ValueFn& v) {
    const ActionValueFn lookahead = one_step_lookahead(mdp, v);
    Eigen::MatrixXd p(mdp.n_states(), mdp.n_actions());
    for (Index s = 0; s < mdp.n_states(); ++s)
        p.row(s) = evaluation_row(lookahead.values.row(s), v(s));
    return StochasticPolicy(std::move(p));
}

// ---------------------------------------------------------------------------
// Q-form evaluation policy (states coupled)
// ---------------------------------------------------------------------------

/// Euclidean projection onto the probability simplex (sort-based).
inline Eigen::VectorXd project_simplex(const Eigen::VectorXd& x) {
    const Index n = x.size();
    std::vector<double> sorted(x.data(), x.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumsum = 0.0;
    double threshold = 0.0;
    for (Index i = 0; i < n; ++i) {
        cumsum += sorted[static_cast<std::size_t>(i)];
        const double t = (cumsum - 1.0) / static_cast<double>(i + 1);
        if (sorted[static_cast<std::size_t>(i)] - t > 0.0) threshold = t;
    }
    return (x.array() - threshold).max(0.0).matrix();
}

struct QSolveOptions {
    Norm norm = Norm::L2Uniform;
    double tol = 1e-10;
    int max_iters = 200000;
};

struct QSolveResult {
    StochasticPolicy policy;
    /// Residual of the returned policy under the requested norm.
    double residual = 0.0;
    /// ||x - P(x - grad f(x))||_2 at the returned point.
    double projected_grad_norm = 0.0;
    int iterations = 0;
    /// Mean squared residual after each accepted iterate, starting at the
    /// uniform initialization.
    std::vector<double> objective_trace;
};

/**
 * Evaluation policy of an action-value function.
 *
 * Minimizes f(pi) = mean_{s,a} ((T^pi Q - Q)(s, a))^2, which is a convex
 * quadratic because the residual is affine in the stacked policy. Projected
 * gradient descent over the product of per-state simplices, started from the
 * uniform policy, with a backtracking step on the projected-gradient
 * sufficient-decrease condition. Stops once the projected-gradient norm is at
 * most opts.tol; throws SolverError if max_iters is reached first.
 *
 * For Norm::LInf the same L2 minimizer is returned and only the reported
 * residual changes.
 */
inline QSolveResult solve_evaluation_policy_q(const TabularMdp& mdp, const ActionValueFn& q,
                                              const QSolveOptions& opts = {}) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
    mdp.check_values(q);
    const Index ns = mdp.n_states();
    const Index na = mdp.n_actions();
    const Index dim = ns * na;
    const double inv_n = 1.0 / static_cast<double>(dim);

    // residual(x) = b + M x with x(s'*A + a') = pi(a'|s').
    Eigen::MatrixXd m(dim, dim);
    Eigen::VectorXd b(dim);
    for (Index s = 0; s < ns; ++s)
        for (Index a = 0; a < na; ++a) {
            const Index row = s * na + a;
            b(row) = mdp.reward(s, a) - q(s, a);
            for (Index next = 0; next < ns; ++next)
                for (Index a2 = 0; a2 < na; ++a2)
                    m(row, next * na + a2) = mdp.gamma() * mdp.p(s, a, next) * q(next, a2);
        }

    auto objective = [&](const Eigen::VectorXd& x) { return (b + m * x).squaredNorm() * inv_n; };
    auto gradient = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return 2.0 * inv_n * (m.transpose() * (b + m * x));
    };
    auto project = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd out(dim);
        for (Index s = 0; s < ns; ++s)
            out.segment(s * na, na) = project_simplex(y.segment(s * na, na));
        return out;
    };

    Eigen::VectorXd x = Eigen::VectorXd::Constant(dim, 1.0 / static_cast<double>(na));
    double f = objective(x);
    Eigen::VectorXd g = gradient(x);
    double pg_norm = (x - project(x - g)).norm();

    // Lipschitz constant of the gradient bounds the initial step from above.
    const double lipschitz = 2.0 * inv_n * m.squaredNorm();
    double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

    QSolveResult result;
    result.objective_trace.push_back(f);
    int it = 0;
    while (pg_norm > opts.tol) {
        if (it >= opts.max_iters)
            throw SolverError("evaluation-policy solver exceeded max_iters", std::sqrt(f),
                              pg_norm);
        ++it;
        step *= 2.0;
        Eigen::VectorXd candidate;
        Eigen::VectorXd d;
        double curvature = 0.0;
        for (int bt = 0;; ++bt) {
            candidate = project(x - step * g);
            d = candidate - x;
            // f is quadratic, so f(x + d) - f(x) = g.d + |M d|^2 / n exactly. Testing
            // the curvature term directly avoids cancellation near the optimum.
            curvature = (m * d).squaredNorm() * inv_n;
            if (curvature <= d.squaredNorm() / (2.0 * step) || bt >= 60) break;
            step *= 0.5;
        }
        x = std::move(candidate);
        f = std::max(0.0, f + std::min(0.0, g.dot(d) + curvature));
        g = gradient(x);
        pg_norm = (x - project(x - g)).norm();
        result.objective_trace.push_back(f);
    }

    Eigen::MatrixXd p(ns, na);
    for (Index s = 0; s < ns; ++s) p.row(s) = x.segment(s * na, na).transpose();
    result.policy = StochasticPolicy(std::move(p));
    result.residual = bellman_residual(mdp, q, result.policy, opts.norm);
    result.projected_grad_norm = pg_norm;
    result.iterations = it;
    return result;
}

// ---------------------------------------------------------------------------
// Stochastic-gradient IPE on the expected TD error
// ---------------------------------------------------------------------------

struct IpeStepDiagnostics {
    /// Expected TD error r + gamma <pi(.|s'), Q(s',.)> - Q(s, a), pre-update.
    double delta = 0.0;
    /// l2 norm of the logit change.
    double grad_norm = 0.0;
    /// Entropy of the updated policy at s'.
    double entropy_next_state = 0.0;
};

/**
 * One step of theta <- theta - alpha * grad_theta(delta^2) for a softmax policy.
 *
 * Only row s' of the logits depends on delta; with
 * d pi(a'|s') / d theta(s', b) = pi(a'|s') (1[a' = b] - pi(b|s')) the gradient
 * is 2 delta gamma pi(b|s') (Q(s', b) - <pi(.|s'), Q(s', .)>).
 */
inline std::pair<SoftmaxPolicy, IpeStepDiagnostics>
ipe_gradient_step(const SoftmaxPolicy& theta, const ActionValueFn& q, const Transition& tr,
                  double alpha_pi, double gamma) {
    if (!(alpha_pi > 0.0)) throw std::invalid_argument("policy step size must be positive");
    if (theta.n_states() != q.n_states())
        throw DimensionError("state", q.n_states(), theta.n_states());
    if (theta.n_actions() != q.n_actions())
        throw DimensionError("action", q.n_actions(), theta.n_actions());
    const Index next = tr.next_state;
    const Eigen::RowVectorXd pi_next = theta.row(next);
    const Eigen::RowVectorXd q_next = q.values.row(next);
    const double expected_next = pi_next.dot(q_next);
    const double delta = tr.reward + gamma * expected_next - q(tr.state, tr.action);

    const Eigen::RowVectorXd grad =
        2.0 * delta * gamma * pi_next.cwiseProduct((q_next.array() - expected_next).matrix());
    SoftmaxPolicy updated = theta;
    const Eigen::RowVectorXd change = -alpha_pi * grad;
    updated.logits.row(next) += change;

    IpeStepDiagnostics diag;
    diag.delta = delta;
    diag.grad_norm = change.norm();
    diag.entropy_next_state = policy_entropy(updated, next);
    return {std::move(updated), diag};
}

// ---------------------------------------------------------------------------
// Entropy matching for epsilon-greedy
// ---------------------------------------------------------------------------

/// Entropy of an epsilon-greedy row over n actions: the greedy action has
/// mass 1 - eps + eps/n and every other action eps/n.
inline double epsilon_greedy_entropy(double eps, Index n_actions) {
    const double n = static_cast<double>(n_actions);
    const double other = eps / n;
    const double top = 1.0 - eps + other;
    double h = 0.0;
    if (top > 0.0) h -= top * std::log(top);
    if (other > 0.0) h -= (n - 1.0) * other * std::log(other);
    return std::max(h, 0.0);
}

/**
 * Epsilon whose epsilon-greedy entropy equals h_target.
 *
 * H(eps) is strictly increasing on [0, 1], from 0 to ln n. Targets are
 * clamped into that range and inverted by a fixed-length bisection, which
 * keeps the map monotone in h_target.
 */
inline double match_epsilon_to_entropy(double h_target, Index n_actions) {
    if (n_actions < 2) throw std::invalid_argument("entropy matching needs at least two actions");
    const double h_max = std::log(static_cast<double>(n_actions));
    if (!(h_target > 0.0)) return 0.0;
    if (h_target >= h_max) return 1.0;
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (epsilon_greedy_entropy(mid, n_actions) < h_target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Precomputed epsilon grid {0, res, 2 res, ..., 1}; lookups return the grid
/// epsilon whose entropy is closest to the target.
class EpsilonLookupTable {
public:
    EpsilonLookupTable(Index n_actions, double resolution = 1e-3) : n_actions_(n_actions) {
        if (n_actions < 2)
            throw std::invalid_argument("entropy matching needs at least two actions");
        if (!(resolution > 0.0 && resolution <= 1.0))
            throw std::invalid_argument("lookup resolution must lie in (0, 1]");
        const auto steps = static_cast<std::size_t>(std::llround(1.0 / resolution));
        eps_.reserve(steps + 1);
        entropy_.reserve(steps + 1);
        for (std::size_t i = 0; i <= steps; ++i) {
            const double e = std::min(1.0, static_cast<double>(i) * resolution);
            eps_.push_back(e);
            entropy_.push_back(epsilon_greedy_entropy(e, n_actions));
        }
        eps_.back() = 1.0;
        entropy_.back() = epsilon_greedy_entropy(1.0, n_actions);
    }

    Index n_actions() const { return n_actions_; }
    std::size_t size() const { return eps_.size(); }

    double operator()(double h_target) const {
        const auto it = std::lower_bound(entropy_.begin(), entropy_.end(), h_target);
        if (it == entropy_.begin()) return eps_.front();
        if (it == entropy_.end()) return eps_.back();
        const auto hi = static_cast<std::size_t>(it - entropy_.begin());
        const std::size_t lo = hi - 1;
        return (h_target - entropy_[lo] <= entropy_[hi] - h_target) ? eps_[lo] : eps_[hi];
    }

private:
    Index n_actions_;
    std::vector<double> eps_;
    std::vector<double> entropy_;
};

/// Epsilon-greedy distribution over Q(s, .) with greedy ties to the lowest index.
template <class Derived>
Eigen::RowVectorXd epsilon_greedy_row(const Eigen::MatrixBase<Derived>& q_s, double eps) {
    const Index n = q_s.size();
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Constant(n, eps / static_cast<double>(n));
    row(argmax(q_s)) += 1.0 - eps;
    return row;
}

} // namespace ipelab
