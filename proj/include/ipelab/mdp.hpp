#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace ipelab {

using Index = Eigen::Index;

/// Raised when two objects that must share a state or action axis do not.
class DimensionError : public std::invalid_argument {
public:
    DimensionError(const std::string& axis, Index expected, Index actual)
        : std::invalid_argument("dimension mismatch on " + axis + " axis: expected " +
                                std::to_string(expected) + ", got " +
                                std::to_string(actual)),
          axis_(axis) {}

    const std::string& axis() const noexcept { return axis_; }

private:
    std::string axis_;
};

/// Raised when a model violates its probabilistic invariants.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// State-value function V(s).
struct ValueFn {
    Eigen::VectorXd values;

    ValueFn() = default;
    explicit ValueFn(Eigen::VectorXd v) : values(std::move(v)) {}

    Index n_states() const { return values.size(); }
    double operator()(Index s) const { return values(s); }
    double& operator()(Index s) { return values(s); }
};

/// Action-value function Q(s, a), stored as an n_states x n_actions matrix.
struct ActionValueFn {
    Eigen::MatrixXd values;

    ActionValueFn() = default;
    explicit ActionValueFn(Eigen::MatrixXd q) : values(std::move(q)) {}

    Index n_states() const { return values.rows(); }
    Index n_actions() const { return values.cols(); }
    double operator()(Index s, Index a) const { return values(s, a); }
    double& operator()(Index s, Index a) { return values(s, a); }
};

/// Per-state action distribution pi(a|s); one simplex row per state.
struct StochasticPolicy {
    Eigen::MatrixXd probs;

    StochasticPolicy() = default;
    explicit StochasticPolicy(Eigen::MatrixXd p) : probs(std::move(p)) {}

    Index n_states() const { return probs.rows(); }
    Index n_actions() const { return probs.cols(); }
    double operator()(Index s, Index a) const { return probs(s, a); }

    static StochasticPolicy uniform(Index n_states, Index n_actions) {
        return StochasticPolicy(Eigen::MatrixXd::Constant(
            n_states, n_actions, 1.0 / static_cast<double>(n_actions)));
    }

    /// Deterministic policy taking actions[s] in state s.
    template <class Actions>
    static StochasticPolicy deterministic(const Actions& actions, Index n_actions) {
        const auto n = static_cast<Index>(std::size(actions));
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n_actions);
        Index s = 0;
        for (auto a : actions) p(s++, static_cast<Index>(a)) = 1.0;
        return StochasticPolicy(std::move(p));
    }

    /// Throws ModelError unless every row lies on the simplex within tol.
    void validate(double tol = 1e-12) const {
        for (Index s = 0; s < probs.rows(); ++s) {
            if ((probs.row(s).array() < 0.0).any() ||
                std::abs(probs.row(s).sum() - 1.0) > tol)
                throw ModelError("policy row " + std::to_string(s) +
                                 " is not a probability distribution");
        }
    }
};

/// One observed environment step (s, a, r, s').
struct Transition {
    Index state = 0;
    Index action = 0;
    double reward = 0.0;
    Index next_state = 0;
};

enum class Norm { LInf, L2Uniform };

/// Norm of a vector or matrix treated as a flat collection of entries.
/// L2Uniform weights every entry equally: sqrt(mean(x^2)).
template <class Derived>
double norm_of(const Eigen::MatrixBase<Derived>& x, Norm norm) {
    if (x.size() == 0) return 0.0;
    if (norm == Norm::LInf) return x.cwiseAbs().maxCoeff();
    return std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
}

/**
 * Finite discounted MDP with expected rewards r(s, a).
 *
 * The transition tensor is stored as an (n_states * n_actions) x n_states
 * matrix; row s * n_actions + a holds p(. | s, a).
 */
class TabularMdp {
public:
    TabularMdp(Index n_states, Index n_actions, Eigen::MatrixXd transition,
               Eigen::MatrixXd reward, double gamma, Eigen::VectorXd start_dist)
        : n_states_(n_states), n_actions_(n_actions), transition_(std::move(transition)),
          reward_(std::move(reward)), gamma_(gamma), start_dist_(std::move(start_dist)) {
        validate();
    }

    Index n_states() const { return n_states_; }
    Index n_actions() const { return n_actions_; }
    double gamma() const { return gamma_; }
    const Eigen::MatrixXd& transition() const { return transition_; }
    const Eigen::MatrixXd& reward() const { return reward_; }
    const Eigen::VectorXd& start_dist() const { return start_dist_; }

    double reward(Index s, Index a) const { return reward_(s, a); }
    double p(Index s, Index a, Index next) const {
        return transition_(s * n_actions_ + a, next);
    }
    /// Row vector p(. | s, a).
    auto next_dist(Index s, Index a) const { return transition_.row(s * n_actions_ + a); }

    /// Same dynamics with a different discount.
    TabularMdp with_gamma(double gamma) const {
        return TabularMdp(n_states_, n_actions_, transition_, reward_, gamma, start_dist_);
    }

    void check_values(const ValueFn& v) const {
        if (v.n_states() != n_states_) throw DimensionError("state", n_states_, v.n_states());
    }
    void check_values(const ActionValueFn& q) const {
        if (q.n_states() != n_states_) throw DimensionError("state", n_states_, q.n_states());
        if (q.n_actions() != n_actions_)
            throw DimensionError("action", n_actions_, q.n_actions());
    }
    void check_policy(const StochasticPolicy& pi) const {
        if (pi.n_states() != n_states_)
            throw DimensionError("state", n_states_, pi.n_states());
        if (pi.n_actions() != n_actions_)
            throw DimensionError("action", n_actions_, pi.n_actions());
    }

private:
    void validate() const {
        constexpr double tol = 1e-12;
        if (n_states_ < 1 || n_actions_ < 1)
            throw ModelError("an MDP needs at least one state and one action");
        if (transition_.rows() != n_states_ * n_actions_)
            throw DimensionError("state-action", n_states_ * n_actions_, transition_.rows());
        if (transition_.cols() != n_states_)
            throw DimensionError("next-state", n_states_, transition_.cols());
        if (reward_.rows() != n_states_) throw DimensionError("state", n_states_, reward_.rows());
        if (reward_.cols() != n_actions_)
            throw DimensionError("action", n_actions_, reward_.cols());
        if (start_dist_.size() != n_states_)
            throw DimensionError("state", n_states_, start_dist_.size());
        if (!(gamma_ >= 0.0 && gamma_ < 1.0))
            throw ModelError("discount must lie in [0, 1), got " + std::to_string(gamma_));
        if (!reward_.allFinite()) throw ModelError("rewards must be finite");
        for (Index row = 0; row < transition_.rows(); ++row) {
            if ((transition_.row(row).array() < 0.0).any() ||
                std::abs(transition_.row(row).sum() - 1.0) > tol)
                throw ModelError("transition row (s=" + std::to_string(row / n_actions_) +
                                 ", a=" + std::to_string(row % n_actions_) +
                                 ") is not a probability distribution");
        }
        if ((start_dist_.array() < 0.0).any() || std::abs(start_dist_.sum() - 1.0) > tol)
            throw ModelError("start distribution is not a probability distribution");
    }

    Index n_states_;
    Index n_actions_;
    Eigen::MatrixXd transition_;
    Eigen::MatrixXd reward_;
    double gamma_;
    Eigen::VectorXd start_dist_;
};

/// Index of the largest entry; ties go to the lowest index.
template <class Derived>
Index argmax(const Eigen::DenseBase<Derived>& x) {
    Index best = 0;
    for (Index i = 1; i < x.size(); ++i)
        if (x(i) > x(best)) best = i;
    return best;
}

/// Index of the smallest entry; ties go to the lowest index.
template <class Derived>
Index argmin(const Eigen::DenseBase<Derived>& x) {
    Index best = 0;
    for (Index i = 1; i < x.size(); ++i)
        if (x(i) < x(best)) best = i;
    return best;
}

} // namespace ipelab
