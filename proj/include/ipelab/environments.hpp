#pragma once

#include "ipelab/mdp.hpp"
#include "ipelab/random.hpp"

#include <cstdint>
#include <stdexcept>

namespace ipelab {

namespace switch_stay_actions {
inline constexpr Index kStay = 0;
inline constexpr Index kSwitch = 1;
} // namespace switch_stay_actions

/**
 * Two-state Switch-Stay MDP. Deterministic transitions, start in s0.
 *
 *   s0 --stay--> s0  reward  1      s0 --switch--> s1  reward -1
 *   s1 --stay--> s1  reward  2      s1 --switch--> s0  reward  0
 *
 * Action 0 is "stay" and action 1 is "switch". The discount is not part of
 * the environment's definition; 0.9 is the project default.
 */
inline TabularMdp switch_stay(double gamma = 0.9) {
    using namespace switch_stay_actions;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(4, 2);
    Eigen::MatrixXd r(2, 2);
    p(0 * 2 + kStay, 0) = 1.0;
    p(0 * 2 + kSwitch, 1) = 1.0;
    p(1 * 2 + kStay, 1) = 1.0;
    p(1 * 2 + kSwitch, 0) = 1.0;
    r(0, kStay) = 1.0;
    r(0, kSwitch) = -1.0;
    r(1, kStay) = 2.0;
    r(1, kSwitch) = 0.0;
    Eigen::VectorXd start(2);
    start << 1.0, 0.0;
    return TabularMdp(2, 2, std::move(p), std::move(r), gamma, std::move(start));
}

/**
 * Random MDP with flat-Dirichlet transition rows and Uniform[-1, 1] rewards.
 *
 * Seed stream, all from one Rng(seed): for s in states, for a in actions, one
 * Dirichlet row of n_states unit exponentials (normalized); then rewards
 * r(s, a) in row-major order. The start distribution is uniform.
 */
inline TabularMdp random_mdp(Index n_states, Index n_actions, std::uint64_t seed,
                             double gamma = 0.9) {
    if (n_states < 1 || n_actions < 1)
        throw std::invalid_argument("random_mdp needs at least one state and one action");
    Rng rng(seed);
    Eigen::MatrixXd p(n_states * n_actions, n_states);
    for (Index row = 0; row < p.rows(); ++row) p.row(row) = rng.flat_dirichlet(n_states);
    Eigen::MatrixXd r(n_states, n_actions);
    for (Index s = 0; s < n_states; ++s)
        for (Index a = 0; a < n_actions; ++a) r(s, a) = rng.uniform(-1.0, 1.0);
    Eigen::VectorXd start =
        Eigen::VectorXd::Constant(n_states, 1.0 / static_cast<double>(n_states));
    return TabularMdp(n_states, n_actions, std::move(p), std::move(r), gamma, std::move(start));
}

/// Random policy with flat-Dirichlet rows.
inline StochasticPolicy random_policy(Index n_states, Index n_actions, Rng& rng) {
    Eigen::MatrixXd p(n_states, n_actions);
    for (Index s = 0; s < n_states; ++s) p.row(s) = rng.flat_dirichlet(n_actions).transpose();
    return StochasticPolicy(std::move(p));
}

} // namespace ipelab
