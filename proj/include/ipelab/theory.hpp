#pragma once

#include "ipelab/bellman.hpp"
#include "ipelab/environments.hpp"
#include "ipelab/ipe.hpp"
#include "ipelab/mdp.hpp"
#include "ipelab/noise.hpp"
#include "ipelab/parallel.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ipelab {

/// Certificates with slack below this are failures; the bounds hold
/// analytically, so anything else is linear-solver residue.
inline constexpr double kCertificateTolerance = 1e-6;

/// One evaluated instance of an inequality lhs <= rhs.
struct BoundCertificate {
    std::string check;
    std::uint64_t seed = 0;
    int k = 0;
    std::string norm = "linf";
    double lhs = 0.0;
    double rhs = 0.0;
    double slack = 0.0;

    bool pass() const { return slack >= -kCertificateTolerance; }
};

inline BoundCertificate make_certificate(std::string check, double lhs, double rhs,
                                         std::uint64_t seed = 0, int k = 0) {
    BoundCertificate c;
    c.check = std::move(check);
    c.seed = seed;
    c.k = k;
    c.lhs = lhs;
    c.rhs = rhs;
    c.slack = rhs - lhs;
    return c;
}

inline double sup_norm(const Eigen::MatrixXd& x) { return norm_of(x, Norm::LInf); }

/**
 * ||Q^pi - Q^{pi_ipe}|| <= ((1 + gamma) ||Q^pi - Q|| + ||T^{pi_ipe} Q - Q||) / (1 - gamma).
 * Any candidate pi_ipe is accepted; the inequality does not need it to be optimal.
 */
inline BoundCertificate check_prop1(const TabularMdp& mdp, const StochasticPolicy& pi,
                                    const ActionValueFn& q_estimate,
                                    const StochasticPolicy& pi_ipe, std::uint64_t seed = 0) {
    const double g = mdp.gamma();
    const ActionValueFn q_pi = exact_policy_evaluation(mdp, pi).q;
    const ActionValueFn q_ipe = exact_policy_evaluation(mdp, pi_ipe).q;
    const double lhs = sup_norm(q_pi.values - q_ipe.values);
    const double rhs = ((1.0 + g) * sup_norm(q_pi.values - q_estimate.values) +
                        bellman_residual(mdp, q_estimate, pi_ipe, Norm::LInf)) /
                       (1.0 - g);
    return make_certificate("prop1", lhs, rhs, seed);
}

/// ||Q^{pi1} - Q^{pi2}|| <= ((1 + gamma) ||Q1 - Q2|| + ||T^{pi1} Q1 - Q1|| + ||T^{pi2} Q2 - Q2||) / (1 - gamma).
inline BoundCertificate check_prop2(const TabularMdp& mdp, const ActionValueFn& q1,
                                    const ActionValueFn& q2, const StochasticPolicy& pi1,
                                    const StochasticPolicy& pi2, std::uint64_t seed = 0) {
    const double g = mdp.gamma();
    const double lhs = sup_norm(exact_policy_evaluation(mdp, pi1).q.values -
                                exact_policy_evaluation(mdp, pi2).q.values);
    const double rhs = ((1.0 + g) * sup_norm(q1.values - q2.values) +
                        bellman_residual(mdp, q1, pi1, Norm::LInf) +
                        bellman_residual(mdp, q2, pi2, Norm::LInf)) /
                       (1.0 - g);
    return make_certificate("prop2", lhs, rhs, seed);
}

namespace detail {

/**
 * Shared body of both value-iteration bounds. With c = 1 + gamma / (1 - gamma):
 *
 *   rhs_k = c (gamma^k ||V1 - V0|| + E1_k) + gamma^k ||V0 - V*|| + E2_k
 *   E1_k  = ||eps_k|| + sum_{t=1}^{k-1} gamma^t ||eps_{k-t+1} - eps_{k-t}||
 *   E2_k  = sum_{t=0}^{k-1} gamma^t ||eps_{k-t}||
 *
 * Without noise E1 = E2 = 0 exactly, which gives the exact-iteration bound
 * bit for bit.
 */
inline std::vector<BoundCertificate> value_iteration_bounds(const std::string& name,
                                                            const TabularMdp& mdp,
                                                            const ValueFn& v0, int k_max,
                                                            const NoiseSchedule& noise,
                                                            std::uint64_t seed) {
    if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
    mdp.check_values(v0);
    const double g = mdp.gamma();
    const double c = 1.0 + g / (1.0 - g);
    const auto iterates = value_iteration(mdp, v0, k_max, noise);
    const auto eps = noise.vectors(mdp.n_states(), k_max);
    const ValueFn v_star = solve_optimal(mdp).v;
    const double first_step = sup_norm(iterates[1].values - iterates[0].values);
    const double start_gap = sup_norm(v0.values - v_star.values);

    std::vector<BoundCertificate> out;
    out.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) {
        double e1 = 0.0;
        double e2 = 0.0;
        if (!noise.is_zero()) {
            const auto at = [&](int i) -> const Eigen::VectorXd& {
                return eps[static_cast<std::size_t>(i)];
            };
            e1 = sup_norm(at(k));
            for (int t = 1; t <= k - 1; ++t)
                e1 += std::pow(g, t) * sup_norm(at(k - t + 1) - at(k - t));
            for (int t = 0; t <= k - 1; ++t) e2 += std::pow(g, t) * sup_norm(at(k - t));
        }
        const double gk = std::pow(g, k);
        const double rhs = c * (gk * first_step + e1) + gk * start_gap + e2;

        const StochasticPolicy pi_k = solve_evaluation_policy_v(mdp, iterates[static_cast<std::size_t>(k)]);
        const double lhs = sup_norm(exact_policy_evaluation(mdp, pi_k).v.values - v_star.values);
        BoundCertificate cert = make_certificate(name, lhs, rhs, seed, k);
        out.push_back(std::move(cert));
    }
    return out;
}

} // namespace detail

/// Exact value iteration: ||V^{pi_k} - V*|| <= gamma^k ||V1 - V0|| (1 + gamma/(1-gamma)) + gamma^k ||V0 - V*||,
/// with pi_k the evaluation policy of V_k.
inline std::vector<BoundCertificate> check_thm1(const TabularMdp& mdp, const ValueFn& v0, int k_max,
                                                std::uint64_t seed = 0) {
    return detail::value_iteration_bounds("thm1", mdp, v0, k_max, NoiseSchedule::zero(), seed);
}

/// Approximate value iteration V_{i+1} = T* V_i + eps_{i+1}.
inline std::vector<BoundCertificate> check_thm2(const TabularMdp& mdp, const ValueFn& v0, int k_max,
                                                const NoiseSchedule& noise,
                                                std::uint64_t seed = 0) {
    return detail::value_iteration_bounds("thm2", mdp, v0, k_max, noise, seed);
}

/// Indices k at which the lhs sequence increased by more than tol.
inline std::vector<int> lhs_increases(const std::vector<BoundCertificate>& certs,
                                      double tol = 1e-9) {
    std::vector<int> out;
    for (std::size_t i = 1; i < certs.size(); ++i)
        if (certs[i].lhs > certs[i - 1].lhs + tol) out.push_back(certs[i].k);
    return out;
}

// ---------------------------------------------------------------------------
// Randomized sweeps
// ---------------------------------------------------------------------------

struct PropInstance {
    TabularMdp mdp;
    StochasticPolicy pi;
    ActionValueFn q1;
    ActionValueFn q2;
};

/// Random 4-state 3-action instance: policy with Dirichlet rows and two
/// estimates Q^pi + Uniform[-0.5, 0.5] noise. Streams: the MDP uses `seed`,
/// everything else Rng(seed ^ 0x9e3779b97f4a7c15).
inline PropInstance make_prop_instance(std::uint64_t seed) {
    TabularMdp mdp = random_mdp(4, 3, seed);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    StochasticPolicy pi = random_policy(mdp.n_states(), mdp.n_actions(), rng);
    const ActionValueFn q_pi = exact_policy_evaluation(mdp, pi).q;
    auto noisy = [&] {
        Eigen::MatrixXd q = q_pi.values;
        for (Index i = 0; i < q.size(); ++i) q(i) += rng.uniform(-0.5, 0.5);
        return ActionValueFn(std::move(q));
    };
    ActionValueFn q1 = noisy();
    ActionValueFn q2 = noisy();
    return {std::move(mdp), std::move(pi), std::move(q1), std::move(q2)};
}

/// Two certificates per instance (prop1 then prop2), instance i using seed + i.
inline std::vector<BoundCertificate> prop_sweep(int instances, std::uint64_t seed) {
    std::vector<std::vector<BoundCertificate>> per(static_cast<std::size_t>(instances));
    parallel_for(per.size(), [&](std::size_t i) {
        const std::uint64_t s = seed + i;
        const PropInstance inst = make_prop_instance(s);
        const StochasticPolicy pi1 = solve_evaluation_policy_q(inst.mdp, inst.q1).policy;
        const StochasticPolicy pi2 = solve_evaluation_policy_q(inst.mdp, inst.q2).policy;
        per[i] = {check_prop1(inst.mdp, inst.pi, inst.q1, pi1, s),
                  check_prop2(inst.mdp, inst.q1, inst.q2, pi1, pi2, s)};
    });
    std::vector<BoundCertificate> out;
    for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
    return out;
}

/// Random 5-state 3-action instances with V0 ~ Uniform[-1, 1]^5. Each produces
/// thm1 certificates and thm2 certificates under decaying (c = 0.5, rate = 0.5)
/// and constant-norm (c = 0.2) noise, for k = 1..k_max.
inline std::vector<BoundCertificate> thm_sweep(int instances, std::uint64_t seed,
                                               int k_max = 30) {
    std::vector<std::vector<BoundCertificate>> per(static_cast<std::size_t>(instances));
    parallel_for(per.size(), [&](std::size_t i) {
        const std::uint64_t s = seed + i;
        const TabularMdp mdp = random_mdp(5, 3, s);
        Rng rng(s ^ 0x9e3779b97f4a7c15ULL);
        Eigen::VectorXd v0(mdp.n_states());
        for (Index j = 0; j < v0.size(); ++j) v0(j) = rng.uniform(-1.0, 1.0);
        auto& out = per[i];
        for (auto&& group : {check_thm1(mdp, ValueFn(v0), k_max, s),
                             check_thm2(mdp, ValueFn(v0), k_max, NoiseSchedule::decaying(0.5, 0.5, s), s),
                             check_thm2(mdp, ValueFn(v0), k_max, NoiseSchedule::constant_norm(0.2, s), s)})
            out.insert(out.end(), group.begin(), group.end());
    });
    std::vector<BoundCertificate> out;
    for (auto& v : per) out.insert(out.end(), v.begin(), v.end());
    return out;
}

inline nlohmann::ordered_json certificate_to_json(const BoundCertificate& c) {
    return {{"check", c.check}, {"seed", c.seed}, {"k", c.k},      {"lhs", c.lhs},
            {"rhs", c.rhs},     {"slack", c.slack}, {"pass", c.pass()}};
}

inline void write_certificates_jsonl(std::ostream& out, const std::vector<BoundCertificate>& certs) {
    for (const auto& c : certs) out << certificate_to_json(c).dump() << '\n';
}

} // namespace ipelab
