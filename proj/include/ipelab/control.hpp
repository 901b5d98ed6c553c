#pragma once

#include "ipelab/bellman.hpp"
#include "ipelab/format.hpp"
#include "ipelab/ipe.hpp"
#include "ipelab/mdp.hpp"
#include "ipelab/random.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace ipelab {

// ---------------------------------------------------------------------------
// Behavior policies
// ---------------------------------------------------------------------------

struct EpsGreedyFixed {
    double epsilon = 0.1;
};

/// epsilon_t = start + (end - start) * min(t, steps) / steps.
struct EpsGreedyAnneal {
    double epsilon_start = 1.0;
    double epsilon_end = 0.1;
    int steps = 100;
};

struct Boltzmann {
    double tau = 1.0;
};

/// Act directly with the learned softmax policy.
struct IpeDirect {
    double alpha_pi = 0.05;
};

enum class EpsilonMatching { Bisection, Lookup };

/// Epsilon-greedy over Q with a per-state epsilon whose entropy matches the
/// learned policy's entropy at that state.
struct EpsIpe {
    double alpha_pi = 0.05;
    EpsilonMatching matching = EpsilonMatching::Bisection;
    double lookup_resolution = 1e-3;
};

using BehaviorKind = std::variant<EpsGreedyFixed, EpsGreedyAnneal, Boltzmann, IpeDirect, EpsIpe>;

struct BehaviorSpec {
    BehaviorKind kind = EpsIpe{};
    double alpha_q = 0.5;

    /// True for the kinds that carry and update softmax logits.
    bool learns_policy() const {
        return std::holds_alternative<IpeDirect>(kind) || std::holds_alternative<EpsIpe>(kind);
    }

    double alpha_pi() const {
        if (const auto* k = std::get_if<IpeDirect>(&kind)) return k->alpha_pi;
        if (const auto* k = std::get_if<EpsIpe>(&kind)) return k->alpha_pi;
        return 0.0;
    }

    void validate() const {
        if (!(alpha_q > 0.0 && alpha_q <= 1.0))
            throw std::invalid_argument("alpha_q must lie in (0, 1]");
        std::visit(
            [](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, EpsGreedyFixed>) {
                    if (!(k.epsilon >= 0.0 && k.epsilon <= 1.0))
                        throw std::invalid_argument("epsilon must lie in [0, 1]");
                } else if constexpr (std::is_same_v<K, EpsGreedyAnneal>) {
                    if (!(k.epsilon_start >= 0.0 && k.epsilon_start <= 1.0 &&
                          k.epsilon_end >= 0.0 && k.epsilon_end <= 1.0))
                        throw std::invalid_argument("epsilon_start/epsilon_end must lie in [0, 1]");
                    if (k.steps < 1) throw std::invalid_argument("anneal_steps must be >= 1");
                } else if constexpr (std::is_same_v<K, Boltzmann>) {
                    if (!(k.tau > 0.0)) throw std::invalid_argument("tau must be positive");
                } else {
                    if (!(k.alpha_pi > 0.0))
                        throw std::invalid_argument("alpha_pi must be positive");
                    if constexpr (std::is_same_v<K, EpsIpe>) {
                        if (!(k.lookup_resolution > 0.0 && k.lookup_resolution <= 1.0))
                            throw std::invalid_argument("lookup_resolution must lie in (0, 1]");
                    }
                }
            },
            kind);
    }
};

inline std::string behavior_name(const BehaviorSpec& spec) {
    return std::visit(
        [](const auto& k) -> std::string {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, EpsGreedyFixed>) return "eps_greedy";
            else if constexpr (std::is_same_v<K, EpsGreedyAnneal>) return "eps_anneal";
            else if constexpr (std::is_same_v<K, Boltzmann>) return "boltzmann";
            else if constexpr (std::is_same_v<K, IpeDirect>) return "ipe";
            else return "eps_ipe";
        },
        spec.kind);
}

// ---------------------------------------------------------------------------
// Agent state
// ---------------------------------------------------------------------------

struct AgentState {
    ActionValueFn q;
    std::optional<SoftmaxPolicy> theta;
    long step_count = 0;
    Rng rng;
    std::shared_ptr<const EpsilonLookupTable> eps_table;
};

/// Fresh agent: Q filled with q_init, all-zero logits for policy-learning kinds.
inline AgentState make_agent(const TabularMdp& mdp, const BehaviorSpec& spec,
                             std::uint64_t seed, double q_init = 0.0) {
    spec.validate();
    AgentState state;
    state.q = ActionValueFn(Eigen::MatrixXd::Constant(mdp.n_states(), mdp.n_actions(), q_init));
    if (spec.learns_policy()) state.theta = SoftmaxPolicy::uniform(mdp.n_states(), mdp.n_actions());
    state.rng = Rng(seed);
    if (const auto* k = std::get_if<EpsIpe>(&spec.kind);
        k && k->matching == EpsilonMatching::Lookup && mdp.n_actions() >= 2)
        state.eps_table =
            std::make_shared<const EpsilonLookupTable>(mdp.n_actions(), k->lookup_resolution);
    return state;
}

/// Q(s,a) += alpha (r + gamma max_a' Q(s',a') - Q(s,a)).
inline void q_learning_update(ActionValueFn& q, const Transition& tr, double alpha_q,
                              double gamma) {
    const double target = tr.reward + gamma * q.values.row(tr.next_state).maxCoeff();
    q(tr.state, tr.action) += alpha_q * (target - q(tr.state, tr.action));
}

inline AgentState q_learning_step(AgentState state, const Transition& tr, double alpha_q,
                                  double gamma) {
    if (!(alpha_q > 0.0 && alpha_q <= 1.0))
        throw std::invalid_argument("alpha_q must lie in (0, 1]");
    q_learning_update(state.q, tr, alpha_q, gamma);
    return state;
}

/// Entropy of the learned policy at s, for policy-learning kinds.
inline std::optional<double> behavior_entropy(const AgentState& state, Index s,
                                              const BehaviorSpec& spec) {
    if (!spec.learns_policy() || !state.theta) return std::nullopt;
    return policy_entropy(*state.theta, s);
}

/// Epsilon in force at state s for the current step, if the kind is epsilon-greedy.
inline std::optional<double> behavior_epsilon(const AgentState& state, Index s,
                                              const BehaviorSpec& spec) {
    if (const auto* k = std::get_if<EpsGreedyFixed>(&spec.kind)) return k->epsilon;
    if (const auto* k = std::get_if<EpsGreedyAnneal>(&spec.kind)) {
        const double frac =
            std::min(static_cast<double>(state.step_count), static_cast<double>(k->steps)) /
            static_cast<double>(k->steps);
        return k->epsilon_start + (k->epsilon_end - k->epsilon_start) * frac;
    }
    if (std::holds_alternative<EpsIpe>(spec.kind)) {
        const Index n = state.q.n_actions();
        if (n < 2) return 0.0;
        const double h = policy_entropy(*state.theta, s);
        return state.eps_table ? (*state.eps_table)(h) : match_epsilon_to_entropy(h, n);
    }
    return std::nullopt;
}

/// Full action distribution of the behavior policy at s.
inline Eigen::RowVectorXd behavior_row(const AgentState& state, Index s,
                                       const BehaviorSpec& spec) {
    if (const auto* k = std::get_if<Boltzmann>(&spec.kind))
        return softmax_row((state.q.values.row(s) / k->tau).eval());
    if (std::holds_alternative<IpeDirect>(spec.kind)) return state.theta->row(s);
    return epsilon_greedy_row(state.q.values.row(s), *behavior_epsilon(state, s, spec));
}

inline StochasticPolicy behavior_policy(const AgentState& state, const BehaviorSpec& spec) {
    Eigen::MatrixXd p(state.q.n_states(), state.q.n_actions());
    for (Index s = 0; s < p.rows(); ++s) p.row(s) = behavior_row(state, s, spec);
    return StochasticPolicy(std::move(p));
}

struct ActionChoice {
    Index action = 0;
    std::optional<double> epsilon;
    std::optional<double> entropy;
};

/**
 * Draws an action at s.
 *
 * Epsilon-greedy kinds (fixed, annealed, entropy-matched) explore uniformly
 * with probability epsilon and otherwise take the greedy action (lowest index
 * on ties). Boltzmann samples from softmax(Q(s,.)/tau); IpeDirect samples the
 * learned policy.
 */
inline ActionChoice select_action(AgentState& state, Index s, const BehaviorSpec& spec) {
    if (s < 0 || s >= state.q.n_states())
        throw std::out_of_range("state index " + std::to_string(s) + " out of range");
    ActionChoice choice;
    choice.entropy = behavior_entropy(state, s, spec);
    choice.epsilon = behavior_epsilon(state, s, spec);
    if (choice.epsilon) {
        const auto n = static_cast<std::uint64_t>(state.q.n_actions());
        if (state.rng.uniform() < *choice.epsilon)
            choice.action = static_cast<Index>(state.rng.below(n));
        else
            choice.action = argmax(state.q.values.row(s));
        return choice;
    }
    choice.action = state.rng.categorical(behavior_row(state, s, spec));
    return choice;
}

// ---------------------------------------------------------------------------
// The online VI-IPE loop
// ---------------------------------------------------------------------------

struct StepRecord {
    long step = 0;
    Index state = 0;
    Index action = 0;
    double reward = 0.0;
    std::optional<double> epsilon;
    std::optional<double> entropy;
};

/// Q and the exact value of the behavior policy after `step` completed steps.
struct Snapshot {
    long step = 0;
    ActionValueFn q;
    ValueFn v_behavior;
};

struct RunRecord {
    std::vector<StepRecord> steps;
    std::vector<Snapshot> snapshots;
    ActionValueFn final_q;

    double average_reward() const {
        if (steps.empty()) return 0.0;
        double total = 0.0;
        for (const auto& st : steps) total += st.reward;
        return total / static_cast<double>(steps.size());
    }
};

struct RunOptions {
    /// Snapshot every this many steps (plus step 0 and the final step);
    /// 0 disables snapshots.
    long snapshot_interval = 1;
    double q_init = 0.0;
};

/// Snapshot interval used when none is configured: every step on 2-state
/// problems, every 100 steps otherwise.
inline long default_snapshot_interval(const TabularMdp& mdp) {
    return mdp.n_states() <= 2 ? 1 : 100;
}

/**
 * Runs t_max online steps from a start state drawn from start_dist: pick an
 * action, sample the environment, apply one Q-learning update, then (for
 * policy-learning kinds) one IPE gradient step on the same transition.
 */
inline RunRecord run_vi_ipe(const TabularMdp& mdp, const BehaviorSpec& spec, long t_max,
                            std::uint64_t seed, const RunOptions& opts = {}) {
    if (t_max < 1) throw std::invalid_argument("t_max must be >= 1");
    AgentState state = make_agent(mdp, spec, seed, opts.q_init);
    RunRecord record;
    record.steps.reserve(static_cast<std::size_t>(t_max));

    auto snapshot = [&](long step) {
        record.snapshots.push_back(
            {step, state.q, exact_policy_evaluation(mdp, behavior_policy(state, spec)).v});
    };

    Index s = state.rng.categorical(mdp.start_dist());
    if (opts.snapshot_interval > 0) snapshot(0);
    for (long t = 0; t < t_max; ++t) {
        const ActionChoice choice = select_action(state, s, spec);
        const Index next = state.rng.categorical(mdp.next_dist(s, choice.action));
        const Transition tr{s, choice.action, mdp.reward(s, choice.action), next};

        q_learning_update(state.q, tr, spec.alpha_q, mdp.gamma());
        if (state.theta)
            *state.theta =
                ipe_gradient_step(*state.theta, state.q, tr, spec.alpha_pi(), mdp.gamma()).first;

        record.steps.push_back({t, s, choice.action, tr.reward, choice.epsilon, choice.entropy});
        ++state.step_count;
        s = next;
        if (opts.snapshot_interval > 0 &&
            ((t + 1) % opts.snapshot_interval == 0 || t + 1 == t_max))
            snapshot(t + 1);
    }
    record.final_q = state.q;
    return record;
}

inline void write_steps_csv(std::ostream& out, const RunRecord& record) {
    out << "step,state,action,reward,epsilon,entropy\n";
    for (const auto& st : record.steps)
        out << st.step << ',' << st.state << ',' << st.action << ',' << format_double(st.reward)
            << ',' << format_optional(st.epsilon) << ',' << format_optional(st.entropy) << '\n';
}

/// Columns: step, q_s{s}_a{a} (row-major), vb_s{s}.
inline void write_snapshots_csv(std::ostream& out, const RunRecord& record, Index n_states,
                                Index n_actions) {
    out << "step";
    for (Index s = 0; s < n_states; ++s)
        for (Index a = 0; a < n_actions; ++a) out << ",q_s" << s << "_a" << a;
    for (Index s = 0; s < n_states; ++s) out << ",vb_s" << s;
    out << '\n';
    for (const auto& snap : record.snapshots) {
        out << snap.step;
        for (Index s = 0; s < n_states; ++s)
            for (Index a = 0; a < n_actions; ++a) out << ',' << format_double(snap.q(s, a));
        for (Index s = 0; s < n_states; ++s) out << ',' << format_double(snap.v_behavior(s));
        out << '\n';
    }
}

} // namespace ipelab
