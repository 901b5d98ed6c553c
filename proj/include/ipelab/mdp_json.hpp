#pragma once

#include "ipelab/mdp.hpp"

#include "json.hpp"

#include <stdexcept>
#include <string>

namespace ipelab {

/// Raised for malformed configuration or model documents.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * JSON form of a TabularMdp:
 *
 *   {"n_states": S, "n_actions": A, "gamma": g,
 *    "transition": [[[p(s'|s,a) for s'] for a] for s],
 *    "reward": [[r(s,a) for a] for s],
 *    "start_dist": [mu(s) for s]}
 */
inline nlohmann::json mdp_to_json(const TabularMdp& mdp) {
    nlohmann::json transition = nlohmann::json::array();
    nlohmann::json reward = nlohmann::json::array();
    for (Index s = 0; s < mdp.n_states(); ++s) {
        nlohmann::json per_action = nlohmann::json::array();
        nlohmann::json rewards = nlohmann::json::array();
        for (Index a = 0; a < mdp.n_actions(); ++a) {
            nlohmann::json row = nlohmann::json::array();
            for (Index next = 0; next < mdp.n_states(); ++next) row.push_back(mdp.p(s, a, next));
            per_action.push_back(std::move(row));
            rewards.push_back(mdp.reward(s, a));
        }
        transition.push_back(std::move(per_action));
        reward.push_back(std::move(rewards));
    }
    nlohmann::json start = nlohmann::json::array();
    for (Index s = 0; s < mdp.n_states(); ++s) start.push_back(mdp.start_dist()(s));
    return {{"n_states", mdp.n_states()}, {"n_actions", mdp.n_actions()},
            {"gamma", mdp.gamma()},       {"transition", std::move(transition)},
            {"reward", std::move(reward)}, {"start_dist", std::move(start)}};
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("mdp: missing field '") + key + "'");
    return j.at(key);
}

inline void require_size(const nlohmann::json& j, Index n, const std::string& what) {
    if (!j.is_array() || static_cast<Index>(j.size()) != n)
        throw ConfigError("mdp: field '" + what + "' must be an array of length " +
                          std::to_string(n));
}

} // namespace detail

inline TabularMdp mdp_from_json(const nlohmann::json& j) {
    using detail::require;
    using detail::require_size;
    if (!j.is_object()) throw ConfigError("mdp: expected a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (key != "n_states" && key != "n_actions" && key != "gamma" && key != "transition" &&
            key != "reward" && key != "start_dist")
            throw ConfigError("mdp: unknown field '" + key + "'");
    }
    try {
        const auto n = require(j, "n_states").get<Index>();
        const auto na = require(j, "n_actions").get<Index>();
        if (n < 1 || na < 1) throw ConfigError("mdp: n_states and n_actions must be positive");
        const double gamma = require(j, "gamma").get<double>();
        const auto& tj = require(j, "transition");
        const auto& rj = require(j, "reward");
        const auto& sj = require(j, "start_dist");
        require_size(tj, n, "transition");
        require_size(rj, n, "reward");
        require_size(sj, n, "start_dist");
        Eigen::MatrixXd p(n * na, n);
        Eigen::MatrixXd r(n, na);
        Eigen::VectorXd start(n);
        for (Index s = 0; s < n; ++s) {
            require_size(tj[s], na, "transition[" + std::to_string(s) + "]");
            require_size(rj[s], na, "reward[" + std::to_string(s) + "]");
            for (Index a = 0; a < na; ++a) {
                const auto& row = tj[s][a];
                require_size(row, n,
                             "transition[" + std::to_string(s) + "][" + std::to_string(a) + "]");
                for (Index next = 0; next < n; ++next) p(s * na + a, next) = row[next].get<double>();
                r(s, a) = rj[s][a].get<double>();
            }
            start(s) = sj[s].get<double>();
        }
        return TabularMdp(n, na, std::move(p), std::move(r), gamma, std::move(start));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("mdp: ") + e.what());
    } catch (const ModelError& e) {
        throw ConfigError(std::string("mdp: ") + e.what());
    } catch (const DimensionError& e) {
        throw ConfigError(std::string("mdp: ") + e.what());
    }
}

} // namespace ipelab
