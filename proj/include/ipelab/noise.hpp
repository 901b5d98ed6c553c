#pragma once

#include "ipelab/random.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ipelab {

/**
 * Perturbations eps_1, eps_2, ... added after each value-iteration backup.
 *
 * Non-zero kinds draw a direction uniformly from [-1, 1]^n per iteration and
 * rescale it to an exact infinity norm: c for ConstantNorm, c * rate^i for
 * Decaying (i is the 1-based iteration index).
 */
struct NoiseSchedule {
    enum class Kind { Zero, ConstantNorm, Decaying };

    Kind kind = Kind::Zero;
    double c = 0.0;
    double rate = 1.0;
    std::uint64_t seed = 0;

    static NoiseSchedule zero() { return {}; }
    static NoiseSchedule constant_norm(double c, std::uint64_t seed) {
        return {Kind::ConstantNorm, c, 1.0, seed};
    }
    static NoiseSchedule decaying(double c, double rate, std::uint64_t seed) {
        return {Kind::Decaying, c, rate, seed};
    }

    bool is_zero() const { return kind == Kind::Zero || c == 0.0; }

    /// Infinity-norm of eps_i.
    double magnitude(int i) const {
        switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::ConstantNorm: return c;
        case Kind::Decaying: return c * std::pow(rate, i);
        }
        return 0.0;
    }

    /// Returns eps_0 .. eps_k; eps_0 is zero and unused by the iteration.
    std::vector<Eigen::VectorXd> vectors(Eigen::Index n_states, int k) const {
        if (n_states < 1) throw std::invalid_argument("noise needs at least one state");
        std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(k) + 1,
                                         Eigen::VectorXd::Zero(n_states));
        if (kind == Kind::Zero) return out;
        Rng rng(seed);
        for (int i = 1; i <= k; ++i) {
            Eigen::VectorXd dir(n_states);
            for (Eigen::Index s = 0; s < n_states; ++s) dir(s) = rng.uniform(-1.0, 1.0);
            const double m = dir.cwiseAbs().maxCoeff();
            if (m == 0.0) dir(0) = 1.0;
            else dir /= m;
            // Pin one coordinate to exactly +-1 so the norm is exact after scaling.
            const Eigen::Index top = [&] {
                Eigen::Index best = 0;
                for (Eigen::Index s = 1; s < n_states; ++s)
                    if (std::abs(dir(s)) > std::abs(dir(best))) best = s;
                return best;
            }();
            dir(top) = dir(top) < 0.0 ? -1.0 : 1.0;
            out[static_cast<std::size_t>(i)] = magnitude(i) * dir;
        }
        return out;
    }
};

} // namespace ipelab
