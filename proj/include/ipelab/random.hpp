#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace ipelab {

/**
 * Seeded generator with platform-independent derived distributions.
 *
 * The raw stream is std::mt19937_64 seeded with the given 64-bit seed. Doubles
 * are built from the top 53 bits of one draw, so every value below is
 * reproducible from the seed alone (the standard library distributions are
 * implementation-defined and are not used).
 */
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). Uses rejection to avoid modulo bias.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Unit-rate exponential, via inversion of 1 - U so the argument is in (0, 1].
    double exponential() { return -std::log1p(-uniform()); }

    /// Draw from Dirichlet(1, ..., 1) of the given size.
    Eigen::VectorXd flat_dirichlet(Eigen::Index n) {
        Eigen::VectorXd x(n);
        for (Eigen::Index i = 0; i < n; ++i) x(i) = exponential();
        return x / x.sum();
    }

    /// Sample an index from a probability row.
    template <class Derived>
    Eigen::Index categorical(const Eigen::DenseBase<Derived>& probs) {
        const double u = uniform();
        double acc = 0.0;
        const Eigen::Index n = probs.size();
        for (Eigen::Index i = 0; i < n; ++i) {
            acc += probs(i);
            if (u < acc) return i;
        }
        // Rounding left the cumulative sum a hair below one; take the last
        // index with nonzero mass.
        for (Eigen::Index i = n - 1; i > 0; --i)
            if (probs(i) > 0.0) return i;
        return 0;
    }

    std::uint64_t operator()() { return engine_(); }
    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return UINT64_MAX; }

    bool operator==(const Rng&) const = default;

private:
    std::mt19937_64 engine_;
};

} // namespace ipelab
