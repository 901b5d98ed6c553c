#include "ipelab/environments.hpp"
#include "ipelab/theory.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

using namespace ipelab;

namespace {

ValueFn vec(std::initializer_list<double> xs) {
    Eigen::VectorXd v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v(i++) = x;
    return ValueFn(v);
}

} // namespace

// ---------------------------------------------------------------------------
// Propositions
// ---------------------------------------------------------------------------

TEST(Prop1, ExactEstimateIsTight) {
    const PropInstance inst = make_prop_instance(3);
    const ActionValueFn q_pi = exact_policy_evaluation(inst.mdp, inst.pi).q;
    const BoundCertificate c = check_prop1(inst.mdp, inst.pi, q_pi, inst.pi);
    EXPECT_NEAR(c.lhs, 0.0, 1e-9);
    EXPECT_NEAR(c.rhs, 0.0, 1e-9);
    EXPECT_TRUE(c.pass());
}

TEST(Prop1, HoldsOnRandomInstancesWithSolverAndUniformCandidates) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const PropInstance inst = make_prop_instance(seed);
        const auto pi_ipe = solve_evaluation_policy_q(inst.mdp, inst.q1).policy;
        const BoundCertificate c = check_prop1(inst.mdp, inst.pi, inst.q1, pi_ipe, seed);
        EXPECT_TRUE(c.pass()) << "seed " << seed << " slack " << c.slack;
        EXPECT_GT(c.lhs, 0.0);
        const BoundCertificate u =
            check_prop1(inst.mdp, inst.pi, inst.q1, StochasticPolicy::uniform(4, 3), seed);
        EXPECT_TRUE(u.pass()) << "seed " << seed;
    }
}

TEST(Prop1, RightHandSideMatchesHandComputation) {
    const PropInstance inst = make_prop_instance(9);
    const auto pi_ipe = solve_evaluation_policy_q(inst.mdp, inst.q1).policy;
    const BoundCertificate c = check_prop1(inst.mdp, inst.pi, inst.q1, pi_ipe);
    const double g = inst.mdp.gamma();
    const Eigen::MatrixXd q_pi = exact_policy_evaluation(inst.mdp, inst.pi).q.values;
    const Eigen::MatrixXd res =
        oracle::bellman_pi_q(inst.mdp, pi_ipe.probs, inst.q1.values) - inst.q1.values;
    const double rhs = ((1 + g) * (q_pi - inst.q1.values).cwiseAbs().maxCoeff() +
                        res.cwiseAbs().maxCoeff()) /
                       (1 - g);
    EXPECT_NEAR(c.rhs, rhs, 1e-9);
    EXPECT_DOUBLE_EQ(c.slack, c.rhs - c.lhs);
}

TEST(Prop2, IdenticalEstimates) {
    const PropInstance inst = make_prop_instance(4);
    const auto pi1 = solve_evaluation_policy_q(inst.mdp, inst.q1).policy;
    const BoundCertificate c = check_prop2(inst.mdp, inst.q1, inst.q1, pi1, pi1);
    const double res = bellman_residual(inst.mdp, inst.q1, pi1, Norm::LInf);
    EXPECT_EQ(c.lhs, 0.0);
    EXPECT_NEAR(c.rhs, 2.0 * res / (1.0 - inst.mdp.gamma()), 1e-12);
}

TEST(Prop2, ExactEstimatesGiveZeroBothSides) {
    const PropInstance inst = make_prop_instance(5);
    const ActionValueFn q_pi = exact_policy_evaluation(inst.mdp, inst.pi).q;
    const BoundCertificate c = check_prop2(inst.mdp, q_pi, q_pi, inst.pi, inst.pi);
    EXPECT_NEAR(c.lhs, 0.0, 1e-12);
    EXPECT_NEAR(c.rhs, 0.0, 1e-9);
}

TEST(PropSweep, AllPassAndOrdered) {
    const auto certs = prop_sweep(100, 0);
    ASSERT_EQ(certs.size(), 200u);
    for (std::size_t i = 0; i < certs.size(); ++i) {
        EXPECT_TRUE(certs[i].pass()) << certs[i].check << " seed " << certs[i].seed;
        EXPECT_EQ(certs[i].check, i % 2 == 0 ? "prop1" : "prop2");
        EXPECT_EQ(certs[i].seed, i / 2);
    }
}

// ---------------------------------------------------------------------------
// Value-iteration theorems
// ---------------------------------------------------------------------------

TEST(Thm1, SwitchStayGeometricBound) {
    const TabularMdp mdp = switch_stay(0.9);
    const ValueFn v0 = vec({0, 0});
    const auto certs = check_thm1(mdp, v0, 30);
    ASSERT_EQ(certs.size(), 30u);
    // Independent rhs: V1 = T* V0 = (1, 2), V* = (17, 20).
    const double c = 1.0 + 0.9 / 0.1;
    for (int k = 1; k <= 30; ++k) {
        const auto& cert = certs[static_cast<std::size_t>(k - 1)];
        EXPECT_EQ(cert.k, k);
        EXPECT_TRUE(cert.pass()) << k;
        EXPECT_NEAR(cert.rhs, std::pow(0.9, k) * (c * 2.0 + 20.0), 1e-9);
        if (k > 1) {
            EXPECT_NEAR(cert.rhs / certs[static_cast<std::size_t>(k - 2)].rhs, 0.9, 1e-9);
        }
    }
}

TEST(Thm1, StartingAtOptimumHasZeroGap) {
    const TabularMdp mdp = switch_stay(0.9);
    for (const auto& c : check_thm1(mdp, vec({17, 20}), 10)) {
        EXPECT_NEAR(c.lhs, 0.0, 1e-9);
        EXPECT_NEAR(c.rhs, 0.0, 1e-9);
        EXPECT_TRUE(c.pass());
    }
}

TEST(Thm1, RandomInstances) {
    Rng rng(2);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const TabularMdp mdp = random_mdp(5, 3, seed);
        Eigen::VectorXd v0(5);
        for (Index s = 0; s < 5; ++s) v0(s) = rng.uniform(-1, 1);
        const Eigen::VectorXd v_star = oracle::optimal_values(mdp);
        const auto certs = check_thm1(mdp, ValueFn(v0), 30, seed);
        for (const auto& c : certs) {
            EXPECT_TRUE(c.pass()) << "seed " << seed << " k " << c.k;
            EXPECT_GE(c.lhs, -1e-12);
        }
        // Lhs against an independent evaluation of the evaluation policy.
        Eigen::VectorXd v = v0;
        for (int k = 1; k <= 5; ++k) v = oracle::bellman_opt_v(mdp, v);
        const auto pi5 = solve_evaluation_policy_v(mdp, ValueFn(v));
        const Eigen::VectorXd v_pi = oracle::iterate_policy_values(mdp, pi5.probs);
        EXPECT_NEAR(certs[4].lhs, (v_pi - v_star).cwiseAbs().maxCoeff(), 1e-8);
    }
}

TEST(Thm2, ZeroNoiseReproducesThm1Bitwise) {
    const TabularMdp mdp = random_mdp(5, 3, 8);
    const ValueFn v0 = vec({0.3, -0.2, 0.9, 0.0, -1.0});
    const auto a = check_thm1(mdp, v0, 30);
    const auto b = check_thm2(mdp, v0, 30, NoiseSchedule::zero());
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(std::memcmp(&a[i].lhs, &b[i].lhs, sizeof(double)), 0);
        EXPECT_EQ(std::memcmp(&a[i].rhs, &b[i].rhs, sizeof(double)), 0);
    }
    const auto c = check_thm2(mdp, v0, 30, NoiseSchedule::constant_norm(0.0, 3));
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].rhs, c[i].rhs);
}

TEST(Thm2, NoisyBoundsHold) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const TabularMdp mdp = random_mdp(5, 3, 100 + seed);
        const ValueFn v0 = vec({0, 0, 0, 0, 0});
        for (const auto& noise : {NoiseSchedule::decaying(0.5, 0.5, seed),
                                  NoiseSchedule::constant_norm(0.2, seed),
                                  NoiseSchedule::constant_norm(2.0, seed)})
            for (const auto& c : check_thm2(mdp, v0, 30, noise, seed))
                EXPECT_TRUE(c.pass()) << "seed " << seed << " k " << c.k;
    }
}

TEST(Thm2, DecayingNoiseConvergesConstantNoisePlateaus) {
    const TabularMdp mdp = random_mdp(5, 3, 31);
    const ValueFn v0 = vec({1, -1, 0.5, 0, 0});
    const auto decay = check_thm2(mdp, v0, 300, NoiseSchedule::decaying(0.5, 0.5, 1));
    EXPECT_LE(decay.back().lhs, 1e-6);
    EXPECT_LE(decay.back().rhs, 1e-9);
    const auto flat = check_thm2(mdp, v0, 60, NoiseSchedule::constant_norm(0.2, 1));
    // E2 tends to 0.2 / (1 - gamma); the bound stays bounded away from zero.
    const double g = mdp.gamma();
    EXPECT_GE(flat.back().rhs, 0.2 * (1 - std::pow(g, 60)) / (1 - g) - 1e-9);
    EXPECT_LE(std::abs(flat.back().rhs - flat[49].rhs), 0.05 * flat.back().rhs);
}

TEST(Noise, NormsAreExact) {
    const auto decay = NoiseSchedule::decaying(0.5, 0.5, 7);
    const auto eps = decay.vectors(5, 20);
    ASSERT_EQ(eps.size(), 21u);
    EXPECT_EQ(eps[0].cwiseAbs().maxCoeff(), 0.0);
    for (int i = 1; i <= 20; ++i)
        EXPECT_EQ(eps[static_cast<std::size_t>(i)].cwiseAbs().maxCoeff(), 0.5 * std::pow(0.5, i));
    const auto flat = NoiseSchedule::constant_norm(0.2, 7).vectors(3, 10);
    for (int i = 1; i <= 10; ++i) EXPECT_EQ(flat[static_cast<std::size_t>(i)].cwiseAbs().maxCoeff(), 0.2);
    EXPECT_EQ(decay.vectors(5, 20)[7], eps[7]);
}

TEST(Thm2, LhsMonotonicityIsReportedNotRequired) {
    // On Switch-Stay exact iteration the gap is non-increasing.
    EXPECT_TRUE(lhs_increases(check_thm1(switch_stay(), vec({0, 0}), 30)).empty());
    std::vector<BoundCertificate> seq = {make_certificate("t", 1.0, 2.0, 0, 1),
                                         make_certificate("t", 1.5, 2.0, 0, 2),
                                         make_certificate("t", 0.5, 2.0, 0, 3)};
    EXPECT_EQ(lhs_increases(seq), std::vector<int>{2});
}

TEST(ThmSweep, ShapeAndPasses) {
    const auto certs = thm_sweep(3, 10, 8);
    ASSERT_EQ(certs.size(), 3u * 3u * 8u);
    for (const auto& c : certs) EXPECT_TRUE(c.pass());
    EXPECT_EQ(certs[0].check, "thm1");
    EXPECT_EQ(certs[8].check, "thm2");
}

TEST(Certificates, JsonLines) {
    std::ostringstream out;
    write_certificates_jsonl(out, {make_certificate("prop1", 1.0, 0.5, 3, 0)});
    EXPECT_EQ(out.str(),
              "{\"check\":\"prop1\",\"seed\":3,\"k\":0,\"lhs\":1.0,\"rhs\":0.5,\"slack\":-0.5,"
              "\"pass\":false}\n");
}
