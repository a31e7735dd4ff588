#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "ambimdp/oracle.hpp"
#include "ambimdp/seqtest.hpp"
#include "test_support.hpp"

using namespace ambimdp;
namespace st = ambimdp::seqtest;

namespace {
StatisticalMDP chain(std::size_t horizon) {
    StatisticalMDP m(ParameterSet({"a"}), {"x0", "x1"}, {"go"}, horizon);
    m.set_initial(0, {1, 0});
    m.set_transition_all(0, 0, 0, {0, 1});
    m.set_transition_all(0, 1, 0, {1, 0});
    m.set_stage_cost_all(0, 0, 0, 2);
    m.set_stage_cost_all(0, 1, 0, 3);
    m.set_terminal_cost(0, 0, 0.5);
    m.set_terminal_cost(0, 1, 0.25);
    return m;
}
} // namespace

TEST(Enumerate, HorizonZero) {
    StatisticalMDP m(ParameterSet({"a", "b"}), {"x", "y"}, {"go"}, 0);
    m.set_initial(0, {0.25, 0.75});
    m.set_initial(1, {1, 0});
    m.set_terminal_cost(0, 0, 4);
    m.set_terminal_cost(0, 1, 8);
    const auto sol = solve_bayes(m, Belief::uniform(2));
    const auto en = enumerate_cost(m, 0, sol.policy);
    EXPECT_EQ(en.trajectories.size(), 2u);
    EXPECT_NEAR(en.value, 0.25 * 4 + 0.75 * 8, 1e-15);
}

TEST(Enumerate, SeqTestMatchesEvaluation) {
    const auto m = st::build_model({});
    const auto sol = solve_bayes(m, st::prior_belief(0.5));
    for (std::size_t t = 0; t < 2; ++t) {
        const auto en = enumerate_cost(m, t, sol.policy);
        EXPECT_NEAR(en.value, evaluate_policy(m, t, sol.policy), 1e-12);
        EXPECT_NEAR(en.value, 13.0 / 3.0, 1e-12);
        prec_t total = 0;
        for (const auto& r : en.trajectories) total += r.probability;
        EXPECT_NEAR(total, 1.0, 1e-10);
    }
}

TEST(Enumerate, DeterministicChainSingleTrajectory) {
    const auto m = chain(3);
    const auto sol = solve_bayes(m, Belief::uniform(1));
    const auto en = enumerate_cost(m, 0, sol.policy);
    ASSERT_EQ(en.trajectories.size(), 1u);
    EXPECT_EQ(en.trajectories[0].probability, 1.0);
    EXPECT_EQ(en.trajectories[0].states, (std::vector<std::size_t>{0, 1, 0, 1}));
    EXPECT_EQ(en.value, 2 + 3 + 2 + 0.25);
}

TEST(Enumerate, CapExceeded) {
    const auto m = st::build_model({3});
    const auto sol = solve_bayes(m, st::prior_belief(0.5));
    EXPECT_THROW(enumerate_cost(m, 0, sol.policy, 1), GuardError);
}

TEST(Enumerate, AgreesWithEvaluationOnRandomModels) {
    std::mt19937_64 rng(41);
    for (int rep = 0; rep < 50; ++rep) {
        const auto m = fixtures::random_model(rng);
        const auto sol = solve_bayes(m, Belief(fixtures::random_simplex(rng, m.num_params())));
        for (int k = 0; k < 3; ++k) {
            const auto p = k == 0 ? sol.policy : fixtures::random_policy(rng, m, sol.policy.tree);
            for (std::size_t t = 0; t < m.num_params(); ++t)
                EXPECT_NEAR(enumerate_cost(m, t, p).value, evaluate_policy(m, t, p), 1e-12);
        }
    }
}

TEST(Enumerate, TrajectoryDump) {
    const auto m = chain(1);
    const auto sol = solve_bayes(m, Belief::uniform(1));
    std::ostringstream os;
    write_trajectories(os, m, enumerate_cost(m, 0, sol.policy).trajectories);
    EXPECT_EQ(os.str(), "probability,total_cost,path\n1,2.25,x0 go x1\n");
}

TEST(MonteCarlo, ZeroCostAndDeterministic) {
    auto m = st::build_model({});
    st::SeqTestConfig free;
    free.observation_cost = 0;
    free.error_cost = 0;
    const auto z = st::build_model(free);
    const auto sz = solve_bayes(z, st::prior_belief(0.5));
    const auto est = mc_estimate(z, 0, sz.policy, 1000, 1);
    EXPECT_EQ(est.mean, 0.0);
    EXPECT_EQ(est.half_width_95, 0.0);

    const auto c = chain(3);
    const auto sc = solve_bayes(c, Belief::uniform(1));
    const auto d = mc_estimate(c, 0, sc.policy, 100, 9);
    EXPECT_EQ(d.mean, 7.25);
    EXPECT_EQ(d.half_width_95, 0.0);
    EXPECT_THROW(mc_estimate(c, 0, sc.policy, 0, 9), std::invalid_argument);
}

TEST(MonteCarlo, ReproducibleAndConsistent) {
    const auto m = st::build_model({2});
    const auto sol = solve_bayes(m, st::prior_belief(0.5));
    const auto a = mc_estimate(m, 0, sol.policy, 100000, 12345);
    const auto b = mc_estimate(m, 0, sol.policy, 100000, 12345);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.half_width_95, b.half_width_95);
    EXPECT_LE(std::abs(a.mean - enumerate_cost(m, 0, sol.policy).value), a.half_width_95);
}

TEST(MonteCarlo, CoverageOverSeededRepetitions) {
    std::mt19937_64 rng(43);
    const auto m = fixtures::random_model(rng, {3, 2, 3, 2, 0.2});
    const auto sol = solve_bayes(m, Belief::uniform(m.num_params()));
    const prec_t exact = enumerate_cost(m, 0, sol.policy).value;
    int covered = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto est = mc_estimate(m, 0, sol.policy, 2000, 1000 + seed);
        covered += std::abs(est.mean - exact) <= est.half_width_95;
    }
    EXPECT_GE(covered, 93);
}
