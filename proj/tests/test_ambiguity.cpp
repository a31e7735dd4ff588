#include <gtest/gtest.h>

#include <random>

#include "ambimdp/ambiguity.hpp"
#include "ambimdp/seqtest.hpp"
#include "test_support.hpp"

using namespace ambimdp;
namespace st = ambimdp::seqtest;

namespace {
const StatisticalMDP& seq() {
    static const StatisticalMDP m = st::build_model({});
    return m;
}
} // namespace

TEST(PhiEntropic, Examples) {
    const Belief mu0 = st::prior_belief(0.1);
    EXPECT_NEAR(phi_entropic(seq(), mu0, 1, mu0), 1.0, 1e-12);
    EXPECT_NEAR(phi_entropic(seq(), mu0, 1, Belief::point_mass(2, 0)), -std::log(10.0), 1e-12);
    EXPECT_EQ(phi_entropic(seq(), Belief::point_mass(2, 1), 1, Belief::uniform(2)),
              -std::numeric_limits<prec_t>::infinity());
    EXPECT_THROW(phi_entropic(seq(), mu0, 0, mu0), std::invalid_argument);
}

TEST(Entropic, PessimisticShiftClosedForm) {
    const auto r = solve_entropic(seq(), st::prior_belief(0.1), 0.1);
    // stationarity on the 10 mu branch: mu/(1-mu) = e/9
    const prec_t target = std::exp(1.0) / (9 + std::exp(1.0));
    EXPECT_NEAR(r.mu_star[0], target, 1e-4);
    EXPECT_NEAR(r.mu_star[0], 0.232, 1e-3);
    EXPECT_NEAR(r.value, 10 * target - relative_entropy(st::prior_belief(target), st::prior_belief(0.1)) / 0.1, 1e-8);
    EXPECT_LE(r.gap, 1e-6);
    EXPECT_EQ(r.policy_star.action[0], st::kDeclareHigh);
}

TEST(Entropic, SymmetricPriorStaysPut) {
    const auto r = solve_entropic(seq(), st::prior_belief(0.5), 1);
    EXPECT_NEAR(r.mu_star[0], 0.5, 1e-5);
    EXPECT_NEAR(r.value, 13.0 / 3.0, 1e-9);
    EXPECT_LE(r.gap, 1e-6);
}

TEST(Entropic, SmallGammaApproachesNominal) {
    const auto r = solve_entropic(seq(), st::prior_belief(0.1), 1e-6);
    EXPECT_NEAR(r.mu_star[0], 0.1, 1e-2);
    EXPECT_NEAR(r.value, 1.0, 1e-4);
}

TEST(Entropic, InvalidArguments) {
    EXPECT_THROW(solve_entropic(seq(), st::prior_belief(0.1), 0), std::invalid_argument);
    SolverOptions bad;
    bad.tol = 0;
    EXPECT_THROW(solve_entropic(seq(), st::prior_belief(0.1), 1, bad), std::invalid_argument);
    EXPECT_THROW(solve_entropic(seq(), Belief::uniform(3), 1), std::invalid_argument);
}

TEST(Avar, InteriorRegime) {
    const auto r = solve_avar(seq(), st::prior_belief(0.1), 0.2);
    EXPECT_NEAR(r.mu_star[0], 0.125, 1e-6);
    EXPECT_NEAR(r.value, 1.25, 1e-6);
    EXPECT_LE(r.gap, 1e-6);
}

TEST(Avar, PlateauRegimes) {
    auto r = solve_avar(seq(), st::prior_belief(0.1), 0.8);
    EXPECT_NEAR(r.mu_star[0], 13.0 / 30.0, 1e-6);
    EXPECT_NEAR(r.mu_star_hi[0], 0.5, 1e-6);
    EXPECT_NEAR(r.value, 13.0 / 3.0, 1e-9);
    EXPECT_LE(r.gap, 1e-6);

    r = solve_avar(seq(), st::prior_belief(0.1), 0.9);
    EXPECT_NEAR(r.value, 13.0 / 3.0, 1e-9);
    EXPECT_NEAR(r.mu_star_lo[0], 13.0 / 30.0, 1e-6);
    EXPECT_NEAR(r.mu_star_hi[0], 17.0 / 30.0, 1e-6);
    EXPECT_LE(r.gap, 1e-6);
    EXPECT_THROW(solve_avar(seq(), st::prior_belief(0.1), 1.0), std::invalid_argument);
}

TEST(Avar, MatchesClosedFormIntervals) {
    for (prec_t mu0 : {0.05, 0.1, 0.2, 0.3, 0.4}) {
        for (prec_t g : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const auto r = solve_avar(seq(), st::prior_belief(mu0), g);
            const auto cf = st::closed_form_avar_mustar(g, mu0);
            EXPECT_NEAR(r.mu_star_lo[0], cf.lo, 1e-5) << mu0 << " " << g;
            EXPECT_NEAR(r.mu_star_hi[0], cf.hi, 1e-5) << mu0 << " " << g;
            EXPECT_LE(r.gap, 1e-6);
        }
    }
}

TEST(Robust, WorstCaseIsPlateauValue) {
    const auto r = solve_robust(seq(), Belief::uniform(2));
    EXPECT_NEAR(r.value, 13.0 / 3.0, 1e-9);
    EXPECT_NEAR(r.mu_star[0], 0.5, 1e-6);
    EXPECT_EQ(r.policy_star.action[0], st::kContinue);
    EXPECT_LE(r.gap, 1e-6);
}

TEST(Saddle, WeakDualityAlongTrace) {
    for (auto mode : {AmbiguityMode::entropic, AmbiguityMode::avar}) {
        const auto r = mode == AmbiguityMode::entropic ? solve_entropic(seq(), st::prior_belief(0.2), 0.5)
                                                       : solve_avar(seq(), st::prior_belief(0.2), 0.5);
        const prec_t risk = detail::direct_risk(mode, CostProfile(r.cost_profile), r.mu0, r.gamma);
        ASSERT_FALSE(r.trace.empty());
        for (const auto& e : r.trace) EXPECT_LE(e.value, risk + 1e-10);
        EXPECT_NEAR(risk - r.value, r.gap, 1e-12);
    }
}

TEST(Saddle, PessimismOrdering) {
    for (prec_t mu0 : {0.05, 0.15, 0.3}) {
        prec_t prev = mu0;
        for (prec_t g : {0.01, 0.1, 1.0, 10.0}) {
            const auto r = solve_entropic(seq(), st::prior_belief(mu0), g);
            EXPECT_GE(r.mu_star[0], prev - 1e-6);
            EXPECT_LE(r.mu_star[0], 0.5 + 1e-6);
            prev = r.mu_star[0];
        }
    }
}

TEST(Certificate, AcceptsSolverResults) {
    const auto a = solve_entropic(seq(), st::prior_belief(0.1), 0.1);
    EXPECT_TRUE(certify_saddle(seq(), a).passed());
    const auto b = solve_avar(seq(), st::prior_belief(0.1), 0.2);
    EXPECT_TRUE(certify_saddle(seq(), b).passed());
    const auto c = solve_avar(seq(), st::prior_belief(0.1), 0.9);
    EXPECT_TRUE(certify_saddle(seq(), c).passed());
}

TEST(Certificate, RejectsPerturbedPrior) {
    auto r = solve_entropic(seq(), st::prior_belief(0.1), 0.1);
    r.mu_star = st::prior_belief(r.mu_star[0] + 0.05);
    const auto cert = certify_saddle(seq(), r);
    EXPECT_FALSE(cert.mu_side_ok);
    EXPECT_FALSE(cert.passed());

    auto s = solve_avar(seq(), st::prior_belief(0.1), 0.2);
    s.policy_star = constant_policy(seq(), s.policy_star.tree, st::kDeclareLow);
    s.cost_profile = policy_cost_profile(seq(), s.policy_star);
    EXPECT_FALSE(certify_saddle(seq(), s).pi_side_ok);
}

TEST(Saddle, ThreeParameterAgainstGrid) {
    std::mt19937_64 rng(77);
    for (int rep = 0; rep < 4; ++rep) {
        auto m = fixtures::random_model(rng, {3, 2, 2, 3, 0.2});
        while (m.num_params() != 3) m = fixtures::random_model(rng, {3, 2, 2, 3, 0.2});
        const Belief mu0(fixtures::random_simplex(rng, 3));
        SolverOptions opt;
        opt.grid_resolution = 0.02;

        // brute-force grid maximum of the robust objective
        prec_t grid_best = -std::numeric_limits<prec_t>::infinity();
        const int M = 100;
        for (int i = 0; i <= M; ++i)
            for (int j = 0; i + j <= M; ++j) {
                const Belief b(numvec{prec_t(i) / M, prec_t(j) / M, prec_t(M - i - j) / M});
                grid_best = std::max(grid_best, solve_bayes(m, b).value);
            }
        const auto r = solve_robust(m, mu0, opt);
        EXPECT_GE(r.value, grid_best - 1e-9);
        EXPECT_LE(r.value, grid_best + 1e-2 * (1 + std::abs(grid_best)));

        const auto e = solve_entropic(m, mu0, 0.5, opt);
        prec_t ent_best = -std::numeric_limits<prec_t>::infinity();
        for (int i = 0; i <= M; ++i)
            for (int j = 0; i + j <= M; ++j) {
                const Belief b(numvec{prec_t(i) / M, prec_t(j) / M, prec_t(M - i - j) / M});
                ent_best = std::max(ent_best, phi_entropic(m, mu0, 0.5, b));
            }
        EXPECT_GE(e.value, ent_best - 1e-9);
        EXPECT_LE(e.value, ent_best + 1e-2 * (1 + std::abs(ent_best)));
    }
}
