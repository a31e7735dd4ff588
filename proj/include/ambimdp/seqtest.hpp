#pragma once

// Bayesian sequential test between two Bernoulli success probabilities.
// Each observation costs `observation_cost`; a wrong terminal declaration
// costs `error_cost`. Beliefs are written as the scalar weight on the first
// hypothesis (success probability p_low).

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "ambimdp/belief.hpp"
#include "ambimdp/model.hpp"

namespace ambimdp::seqtest {

struct SeqTestConfig {
    std::size_t horizon = 1; ///< number of observations before a declaration is forced
    prec_t observation_cost = 1;
    prec_t error_cost = 10;
    prec_t p_low = 1.0 / 3.0;
    prec_t p_high = 2.0 / 3.0;
    prec_t prior = 0.5; ///< weight on the p_low hypothesis

    void validate() const {
        if (!(p_low > 0 && p_low < 1 && p_high > 0 && p_high < 1))
            throw std::invalid_argument("seqtest: success probabilities must lie in (0,1)");
        if (!(observation_cost >= 0) || !(error_cost >= 0))
            throw std::invalid_argument("seqtest: costs must be non-negative");
        if (!(prior >= 0 && prior <= 1)) throw std::invalid_argument("seqtest: prior must lie in [0,1]");
    }
};

// State and action indices of the built model.
enum State : std::size_t { kStart = 0, kObs0 = 1, kObs1 = 2, kStopped = 3 };
// Declarations come first so the lowest-index tie-break stops at breakpoints.
enum Action : std::size_t { kDeclareLow = 0, kDeclareHigh = 1, kContinue = 2, kStay = 3 };

inline Belief prior_belief(prec_t mu) { return Belief::two_point(mu); }

/**
 * Model with horizon config.horizon + 1: the first config.horizon epochs
 * allow continue or a declaration; the final epoch forces a declaration.
 * `stopped` is absorbing with a single zero-cost no-op. Terminal costs are
 * zero since every path has declared by the horizon.
 */
inline StatisticalMDP build_model(const SeqTestConfig& cfg) {
    cfg.validate();
    const std::size_t N = cfg.horizon + 1;
    StatisticalMDP m(ParameterSet({"p_low", "p_high"}), {"start", "obs0", "obs1", "stopped"},
                     {"declare_low", "declare_high", "continue", "stay"}, N);
    const prec_t p[2] = {cfg.p_low, cfg.p_high};
    for (std::size_t t = 0; t < 2; ++t) {
        m.set_initial(t, {1, 0, 0, 0});
        for (std::size_t x : {kStart, kObs0, kObs1}) {
            m.set_transition_all(t, x, kContinue, {0, 1 - p[t], p[t], 0});
            m.set_stage_cost_all(t, x, kContinue, cfg.observation_cost);
            for (std::size_t d : {kDeclareLow, kDeclareHigh}) {
                m.set_transition_all(t, x, d, {0, 0, 0, 1});
                const bool wrong = (d == kDeclareLow) != (t == 0);
                m.set_stage_cost_all(t, x, d, wrong ? cfg.error_cost : 0);
            }
        }
        m.set_transition_all(t, kStopped, kStay, {0, 0, 0, 1});
    }
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t x : {kStart, kObs0, kObs1}) {
            if (n + 1 < N)
                m.set_feasible(n, x, {kDeclareLow, kDeclareHigh, kContinue});
            else
                m.set_feasible(n, x, {kDeclareLow, kDeclareHigh});
        }
        m.set_feasible(n, kStopped, {kStay});
    }
    return m;
}

namespace detail {
inline void require_unit(prec_t mu, const char* what) {
    if (!(mu >= 0 && mu <= 1)) throw std::invalid_argument(std::string(what) + ": belief must lie in [0,1]");
}
} // namespace detail

inline constexpr prec_t kLowerBreak = 13.0 / 30.0;
inline constexpr prec_t kUpperBreak = 17.0 / 30.0;

/// Stopping cost min{10 mu, 10(1-mu)} for the default costs.
inline prec_t closed_form_C0(prec_t mu) {
    detail::require_unit(mu, "closed_form_C0");
    return 10 * std::min(mu, 1 - mu);
}

/// Value with one observation allowed; also the value for every longer horizon.
inline prec_t closed_form_C1(prec_t mu) {
    detail::require_unit(mu, "closed_form_C1");
    if (mu <= kLowerBreak) return 10 * mu;
    if (mu <= kUpperBreak) return 13.0 / 3.0;
    return 10 * (1 - mu);
}

/// Set of maximizers of C1 over the AVaR interval, for mu0 <= 1/2.
struct MuStarInterval {
    prec_t lo;
    prec_t hi;
    bool unique() const { return lo == hi; }
};

inline MuStarInterval closed_form_avar_mustar(prec_t gamma, prec_t mu0) {
    if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("closed_form_avar_mustar: gamma must lie in (0,1)");
    if (!(mu0 > 0 && mu0 <= 0.5)) throw std::invalid_argument("closed_form_avar_mustar: mu0 must lie in (0,1/2]");
    const prec_t edge = mu0 / (1 - gamma);
    if (gamma <= 1 - 30.0 / 13.0 * mu0) return {edge, edge};
    if (gamma < 1 - 30.0 / 17.0 * mu0) return {kLowerBreak, edge};
    return {kLowerBreak, kUpperBreak};
}

/// Continue strictly inside (13/30, 17/30); otherwise declare the more likely hypothesis.
inline Action optimal_first_action(prec_t mu) {
    detail::require_unit(mu, "optimal_first_action");
    if (mu > kLowerBreak && mu < kUpperBreak) return kContinue;
    return mu > 0.5 ? kDeclareLow : kDeclareHigh;
}

/**
 * One Bellman step at the start state of the model: the minimum of the
 * Bayes-expected declaration costs and the observation cost plus the
 * predictive expectation of `next` at the updated beliefs.
 */
inline prec_t bellman_sweep(const StatisticalMDP& m, const std::function<prec_t(prec_t)>& next, prec_t mu) {
    const Belief b = prior_belief(mu);
    auto expected = [&](std::size_t a) { return mu * m.stage_cost(0, 0, kStart, a) + (1 - mu) * m.stage_cost(0, 1, kStart, a); };
    const prec_t stop = std::min(expected(kDeclareLow), expected(kDeclareHigh));
    const auto pred = predictive(m, 0, kStart, b, kContinue);
    prec_t cont = expected(kContinue);
    for (std::size_t xn : {kObs0, kObs1})
        if (pred.mass[xn] > 0) cont += pred.mass[xn] * next(pred.posterior[xn][0]);
    return std::min(stop, cont);
}

} // namespace ambimdp::seqtest
