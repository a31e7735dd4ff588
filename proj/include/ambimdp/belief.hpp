#pragma once

// Posterior updates over the finite parameter set and the predictive state
// kernel obtained by mixing the per-parameter kernels with the current belief.
//
// Convention: an observation with zero predictive mass leaves the belief
// unchanged. Such an event carries zero weight in every expectation, so the
// choice never affects values.

#include <sstream>
#include <stdexcept>
#include <vector>

#include "ambimdp/model.hpp"

namespace ambimdp {

/// Next-state masses together with the posterior reached on each next state.
struct PredictiveDistribution {
    numvec mass;
    std::vector<Belief> posterior;
};

namespace detail {

inline Belief reweight(const Belief& mu, const numvec& likelihood) {
    numvec w(mu.size());
    prec_t total = 0;
    for (std::size_t t = 0; t < mu.size(); ++t) {
        w[t] = likelihood[t] * mu[t];
        total += w[t];
    }
    if (!(total > 0)) return mu;
    for (auto& x : w) x /= total;
    return Belief(std::move(w));
}

inline void require_feasible(const StatisticalMDP& m, std::size_t n, std::size_t x, std::size_t a) {
    if (!m.is_feasible(n, x, a)) {
        std::ostringstream os;
        os << "infeasible action: n=" << n << ", x=" << (x < m.num_states() ? m.states()[x] : std::to_string(x))
           << ", a=" << (a < m.num_actions() ? m.actions()[a] : std::to_string(a));
        throw std::invalid_argument(os.str());
    }
}

inline void require_dims(const StatisticalMDP& m, const Belief& mu) {
    if (mu.size() != m.num_params()) throw std::invalid_argument("belief dimension does not match parameter set");
}

} // namespace detail

/// Belief after observing the initial state x0.
inline Belief posterior_initial(const StatisticalMDP& m, const Belief& prior, std::size_t x0) {
    detail::require_dims(m, prior);
    numvec lik(m.num_params());
    for (std::size_t t = 0; t < m.num_params(); ++t) lik[t] = m.initial(t, x0);
    return detail::reweight(prior, lik);
}

/// Belief after choosing a at decision epoch n in state x and observing x_next.
inline Belief posterior_update(const StatisticalMDP& m, std::size_t n, std::size_t x, const Belief& mu, std::size_t a,
                               std::size_t x_next) {
    detail::require_dims(m, mu);
    detail::require_feasible(m, n, x, a);
    numvec lik(m.num_params());
    for (std::size_t t = 0; t < m.num_params(); ++t) lik[t] = m.transition(n, t, x, a, x_next);
    return detail::reweight(mu, lik);
}

/// Mixture kernel sum_theta mu(theta) Q_n^theta(.|x,a), paired with the posteriors.
inline PredictiveDistribution predictive(const StatisticalMDP& m, std::size_t n, std::size_t x, const Belief& mu,
                                         std::size_t a) {
    detail::require_dims(m, mu);
    detail::require_feasible(m, n, x, a);
    PredictiveDistribution out;
    out.mass.assign(m.num_states(), 0.0);
    out.posterior.reserve(m.num_states());
    for (std::size_t xn = 0; xn < m.num_states(); ++xn) {
        for (std::size_t t = 0; t < m.num_params(); ++t) out.mass[xn] += mu[t] * m.transition(n, t, x, a, xn);
        out.posterior.push_back(posterior_update(m, n, x, mu, a, xn));
    }
    detail::normalize_checked(out.mass, "predictive distribution");
    return out;
}

} // namespace ambimdp
