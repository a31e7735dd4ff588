#pragma once

// Risk functionals of a cost profile theta -> v(theta) under a finite prior:
// entropic risk with its Kullback-Leibler dual, Value at Risk and Average
// Value at Risk with its density-bounded dual.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ambimdp/model.hpp"

namespace ambimdp {

/// Cost per parameter, e.g. the map theta -> C_{N pi}(theta) of a policy.
class CostProfile {
public:
    CostProfile() = default;
    explicit CostProfile(numvec values) : v_(std::move(values)) {
        for (prec_t x : v_)
            if (!std::isfinite(x)) throw std::invalid_argument("CostProfile: entries must be finite");
    }
    std::size_t size() const { return v_.size(); }
    prec_t operator[](std::size_t i) const { return v_[i]; }
    const numvec& values() const { return v_; }

private:
    numvec v_;
};

/// Dual result: optimal value and a maximizing belief.
struct DualSolution {
    prec_t value;
    Belief argmax;
};

namespace detail {

inline void require_same_size(std::size_t a, std::size_t b) {
    if (a != b) throw std::invalid_argument("dimension mismatch between cost profile / beliefs");
}
inline void require_positive_gamma(prec_t gamma) {
    if (!(gamma > 0) || !std::isfinite(gamma)) throw std::invalid_argument("entropic risk requires gamma > 0");
}
inline void require_unit_level(prec_t level, const char* what) {
    if (!(level > 0 && level < 1)) throw std::invalid_argument(std::string(what) + " requires a level in (0,1)");
}

/// log sum_theta mu0(theta) exp(gamma v(theta)) over supp mu0, shifted by the max exponent.
inline prec_t log_mgf(const CostProfile& v, const Belief& mu0, prec_t gamma) {
    prec_t shift = -std::numeric_limits<prec_t>::infinity();
    for (std::size_t t = 0; t < v.size(); ++t)
        if (mu0[t] > 0) shift = std::max(shift, gamma * v[t]);
    prec_t s = 0;
    for (std::size_t t = 0; t < v.size(); ++t)
        if (mu0[t] > 0) s += mu0[t] * std::exp(gamma * v[t] - shift);
    return shift + std::log(s);
}

/// Indices of supp mu0 sorted by ascending cost; ties by index.
inline std::vector<std::size_t> ascending_support(const CostProfile& v, const Belief& mu0) {
    std::vector<std::size_t> idx;
    for (std::size_t t = 0; t < v.size(); ++t)
        if (mu0[t] > 0) idx.push_back(t);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    return idx;
}

} // namespace detail

inline prec_t expectation(const CostProfile& v, const Belief& mu) {
    detail::require_same_size(v.size(), mu.size());
    prec_t s = 0;
    for (std::size_t t = 0; t < v.size(); ++t)
        if (mu[t] > 0) s += mu[t] * v[t];
    return s;
}

/// Largest cost on supp mu.
inline prec_t essential_max(const CostProfile& v, const Belief& mu) {
    detail::require_same_size(v.size(), mu.size());
    prec_t m = -std::numeric_limits<prec_t>::infinity();
    for (std::size_t t = 0; t < v.size(); ++t)
        if (mu[t] > 0) m = std::max(m, v[t]);
    return m;
}

/// Kullback-Leibler divergence I(mu || nu); +inf when mu is not absolutely continuous w.r.t. nu.
inline prec_t relative_entropy(const Belief& mu, const Belief& nu) {
    detail::require_same_size(mu.size(), nu.size());
    prec_t s = 0;
    for (std::size_t t = 0; t < mu.size(); ++t) {
        if (mu[t] <= 0) continue;
        if (nu[t] <= 0) return std::numeric_limits<prec_t>::infinity();
        s += mu[t] * std::log(mu[t] / nu[t]);
    }
    return std::max(s, prec_t{0});
}

/// (1/gamma) log E_mu0[exp(gamma v)].
inline prec_t entropic_risk(const CostProfile& v, const Belief& mu0, prec_t gamma) {
    detail::require_positive_gamma(gamma);
    detail::require_same_size(v.size(), mu0.size());
    const prec_t r = detail::log_mgf(v, mu0, gamma) / gamma;
    // rounding can push the result marginally outside its range
    return std::clamp(r, expectation(v, mu0), essential_max(v, mu0));
}

/// Exponential tilt mu_hat(theta) ∝ exp(gamma v(theta)) mu0(theta), the maximizer of the entropic dual.
inline Belief tilted_prior(const CostProfile& v, const Belief& mu0, prec_t gamma) {
    detail::require_positive_gamma(gamma);
    detail::require_same_size(v.size(), mu0.size());
    const prec_t top = essential_max(v, mu0);
    numvec w(v.size(), 0.0);
    for (std::size_t t = 0; t < v.size(); ++t)
        if (mu0[t] > 0) w[t] = mu0[t] * std::exp(gamma * (v[t] - top));
    const prec_t total = std::accumulate(w.begin(), w.end(), prec_t{0});
    for (auto& x : w) x /= total;
    return Belief(std::move(w));
}

/// Penalized objective E_mu[v] - (1/gamma) I(mu || mu0).
inline prec_t entropic_dual_objective(const CostProfile& v, const Belief& mu0, prec_t gamma, const Belief& mu) {
    const prec_t I = relative_entropy(mu, mu0);
    if (!std::isfinite(I)) return -std::numeric_limits<prec_t>::infinity();
    return expectation(v, mu) - I / gamma;
}

/**
 * sup_mu { E_mu[v] - (1/gamma) I(mu||mu0) } via the exponential tilt.
 *
 * The maximizer is confirmed by probing pairwise mass transfers of size
 * `grid_resolution` on supp mu0; a strictly better probe replaces it.
 */
inline DualSolution entropic_dual_value(const CostProfile& v, const Belief& mu0, prec_t gamma,
                                        prec_t grid_resolution = 1e-3) {
    Belief best = tilted_prior(v, mu0, gamma);
    prec_t value = entropic_dual_objective(v, mu0, gamma, best);

    const auto supp = mu0.support();
    bool improved = true;
    for (int sweep = 0; improved && sweep < 100; ++sweep) {
        improved = false;
        for (std::size_t i : supp) {
            for (std::size_t j : supp) {
                if (i == j) continue;
                numvec w = best.weights();
                const prec_t step = std::min(grid_resolution, w[j]);
                if (step <= 0) continue;
                w[i] += step;
                w[j] -= step;
                Belief probe(std::move(w));
                const prec_t obj = entropic_dual_objective(v, mu0, gamma, probe);
                if (obj > value + 1e-12 * (1 + std::abs(value))) {
                    best = std::move(probe);
                    value = obj;
                    improved = true;
                }
            }
        }
    }
    return {value, best};
}

/// Lower alpha-quantile inf{x : mu0(v <= x) >= alpha}.
inline prec_t value_at_risk(const CostProfile& v, const Belief& mu0, prec_t alpha) {
    detail::require_unit_level(alpha, "value_at_risk");
    detail::require_same_size(v.size(), mu0.size());
    const auto idx = detail::ascending_support(v, mu0);
    prec_t cum = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        cum += mu0[idx[k]];
        // group equal values so the CDF is evaluated at attained points only
        if (k + 1 < idx.size() && v[idx[k + 1]] == v[idx[k]]) continue;
        if (cum >= alpha - 1e-14) return v[idx[k]];
    }
    return v[idx.back()];
}

/// (1/(1-gamma)) int_gamma^1 VaR_alpha dalpha, integrated exactly over the piecewise-constant quantile.
inline prec_t avar_quantile(const CostProfile& v, const Belief& mu0, prec_t gamma) {
    detail::require_unit_level(gamma, "avar_quantile");
    detail::require_same_size(v.size(), mu0.size());
    const auto idx = detail::ascending_support(v, mu0);
    prec_t lower = 0, integral = 0;
    for (std::size_t t : idx) {
        const prec_t upper = lower + mu0[t];
        const prec_t overlap = std::max(prec_t{0}, std::min(upper, prec_t{1}) - std::max(lower, gamma));
        integral += overlap * v[t];
        lower = upper;
    }
    const prec_t r = integral / (1 - gamma);
    return std::clamp(r, value_at_risk(v, mu0, gamma), essential_max(v, mu0));
}

/// True iff mu lies in the AVaR ambiguity set: mu(theta) <= mu0(theta)/(1-gamma).
inline bool in_avar_set(const Belief& mu, const Belief& mu0, prec_t gamma, prec_t tol = 1e-12) {
    detail::require_unit_level(gamma, "in_avar_set");
    detail::require_same_size(mu.size(), mu0.size());
    for (std::size_t t = 0; t < mu.size(); ++t)
        if (mu[t] > mu0[t] / (1 - gamma) + tol) return false;
    return true;
}

/// max_w E_w[v] over 0 <= w <= mu0/(1-gamma), sum w = 1: greedy fill in decreasing cost, ties by index.
inline DualSolution avar_dual(const CostProfile& v, const Belief& mu0, prec_t gamma) {
    detail::require_unit_level(gamma, "avar_dual");
    detail::require_same_size(v.size(), mu0.size());
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
    numvec w(v.size(), 0.0);
    prec_t remaining = 1, value = 0;
    for (std::size_t t : idx) {
        if (remaining <= 0) break;
        w[t] = std::min(mu0[t] / (1 - gamma), remaining);
        remaining -= w[t];
        value += w[t] * v[t];
    }
    return {value, Belief(std::move(w))};
}

/// -log sum_theta sqrt(mu(theta) nu(theta)); +inf for disjoint supports.
inline prec_t bhattacharyya(const Belief& mu, const Belief& nu) {
    detail::require_same_size(mu.size(), nu.size());
    prec_t s = 0;
    for (std::size_t t = 0; t < mu.size(); ++t) s += std::sqrt(mu[t] * nu[t]);
    if (!(s > 0)) return std::numeric_limits<prec_t>::infinity();
    return std::max(prec_t{0}, -std::log(s));
}

} // namespace ambimdp
