#pragma once

// Worst-case prior search and saddle-point assembly.
//
// The outer problem maximizes a concave function of the prior:
//   entropic: mu -> C_N(mu) - (1/gamma) I(mu || mu0) over the simplex on supp mu0
//   avar:     mu -> C_N(mu) over Q_gamma = {mu : mu <= mu0 / (1-gamma)}
//   robust:   mu -> C_N(mu) over the simplex on a given support
// where C_N(mu) is the optimal Bayes cost, computed exactly per candidate.
// Two-point supports use golden-section search on the segment; larger
// supports use a simplex grid followed by pairwise-transfer line searches.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ambimdp/bayes.hpp"
#include "ambimdp/model.hpp"
#include "ambimdp/risk.hpp"

namespace ambimdp {

enum class AmbiguityMode { entropic, avar, robust };

inline std::string to_string(AmbiguityMode m) {
    switch (m) {
    case AmbiguityMode::entropic: return "entropic";
    case AmbiguityMode::avar: return "avar";
    case AmbiguityMode::robust: return "robust";
    }
    return "unknown";
}

inline AmbiguityMode parse_mode(const std::string& s) {
    if (s == "entropic") return AmbiguityMode::entropic;
    if (s == "avar") return AmbiguityMode::avar;
    if (s == "robust") return AmbiguityMode::robust;
    throw std::invalid_argument("unknown ambiguity mode: " + s);
}

struct SolverOptions {
    prec_t tol = 1e-6;
    std::size_t tree_cap = kDefaultTreeCap;
    /// Simplex grid step for supports of size > 2; 0 means sqrt(tol).
    prec_t grid_resolution = 0;
    /// The grid is coarsened until it has at most this many points.
    std::size_t max_grid_points = 20000;
};

struct TraceEntry {
    Belief mu;
    prec_t value;
    bool operator==(const TraceEntry&) const = default;
};

struct SaddleResult {
    AmbiguityMode mode = AmbiguityMode::entropic;
    prec_t gamma = 0; ///< unused in robust mode
    Belief mu0;       ///< nominal prior (robust: the support reference)
    Belief mu_star;
    /// Ends of the segment of maximizers through mu_star; both equal mu_star when unique.
    Belief mu_star_lo, mu_star_hi;
    DeterministicPolicy policy_star;
    numvec cost_profile; ///< theta -> C_{N pi*}(theta)
    prec_t value = 0;
    prec_t gap = 0;
    std::vector<TraceEntry> trace;
};

inline constexpr prec_t kDualityTol = 1e-10;

/// Optimal Bayes cost minus the entropy penalty; -inf off the support of mu0.
inline prec_t phi_entropic(const StatisticalMDP& m, const Belief& mu0, prec_t gamma, const Belief& mu,
                           std::size_t tree_cap = kDefaultTreeCap) {
    detail::require_positive_gamma(gamma);
    const prec_t I = relative_entropy(mu, mu0);
    if (!std::isfinite(I)) return -std::numeric_limits<prec_t>::infinity();
    return solve_bayes(m, mu, tree_cap).value - I / gamma;
}

namespace detail {

/// Feasible priors: supported on `support`, mu(theta) <= upper[theta].
struct PriorRegion {
    std::vector<std::size_t> support;
    numvec upper;

    bool contains(const numvec& w) const {
        for (std::size_t t = 0; t < w.size(); ++t)
            if (w[t] > upper[t] + 1e-12) return false;
        return true;
    }
};

inline PriorRegion region_for(AmbiguityMode mode, const Belief& mu0, prec_t gamma) {
    PriorRegion r;
    r.support = mu0.support();
    r.upper.assign(mu0.size(), 0.0);
    for (std::size_t t : r.support)
        r.upper[t] = mode == AmbiguityMode::avar ? std::min<prec_t>(1, mu0[t] / (1 - gamma)) : 1;
    return r;
}

inline Belief segment_point(std::size_t k, std::size_t i, std::size_t j, prec_t t) {
    numvec w(k, 0.0);
    w[i] = t;
    w[j] = 1 - t;
    return Belief(std::move(w));
}

/// Golden-section maximization of a concave function on [lo, hi] to interval width < tol.
inline prec_t golden_maximize(const std::function<prec_t(prec_t)>& f, prec_t lo, prec_t hi, prec_t tol) {
    static const prec_t inv_phi = (std::sqrt(5.0) - 1) / 2;
    prec_t a = lo, b = hi;
    prec_t c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    prec_t fc = f(c), fd = f(d);
    while (b - a >= tol) {
        if (fc < fd) {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        } else {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        }
    }
    return (a + b) / 2;
}

/// Smallest/largest point between `from` and `toward` where f stays >= level; f(from) >= level.
inline prec_t superlevel_edge(const std::function<prec_t(prec_t)>& f, prec_t from, prec_t toward, prec_t level) {
    if (f(toward) >= level) return toward;
    prec_t in = from, out = toward;
    for (int it = 0; it < 200 && std::abs(out - in) > 1e-15; ++it) {
        const prec_t mid = (in + out) / 2;
        if (f(mid) >= level) in = mid;
        else out = mid;
    }
    return in;
}

inline prec_t plateau_level(prec_t best) { return best - 1e-11 * (1 + std::abs(best)); }

/// Compositions of m into the support with each share <= upper; stops early past `limit`.
inline void enumerate_grid(const PriorRegion& r, std::size_t k, std::size_t m, std::size_t limit,
                           std::vector<numvec>& out) {
    const std::size_t s = r.support.size();
    std::vector<std::size_t> parts(s, 0);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t left) {
        if (out.size() > limit) return;
        const std::size_t t = r.support[pos];
        if (pos + 1 == s) {
            if (static_cast<prec_t>(left) / static_cast<prec_t>(m) > r.upper[t] + 1e-12) return;
            parts[pos] = left;
            numvec w(k, 0.0);
            for (std::size_t q = 0; q < s; ++q)
                w[r.support[q]] = static_cast<prec_t>(parts[q]) / static_cast<prec_t>(m);
            out.push_back(std::move(w));
            return;
        }
        for (std::size_t c = 0; c <= left; ++c) {
            if (static_cast<prec_t>(c) / static_cast<prec_t>(m) > r.upper[t] + 1e-12) break;
            parts[pos] = c;
            rec(pos + 1, left - c);
        }
    };
    rec(0, m);
}

struct SearchOutcome {
    Belief mu_star, lo, hi;
};

/**
 * Maximizes a concave objective over a prior region. With `prefer_reference`
 * (used where flat maximizer sets are expected) the maximizer closest to
 * `reference` is returned.
 */
inline SearchOutcome maximize_over_region(const std::function<prec_t(const Belief&)>& f, const PriorRegion& r,
                                          const Belief& reference, const SolverOptions& opt, bool prefer_reference) {
    const std::size_t k = reference.size();
    const auto& S = r.support;
    if (S.empty()) throw std::invalid_argument("prior region has empty support");

    if (S.size() == 1) {
        Belief p = Belief::point_mass(k, S[0]);
        (void)f(p);
        return {p, p, p};
    }

    if (S.size() == 2) {
        const std::size_t i = S[0], j = S[1];
        const prec_t lo = std::max<prec_t>(0, 1 - r.upper[j]);
        const prec_t hi = std::min<prec_t>(1, r.upper[i]);
        if (lo > hi + 1e-12) throw std::invalid_argument("prior region is empty");
        auto g = [&](prec_t t) { return f(segment_point(k, i, j, std::clamp(t, lo, hi))); };
        prec_t t_best = golden_maximize(g, lo, hi, opt.tol);
        prec_t f_best = g(t_best);
        for (prec_t e : {lo, hi}) {
            const prec_t fe = g(e);
            if (fe > f_best) {
                t_best = e;
                f_best = fe;
            }
        }
        if (!prefer_reference) {
            Belief p = segment_point(k, i, j, t_best);
            return {p, p, p};
        }
        const prec_t level = plateau_level(f_best);
        const prec_t t_lo = superlevel_edge(g, t_best, lo, level);
        const prec_t t_hi = superlevel_edge(g, t_best, hi, level);
        if (t_hi - t_lo <= opt.tol) {
            Belief p = segment_point(k, i, j, t_best);
            return {p, p, p};
        }
        const prec_t t_ref = std::clamp(reference[i], t_lo, t_hi);
        return {segment_point(k, i, j, t_ref), segment_point(k, i, j, t_lo), segment_point(k, i, j, t_hi)};
    }

    // grid
    const prec_t h = opt.grid_resolution > 0 ? opt.grid_resolution : std::sqrt(opt.tol);
    std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(1 / h)));
    std::vector<numvec> grid;
    for (;;) {
        grid.clear();
        enumerate_grid(r, k, m, opt.max_grid_points, grid);
        if (grid.size() <= opt.max_grid_points || m == 1) break;
        m = std::max<std::size_t>(1, m / 2);
    }
    numvec best = reference.weights();
    prec_t f_best = f(reference);
    for (const auto& w : grid) {
        const prec_t v = f(Belief(w));
        if (v > f_best) {
            f_best = v;
            best = w;
        }
    }

    // pairwise transfer refinement: move mass from j to i along a line
    for (int sweep = 0; sweep < 50; ++sweep) {
        bool improved = false;
        for (std::size_t i : S) {
            for (std::size_t j : S) {
                if (i == j) continue;
                const prec_t room = std::min(best[j], r.upper[i] - best[i]);
                if (room <= 0) continue;
                auto along = [&](prec_t s) {
                    numvec w = best;
                    w[i] += s;
                    w[j] -= s;
                    w[j] = std::max<prec_t>(0, w[j]);
                    return f(Belief(w));
                };
                prec_t s = golden_maximize(along, 0, room, opt.tol);
                prec_t fs = along(s);
                const prec_t fr = along(room);
                if (fr > fs) {
                    s = room;
                    fs = fr;
                }
                if (fs > f_best + 1e-12 * (1 + std::abs(f_best))) {
                    best[i] += s;
                    best[j] = std::max<prec_t>(0, best[j] - s);
                    f_best = fs;
                    improved = true;
                }
            }
        }
        if (!improved) break;
    }

    Belief star(best);
    if (prefer_reference) {
        // slide toward the reference while staying on the maximizer set
        auto g = [&](prec_t s) {
            numvec w(k);
            for (std::size_t t = 0; t < k; ++t) w[t] = (1 - s) * best[t] + s * reference[t];
            return f(Belief(std::move(w)));
        };
        const prec_t s = superlevel_edge(g, 0, 1, plateau_level(f_best));
        numvec w(k);
        for (std::size_t t = 0; t < k; ++t) w[t] = (1 - s) * best[t] + s * reference[t];
        star = Belief(std::move(w));
    }
    return {star, star, star};
}

/// Direct risk of a cost profile under the mode's outer functional.
inline prec_t direct_risk(AmbiguityMode mode, const CostProfile& v, const Belief& mu0, prec_t gamma) {
    switch (mode) {
    case AmbiguityMode::entropic: return entropic_risk(v, mu0, gamma);
    case AmbiguityMode::avar: return avar_quantile(v, mu0, gamma);
    case AmbiguityMode::robust: return essential_max(v, mu0);
    }
    return 0;
}

inline prec_t outer_penalty(AmbiguityMode mode, const Belief& mu, const Belief& mu0, prec_t gamma) {
    return mode == AmbiguityMode::entropic ? relative_entropy(mu, mu0) / gamma : 0;
}

/**
 * Picks the saddle policy among Bayes-optimal policies at mu_star. At a kink
 * of C_N several deterministic policies are Bayes-optimal; the lowest-index
 * tie-break at mu_star alone may pick one whose direct risk exceeds the
 * penalized value. Candidates are the Bayes policies at mu_star and at small
 * moves toward each vertex of the region.
 */
inline void assemble_saddle(const StatisticalMDP& m, SaddleResult& res, const PriorRegion& region,
                            const SolverOptions& opt) {
    auto base = solve_bayes(m, res.mu_star, opt.tree_cap);
    const prec_t bayes_value = base.value;
    const prec_t delta = std::max<prec_t>(10 * opt.tol, 1e-7);

    std::vector<std::vector<std::size_t>> candidates{base.policy.action};
    for (std::size_t i : region.support) {
        numvec w = res.mu_star.weights();
        if (w[i] >= region.upper[i]) continue;
        const prec_t step = std::min(delta, region.upper[i] - w[i]);
        const prec_t rest = 1 - w[i];
        if (rest <= 0) continue;
        for (std::size_t t = 0; t < w.size(); ++t) w[t] = t == i ? w[t] + step : w[t] * (1 - step / rest);
        candidates.push_back(solve_bayes(m, Belief(std::move(w)), opt.tree_cap).policy.action);
    }

    prec_t best_risk = std::numeric_limits<prec_t>::infinity();
    for (auto& actions : candidates) {
        DeterministicPolicy p{base.policy.tree, std::move(actions)};
        if (bayes_cost(m, p, res.mu_star) > bayes_value + 1e-9 * (1 + std::abs(bayes_value))) continue;
        auto profile = policy_cost_profile(m, p);
        const prec_t risk = direct_risk(res.mode, CostProfile(profile), res.mu0, res.gamma);
        if (risk < best_risk - 1e-14) {
            best_risk = risk;
            res.policy_star = std::move(p);
            res.cost_profile = std::move(profile);
        }
    }

    res.value = bayes_value - outer_penalty(res.mode, res.mu_star, res.mu0, res.gamma);
    const prec_t diff = best_risk - res.value;
    if (diff < -kDualityTol * (1 + std::abs(res.value)))
        throw std::logic_error("weak duality violated: policy risk below the worst-prior value");
    res.gap = std::max<prec_t>(0, diff);
}

inline void require_tol(prec_t tol) {
    if (!(tol > 0)) throw std::invalid_argument("solver tolerance must be positive");
}

inline SaddleResult solve_mode(const StatisticalMDP& m, AmbiguityMode mode, const Belief& mu0, prec_t gamma,
                               const SolverOptions& opt) {
    require_tol(opt.tol);
    require_dims(m, mu0);
    SaddleResult res;
    res.mode = mode;
    res.gamma = gamma;
    res.mu0 = mu0;
    const auto region = region_for(mode, mu0, gamma);
    auto objective = [&](const Belief& mu) {
        const prec_t v = solve_bayes(m, mu, opt.tree_cap).value - outer_penalty(mode, mu, mu0, gamma);
        res.trace.push_back({mu, v});
        return v;
    };
    const bool flat_maximizers = mode != AmbiguityMode::entropic;
    auto found = maximize_over_region(objective, region, mu0, opt, flat_maximizers);
    res.mu_star = std::move(found.mu_star);
    res.mu_star_lo = std::move(found.lo);
    res.mu_star_hi = std::move(found.hi);
    assemble_saddle(m, res, region, opt);
    return res;
}

} // namespace detail

/// Saddle point of the entropic ambiguity problem: worst prior mu*, Bayes policy pi*, value V_N.
inline SaddleResult solve_entropic(const StatisticalMDP& m, const Belief& mu0, prec_t gamma,
                                   const SolverOptions& opt = {}) {
    detail::require_positive_gamma(gamma);
    return detail::solve_mode(m, AmbiguityMode::entropic, mu0, gamma, opt);
}

/// Saddle point of the AVaR ambiguity problem; flat maximizer sets resolve to the point closest to mu0.
inline SaddleResult solve_avar(const StatisticalMDP& m, const Belief& mu0, prec_t gamma,
                               const SolverOptions& opt = {}) {
    detail::require_unit_level(gamma, "solve_avar");
    return detail::solve_mode(m, AmbiguityMode::avar, mu0, gamma, opt);
}

/// Worst case over all priors on the support of `support`, which also serves as the tie reference.
inline SaddleResult solve_robust(const StatisticalMDP& m, const Belief& support, const SolverOptions& opt = {}) {
    return detail::solve_mode(m, AmbiguityMode::robust, support, 0, opt);
}

struct SaddleCertificate {
    bool mu_side_ok = false;
    prec_t mu_side_excess = 0; ///< max over the grid of L(mu, pi*) - L(mu*, pi*)
    bool pi_side_ok = false;
    prec_t pi_side_error = 0; ///< |C_{N pi*}(mu*) - C_N(mu*)|
    bool gap_ok = false;
    prec_t gap = 0;
    std::size_t grid_points = 0;

    bool passed() const { return mu_side_ok && pi_side_ok && gap_ok; }
};

/**
 * Numerical check of the saddle inequalities for a solver result:
 * L(mu, pi*) <= L(mu*, pi*) + tol on a grid of the feasible priors, Bayes
 * optimality of pi* at mu*, and gap <= tol.
 */
inline SaddleCertificate certify_saddle(const StatisticalMDP& m, const SaddleResult& res,
                                        prec_t mu_grid_resolution = 1e-3, prec_t tol = 1e-6,
                                        std::size_t tree_cap = kDefaultTreeCap) {
    SaddleCertificate rep;
    const auto region = detail::region_for(res.mode, res.mu0, res.gamma);
    const CostProfile profile(res.cost_profile);
    auto L = [&](const Belief& mu) {
        return expectation(profile, mu) - detail::outer_penalty(res.mode, mu, res.mu0, res.gamma);
    };

    std::vector<numvec> grid;
    const std::size_t k = res.mu0.size();
    const std::size_t steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(1 / mu_grid_resolution)));
    detail::enumerate_grid(region, k, steps, std::numeric_limits<std::size_t>::max() - 1, grid);
    if (region.support.size() == 2) {
        const std::size_t i = region.support[0], j = region.support[1];
        numvec a(k, 0.0), b(k, 0.0);
        a[i] = std::max<prec_t>(0, 1 - region.upper[j]);
        a[j] = 1 - a[i];
        b[i] = std::min<prec_t>(1, region.upper[i]);
        b[j] = 1 - b[i];
        grid.push_back(a);
        grid.push_back(b);
    }
    const prec_t at_star = L(res.mu_star);
    rep.mu_side_excess = -std::numeric_limits<prec_t>::infinity();
    for (const auto& w : grid) rep.mu_side_excess = std::max(rep.mu_side_excess, L(Belief(w)) - at_star);
    rep.grid_points = grid.size();
    rep.mu_side_ok = rep.mu_side_excess <= tol;

    const prec_t bayes = solve_bayes(m, res.mu_star, tree_cap).value;
    rep.pi_side_error = std::abs(bayes_cost(m, res.policy_star, res.mu_star) - bayes);
    rep.pi_side_ok = rep.pi_side_error <= 1e-10 * (1 + std::abs(bayes));

    rep.gap = res.gap;
    rep.gap_ok = res.gap <= tol;
    return rep;
}

} // namespace ambimdp
