#pragma once

// Independent checks of policy evaluation: forward enumeration of every
// positive-probability trajectory, and seeded Monte-Carlo rollouts.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ambimdp/bayes.hpp"
#include "ambimdp/model.hpp"

namespace ambimdp {

inline constexpr std::size_t kDefaultTrajectoryCap = 1'000'000;

/// One history x0, a0, x1, ..., xN with its probability and total cost.
struct TrajectoryRecord {
    std::vector<std::size_t> states;
    std::vector<std::size_t> actions;
    prec_t probability;
    prec_t total_cost;
};

struct Enumeration {
    prec_t value;
    std::vector<TrajectoryRecord> trajectories;
};

inline Enumeration enumerate_cost(const StatisticalMDP& m, std::size_t theta, const DeterministicPolicy& policy,
                                  std::size_t cap = kDefaultTrajectoryCap) {
    detail::require_policy_matches(m, policy);
    if (theta >= m.num_params()) throw std::out_of_range("parameter index out of range");
    const auto& tree = *policy.tree;

    Enumeration out{0, {}};
    TrajectoryRecord path{{}, {}, 1, 0};

    auto walk = [&](auto&& self, std::size_t node, prec_t prob, prec_t cost) -> void {
        const auto& nd = tree.nodes[node];
        path.states.push_back(nd.state);
        if (nd.depth == m.horizon()) {
            if (out.trajectories.size() >= cap) {
                std::ostringstream os;
                os << "trajectory enumeration exceeds cap " << cap;
                throw GuardError(os.str());
            }
            const prec_t total = cost + m.terminal_cost(theta, nd.state);
            out.trajectories.push_back({path.states, path.actions, prob, total});
            out.value += prob * total;
        } else {
            const std::size_t a = policy.action[node];
            path.actions.push_back(a);
            const prec_t c = m.stage_cost(nd.depth, theta, nd.state, a);
            for (std::size_t xn = 0; xn < m.num_states(); ++xn) {
                const prec_t p = m.transition(nd.depth, theta, nd.state, a, xn);
                if (!(p > 0)) continue;
                std::size_t child = kNoAction;
                for (const auto& ch : tree.branch(node, a).children)
                    if (ch.next_state == xn) child = ch.node;
                if (child == kNoAction) throw std::logic_error("tree is missing a reachable successor");
                self(self, child, prob * p, cost + c);
            }
            path.actions.pop_back();
        }
        path.states.pop_back();
    };

    for (const auto& r : tree.roots) {
        const prec_t p0 = m.initial(theta, r.state);
        if (p0 > 0) walk(walk, r.node, p0, 0);
    }
    return out;
}

/// Delimiter-separated dump: probability,total_cost,x0,a0,x1,...,xN (labels).
inline void write_trajectories(std::ostream& os, const StatisticalMDP& m, const std::vector<TrajectoryRecord>& recs,
                               char sep = ',') {
    os.precision(12);
    os << "probability" << sep << "total_cost" << sep << "path\n";
    for (const auto& r : recs) {
        os << r.probability << sep << r.total_cost << sep;
        for (std::size_t i = 0; i < r.states.size(); ++i) {
            if (i) os << ' ';
            os << m.states()[r.states[i]];
            if (i < r.actions.size()) os << ' ' << m.actions()[r.actions[i]];
        }
        os << '\n';
    }
}

struct MonteCarloEstimate {
    prec_t mean;
    prec_t half_width_95;
};

namespace detail {

/// Uniform draw in [0,1) from the top 53 bits; portable given a fixed engine.
inline prec_t unit_uniform(std::mt19937_64& rng) { return static_cast<prec_t>(rng() >> 11) * 0x1.0p-53; }

/// Inverse-CDF draw; falls back to the last positive entry when rounding leaves u above the total.
template <class Prob>
std::size_t draw_index(std::size_t n, Prob prob, prec_t u) {
    prec_t cum = 0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const prec_t p = prob(i);
        if (!(p > 0)) continue;
        cum += p;
        last = i;
        if (u < cum) return i;
    }
    return last;
}

} // namespace detail

/**
 * Seeded Monte-Carlo estimate of C_{N pi}(theta) with a normal-approximation
 * 95% half-width. The generator is std::mt19937_64 seeded with `seed`;
 * each uniform takes the top 53 bits of one engine output, and each
 * trajectory consumes one uniform per transition starting with the
 * initial state, so results are reproducible across platforms.
 */
inline MonteCarloEstimate mc_estimate(const StatisticalMDP& m, std::size_t theta, const DeterministicPolicy& policy,
                                      std::size_t samples, std::uint64_t seed) {
    detail::require_policy_matches(m, policy);
    if (samples < 1) throw std::invalid_argument("mc_estimate requires at least one sample");
    if (theta >= m.num_params()) throw std::out_of_range("parameter index out of range");
    const auto& tree = *policy.tree;
    std::mt19937_64 rng(seed);

    auto root_of = [&](std::size_t x) {
        for (const auto& r : tree.roots)
            if (r.state == x) return r.node;
        throw std::logic_error("tree is missing a reachable initial state");
    };

    prec_t mean = 0, m2 = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t x0 =
            detail::draw_index(m.num_states(), [&](std::size_t i) { return m.initial(theta, i); }, detail::unit_uniform(rng));
        std::size_t node = root_of(x0);
        prec_t cost = 0;
        while (tree.nodes[node].depth < m.horizon()) {
            const auto& nd = tree.nodes[node];
            const std::size_t a = policy.action[node];
            cost += m.stage_cost(nd.depth, theta, nd.state, a);
            const std::size_t xn = detail::draw_index(
                m.num_states(), [&](std::size_t i) { return m.transition(nd.depth, theta, nd.state, a, i); },
                detail::unit_uniform(rng));
            std::size_t next = kNoAction;
            for (const auto& ch : tree.branch(node, a).children)
                if (ch.next_state == xn) next = ch.node;
            if (next == kNoAction) throw std::logic_error("tree is missing a reachable successor");
            node = next;
        }
        cost += m.terminal_cost(theta, tree.nodes[node].state);
        // Welford
        const prec_t delta = cost - mean;
        mean += delta / static_cast<prec_t>(s + 1);
        m2 += delta * (cost - mean);
    }
    const prec_t var = samples > 1 ? m2 / static_cast<prec_t>(samples - 1) : 0;
    return {mean, 1.959963984540054 * std::sqrt(var / static_cast<prec_t>(samples))};
}

} // namespace ambimdp
