#pragma once

// Exact Bayesian dynamic programming on the tree of (state, belief) pairs
// reachable from a prior. The belief is a sufficient statistic for the
// history, so the recursion over this tree yields the optimal Bayes policy.

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ambimdp/belief.hpp"
#include "ambimdp/model.hpp"

namespace ambimdp {

inline constexpr std::size_t kNoAction = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kDefaultTreeCap = 10'000'000;

struct TreeChild {
    std::size_t next_state;
    prec_t mass; ///< predictive mass under the node belief
    std::size_t node;
};

struct TreeBranch {
    std::size_t action;
    std::vector<TreeChild> children;
};

struct TreeNode {
    std::size_t depth;
    std::size_t state;
    Belief belief;
    std::size_t parent; ///< kNoAction for roots
    std::vector<TreeBranch> branches;
};

struct TreeRoot {
    std::size_t state;
    prec_t mass; ///< prior-mixture probability of the initial state
    std::size_t node;
};

/**
 * Histories reachable within the horizon, folded to (depth, state, belief).
 *
 * A successor is kept when it has positive probability under at least one
 * parameter, not only under the prior. The tree structure therefore does not
 * depend on the prior: policies built from different priors are defined on
 * the same histories and can be evaluated under any parameter. Successors
 * with zero predictive mass keep the parent belief and weigh zero in the
 * Bayes recursion.
 *
 * Nodes are stored in breadth-first order, so children always have larger
 * indices than their parent.
 */
struct ReachableBeliefTree {
    ModelShape shape;
    Belief prior;
    std::vector<TreeRoot> roots;
    std::vector<TreeNode> nodes;

    const TreeBranch& branch(std::size_t node, std::size_t action) const {
        for (const auto& b : nodes.at(node).branches)
            if (b.action == action) return b;
        throw std::invalid_argument("action is not feasible at tree node " + std::to_string(node));
    }
};

/// Action per tree node; kNoAction at depth N.
struct DeterministicPolicy {
    std::shared_ptr<const ReachableBeliefTree> tree;
    std::vector<std::size_t> action;
};

struct ValueSolution {
    prec_t value = 0;
    numvec node_value; ///< J_n(x, mu) per tree node
    DeterministicPolicy policy;
};

/// Worst-case node count sum_{n<=N} |E| (|E||A|)^n, as a double to avoid overflow.
inline prec_t tree_size_bound(const StatisticalMDP& m) {
    const prec_t E = static_cast<prec_t>(m.num_states());
    const prec_t branch = E * static_cast<prec_t>(m.num_actions());
    prec_t level = E, total = 0;
    for (std::size_t n = 0; n <= m.horizon(); ++n) {
        total += level;
        level *= branch;
    }
    return total;
}

inline ReachableBeliefTree build_tree(const StatisticalMDP& m, const Belief& prior,
                                      std::size_t cap = kDefaultTreeCap) {
    require_valid(m);
    detail::require_dims(m, prior);

    auto guard = [&](std::size_t count) {
        if (count > cap) {
            std::ostringstream os;
            os << "belief tree exceeds node cap " << cap << " (worst-case bound " << tree_size_bound(m) << " nodes)";
            throw GuardError(os.str());
        }
    };

    ReachableBeliefTree tree;
    tree.shape = m.shape();
    tree.prior = prior;

    for (std::size_t x0 = 0; x0 < m.num_states(); ++x0) {
        if (!(m.max_initial(x0) > 0)) continue;
        prec_t mass = 0;
        for (std::size_t t = 0; t < m.num_params(); ++t) mass += prior[t] * m.initial(t, x0);
        tree.roots.push_back({x0, mass, tree.nodes.size()});
        tree.nodes.push_back({0, x0, posterior_initial(m, prior, x0), kNoAction, {}});
        guard(tree.nodes.size());
    }

    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const std::size_t n = tree.nodes[i].depth;
        if (n == m.horizon()) continue;
        const std::size_t x = tree.nodes[i].state;
        std::vector<TreeBranch> branches;
        for (std::size_t a : m.feasible(n, x)) {
            // copy: push_back below may reallocate nodes
            const Belief mu = tree.nodes[i].belief;
            auto pred = predictive(m, n, x, mu, a);
            TreeBranch br{a, {}};
            for (std::size_t xn = 0; xn < m.num_states(); ++xn) {
                if (!(m.max_transition(n, x, a, xn) > 0)) continue;
                br.children.push_back({xn, pred.mass[xn], tree.nodes.size()});
                tree.nodes.push_back({n + 1, xn, std::move(pred.posterior[xn]), i, {}});
                guard(tree.nodes.size());
            }
            branches.push_back(std::move(br));
        }
        tree.nodes[i].branches = std::move(branches);
    }
    return tree;
}

namespace detail {

inline prec_t expected_stage_cost(const StatisticalMDP& m, std::size_t n, std::size_t x, std::size_t a,
                                  const Belief& mu) {
    prec_t c = 0;
    for (std::size_t t = 0; t < m.num_params(); ++t) c += mu[t] * m.stage_cost(n, t, x, a);
    return c;
}

inline prec_t expected_terminal_cost(const StatisticalMDP& m, std::size_t x, const Belief& mu) {
    prec_t g = 0;
    for (std::size_t t = 0; t < m.num_params(); ++t) g += mu[t] * m.terminal_cost(t, x);
    return g;
}

/// An action only replaces the incumbent when better by more than rounding,
/// so ties go to the lowest action index.
inline bool strictly_better(prec_t candidate, prec_t incumbent) {
    return candidate < incumbent - 1e-12 * (1.0 + std::abs(incumbent));
}

inline void require_policy_matches(const StatisticalMDP& m, const DeterministicPolicy& p) {
    if (!p.tree) throw std::invalid_argument("policy has no tree");
    if (!(p.tree->shape == m.shape())) throw std::invalid_argument("policy was built for a different model");
    if (p.action.size() != p.tree->nodes.size()) throw std::invalid_argument("policy does not match its tree");
    for (std::size_t i = 0; i < p.action.size(); ++i) {
        const auto& node = p.tree->nodes[i];
        if (node.depth == m.horizon()) continue;
        if (!m.is_feasible(node.depth, node.state, p.action[i]))
            throw std::invalid_argument("policy chooses an infeasible action at tree node " + std::to_string(i));
    }
}

} // namespace detail

/// Bayes value recursion over a prebuilt tree.
inline ValueSolution solve_on_tree(const StatisticalMDP& m, std::shared_ptr<const ReachableBeliefTree> tree) {
    const auto& nodes = tree->nodes;
    ValueSolution sol;
    sol.node_value.assign(nodes.size(), 0.0);
    sol.policy.action.assign(nodes.size(), kNoAction);

    for (std::size_t i = nodes.size(); i-- > 0;) {
        const auto& node = nodes[i];
        if (node.depth == m.horizon()) {
            sol.node_value[i] = detail::expected_terminal_cost(m, node.state, node.belief);
            continue;
        }
        prec_t best = std::numeric_limits<prec_t>::infinity();
        std::size_t best_a = kNoAction;
        for (const auto& br : node.branches) {
            prec_t q = detail::expected_stage_cost(m, node.depth, node.state, br.action, node.belief);
            for (const auto& ch : br.children) q += ch.mass * sol.node_value[ch.node];
            if (best_a == kNoAction || detail::strictly_better(q, best)) {
                best = q;
                best_a = br.action;
            }
        }
        sol.node_value[i] = best;
        sol.policy.action[i] = best_a;
    }
    for (const auto& r : tree->roots) sol.value += r.mass * sol.node_value[r.node];
    sol.policy.tree = std::move(tree);
    return sol;
}

/// Optimal Bayes value C_N(prior) and the arg-min policy (lowest action index on ties).
inline ValueSolution solve_bayes(const StatisticalMDP& m, const Belief& prior, std::size_t cap = kDefaultTreeCap) {
    auto tree = std::make_shared<const ReachableBeliefTree>(build_tree(m, prior, cap));
    return solve_on_tree(m, std::move(tree));
}

/// Exact expected total cost of the policy when theta is the true parameter.
inline prec_t evaluate_policy(const StatisticalMDP& m, std::size_t theta, const DeterministicPolicy& policy) {
    detail::require_policy_matches(m, policy);
    if (theta >= m.num_params()) throw std::out_of_range("parameter index out of range");
    const auto& nodes = policy.tree->nodes;
    numvec v(nodes.size(), 0.0);
    for (std::size_t i = nodes.size(); i-- > 0;) {
        const auto& node = nodes[i];
        if (node.depth == m.horizon()) {
            v[i] = m.terminal_cost(theta, node.state);
            continue;
        }
        const std::size_t a = policy.action[i];
        const auto& br = policy.tree->branch(i, a);
        prec_t q = m.stage_cost(node.depth, theta, node.state, a);
        for (const auto& ch : br.children)
            q += m.transition(node.depth, theta, node.state, a, ch.next_state) * v[ch.node];
        v[i] = q;
    }
    prec_t total = 0;
    for (const auto& r : policy.tree->roots) total += m.initial(theta, r.state) * v[r.node];
    return total;
}

/// theta -> C_{N pi}(theta) for every parameter.
inline numvec policy_cost_profile(const StatisticalMDP& m, const DeterministicPolicy& policy) {
    numvec out(m.num_params());
    for (std::size_t t = 0; t < m.num_params(); ++t) out[t] = evaluate_policy(m, t, policy);
    return out;
}

/// Bayes cost of a policy under mu: sum_theta mu(theta) C_{N pi}(theta).
inline prec_t bayes_cost(const StatisticalMDP& m, const DeterministicPolicy& policy, const Belief& mu) {
    detail::require_dims(m, mu);
    prec_t total = 0;
    for (std::size_t t = 0; t < m.num_params(); ++t)
        if (mu[t] > 0) total += mu[t] * evaluate_policy(m, t, policy);
    return total;
}

/// Policy that picks the same fixed action wherever it is feasible, else the lowest feasible one.
inline DeterministicPolicy constant_policy(const StatisticalMDP& m, std::shared_ptr<const ReachableBeliefTree> tree,
                                           std::size_t action) {
    DeterministicPolicy p;
    p.action.assign(tree->nodes.size(), kNoAction);
    for (std::size_t i = 0; i < tree->nodes.size(); ++i) {
        const auto& node = tree->nodes[i];
        if (node.depth == m.horizon()) continue;
        p.action[i] = m.is_feasible(node.depth, node.state, action) ? action : m.feasible(node.depth, node.state).front();
    }
    p.tree = std::move(tree);
    return p;
}

} // namespace ambimdp
