#pragma once

// JSON serialization of trees, policies and saddle results. Doubles are
// written with round-trip precision, so a result read back compares equal.

#include <json.hpp>

#include <memory>

#include "ambimdp/ambiguity.hpp"
#include "ambimdp/bayes.hpp"

namespace ambimdp {

using json = nlohmann::json;

inline bool operator==(const TreeChild& a, const TreeChild& b) {
    return a.next_state == b.next_state && a.mass == b.mass && a.node == b.node;
}
inline bool operator==(const TreeBranch& a, const TreeBranch& b) {
    return a.action == b.action && a.children == b.children;
}
inline bool operator==(const TreeNode& a, const TreeNode& b) {
    return a.depth == b.depth && a.state == b.state && a.belief == b.belief && a.parent == b.parent &&
           a.branches == b.branches;
}
inline bool operator==(const TreeRoot& a, const TreeRoot& b) {
    return a.state == b.state && a.mass == b.mass && a.node == b.node;
}
inline bool operator==(const ReachableBeliefTree& a, const ReachableBeliefTree& b) {
    return a.shape == b.shape && a.prior == b.prior && a.roots == b.roots && a.nodes == b.nodes;
}
inline bool operator==(const DeterministicPolicy& a, const DeterministicPolicy& b) {
    if (a.action != b.action) return false;
    if (!a.tree || !b.tree) return a.tree == b.tree;
    return *a.tree == *b.tree;
}
inline bool operator==(const SaddleResult& a, const SaddleResult& b) {
    return a.mode == b.mode && a.gamma == b.gamma && a.mu0 == b.mu0 && a.mu_star == b.mu_star &&
           a.mu_star_lo == b.mu_star_lo && a.mu_star_hi == b.mu_star_hi && a.policy_star == b.policy_star &&
           a.cost_profile == b.cost_profile && a.value == b.value && a.gap == b.gap && a.trace == b.trace;
}

namespace detail {
inline json index_or_null(std::size_t i) { return i == kNoAction ? json(nullptr) : json(i); }
inline std::size_t index_from(const json& j) { return j.is_null() ? kNoAction : j.get<std::size_t>(); }
} // namespace detail

inline json tree_to_json(const ReachableBeliefTree& t) {
    json j;
    j["shape"] = {{"horizon", t.shape.horizon},
                  {"params", t.shape.params},
                  {"states", t.shape.states},
                  {"actions", t.shape.actions}};
    j["prior"] = t.prior.weights();
    j["roots"] = json::array();
    for (const auto& r : t.roots) j["roots"].push_back({{"state", r.state}, {"mass", r.mass}, {"node", r.node}});
    j["nodes"] = json::array();
    for (const auto& n : t.nodes) {
        json jn{{"depth", n.depth}, {"state", n.state}, {"belief", n.belief.weights()},
                {"parent", detail::index_or_null(n.parent)}};
        jn["branches"] = json::array();
        for (const auto& b : n.branches) {
            json jb{{"action", b.action}, {"children", json::array()}};
            for (const auto& c : b.children)
                jb["children"].push_back({{"next_state", c.next_state}, {"mass", c.mass}, {"node", c.node}});
            jn["branches"].push_back(std::move(jb));
        }
        j["nodes"].push_back(std::move(jn));
    }
    return j;
}

inline ReachableBeliefTree tree_from_json(const json& j) {
    ReachableBeliefTree t;
    const auto& s = j.at("shape");
    t.shape = {s.at("horizon").get<std::size_t>(), s.at("params").get<std::size_t>(), s.at("states").get<std::size_t>(),
               s.at("actions").get<std::size_t>()};
    t.prior = Belief(j.at("prior").get<numvec>());
    for (const auto& r : j.at("roots"))
        t.roots.push_back({r.at("state").get<std::size_t>(), r.at("mass").get<prec_t>(), r.at("node").get<std::size_t>()});
    for (const auto& jn : j.at("nodes")) {
        TreeNode n{jn.at("depth").get<std::size_t>(), jn.at("state").get<std::size_t>(),
                   Belief(jn.at("belief").get<numvec>()), detail::index_from(jn.at("parent")), {}};
        for (const auto& jb : jn.at("branches")) {
            TreeBranch b{jb.at("action").get<std::size_t>(), {}};
            for (const auto& c : jb.at("children"))
                b.children.push_back({c.at("next_state").get<std::size_t>(), c.at("mass").get<prec_t>(),
                                      c.at("node").get<std::size_t>()});
            n.branches.push_back(std::move(b));
        }
        t.nodes.push_back(std::move(n));
    }
    return t;
}

inline json policy_to_json(const DeterministicPolicy& p) {
    json actions = json::array();
    for (auto a : p.action) actions.push_back(detail::index_or_null(a));
    return {{"tree", tree_to_json(*p.tree)}, {"actions", actions}};
}

inline DeterministicPolicy policy_from_json(const json& j) {
    DeterministicPolicy p;
    p.tree = std::make_shared<const ReachableBeliefTree>(tree_from_json(j.at("tree")));
    for (const auto& a : j.at("actions")) p.action.push_back(detail::index_from(a));
    return p;
}

inline json saddle_to_json(const SaddleResult& r) {
    json trace = json::array();
    for (const auto& e : r.trace) trace.push_back({{"mu", e.mu.weights()}, {"value", e.value}});
    return {{"mode", to_string(r.mode)},
            {"gamma", r.gamma},
            {"mu0", r.mu0.weights()},
            {"mu_star", r.mu_star.weights()},
            {"mu_star_lo", r.mu_star_lo.weights()},
            {"mu_star_hi", r.mu_star_hi.weights()},
            {"value", r.value},
            {"gap", r.gap},
            {"cost_profile", r.cost_profile},
            {"policy", policy_to_json(r.policy_star)},
            {"trace", trace}};
}

inline SaddleResult saddle_from_json(const json& j) {
    SaddleResult r;
    r.mode = parse_mode(j.at("mode").get<std::string>());
    r.gamma = j.at("gamma").get<prec_t>();
    r.mu0 = Belief(j.at("mu0").get<numvec>());
    r.mu_star = Belief(j.at("mu_star").get<numvec>());
    r.mu_star_lo = Belief(j.at("mu_star_lo").get<numvec>());
    r.mu_star_hi = Belief(j.at("mu_star_hi").get<numvec>());
    r.value = j.at("value").get<prec_t>();
    r.gap = j.at("gap").get<prec_t>();
    r.cost_profile = j.at("cost_profile").get<numvec>();
    r.policy_star = policy_from_json(j.at("policy"));
    for (const auto& e : j.at("trace")) r.trace.push_back({Belief(e.at("mu").get<numvec>()), e.at("value").get<prec_t>()});
    return r;
}

} // namespace ambimdp
