#pragma once

// Finite statistical MDP: an unknown parameter theta selects the transition
// kernels and the cost functions. Everything is indexed by 0-based contiguous
// integers; labels are kept for reporting and for the config format.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ambimdp {

using prec_t = double;
using numvec = std::vector<prec_t>;

/// Tolerance on probability vectors: drift above this is renormalized away.
inline constexpr prec_t kRenormTol = 1e-12;
/// Drift above this is an error rather than rounding.
inline constexpr prec_t kProbabilityTol = 1e-6;

/// Raised when a solver refuses to run because a configured size cap would
/// be exceeded.
class GuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string join_location(std::initializer_list<std::pair<const char*, std::string>> parts) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, v] : parts) {
        if (!first) os << ", ";
        os << k << "=" << v;
        first = false;
    }
    return os.str();
}

/// Checks non-negativity and the sum of a probability vector; renormalizes
/// small drift in place. Throws std::invalid_argument on violation.
inline void normalize_checked(numvec& w, const char* what) {
    if (w.empty()) throw std::invalid_argument(std::string(what) + ": empty probability vector");
    prec_t sum = 0;
    for (prec_t x : w) {
        if (!std::isfinite(x) || x < 0)
            throw std::invalid_argument(std::string(what) + ": entries must be finite and non-negative");
        sum += x;
    }
    if (std::abs(sum - 1) > kProbabilityTol) {
        std::ostringstream os;
        os << what << ": probabilities sum to " << sum << ", expected 1";
        throw std::invalid_argument(os.str());
    }
    if (std::abs(sum - 1) > kRenormTol)
        for (prec_t& x : w) x /= sum;
}

} // namespace detail

/// Finite, non-empty set of parameter labels.
class ParameterSet {
public:
    ParameterSet() = default;
    explicit ParameterSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
        if (labels_.empty()) throw std::invalid_argument("ParameterSet: at least one parameter required");
        std::set<std::string> seen(labels_.begin(), labels_.end());
        if (seen.size() != labels_.size()) throw std::invalid_argument("ParameterSet: labels must be unique");
    }

    std::size_t size() const { return labels_.size(); }
    const std::string& operator[](std::size_t i) const { return labels_.at(i); }
    const std::vector<std::string>& labels() const { return labels_; }

    std::size_t index_of(const std::string& label) const {
        auto it = std::find(labels_.begin(), labels_.end(), label);
        if (it == labels_.end()) throw std::out_of_range("unknown parameter label: " + label);
        return static_cast<std::size_t>(it - labels_.begin());
    }

    bool operator==(const ParameterSet&) const = default;

private:
    std::vector<std::string> labels_;
};

/// Probability vector over a parameter set.
class Belief {
public:
    Belief() = default;
    explicit Belief(numvec weights) : w_(std::move(weights)) { detail::normalize_checked(w_, "Belief"); }

    static Belief point_mass(std::size_t k, std::size_t i) {
        numvec w(k, 0.0);
        w.at(i) = 1.0;
        return Belief(std::move(w));
    }
    static Belief uniform(std::size_t k) { return Belief(numvec(k, 1.0 / static_cast<prec_t>(k))); }
    /// Two-point belief with weight `first` on the first parameter.
    static Belief two_point(prec_t first) { return Belief({first, 1.0 - first}); }

    std::size_t size() const { return w_.size(); }
    prec_t operator[](std::size_t i) const { return w_[i]; }
    const numvec& weights() const { return w_; }

    std::vector<std::size_t> support() const {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < w_.size(); ++i)
            if (w_[i] > 0) s.push_back(i);
        return s;
    }

    bool operator==(const Belief&) const = default;

private:
    numvec w_;
};

/// Sizes that identify which model a tree or policy was built for.
struct ModelShape {
    std::size_t horizon = 0;
    std::size_t params = 0;
    std::size_t states = 0;
    std::size_t actions = 0;
    bool operator==(const ModelShape&) const = default;
};

/**
 * Finite-horizon statistical MDP.
 *
 * Decision epochs are n = 0..N-1. At epoch n in state x the decision maker
 * picks a in D_n(x), pays c_n^theta(x,a) and the next state is drawn from
 * transition(n, theta, x, a). At the horizon the terminal cost g^theta(x) is
 * paid. The initial state is drawn from initial(theta).
 *
 * Tables are dense; entries for infeasible (x,a) pairs are ignored. The
 * object is filled through the setters and treated as immutable afterwards.
 */
class StatisticalMDP {
public:
    StatisticalMDP() = default;

    /// All actions are feasible everywhere until restricted with set_feasible.
    StatisticalMDP(ParameterSet params, std::vector<std::string> states, std::vector<std::string> actions,
                   std::size_t horizon)
        : params_(std::move(params)), states_(std::move(states)), actions_(std::move(actions)), horizon_(horizon) {
        if (states_.empty()) throw std::invalid_argument("StatisticalMDP: at least one state required");
        if (actions_.empty()) throw std::invalid_argument("StatisticalMDP: at least one action required");
        const std::size_t K = params_.size(), E = states_.size(), A = actions_.size(), N = horizon_;
        initial_.assign(K * E, 0.0);
        transition_.assign(N * K * E * A * E, 0.0);
        stage_cost_.assign(N * K * E * A, 0.0);
        terminal_.assign(K * E, 0.0);
        std::vector<std::size_t> all(A);
        std::iota(all.begin(), all.end(), std::size_t{0});
        feasible_.assign(N * E, all);
    }

    const ParameterSet& params() const { return params_; }
    const std::vector<std::string>& states() const { return states_; }
    const std::vector<std::string>& actions() const { return actions_; }
    std::size_t horizon() const { return horizon_; }
    std::size_t num_params() const { return params_.size(); }
    std::size_t num_states() const { return states_.size(); }
    std::size_t num_actions() const { return actions_.size(); }
    ModelShape shape() const { return {horizon_, num_params(), num_states(), num_actions()}; }

    std::size_t state_index(const std::string& s) const { return find_label(states_, s, "state"); }
    std::size_t action_index(const std::string& a) const { return find_label(actions_, a, "action"); }

    // --- accessors -------------------------------------------------------

    prec_t initial(std::size_t theta, std::size_t x) const { return initial_[theta * num_states() + x]; }
    prec_t transition(std::size_t n, std::size_t theta, std::size_t x, std::size_t a, std::size_t xn) const {
        return transition_[tindex(n, theta, x, a) + xn];
    }
    prec_t stage_cost(std::size_t n, std::size_t theta, std::size_t x, std::size_t a) const {
        return stage_cost_[cindex(n, theta, x, a)];
    }
    prec_t terminal_cost(std::size_t theta, std::size_t x) const { return terminal_[theta * num_states() + x]; }
    const std::vector<std::size_t>& feasible(std::size_t n, std::size_t x) const {
        return feasible_[n * num_states() + x];
    }
    bool is_feasible(std::size_t n, std::size_t x, std::size_t a) const {
        if (n >= horizon_ || x >= num_states()) return false;
        const auto& d = feasible(n, x);
        return std::find(d.begin(), d.end(), a) != d.end();
    }

    // --- setters ---------------------------------------------------------

    void set_initial(std::size_t theta, const numvec& row) {
        check_row(row);
        std::copy(row.begin(), row.end(), initial_.begin() + static_cast<std::ptrdiff_t>(theta * num_states()));
    }
    void set_transition(std::size_t n, std::size_t theta, std::size_t x, std::size_t a, const numvec& row) {
        check_row(row);
        std::copy(row.begin(), row.end(), transition_.begin() + static_cast<std::ptrdiff_t>(tindex(n, theta, x, a)));
    }
    void set_stage_cost(std::size_t n, std::size_t theta, std::size_t x, std::size_t a, prec_t c) {
        stage_cost_.at(cindex(n, theta, x, a)) = c;
    }
    void set_terminal_cost(std::size_t theta, std::size_t x, prec_t g) { terminal_.at(theta * num_states() + x) = g; }
    void set_feasible(std::size_t n, std::size_t x, std::vector<std::size_t> actions) {
        for (auto a : actions)
            if (a >= num_actions()) throw std::out_of_range("set_feasible: action index out of range");
        std::sort(actions.begin(), actions.end());
        actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
        feasible_.at(n * num_states() + x) = std::move(actions);
    }

    // Stationary conveniences: replicate across all epochs.
    void set_transition_all(std::size_t theta, std::size_t x, std::size_t a, const numvec& row) {
        for (std::size_t n = 0; n < horizon_; ++n) set_transition(n, theta, x, a, row);
    }
    void set_stage_cost_all(std::size_t theta, std::size_t x, std::size_t a, prec_t c) {
        for (std::size_t n = 0; n < horizon_; ++n) set_stage_cost(n, theta, x, a, c);
    }
    void set_feasible_all(std::size_t x, const std::vector<std::size_t>& actions) {
        for (std::size_t n = 0; n < horizon_; ++n) set_feasible(n, x, actions);
    }

    /// Largest probability of reaching xn from (x,a) at epoch n over all parameters.
    prec_t max_transition(std::size_t n, std::size_t x, std::size_t a, std::size_t xn) const {
        prec_t m = 0;
        for (std::size_t t = 0; t < num_params(); ++t) m = std::max(m, transition(n, t, x, a, xn));
        return m;
    }
    prec_t max_initial(std::size_t x) const {
        prec_t m = 0;
        for (std::size_t t = 0; t < num_params(); ++t) m = std::max(m, initial(t, x));
        return m;
    }

private:
    static std::size_t find_label(const std::vector<std::string>& v, const std::string& s, const char* what) {
        auto it = std::find(v.begin(), v.end(), s);
        if (it == v.end()) throw std::out_of_range(std::string("unknown ") + what + ": " + s);
        return static_cast<std::size_t>(it - v.begin());
    }
    void check_row(const numvec& row) const {
        if (row.size() != num_states()) throw std::invalid_argument("probability row has wrong length");
    }
    std::size_t cindex(std::size_t n, std::size_t theta, std::size_t x, std::size_t a) const {
        if (n >= horizon_ || theta >= num_params() || x >= num_states() || a >= num_actions())
            throw std::out_of_range("StatisticalMDP: index out of range");
        return ((n * num_params() + theta) * num_states() + x) * num_actions() + a;
    }
    std::size_t tindex(std::size_t n, std::size_t theta, std::size_t x, std::size_t a) const {
        return cindex(n, theta, x, a) * num_states();
    }

    ParameterSet params_;
    std::vector<std::string> states_;
    std::vector<std::string> actions_;
    std::size_t horizon_ = 0;
    numvec initial_;
    numvec transition_;
    numvec stage_cost_;
    numvec terminal_;
    std::vector<std::vector<std::size_t>> feasible_;
};

/// One violated model invariant.
struct Diagnostic {
    std::string invariant;
    std::string location;
    std::string message;

    std::string to_string() const { return invariant + " at (" + location + "): " + message; }
};

/// Checks every model invariant. Returns an empty list iff the model is well formed.
inline std::vector<Diagnostic> validate(const StatisticalMDP& m) {
    std::vector<Diagnostic> out;
    const auto& P = m.params();
    const auto& S = m.states();
    const auto& A = m.actions();

    auto check_row = [&](auto get, const std::string& loc, const char* invariant) {
        prec_t sum = 0;
        bool negative = false, finite = true;
        for (std::size_t xn = 0; xn < m.num_states(); ++xn) {
            prec_t p = get(xn);
            if (!std::isfinite(p)) finite = false;
            if (p < 0) negative = true;
            sum += p;
        }
        if (!finite || negative) {
            out.push_back({invariant, loc, "entries must be finite and non-negative"});
        } else if (std::abs(sum - 1) > kRenormTol) {
            std::ostringstream os;
            os.precision(17);
            os << "row sums to " << sum << ", expected 1";
            out.push_back({invariant, loc, os.str()});
        }
    };

    for (std::size_t t = 0; t < m.num_params(); ++t)
        check_row([&](std::size_t xn) { return m.initial(t, xn); }, detail::join_location({{"theta", P[t]}}),
                  "initial distribution");

    for (std::size_t n = 0; n < m.horizon(); ++n) {
        for (std::size_t x = 0; x < m.num_states(); ++x) {
            const auto& d = m.feasible(n, x);
            if (d.empty()) {
                out.push_back({"non-empty feasible set", detail::join_location({{"n", std::to_string(n)}, {"x", S[x]}}),
                               "no feasible action"});
                continue;
            }
            for (std::size_t a : d) {
                for (std::size_t t = 0; t < m.num_params(); ++t) {
                    auto loc =
                        detail::join_location({{"n", std::to_string(n)}, {"theta", P[t]}, {"x", S[x]}, {"a", A[a]}});
                    check_row([&](std::size_t xn) { return m.transition(n, t, x, a, xn); }, loc, "transition row");
                    if (!std::isfinite(m.stage_cost(n, t, x, a)))
                        out.push_back({"finite cost", loc, "stage cost is not finite"});
                }
            }
        }
    }
    for (std::size_t t = 0; t < m.num_params(); ++t)
        for (std::size_t x = 0; x < m.num_states(); ++x)
            if (!std::isfinite(m.terminal_cost(t, x)))
                out.push_back(
                    {"finite cost", detail::join_location({{"theta", P[t]}, {"x", S[x]}}), "terminal cost is not finite"});
    return out;
}

/// Throws std::invalid_argument listing every diagnostic if the model is not valid.
inline void require_valid(const StatisticalMDP& m) {
    auto diags = validate(m);
    if (diags.empty()) return;
    std::ostringstream os;
    os << "invalid model:";
    for (const auto& d : diags) os << "\n  " << d.to_string();
    throw std::invalid_argument(os.str());
}

/**
 * Lower and upper bounds on the N-stage total cost over all policies and
 * parameters. The bound follows reachable states: per parameter, a backward
 * pass takes the min/max over feasible actions of the stage cost plus the
 * min/max bound over successors with positive probability.
 */
inline std::pair<prec_t, prec_t> cost_bounds(const StatisticalMDP& m) {
    require_valid(m);
    const std::size_t E = m.num_states();
    prec_t lo = std::numeric_limits<prec_t>::infinity();
    prec_t hi = -std::numeric_limits<prec_t>::infinity();
    for (std::size_t t = 0; t < m.num_params(); ++t) {
        numvec L(E), U(E);
        for (std::size_t x = 0; x < E; ++x) L[x] = U[x] = m.terminal_cost(t, x);
        for (std::size_t n = m.horizon(); n-- > 0;) {
            numvec Ln(E, std::numeric_limits<prec_t>::infinity()), Un(E, -std::numeric_limits<prec_t>::infinity());
            for (std::size_t x = 0; x < E; ++x) {
                for (std::size_t a : m.feasible(n, x)) {
                    prec_t nl = std::numeric_limits<prec_t>::infinity(), nu = -nl;
                    for (std::size_t xn = 0; xn < E; ++xn) {
                        if (m.transition(n, t, x, a, xn) <= 0) continue;
                        nl = std::min(nl, L[xn]);
                        nu = std::max(nu, U[xn]);
                    }
                    const prec_t c = m.stage_cost(n, t, x, a);
                    Ln[x] = std::min(Ln[x], c + nl);
                    Un[x] = std::max(Un[x], c + nu);
                }
            }
            L = std::move(Ln);
            U = std::move(Un);
        }
        for (std::size_t x = 0; x < E; ++x) {
            if (m.initial(t, x) <= 0) continue;
            lo = std::min(lo, L[x]);
            hi = std::max(hi, U[x]);
        }
    }
    return {lo, hi};
}

} // namespace ambimdp
