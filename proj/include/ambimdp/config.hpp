#pragma once

// Run configuration: flat `key = value` text with dotted sections.
//
//   mode = entropic
//   model.name = seqtest
//   prior = 0.1
//   solver.gamma = 1/10
//
// Numbers accept decimal and rational literals (`13/30`). Lists are comma
// separated; ranges for sweeps are `start:stop:step` (inclusive stop).
// Lines starting with `#` are comments. Unknown or repeated keys are errors.

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ambimdp/ambiguity.hpp"
#include "ambimdp/bayes.hpp"
#include "ambimdp/model.hpp"
#include "ambimdp/oracle.hpp"
#include "ambimdp/seqtest.hpp"

namespace ambimdp::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class RunMode { bayes, entropic, avar, robust, figure_entropic, figure_avar, simulate };

inline std::string to_string(RunMode m) {
    switch (m) {
    case RunMode::bayes: return "bayes";
    case RunMode::entropic: return "entropic";
    case RunMode::avar: return "avar";
    case RunMode::robust: return "robust";
    case RunMode::figure_entropic: return "figure-entropic";
    case RunMode::figure_avar: return "figure-avar";
    case RunMode::simulate: return "simulate";
    }
    return "unknown";
}

inline bool is_figure(RunMode m) { return m == RunMode::figure_entropic || m == RunMode::figure_avar; }

struct RunConfig {
    RunMode mode = RunMode::bayes;
    std::string model_name;
    std::optional<seqtest::SeqTestConfig> seqtest; ///< set for the builtin model
    StatisticalMDP model;
    Belief prior;
    std::optional<prec_t> gamma;
    std::vector<prec_t> gammas;     ///< figure sweeps
    std::vector<prec_t> sweep_priors; ///< figure sweeps: weight on the first parameter
    SolverOptions solver;
    prec_t certify_resolution = 1e-3;
    std::size_t trajectory_cap = kDefaultTrajectoryCap;
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
    std::string output_path;
    std::string trajectories_path;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

inline bool is_integer_literal(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline std::optional<prec_t> parse_decimal(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const prec_t v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
    return v;
}

/// Decimal or rational literal. Integer ratios are a single correctly rounded division.
inline std::optional<prec_t> parse_number(const std::string& text) {
    const std::string s = trim(text);
    const auto slash = s.find('/');
    if (slash == std::string::npos) return parse_decimal(s);
    const std::string num = trim(s.substr(0, slash)), den = trim(s.substr(slash + 1));
    if (is_integer_literal(num) && is_integer_literal(den) && num.size() < 16 && den.size() < 16) {
        const long long p = std::stoll(num), q = std::stoll(den);
        if (q == 0) return std::nullopt;
        return static_cast<prec_t>(p) / static_cast<prec_t>(q);
    }
    auto p = parse_decimal(num), q = parse_decimal(den);
    if (!p || !q || *q == 0) return std::nullopt;
    return *p / *q;
}

struct Entry {
    std::string value;
    int line;
    bool used = false;
};

class Entries {
public:
    explicit Entries(const std::string& text) {
        std::istringstream is(text);
        std::string raw;
        int line = 0;
        while (std::getline(is, raw)) {
            ++line;
            const auto hash = raw.find('#');
            const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (body.empty()) continue;
            const auto eq = body.find('=');
            if (eq == std::string::npos) fail(line, "expected `key = value`");
            const std::string key = trim(body.substr(0, eq));
            if (key.empty()) fail(line, "empty key");
            if (map_.count(key)) fail(line, "duplicate key `" + key + "` (first set on line " +
                                                std::to_string(map_.at(key).line) + ")");
            map_[key] = {trim(body.substr(eq + 1)), line};
        }
    }

    [[noreturn]] static void fail(int line, const std::string& msg) {
        throw ConfigError("config line " + std::to_string(line) + ": " + msg);
    }
    [[noreturn]] void fail_key(const std::string& key, const std::string& msg) const {
        auto it = map_.find(key);
        if (it == map_.end()) throw ConfigError("config: " + msg);
        fail(it->second.line, "`" + key + "`: " + msg);
    }

    bool has(const std::string& key) const { return map_.count(key) > 0; }

    const std::string* raw(const std::string& key) {
        auto it = map_.find(key);
        if (it == map_.end()) return nullptr;
        it->second.used = true;
        return &it->second.value;
    }

    std::string required_string(const std::string& key) {
        auto* v = raw(key);
        if (!v) throw ConfigError("config: missing required field `" + key + "`");
        return *v;
    }

    std::optional<prec_t> number(const std::string& key) {
        auto* v = raw(key);
        if (!v) return std::nullopt;
        auto x = parse_number(*v);
        if (!x) fail_key(key, "malformed number `" + *v + "`");
        return x;
    }

    std::optional<std::uint64_t> count(const std::string& key) {
        auto* v = raw(key);
        if (!v) return std::nullopt;
        if (!is_integer_literal(*v) || (*v)[0] == '-') fail_key(key, "expected a non-negative integer, got `" + *v + "`");
        try {
            return std::stoull(*v);
        } catch (const std::exception&) {
            fail_key(key, "integer out of range `" + *v + "`");
        }
    }

    std::optional<std::vector<std::string>> list(const std::string& key) {
        auto* v = raw(key);
        if (!v) return std::nullopt;
        auto items = split(*v, ',');
        for (const auto& s : items)
            if (s.empty()) fail_key(key, "empty list item");
        return items;
    }

    std::optional<numvec> numbers(const std::string& key) {
        auto items = list(key);
        if (!items) return std::nullopt;
        numvec out;
        for (const auto& s : *items) {
            auto x = parse_number(s);
            if (!x) fail_key(key, "malformed number `" + s + "`");
            out.push_back(*x);
        }
        return out;
    }

    /// List of numbers, or an inclusive `start:stop:step` range.
    std::optional<numvec> sweep(const std::string& key) {
        auto* v = raw(key);
        if (!v) return std::nullopt;
        if (v->find(':') == std::string::npos) {
            map_[key].used = false;
            return numbers(key);
        }
        auto parts = split(*v, ':');
        if (parts.size() != 3) fail_key(key, "range must be `start:stop:step`");
        auto a = parse_number(parts[0]), b = parse_number(parts[1]), h = parse_number(parts[2]);
        if (!a || !b || !h) fail_key(key, "malformed range `" + *v + "`");
        if (!(*h > 0) || *b < *a) fail_key(key, "range needs step > 0 and stop >= start");
        numvec out;
        const auto n = static_cast<std::size_t>(std::floor((*b - *a) / *h + 1e-9));
        for (std::size_t i = 0; i <= n; ++i) out.push_back(*a + static_cast<prec_t>(i) * *h);
        return out;
    }

    std::vector<std::string> keys_with_prefix(const std::string& prefix) const {
        std::vector<std::string> out;
        for (const auto& [k, e] : map_)
            if (k.rfind(prefix, 0) == 0) out.push_back(k);
        return out;
    }

    void reject_unused() const {
        for (const auto& [k, e] : map_)
            if (!e.used) fail(e.line, "unknown key `" + k + "`");
    }

    int line_of(const std::string& key) const { return map_.at(key).line; }

private:
    std::map<std::string, Entry> map_;
};

inline RunMode parse_run_mode(Entries& e) {
    const std::string m = e.required_string("mode");
    for (RunMode r : {RunMode::bayes, RunMode::entropic, RunMode::avar, RunMode::robust, RunMode::figure_entropic,
                      RunMode::figure_avar, RunMode::simulate})
        if (to_string(r) == m) return r;
    e.fail_key("mode", "unknown mode `" + m + "`");
}

inline StatisticalMDP parse_inline_model(Entries& e) {
    auto params = e.list("model.params");
    auto states = e.list("model.states");
    auto actions = e.list("model.actions");
    auto horizon = e.count("model.horizon");
    if (!params || !states || !actions || !horizon)
        throw ConfigError("config: inline model requires model.params, model.states, model.actions, model.horizon");
    StatisticalMDP m;
    try {
        m = StatisticalMDP(ParameterSet(*params), *states, *actions, *horizon);
    } catch (const std::exception& ex) {
        throw ConfigError(std::string("config: ") + ex.what());
    }

    auto lookup = [&](const std::string& key, const std::string& label, auto index_fn) -> std::size_t {
        try {
            return index_fn(label);
        } catch (const std::out_of_range&) {
            e.fail_key(key, "unknown label `" + label + "`");
        }
    };
    auto theta_of = [&](const std::string& key, const std::string& s) {
        return lookup(key, s, [&](const std::string& l) { return m.params().index_of(l); });
    };
    auto state_of = [&](const std::string& key, const std::string& s) {
        return lookup(key, s, [&](const std::string& l) { return m.state_index(l); });
    };
    auto action_of = [&](const std::string& key, const std::string& s) {
        return lookup(key, s, [&](const std::string& l) { return m.action_index(l); });
    };
    auto row_of = [&](const std::string& key) {
        auto row = *e.numbers(key);
        if (row.size() != m.num_states())
            e.fail_key(key, "expected " + std::to_string(m.num_states()) + " entries, got " + std::to_string(row.size()));
        return row;
    };
    auto scalar_of = [&](const std::string& key) { return *e.number(key); };
    auto actions_of = [&](const std::string& key) {
        std::vector<std::size_t> out;
        for (const auto& a : *e.list(key)) out.push_back(action_of(key, a));
        return out;
    };

    // keys: [epoch.<n>.]{transition.<t>.<x>.<a>, cost.<t>.<x>.<a>, feasible.<x>}, initial.<t>, terminal.<t>
    auto apply = [&](const std::string& key, const std::vector<std::string>& seg, std::optional<std::size_t> epoch) {
        const std::string& kind = seg[0];
        auto epochs = [&]() {
            std::vector<std::size_t> ns;
            if (epoch) ns.push_back(*epoch);
            else
                for (std::size_t n = 0; n < m.horizon(); ++n) ns.push_back(n);
            return ns;
        };
        if (kind == "transition" && seg.size() == 4) {
            const auto t = theta_of(key, seg[1]);
            const auto x = state_of(key, seg[2]);
            const auto a = action_of(key, seg[3]);
            const auto row = row_of(key);
            for (auto n : epochs()) m.set_transition(n, t, x, a, row);
        } else if (kind == "cost" && seg.size() == 4) {
            const auto t = theta_of(key, seg[1]);
            const auto x = state_of(key, seg[2]);
            const auto a = action_of(key, seg[3]);
            const auto c = scalar_of(key);
            for (auto n : epochs()) m.set_stage_cost(n, t, x, a, c);
        } else if (kind == "feasible" && seg.size() == 2) {
            const auto x = state_of(key, seg[1]);
            const auto acts = actions_of(key);
            for (auto n : epochs()) m.set_feasible(n, x, acts);
        } else if (!epoch && kind == "initial" && seg.size() == 2) {
            m.set_initial(theta_of(key, seg[1]), row_of(key));
        } else if (!epoch && kind == "terminal" && seg.size() == 2) {
            const auto t = theta_of(key, seg[1]);
            const auto row = row_of(key);
            for (std::size_t x = 0; x < m.num_states(); ++x) m.set_terminal_cost(t, x, row[x]);
        } else {
            e.fail_key(key, "unknown model key");
        }
    };

    static const std::vector<std::string> reserved{"model.name", "model.params", "model.states", "model.actions",
                                                   "model.horizon"};
    std::vector<std::string> global, per_epoch;
    for (const auto& key : e.keys_with_prefix("model.")) {
        if (std::find(reserved.begin(), reserved.end(), key) != reserved.end()) continue;
        (key.rfind("model.epoch.", 0) == 0 ? per_epoch : global).push_back(key);
    }
    for (const auto& key : global) apply(key, split(key.substr(6), '.'), std::nullopt);
    for (const auto& key : per_epoch) {
        auto seg = split(key.substr(12), '.');
        if (seg.size() < 2 || !is_integer_literal(seg[0])) e.fail_key(key, "expected model.epoch.<n>.<field>");
        const std::size_t n = std::stoull(seg[0]);
        if (n >= m.horizon()) e.fail_key(key, "epoch out of range");
        seg.erase(seg.begin());
        apply(key, seg, n);
    }

    auto diags = validate(m);
    if (!diags.empty()) {
        std::ostringstream os;
        os << "config: inline model is invalid:";
        for (const auto& d : diags) os << "\n  " << d.to_string();
        throw ConfigError(os.str());
    }
    return m;
}

} // namespace detail

inline RunConfig parse_config(const std::string& text) {
    detail::Entries e(text);
    RunConfig cfg;
    cfg.mode = detail::parse_run_mode(e);
    cfg.model_name = e.required_string("model.name");

    if (cfg.model_name == "seqtest") {
        seqtest::SeqTestConfig sc;
        if (auto h = e.count("model.horizon")) sc.horizon = *h;
        if (auto v = e.number("model.observation_cost")) sc.observation_cost = *v;
        if (auto v = e.number("model.error_cost")) sc.error_cost = *v;
        if (auto v = e.number("model.p_low")) sc.p_low = *v;
        if (auto v = e.number("model.p_high")) sc.p_high = *v;
        try {
            sc.validate();
            cfg.model = seqtest::build_model(sc);
        } catch (const std::invalid_argument& ex) {
            throw ConfigError(std::string("config: ") + ex.what());
        }
        cfg.seqtest = sc;
    } else if (cfg.model_name == "inline") {
        cfg.model = detail::parse_inline_model(e);
    } else {
        e.fail_key("model.name", "unknown model `" + cfg.model_name + "` (expected seqtest or inline)");
    }
    const std::size_t K = cfg.model.num_params();

    if (auto p = e.numbers("prior")) {
        numvec w = *p;
        if (w.size() == 1 && K == 2) w = {w[0], 1 - w[0]};
        if (w.size() != K) e.fail_key("prior", "expected " + std::to_string(K) + " weights");
        try {
            cfg.prior = Belief(w);
        } catch (const std::invalid_argument& ex) {
            e.fail_key("prior", ex.what());
        }
        if (cfg.seqtest) cfg.seqtest->prior = cfg.prior[0];
    } else if (!is_figure(cfg.mode)) {
        throw ConfigError("config: missing required field `prior`");
    }

    cfg.gamma = e.number("solver.gamma");
    if (auto v = e.number("solver.tol")) cfg.solver.tol = *v;
    if (!(cfg.solver.tol > 0)) e.fail_key("solver.tol", "must be > 0");
    if (auto v = e.count("solver.tree_cap")) cfg.solver.tree_cap = *v;
    if (auto v = e.number("solver.grid_resolution")) cfg.solver.grid_resolution = *v;
    if (auto v = e.count("solver.max_grid_points")) cfg.solver.max_grid_points = *v;
    if (auto v = e.number("solver.certify_resolution")) cfg.certify_resolution = *v;
    if (!(cfg.certify_resolution > 0)) e.fail_key("solver.certify_resolution", "must be > 0");
    if (auto v = e.count("solver.trajectory_cap")) cfg.trajectory_cap = *v;
    if (auto v = e.count("solver.samples")) cfg.samples = *v;
    if (auto v = e.count("solver.seed")) cfg.seed = *v;
    if (auto v = e.sweep("solver.gammas")) cfg.gammas = *v;
    if (auto v = e.numbers("solver.priors")) cfg.sweep_priors = *v;
    if (auto* v = e.raw("output.path")) cfg.output_path = *v;
    if (auto* v = e.raw("output.trajectories")) cfg.trajectories_path = *v;

    switch (cfg.mode) {
    case RunMode::entropic:
        if (!cfg.gamma) throw ConfigError("config: entropic mode requires `solver.gamma`");
        if (!(*cfg.gamma > 0)) e.fail_key("solver.gamma", "entropic mode requires gamma > 0");
        break;
    case RunMode::avar:
        if (!cfg.gamma) throw ConfigError("config: avar mode requires `solver.gamma`");
        if (!(*cfg.gamma > 0 && *cfg.gamma < 1)) e.fail_key("solver.gamma", "avar mode requires gamma in (0,1)");
        break;
    case RunMode::figure_entropic:
    case RunMode::figure_avar: {
        if (K != 2) throw ConfigError("config: figure modes require a two-parameter model");
        if (cfg.gammas.empty()) throw ConfigError("config: figure modes require `solver.gammas`");
        for (prec_t g : cfg.gammas) {
            if (g < 0) e.fail_key("solver.gammas", "gamma must be >= 0");
            if (cfg.mode == RunMode::figure_avar && g >= 1) e.fail_key("solver.gammas", "avar gammas must lie in [0,1)");
        }
        if (cfg.sweep_priors.empty()) {
            if (cfg.prior.size() == 0) throw ConfigError("config: figure modes require `solver.priors` or `prior`");
            cfg.sweep_priors = {cfg.prior[0]};
        }
        for (prec_t p : cfg.sweep_priors)
            if (!(p > 0 && p < 1)) e.fail_key("solver.priors", "prior weights must lie in (0,1)");
        std::sort(cfg.sweep_priors.begin(), cfg.sweep_priors.end());
        std::sort(cfg.gammas.begin(), cfg.gammas.end());
        break;
    }
    case RunMode::simulate:
        if (cfg.samples < 1) e.fail_key("solver.samples", "must be >= 1");
        break;
    default: break;
    }

    e.reject_unused();
    return cfg;
}

} // namespace ambimdp::cli
