#pragma once

// Executes a parsed RunConfig. Artifacts are returned as strings; the
// command-line tool decides where they go.

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "ambimdp/ambiguity.hpp"
#include "ambimdp/config.hpp"
#include "ambimdp/io.hpp"
#include "ambimdp/oracle.hpp"

namespace ambimdp::cli {

struct RunArtifacts {
    std::string summary;      ///< human-readable, for stdout
    std::string primary;      ///< JSON (solve modes) or CSV (figure, simulate)
    std::string trajectories; ///< simulate only, CSV
};

inline const char* kFigureEntropicHeader = "gamma,mu0,mu_star,V_N";
inline const char* kFigureAvarHeader = "gamma,mu0,mu_star,mu_star_lo,mu_star_hi,V_N";

/// Fixed 12-significant-digit rendering.
inline std::string fmt12(prec_t x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::string belief_string(const Belief& b) {
    std::string s = "(";
    for (std::size_t i = 0; i < b.size(); ++i) s += (i ? ", " : "") + fmt12(b[i]);
    return s + ")";
}

struct FigureRow {
    prec_t gamma, mu0, mu_star, mu_star_lo, mu_star_hi, value;
};

/// One sweep point. gamma = 0 is the plain Bayes problem at the nominal prior.
inline FigureRow figure_point(const StatisticalMDP& m, RunMode mode, prec_t gamma, prec_t mu0,
                              const SolverOptions& opt) {
    const Belief prior = Belief::two_point(mu0);
    if (gamma == 0) {
        const prec_t v = solve_bayes(m, prior, opt.tree_cap).value;
        return {gamma, mu0, mu0, mu0, mu0, v};
    }
    const SaddleResult r =
        mode == RunMode::figure_entropic ? solve_entropic(m, prior, gamma, opt) : solve_avar(m, prior, gamma, opt);
    return {gamma, mu0, r.mu_star[0], r.mu_star_lo[0], r.mu_star_hi[0], r.value};
}

inline std::string bayes_table(const StatisticalMDP& m, const ValueSolution& sol, std::size_t max_depth) {
    std::ostringstream os;
    os << "depth,state,belief,action,value\n";
    for (std::size_t i = 0; i < sol.policy.tree->nodes.size(); ++i) {
        const auto& n = sol.policy.tree->nodes[i];
        if (n.depth > max_depth || n.depth == m.horizon()) continue;
        os << n.depth << ',' << m.states()[n.state] << ",\"" << belief_string(n.belief) << "\","
           << m.actions()[sol.policy.action[i]] << ',' << fmt12(sol.node_value[i]) << '\n';
    }
    return os.str();
}

inline RunArtifacts run(const RunConfig& cfg) {
    RunArtifacts out;
    std::ostringstream summary;
    const StatisticalMDP& m = cfg.model;

    switch (cfg.mode) {
    case RunMode::bayes: {
        const auto sol = solve_bayes(m, cfg.prior, cfg.solver.tree_cap);
        json j;
        j["mode"] = "bayes";
        j["prior"] = cfg.prior.weights();
        j["value"] = sol.value;
        j["node_value"] = sol.node_value;
        j["policy"] = policy_to_json(sol.policy);
        out.primary = j.dump(2) + "\n";
        summary << "mode: bayes\nprior: " << belief_string(cfg.prior) << "\nvalue: " << fmt12(sol.value)
                << "\ntree nodes: " << sol.policy.tree->nodes.size() << "\n" << bayes_table(m, sol, 1);
        break;
    }
    case RunMode::entropic:
    case RunMode::avar:
    case RunMode::robust: {
        SaddleResult r;
        if (cfg.mode == RunMode::entropic) r = solve_entropic(m, cfg.prior, *cfg.gamma, cfg.solver);
        else if (cfg.mode == RunMode::avar) r = solve_avar(m, cfg.prior, *cfg.gamma, cfg.solver);
        else r = solve_robust(m, cfg.prior, cfg.solver);
        const auto cert = certify_saddle(m, r, cfg.certify_resolution, std::max<prec_t>(1e-6, cfg.solver.tol),
                                         cfg.solver.tree_cap);
        json j = saddle_to_json(r);
        j["certificate"] = {{"mu_side_ok", cert.mu_side_ok},       {"mu_side_excess", cert.mu_side_excess},
                            {"pi_side_ok", cert.pi_side_ok},       {"pi_side_error", cert.pi_side_error},
                            {"gap_ok", cert.gap_ok},               {"gap", cert.gap},
                            {"grid_points", cert.grid_points},     {"passed", cert.passed()}};
        out.primary = j.dump(2) + "\n";
        summary << "mode: " << to_string(r.mode) << "\n";
        if (cfg.mode != RunMode::robust) summary << "gamma: " << fmt12(r.gamma) << "\n";
        summary << "mu0: " << belief_string(r.mu0) << "\nmu_star: " << belief_string(r.mu_star)
                << "\nmu_star range: " << belief_string(r.mu_star_lo) << " .. " << belief_string(r.mu_star_hi)
                << "\nvalue: " << fmt12(r.value) << "\ngap: " << fmt12(r.gap) << "\ncost profile: ";
        for (std::size_t t = 0; t < r.cost_profile.size(); ++t)
            summary << (t ? ", " : "") << m.params()[t] << "=" << fmt12(r.cost_profile[t]);
        summary << "\ncertificate: " << (cert.passed() ? "passed" : "FAILED") << " (mu-side excess "
                << fmt12(cert.mu_side_excess) << ", pi-side error " << fmt12(cert.pi_side_error) << ")\n";
        break;
    }
    case RunMode::figure_entropic:
    case RunMode::figure_avar: {
        std::ostringstream csv;
        const bool entropic = cfg.mode == RunMode::figure_entropic;
        csv << (entropic ? kFigureEntropicHeader : kFigureAvarHeader) << '\n';
        for (prec_t mu0 : cfg.sweep_priors) {
            for (prec_t g : cfg.gammas) {
                const auto row = figure_point(m, cfg.mode, g, mu0, cfg.solver);
                csv << fmt12(row.gamma) << ',' << fmt12(row.mu0) << ',' << fmt12(row.mu_star);
                if (!entropic) csv << ',' << fmt12(row.mu_star_lo) << ',' << fmt12(row.mu_star_hi);
                csv << ',' << fmt12(row.value) << '\n';
            }
        }
        out.primary = csv.str();
        summary << "mode: " << to_string(cfg.mode) << "\nrows: " << cfg.sweep_priors.size() * cfg.gammas.size()
                << "\n";
        break;
    }
    case RunMode::simulate: {
        const auto sol = solve_bayes(m, cfg.prior, cfg.solver.tree_cap);
        std::ostringstream csv, traj;
        csv << "theta,exact,mc_mean,half_width_95,samples,seed\n";
        summary << "mode: simulate\nprior: " << belief_string(cfg.prior) << "\nbayes value: " << fmt12(sol.value)
                << "\n";
        for (std::size_t t = 0; t < m.num_params(); ++t) {
            const auto en = enumerate_cost(m, t, sol.policy, cfg.trajectory_cap);
            const auto mc = mc_estimate(m, t, sol.policy, cfg.samples, cfg.seed + t);
            csv << m.params()[t] << ',' << fmt12(en.value) << ',' << fmt12(mc.mean) << ',' << fmt12(mc.half_width_95)
                << ',' << cfg.samples << ',' << cfg.seed + t << '\n';
            summary << m.params()[t] << ": exact " << fmt12(en.value) << ", monte carlo " << fmt12(mc.mean) << " +- "
                    << fmt12(mc.half_width_95) << "\n";
            if (!cfg.trajectories_path.empty()) {
                traj << "# theta=" << m.params()[t] << '\n';
                write_trajectories(traj, m, en.trajectories);
            }
        }
        out.primary = csv.str();
        out.trajectories = traj.str();
        break;
    }
    }
    out.summary = summary.str();
    return out;
}

} // namespace ambimdp::cli
