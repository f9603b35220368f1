// SPDX-License-Identifier: MIT
//
// Structured text reports.  The tree format is versioned, deterministic
// (decimals via fmt17, map entries in sorted order, no wall-clock content)
// and therefore byte-identical for identical (config, seed).  Plot-ready
// columnar files carry the off-support scan samples and the support table.

#pragma once

#include "config.hpp"
#include "measures.hpp"
#include "solver.hpp"
#include "textio.hpp"
#include "verifier.hpp"

#include <optional>
#include <sstream>
#include <string>

namespace cvp {

inline constexpr const char* kReportMagic = "cvp-report 1";
inline constexpr const char* kToolVersion = "cvp 0.1.0";

struct RunReport {
    std::string subcommand;
    RunConfig config;
    std::uint64_t seed = 0;

    std::optional<SolveResult> solve;
    std::optional<double> c_min_estimate;
    double C_effective = 0.0;
    bool c_below_estimate = false;

    std::optional<ELCertificate> cert;
    std::optional<DiscreteMeasure> measure;

    std::optional<ScanResult> scan;
    int scan_count = 0;
    std::string scan_data_file; ///< file name (not path) of the columnar data

    std::uint64_t chain_evaluations = 0;
    std::uint64_t objective_evaluations = 0;
    int solver_iterations = 0;
};

namespace detail {

inline void render_support_block(TreeWriter& w, const DiscreteMeasure& m) {
    w.line(0, "support");
    w.kv(1, "count", static_cast<int>(m.size()));
    for (std::size_t i = 0; i < m.size(); ++i) {
        w.line(1, "point_" + std::to_string(i));
        w.kv(2, "weight", m.weights(static_cast<Eigen::Index>(i)));
        w.kv(2, "norm", m.points[i].norm());
        w.kv(2, "trace", m.points[i].trace());
        int timelike = 0, spacelike = 0, lightlike = 0;
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (j == i) continue;
            switch (classify_causal(m.points[i], m.points[j])) {
                case CausalClass::timelike: ++timelike; break;
                case CausalClass::spacelike: ++spacelike; break;
                case CausalClass::lightlike: ++lightlike; break;
            }
        }
        w.kv(2, "timelike", timelike);
        w.kv(2, "spacelike", spacelike);
        w.kv(2, "lightlike", lightlike);
    }
}

inline void render_certificate_block(TreeWriter& w, const ELCertificate& c, int scan_count) {
    w.line(0, "certificate");
    w.kv(1, "S", c.S);
    w.kv(1, "T", c.T);
    w.kv(1, "C", c.C);
    w.kv(1, "bc_active", c.bc_active);
    w.kv(1, "kappa", c.kappa);
    w.kv(1, "kappa_identifiable", c.kappa_identifiable);
    w.kv(1, "kappa_best_fit", c.kappa_best_fit);
    w.kv(1, "c_value", c.c_value);
    for (Eigen::Index l = 0; l < c.lambda.size(); ++l)
        w.kv(1, "lambda_" + std::to_string(l + 1), c.lambda(l));
    w.kv(1, "el_residual_max", c.el_residual_max);
    w.kv(1, "multiplier_residual_max", c.multiplier_residual_max);
    w.kv(1, "levelset1_residual_max", c.levelset1_residual_max);
    w.kv(1, "levelset2_residual_max", c.levelset2_residual_max);
    w.kv(1, "scan_count", scan_count);
    w.kv(1, "scan_min_gap", c.scan_min_gap);
    w.kv(1, "secvar_dim_J", c.secvar_dim_J);
    if (c.secvar_min_eig)
        w.kv(1, "secvar_min_eig", *c.secvar_min_eig);
    else
        w.kv(1, "secvar_min_eig", std::string("absent"));
    w.kv(1, "extended_checked", c.extended_checked);
    if (c.extended_min_eig_worst)
        w.kv(1, "extended_min_eig_worst", *c.extended_min_eig_worst);
    else
        w.kv(1, "extended_min_eig_worst", std::string("absent"));
    w.kv(1, "regular", c.regular);
    w.kv(1, "g_rank", c.g_rank);
    w.kv(1, "t_spread", c.t_spread);
    w.kv(1, "first_order_ok", c.first_order_ok);
    w.kv(1, "second_order_ok", c.second_order_ok);
    w.kv(1, "certified", c.certified);
    w.line(1, "diagnostics");
    for (const auto& [key, value] : c.diagnostics) w.kv(2, key, value);
}

} // namespace detail

inline std::string render_report(const RunReport& r) {
    TreeWriter w;
    w.line(0, kReportMagic);
    w.line(0, "meta");
    w.kv(1, "schema", 1);
    w.kv(1, "generator", std::string(kToolVersion));
    w.kv(1, "subcommand", r.subcommand);
    w.kv(1, "seed", r.seed);
    w.line(0, "config");
    {
        std::istringstream lines(serialize_config(r.config));
        std::string line;
        while (std::getline(lines, line)) w.line(1, line);
    }

    w.line(0, "result");
    w.kv(1, "C_effective", r.C_effective);
    if (r.c_min_estimate) w.kv(1, "c_min_estimate", *r.c_min_estimate);
    w.kv(1, "c_below_estimate", r.c_below_estimate);
    if (r.solve) {
        const SolveResult& s = *r.solve;
        w.kv(1, "converged", s.converged);
        w.kv(1, "termination", s.termination);
        w.kv(1, "S", s.S_value);
        w.kv(1, "T", s.T_value);
        w.kv(1, "constraint_residual", s.constraint_residual_norm);
        w.kv(1, "bc_violation", s.bc_violation);
        w.kv(1, "bc_active", s.bc_active);
        w.kv(1, "el_residual_rel", s.el_residual_rel);
        w.kv(1, "kappa", s.kappa);
        w.kv(1, "iterations", s.iterations);
        w.kv(1, "outer_updates", s.outer_updates);
        w.kv(1, "best_restart", s.best_restart);
        w.kv(1, "support_size", static_cast<int>(s.measure.size()));
    } else if (r.measure) {
        const DiscreteMeasure& m = *r.measure;
        w.kv(1, "S", action_S(m));
        w.kv(1, "T", action_T(m));
        w.kv(1, "support_size", static_cast<int>(m.size()));
    }

    if (r.cert) detail::render_certificate_block(w, *r.cert, r.scan_count);

    if (r.scan) {
        w.line(0, "scan");
        w.kv(1, "count", r.scan_count);
        if (r.scan_count > 0)
            w.kv(1, "min_gap", r.scan->min_gap);
        else
            w.kv(1, "min_gap", std::string("absent"));
        if (!r.scan_data_file.empty()) w.kv(1, "data_file", r.scan_data_file);
    }

    if (r.measure) detail::render_support_block(w, *r.measure);

    w.line(0, "timings");
    w.kv(1, "note", std::string("deterministic work counters, not wall-clock"));
    w.kv(1, "chain_evaluations", r.chain_evaluations);
    w.kv(1, "objective_evaluations", r.objective_evaluations);
    w.kv(1, "solver_iterations", r.solver_iterations);
    return w.str();
}

/// Columnar scan samples: one row per sample, 17-significant-digit decimals.
/// Zero samples produce an empty file.
inline std::string render_scan_data(const ScanResult& scan) {
    if (scan.samples.empty()) return "";
    std::string out = "# norm phi phi1 phi2 gap\n";
    for (const auto& s : scan.samples) {
        out += fmt17(s.norm);
        out += ' ';
        out += fmt17(s.phi);
        out += ' ';
        out += fmt17(s.phi1);
        out += ' ';
        out += fmt17(s.phi2);
        out += ' ';
        out += fmt17(s.gap);
        out += '\n';
    }
    return out;
}

/// Columnar support table (plot-ready).
inline std::string render_support_data(const DiscreteMeasure& m) {
    std::string out = "# index weight norm trace\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        out += std::to_string(i);
        out += ' ';
        out += fmt17(m.weights(static_cast<Eigen::Index>(i)));
        out += ' ';
        out += fmt17(m.points[i].norm());
        out += ' ';
        out += fmt17(m.points[i].trace());
        out += '\n';
    }
    return out;
}

} // namespace cvp
