// SPDX-License-Identifier: MIT
//
// Run configuration: a flat key-value text format with dotted sections,
//
//   model.k = 2
//   constraint.kind = trace
//   constraint.C = auto
//   solver.seed = 7
//
// parsed strictly (unknown or duplicate keys are rejected naming the key)
// and serialized canonically with 17-significant-digit decimals so that
// write-then-read is the identity.

#pragma once

#include "measures.hpp"
#include "solver.hpp"
#include "textio.hpp"
#include "verifier.hpp"

#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace cvp {

struct OutputConfig {
    std::string dir;              ///< empty: resolved by the pipeline (env var or ".")
    std::string format = "tree";  ///< "tree" or "columnar" (tree + plot data files)
    std::string prefix = "run";
};

struct RunConfig {
    ModelParams model{2, 1};
    ConstraintKind constraint_kind = ConstraintKind::trace;
    BasisFlavor constraint_basis = BasisFlavor::hermitian;
    double C = 0.0;        ///< meaningful only when !c_auto
    bool c_auto = true;    ///< derive C from a C_min estimate
    SolverConfig solver;
    VerifyOptions verify;
    OutputConfig output;

    /// Build the constraint specification (C must be resolved if c_auto).
    ConstraintSpec make_spec() const {
        ConstraintSpec s = constraint_kind == ConstraintKind::trace
                               ? ConstraintSpec::trace_constraint(model.k, C, c_auto)
                               : ConstraintSpec::identity_constraint(model.k, C,
                                                                     constraint_basis, c_auto);
        return s;
    }

    void validate() const {
        model.validate();
        solver.validate();
        if (!c_auto && !(C > 0.0))
            throw std::runtime_error("configuration: constraint.C must be positive or auto");
        if (verify.scan_count < 0 || verify.aux_count < 0)
            throw std::runtime_error("configuration: verify counts must be >= 0");
        if (!(verify.apriori_eps > 0.0 && verify.apriori_eps < 4.0))
            throw std::runtime_error("configuration: verify.apriori_eps must lie in (0, 4)");
        if (output.format != "tree" && output.format != "columnar")
            throw std::runtime_error("configuration: output.format must be tree or columnar");
    }
};

namespace detail {

struct ConfigKey {
    const char* name;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

inline const std::vector<ConfigKey>& config_registry() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> v;
        auto add = [&](const char* name,
                       std::function<void(RunConfig&, const std::string&)> set,
                       std::function<std::string(const RunConfig&)> get) {
            v.push_back(ConfigKey{name, std::move(set), std::move(get)});
        };
        auto ikey = [](const std::string& s, const char* what, long long lo, long long hi) {
            const long long x = parse_int(s, what);
            if (x < lo || x > hi)
                throw std::runtime_error(std::string("configuration: ") + what +
                                         " out of range");
            return x;
        };

        add("model.k",
            [ikey](RunConfig& c, const std::string& s) {
                c.model.k = static_cast<int>(ikey(s, "model.k", 1, 64));
            },
            [](const RunConfig& c) { return std::to_string(c.model.k); });
        add("model.n",
            [ikey](RunConfig& c, const std::string& s) {
                c.model.n = static_cast<int>(ikey(s, "model.n", 1, 32));
            },
            [](const RunConfig& c) { return std::to_string(c.model.n); });
        add("constraint.kind",
            [](RunConfig& c, const std::string& s) {
                if (s == "trace")
                    c.constraint_kind = ConstraintKind::trace;
                else if (s == "identity")
                    c.constraint_kind = ConstraintKind::identity;
                else
                    throw std::runtime_error(
                        "configuration: constraint.kind must be 'trace' or 'identity', got '" +
                        s + "'");
            },
            [](const RunConfig& c) {
                return std::string(c.constraint_kind == ConstraintKind::trace ? "trace"
                                                                              : "identity");
            });
        add("constraint.basis",
            [](RunConfig& c, const std::string& s) {
                if (s == "hermitian")
                    c.constraint_basis = BasisFlavor::hermitian;
                else if (s == "symmetric")
                    c.constraint_basis = BasisFlavor::symmetric;
                else
                    throw std::runtime_error("configuration: constraint.basis must be "
                                             "'hermitian' or 'symmetric', got '" +
                                             s + "'");
            },
            [](const RunConfig& c) {
                return std::string(c.constraint_basis == BasisFlavor::hermitian ? "hermitian"
                                                                                : "symmetric");
            });
        add("constraint.C",
            [](RunConfig& c, const std::string& s) {
                if (s == "auto") {
                    c.c_auto = true;
                    c.C = 0.0;
                } else {
                    c.c_auto = false;
                    c.C = parse_double(s, "constraint.C");
                }
            },
            [](const RunConfig& c) { return c.c_auto ? std::string("auto") : fmt17(c.C); });

        add("solver.N",
            [ikey](RunConfig& c, const std::string& s) {
                c.solver.N = static_cast<int>(ikey(s, "solver.N", 1, 4096));
            },
            [](const RunConfig& c) { return std::to_string(c.solver.N); });
        add("solver.restarts",
            [ikey](RunConfig& c, const std::string& s) {
                c.solver.restarts = static_cast<int>(ikey(s, "solver.restarts", 1, 100000));
            },
            [](const RunConfig& c) { return std::to_string(c.solver.restarts); });
        add("solver.max_iters",
            [ikey](RunConfig& c, const std::string& s) {
                c.solver.max_iters = static_cast<int>(ikey(s, "solver.max_iters", 1,
                                                           100000000));
            },
            [](const RunConfig& c) { return std::to_string(c.solver.max_iters); });
        add("solver.outer_iters",
            [ikey](RunConfig& c, const std::string& s) {
                c.solver.outer_iters = static_cast<int>(ikey(s, "solver.outer_iters", 1,
                                                             100000));
            },
            [](const RunConfig& c) { return std::to_string(c.solver.outer_iters); });
        add("solver.penalty_init",
            [](RunConfig& c, const std::string& s) {
                c.solver.penalty_init = parse_double(s, "solver.penalty_init");
            },
            [](const RunConfig& c) { return fmt17(c.solver.penalty_init); });
        add("solver.penalty_growth",
            [](RunConfig& c, const std::string& s) {
                c.solver.penalty_growth = parse_double(s, "solver.penalty_growth");
            },
            [](const RunConfig& c) { return fmt17(c.solver.penalty_growth); });
        add("solver.step_init",
            [](RunConfig& c, const std::string& s) {
                c.solver.step_init = parse_double(s, "solver.step_init");
            },
            [](const RunConfig& c) { return fmt17(c.solver.step_init); });
        add("solver.step_shrink",
            [](RunConfig& c, const std::string& s) {
                c.solver.step_shrink = parse_double(s, "solver.step_shrink");
            },
            [](const RunConfig& c) { return fmt17(c.solver.step_shrink); });
        add("solver.fd_step",
            [](RunConfig& c, const std::string& s) {
                c.solver.fd_step = parse_double(s, "solver.fd_step");
            },
            [](const RunConfig& c) { return fmt17(c.solver.fd_step); });
        add("solver.tol_el",
            [](RunConfig& c, const std::string& s) {
                c.solver.tol_el = parse_double(s, "solver.tol_el");
            },
            [](const RunConfig& c) { return fmt17(c.solver.tol_el); });
        add("solver.tol_feas",
            [](RunConfig& c, const std::string& s) {
                c.solver.tol_feas = parse_double(s, "solver.tol_feas");
            },
            [](const RunConfig& c) { return fmt17(c.solver.tol_feas); });
        add("solver.prune_tol",
            [](RunConfig& c, const std::string& s) {
                c.solver.prune_tol = parse_double(s, "solver.prune_tol");
            },
            [](const RunConfig& c) { return fmt17(c.solver.prune_tol); });
        add("solver.seed",
            [](RunConfig& c, const std::string& s) { c.solver.seed = parse_u64(s,
                                                                              "solver.seed"); },
            [](const RunConfig& c) { return std::to_string(c.solver.seed); });

        add("verify.bc_active_tol",
            [](RunConfig& c, const std::string& s) {
                c.verify.bc_active_tol = parse_double(s, "verify.bc_active_tol");
            },
            [](const RunConfig& c) { return fmt17(c.verify.bc_active_tol); });
        add("verify.el_tol",
            [](RunConfig& c, const std::string& s) {
                c.verify.el_tol_rel = parse_double(s, "verify.el_tol");
            },
            [](const RunConfig& c) { return fmt17(c.verify.el_tol_rel); });
        add("verify.scan_tol",
            [](RunConfig& c, const std::string& s) {
                c.verify.scan_tol_rel = parse_double(s, "verify.scan_tol");
            },
            [](const RunConfig& c) { return fmt17(c.verify.scan_tol_rel); });
        add("verify.psd_tol",
            [](RunConfig& c, const std::string& s) {
                c.verify.psd_tol_rel = parse_double(s, "verify.psd_tol");
            },
            [](const RunConfig& c) { return fmt17(c.verify.psd_tol_rel); });
        add("verify.rank_tol",
            [](RunConfig& c, const std::string& s) {
                c.verify.rank_tol = parse_double(s, "verify.rank_tol");
            },
            [](const RunConfig& c) { return fmt17(c.verify.rank_tol); });
        add("verify.merge_tol",
            [](RunConfig& c, const std::string& s) {
                c.verify.merge_tol = parse_double(s, "verify.merge_tol");
            },
            [](const RunConfig& c) { return fmt17(c.verify.merge_tol); });
        add("verify.scan_count",
            [ikey](RunConfig& c, const std::string& s) {
                c.verify.scan_count = static_cast<int>(ikey(s, "verify.scan_count", 0,
                                                            100000000));
            },
            [](const RunConfig& c) { return std::to_string(c.verify.scan_count); });
        add("verify.aux_count",
            [ikey](RunConfig& c, const std::string& s) {
                c.verify.aux_count = static_cast<int>(ikey(s, "verify.aux_count", 0, 1000000));
            },
            [](const RunConfig& c) { return std::to_string(c.verify.aux_count); });
        add("verify.apriori_eps",
            [](RunConfig& c, const std::string& s) {
                c.verify.apriori_eps = parse_double(s, "verify.apriori_eps");
            },
            [](const RunConfig& c) { return fmt17(c.verify.apriori_eps); });
        add("verify.scan_norm_lo",
            [](RunConfig& c, const std::string& s) {
                c.verify.scan.norm_lo = parse_double(s, "verify.scan_norm_lo");
            },
            [](const RunConfig& c) { return fmt17(c.verify.scan.norm_lo); });
        add("verify.scan_norm_hi",
            [](RunConfig& c, const std::string& s) {
                c.verify.scan.norm_hi = parse_double(s, "verify.scan_norm_hi");
            },
            [](const RunConfig& c) { return fmt17(c.verify.scan.norm_hi); });
        add("verify.scan_perturb_lo",
            [](RunConfig& c, const std::string& s) {
                c.verify.scan.perturb_lo = parse_double(s, "verify.scan_perturb_lo");
            },
            [](const RunConfig& c) { return fmt17(c.verify.scan.perturb_lo); });
        add("verify.scan_perturb_hi",
            [](RunConfig& c, const std::string& s) {
                c.verify.scan.perturb_hi = parse_double(s, "verify.scan_perturb_hi");
            },
            [](const RunConfig& c) { return fmt17(c.verify.scan.perturb_hi); });

        add("output.dir",
            [](RunConfig& c, const std::string& s) { c.output.dir = s; },
            [](const RunConfig& c) { return c.output.dir; });
        add("output.format",
            [](RunConfig& c, const std::string& s) {
                if (s != "tree" && s != "columnar")
                    throw std::runtime_error(
                        "configuration: output.format must be 'tree' or 'columnar', got '" +
                        s + "'");
                c.output.format = s;
            },
            [](const RunConfig& c) { return c.output.format; });
        add("output.prefix",
            [](RunConfig& c, const std::string& s) { c.output.prefix = s; },
            [](const RunConfig& c) { return c.output.prefix; });
        return v;
    }();
    return keys;
}

} // namespace detail

/// Parse a configuration document.  Lines are `key = value` (a bare
/// `key value` form is accepted too); '#' starts a comment.  Unknown and
/// duplicate keys are rejected naming the key.
inline RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    std::string cur;
    auto handle = [&](const std::string& raw) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) return;
        std::string key, value;
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            key = trim(line.substr(0, eq));
            value = trim(line.substr(eq + 1));
        } else {
            const auto sp = line.find_first_of(" \t");
            if (sp == std::string::npos)
                throw std::runtime_error("configuration line " + std::to_string(lineno) +
                                         ": expected 'key = value', got '" + line + "'");
            key = trim(line.substr(0, sp));
            value = trim(line.substr(sp + 1));
        }
        const auto& reg = detail::config_registry();
        for (const auto& k : reg) {
            if (key == k.name) {
                if (!seen.insert(key).second)
                    throw std::runtime_error("configuration: duplicate key '" + key + "'");
                k.set(cfg, value);
                return;
            }
        }
        throw std::runtime_error("configuration: unknown key '" + key + "'");
    };
    for (const char ch : text) {
        if (ch == '\n') {
            handle(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!trim(cur).empty()) handle(cur);
    cfg.validate();
    return cfg;
}

/// Canonical serialization: every key in registry order.
inline std::string serialize_config(const RunConfig& cfg) {
    std::string out;
    for (const auto& k : detail::config_registry()) {
        out += k.name;
        out += " = ";
        out += k.get(cfg);
        out += "\n";
    }
    return out;
}

inline RunConfig read_config_file(const std::string& path) {
    return parse_config_text(read_file(path));
}

} // namespace cvp
