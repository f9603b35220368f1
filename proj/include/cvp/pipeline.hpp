// SPDX-License-Identifier: MIT
//
// Batch pipelines behind the CLI subcommands: solve, verify, cmin, scan,
// selftest.  Each run function performs the work, writes its artifacts
// atomically into the resolved output directory, and returns the exit code:
//
//   0  converged and certified (or the subcommand's notion of success)
//   2  solver did not converge
//   3  certificate failed
//   4  I/O or configuration errors (raised as exceptions; mapped by the CLI)

#pragma once

#include "config.hpp"
#include "measure_io.hpp"
#include "report.hpp"
#include "rng.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

namespace cvp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;          ///< unexpected failure
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitNotCertified = 3;
inline constexpr int kExitBadInput = 4;       ///< I/O or configuration

inline constexpr const char* kOutputDirEnvVar = "CVP_OUT_DIR";

/// Output directory precedence: --out flag, config `output.dir`, the
/// CVP_OUT_DIR environment variable, then the working directory.
inline std::string resolve_output_dir(const std::string& cli_out, const RunConfig& cfg) {
    if (!cli_out.empty()) return cli_out;
    if (!cfg.output.dir.empty()) return cfg.output.dir;
    if (const char* env = std::getenv(kOutputDirEnvVar); env != nullptr && *env != '\0')
        return env;
    return ".";
}

struct PipelineOutcome {
    int exit_code = kExitOk;
    RunReport report;
    std::string report_path;
    std::string measure_path; ///< measure/witness file, when one is written
    std::string scan_path;    ///< columnar scan data, when written
    std::string support_path; ///< columnar support table, when written
};

namespace detail {

/// Substream tags for the pipeline's deterministic seeding.
inline constexpr std::uint64_t kStreamCminEstimate = 0xC31;

/// Reduced-budget solver configuration for the C_min pre-estimate used to
/// resolve `constraint.C = auto` and to power the guard warning.  Derived
/// only from (config, master seed), so solve and verify agree bit-for-bit.
inline SolverConfig light_budget(const SolverConfig& full, std::uint64_t master_seed) {
    SolverConfig light = full;
    light.restarts = std::min(full.restarts, 3);
    light.max_iters = std::min(full.max_iters, 600);
    light.outer_iters = std::min(full.outer_iters, 25);
    light.seed = Rng::substream_seed(master_seed, kStreamCminEstimate);
    return light;
}

struct ResolvedBudget {
    double C = std::numeric_limits<double>::infinity();
    std::optional<double> estimate;
    bool below_estimate = false;
    SolveResult estimate_run; ///< valid iff estimate.has_value()
};

/// Resolve the boundedness budget.  With `constraint.C = auto` the budget is
/// twice a reduced-budget upper estimate of C_min, which satisfies the
/// existence hypothesis C > C_min whenever the estimate does.  With an
/// explicit C the estimate is still computed when `guard` is set, to warn
/// about budgets below the estimated infimum.
inline ResolvedBudget resolve_budget(const RunConfig& cfg, std::uint64_t master_seed,
                                     bool guard, std::ostream& err) {
    ResolvedBudget out;
    if (cfg.c_auto || guard) {
        ConstraintSpec spec = cfg.make_spec();
        out.estimate_run =
            minimize_boundedness(cfg.model, spec, light_budget(cfg.solver, master_seed));
        out.estimate = out.estimate_run.T_value;
    }
    if (cfg.c_auto) {
        out.C = 2.0 * *out.estimate;
    } else {
        out.C = cfg.C;
        if (out.estimate && out.C < *out.estimate) {
            out.below_estimate = true;
            err << "warning: C below estimated C_min (C = " << fmt17(out.C)
                << ", estimate = " << fmt17(*out.estimate) << ")\n";
        }
    }
    return out;
}

inline void add_counters(RunReport& rep, const SolveResult& r) {
    rep.chain_evaluations += r.chain_evaluations;
    rep.objective_evaluations += r.objective_evaluations;
    rep.solver_iterations += r.iterations;
}

inline std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

inline void emit_report(PipelineOutcome& oc, const std::string& dir, const RunConfig& cfg) {
    oc.report_path = join_path(dir, cfg.output.prefix + "_report.txt");
    atomic_write_file(oc.report_path, render_report(oc.report));
}

inline void emit_support_data(PipelineOutcome& oc, const std::string& dir,
                              const RunConfig& cfg) {
    if (cfg.output.format == "columnar" && oc.report.measure) {
        oc.support_path = join_path(dir, cfg.output.prefix + "_support.dat");
        atomic_write_file(oc.support_path, render_support_data(*oc.report.measure));
    }
}

} // namespace detail

/// Full pipeline: resolve C, minimize the action, certify the minimizer,
/// write the measure and the report.
inline PipelineOutcome run_solve(const RunConfig& cfg, const std::string& out_dir,
                                 std::ostream& err = std::cerr) {
    cfg.validate();
    const std::uint64_t master_seed = cfg.solver.seed;

    PipelineOutcome oc;
    oc.report.subcommand = "solve";
    oc.report.config = cfg;
    oc.report.seed = master_seed;

    const detail::ResolvedBudget budget =
        detail::resolve_budget(cfg, master_seed, /*guard=*/true, err);
    oc.report.C_effective = budget.C;
    oc.report.c_min_estimate = budget.estimate;
    oc.report.c_below_estimate = budget.below_estimate;
    if (budget.estimate) detail::add_counters(oc.report, budget.estimate_run);

    RunConfig resolved = cfg;
    resolved.C = budget.C;
    resolved.c_auto = false;
    const ConstraintSpec spec = resolved.make_spec();

    err << "solve: k=" << cfg.model.k << " n=" << cfg.model.n << " N=" << cfg.solver.N
        << " restarts=" << cfg.solver.restarts << " C=" << fmt17(budget.C) << "\n";
    SolveResult solved = minimize(cfg.model, spec, cfg.solver);
    detail::add_counters(oc.report, solved);
    err << "solve: " << (solved.converged ? "converged" : "not converged") << ", S = "
        << fmt17(solved.S_value) << ", T = " << fmt17(solved.T_value)
        << ", support = " << solved.measure.size() << "\n";

    VerifyOptions vo = cfg.verify;
    vo.seed = master_seed;
    oc.report.cert = certify(solved.measure, spec, vo);
    oc.report.scan_count = vo.scan_count;
    err << "verify: el_residual_max = " << fmt17(oc.report.cert->el_residual_max)
        << ", certified = " << (oc.report.cert->certified ? "true" : "false") << "\n";

    oc.report.measure = solved.measure;
    oc.report.solve = std::move(solved);

    oc.measure_path = detail::join_path(out_dir, cfg.output.prefix + "_measure.cvpm");
    write_measure_file(oc.measure_path, *oc.report.measure);
    detail::emit_support_data(oc, out_dir, cfg);
    detail::emit_report(oc, out_dir, cfg);

    if (!oc.report.solve->converged)
        oc.exit_code = kExitNotConverged;
    else if (!oc.report.cert->certified)
        oc.exit_code = kExitNotCertified;
    return oc;
}

namespace detail {

/// Shared front half of verify/scan: load the measure, check dimensions,
/// resolve the budget the same way solve does (so certificates agree).
inline DiscreteMeasure load_subject_measure(const RunConfig& cfg, const std::string& path) {
    DiscreteMeasure rho = read_measure_file(path);
    if (rho.size() == 0) throw std::runtime_error(path + ": empty measure");
    const int k = rho.points.front().k();
    const int n = rho.points.front().n();
    if (k != cfg.model.k || n != cfg.model.n)
        throw std::runtime_error(path + ": measure dimensions (k=" + std::to_string(k) +
                                 ", n=" + std::to_string(n) +
                                 ") do not match configuration (k=" +
                                 std::to_string(cfg.model.k) +
                                 ", n=" + std::to_string(cfg.model.n) + ")");
    rho = pruned(rho, cfg.solver.prune_tol);
    rho.validate(1e-9);
    return rho;
}

} // namespace detail

/// Certificate-only pipeline on an externally supplied measure.
inline PipelineOutcome run_verify(const RunConfig& cfg, const std::string& measure_path,
                                  const std::string& out_dir, std::ostream& err = std::cerr) {
    cfg.validate();
    const std::uint64_t master_seed = cfg.solver.seed;

    PipelineOutcome oc;
    oc.report.subcommand = "verify";
    oc.report.config = cfg;
    oc.report.seed = master_seed;

    DiscreteMeasure rho = detail::load_subject_measure(cfg, measure_path);

    const detail::ResolvedBudget budget =
        detail::resolve_budget(cfg, master_seed, /*guard=*/false, err);
    oc.report.C_effective = budget.C;
    oc.report.c_min_estimate = budget.estimate;
    if (budget.estimate) detail::add_counters(oc.report, budget.estimate_run);

    RunConfig resolved = cfg;
    resolved.C = budget.C;
    resolved.c_auto = false;
    const ConstraintSpec spec = resolved.make_spec();

    VerifyOptions vo = cfg.verify;
    vo.seed = master_seed;
    oc.report.cert = certify(rho, spec, vo);
    oc.report.scan_count = vo.scan_count;
    oc.report.measure = std::move(rho);
    err << "verify: el_residual_max = " << fmt17(oc.report.cert->el_residual_max)
        << ", certified = " << (oc.report.cert->certified ? "true" : "false") << "\n";

    detail::emit_support_data(oc, out_dir, cfg);
    detail::emit_report(oc, out_dir, cfg);
    if (!oc.report.cert->certified) oc.exit_code = kExitNotCertified;
    return oc;
}

/// Estimate C_min = inf 𝒯 under the linear constraint; emit the estimate
/// and the witnessing measure.
inline PipelineOutcome run_cmin(const RunConfig& cfg, const std::string& out_dir,
                                std::ostream& err = std::cerr) {
    cfg.validate();
    const std::uint64_t master_seed = cfg.solver.seed;

    PipelineOutcome oc;
    oc.report.subcommand = "cmin";
    oc.report.config = cfg;
    oc.report.seed = master_seed;

    ConstraintSpec spec = cfg.make_spec();
    err << "cmin: k=" << cfg.model.k << " n=" << cfg.model.n << " N=" << cfg.solver.N
        << " restarts=" << cfg.solver.restarts << "\n";
    SolveResult witness = minimize_boundedness(cfg.model, spec, cfg.solver);
    detail::add_counters(oc.report, witness);
    err << "cmin: estimate = " << fmt17(witness.T_value)
        << (witness.converged ? "" : " (not converged)") << "\n";

    oc.report.c_min_estimate = witness.T_value;
    oc.report.C_effective = witness.T_value;
    oc.report.measure = witness.measure;
    oc.report.solve = std::move(witness);

    oc.measure_path = detail::join_path(out_dir, cfg.output.prefix + "_witness.cvpm");
    write_measure_file(oc.measure_path, *oc.report.measure);
    detail::emit_support_data(oc, out_dir, cfg);
    detail::emit_report(oc, out_dir, cfg);
    if (!oc.report.solve->converged) oc.exit_code = kExitNotConverged;
    return oc;
}

/// Off-support scan of the certificate functional Φ around a measure; always
/// emits a columnar data file with one row per sample.
inline PipelineOutcome run_scan(const RunConfig& cfg, const std::string& measure_path,
                                int count, const std::string& out_dir,
                                std::ostream& err = std::cerr) {
    cfg.validate();
    if (count < 0) throw std::runtime_error("scan: count must be >= 0");
    const std::uint64_t master_seed = cfg.solver.seed;

    PipelineOutcome oc;
    oc.report.subcommand = "scan";
    oc.report.config = cfg;
    oc.report.seed = master_seed;

    DiscreteMeasure rho = detail::load_subject_measure(cfg, measure_path);

    const detail::ResolvedBudget budget =
        detail::resolve_budget(cfg, master_seed, /*guard=*/false, err);
    oc.report.C_effective = budget.C;
    oc.report.c_min_estimate = budget.estimate;
    if (budget.estimate) detail::add_counters(oc.report, budget.estimate_run);

    RunConfig resolved = cfg;
    resolved.C = budget.C;
    resolved.c_auto = false;
    const ConstraintSpec spec = resolved.make_spec();

    const SupportFunctions sf = support_functions(rho, spec);
    const double S = action_S(rho);
    const double T = action_T(rho);
    const MultiplierFit fit =
        fit_multipliers(sf, S, T, budget.C, rho, cfg.verify.bc_active_tol, cfg.verify.rank_tol);
    const CMatrix Lambda = assemble_Lambda(fit.lambda, spec);

    ScanConfig sc = cfg.verify.scan;
    sc.keep_samples = true;
    Rng rng(Rng::substream_seed(master_seed, kStreamScan));
    oc.report.scan = off_support_scan(rho, fit.kappa, Lambda, fit.c_value, count, rng, sc);
    oc.report.scan_count = count;
    oc.report.measure = std::move(rho);
    if (count > 0)
        err << "scan: " << count << " samples, min_gap = " << fmt17(oc.report.scan->min_gap)
            << "\n";
    else
        err << "scan: 0 samples requested\n";

    oc.scan_path = detail::join_path(out_dir, cfg.output.prefix + "_scan.dat");
    oc.report.scan_data_file = cfg.output.prefix + "_scan.dat";
    atomic_write_file(oc.scan_path, render_scan_data(*oc.report.scan));
    detail::emit_support_data(oc, out_dir, cfg);
    detail::emit_report(oc, out_dir, cfg);
    return oc;
}

// ---------------------------------------------------------------------------
// Self test: a battery of closed-form examples checked at full precision.
// ---------------------------------------------------------------------------

namespace detail {

struct SelfTest {
    std::ostream& out;
    int failures = 0;

    void check(const std::string& name, bool ok, const std::string& detail = "") {
        if (ok) {
            out << "ok   " << name << "\n";
        } else {
            ++failures;
            out << "FAIL " << name << (detail.empty() ? "" : ": " + detail) << "\n";
        }
    }

    void close(const std::string& name, double got, double want, double tol) {
        const double err = std::abs(got - want);
        check(name, err <= tol,
              "got " + fmt17(got) + ", want " + fmt17(want) + ", |err| = " + fmt17(err));
    }
};

} // namespace detail

/// Closed-form example battery; prints one line per check, returns 0/1.
inline int run_selftest(std::ostream& out = std::cout) {
    detail::SelfTest t{out};
    auto diag2 = [](double d0, double d1) {
        return diagonal_point(Eigen::Vector2d(d0, d1), 1);
    };

    // Spectral weights and Lagrangian for x = diag(2, 0), n = 1: the closed
    // chain of (x, x) has eigenvalues {4, 0}.
    {
        const FPoint x = diag2(2.0, 0.0);
        const ChainSpectrum s = closed_chain_spectrum(x, x);
        t.close("chain |A| of diag(2,0) with itself", spectral_weight(s), 4.0, 1e-12);
        t.close("chain |A^2| of diag(2,0) with itself", spectral_weight_sq(s), 16.0, 1e-12);
        t.close("Lagrangian of diag(2,0) with itself", lagrangian(x, x), 8.0, 1e-12);
        t.check("diag(2,0) chain is timelike",
                classify_causal(x, x) == CausalClass::timelike);
    }
    // Lagrangian vanishes for x = diag(1, -1): A = x^2 = identity, both
    // eigenvalues 1, so |A^2| = 2 and |A|^2/2 = 2.
    t.close("Lagrangian of diag(1,-1) with itself",
            lagrangian(diag2(1.0, -1.0), diag2(1.0, -1.0)), 0.0, 1e-12);
    // Orthogonal supports: diag(1,0) and diag(0,1) give the zero chain.
    {
        const FPoint x = diag2(1.0, 0.0), y = diag2(0.0, 1.0);
        t.close("Lagrangian of orthogonal projections", lagrangian(x, y), 0.0, 1e-15);
        t.check("orthogonal projections are spacelike",
                classify_causal(x, y) == CausalClass::spacelike);
    }
    // Nonnegativity of the Lagrangian on random pairs.
    {
        Rng rng(7);
        bool ok = true;
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            const FPoint x = random_point(ModelParams(2, 1), rng);
            const FPoint y = random_point(ModelParams(2, 1), rng);
            const double L = lagrangian(x, y);
            worst = std::min(worst, L);
            if (L < -1e-12) ok = false;
        }
        t.check("Lagrangian nonnegative on 100 random pairs", ok, "worst " + fmt17(worst));
    }
    // Action of the single-point measure at diag(2, 0).
    {
        const DiscreteMeasure m = dirac(diag2(2.0, 0.0));
        t.close("action S of single point diag(2,0)", action_S(m), 8.0, 1e-12);
        t.close("action T of single point diag(2,0)", action_T(m), 16.0, 1e-12);
        t.close("bnorm of single point diag(2,0)", bnorm(m.points, m.weights), 1.0 + 4.0,
                1e-12);
        const ConstraintSpec spec = ConstraintSpec::trace_constraint(2, 100.0);
        t.close("trace constraint residual of diag(2,0)",
                constraint_residuals(m, spec).norm(), 0.0, 1e-12);
    }
    // Scaling law S(s_tau rho) = tau^-4 S(rho).
    {
        const DiscreteMeasure m = dirac(diag2(2.0, 0.0));
        t.close("scaling law tau = 2", action_S(scale_measure(2.0, m)),
                action_S(m) / 16.0, 1e-12);
    }
    // Moment decomposition round-trip on the same point.
    {
        const DiscreteMeasure m = dirac(diag2(2.0, 0.0));
        const MomentView v = moment_decompose(m, 1e-9);
        t.check("moment view graph form", v.graph_form);
        t.close("moment view f of diag(2,0)", std::abs(v.f_values(0)), 2.0, 1e-12);
        const auto [S, T] = functionals_via_moments(v);
        t.close("moments functional S", S, 8.0, 1e-12);
        t.close("moments functional T", T, 16.0, 1e-12);
        const DiscreteMeasure back = graph_reconstruct(v);
        t.close("moment round-trip point",
                (back.points[0].matrix() - m.points[0].matrix()).norm(), 0.0, 1e-12);
    }
    // Simplex projection.
    {
        Eigen::VectorXd w(2);
        w << 2.0, 0.0;
        t.close("simplex projection of (2,0)",
                (project_simplex(w) - Eigen::Vector2d(1.0, 0.0)).norm(), 0.0, 1e-15);
    }
    // Single-point feasible measure: exact Euler-Lagrange criticality.
    {
        const DiscreteMeasure m = dirac(diag2(2.0, 0.0));
        const ConstraintSpec spec = ConstraintSpec::trace_constraint(2, 100.0);
        const SupportFunctions sf = support_functions(m, spec);
        const MultiplierFit fit = fit_multipliers(sf, action_S(m), action_T(m), 100.0, m);
        t.close("single-point EL residual", fit.el_residual_max, 0.0, 1e-12);
        t.close("single-point kappa (BC inactive)", fit.kappa, 0.0, 1e-12);
        // With the budget lowered to C = T the boundedness constraint is
        // active, and t is constant on a one-point support: the kappa
        // regression is degenerate.
        const MultiplierFit tight =
            fit_multipliers(sf, action_S(m), action_T(m), action_T(m), m);
        t.check("single-point kappa not identifiable when BC active",
                !tight.kappa_identifiable);
    }
    // A-priori diagnostic at x = diag(2, 0) with eps = 2: the diagonal
    // infimum over unit directions is 1/2 and the moment integral is 4.
    {
        const DiscreteMeasure m = dirac(diag2(2.0, 0.0));
        const AprioriDiagnostics d =
            apriori_diagnostics(m, 0.0, 2.0, action_S(m), action_T(m));
        t.close("a-priori diagonal infimum", d.inf_diag, 0.5, 1e-12);
        t.close("a-priori moment integral", d.moment_integral, 4.0, 1e-12);
    }
    // Kernel norms of a single-point measure: the 1x1 kernel equals S + kappa T.
    {
        const DiscreteMeasure m = dirac(diag2(2.0, 0.0));
        const KernelNorms kn = kernel_norms(second_variation_operator(m, 0.0));
        t.close("single-point kernel operator norm", kn.op_norm, 8.0, 1e-12);
        t.close("single-point kernel Schur bound", kn.schur_bound, 8.0, 1e-12);
    }
    // Configuration round-trip identity.
    {
        RunConfig cfg;
        cfg.model.k = 3;
        cfg.model.n = 1;
        cfg.solver.seed = 12345;
        const std::string text = serialize_config(cfg);
        t.check("config round-trip identity",
                serialize_config(parse_config_text(text)) == text);
    }
    // Measure file round-trip identity.
    {
        Rng rng(3);
        DiscreteMeasure m;
        m.points.push_back(random_point(ModelParams(2, 1), rng));
        m.points.push_back(random_point(ModelParams(2, 1), rng));
        m.weights = Eigen::Vector2d(0.25, 0.75);
        const std::string text = write_measure_text(m);
        t.check("measure text round-trip identity",
                write_measure_text(parse_measure_text(text)) == text);
    }

    out << (t.failures == 0 ? "selftest: all checks passed\n"
                            : "selftest: " + std::to_string(t.failures) + " check(s) FAILED\n");
    return t.failures == 0 ? kExitOk : kExitError;
}

} // namespace cvp
