// SPDX-License-Identifier: MIT
//
// Numerical minimization of the causal action over discrete measures.
//
// Parametrization: N factored points x_i = A_i A_i* - B_i B_i* with weights
// on the probability simplex (the measures are normalized).  The trace /
// identity constraints enter through an augmented Lagrangian
//
//   P = objective + mu . c + (r/2) |c|^2 + (beta/2) max(0, T - C)^2,
//
// with multiplier updates mu <- mu + r c and penalty growth when the
// constraint norm stalls; the boundedness constraint keeps a one-sided
// quadratic penalty only (its multiplier kappa is recovered afterwards by
// the certificate fit).
//
// Inner loop: projected gradient with a Barzilai-Borwein step and a monotone
// Armijo backtracking line search on the projected arc, so the accepted
// objective sequence within an inner phase is strictly decreasing.  Factor
// gradients are central finite differences with single-point pair-table
// updates; the weight gradient is analytic.  When the line search cannot
// make progress, a deterministic coordinate pattern search with shrinking
// radius takes over; when that stalls too, the phase is declared stationary.
//
// Multistart: restart r draws its initial state from an independent
// deterministic substream of the master seed, so runs are reproducible and
// best-of-R never worsens when R grows.

#pragma once

#include "measures.hpp"
#include "rng.hpp"
#include "verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cvp {

/// Euclidean projection onto the probability simplex {w >= 0, sum w = 1}.
inline RVector project_simplex(const RVector& v) {
    const auto n = v.size();
    if (n == 0) throw std::invalid_argument("project_simplex: empty vector");
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0, theta = 0.0;
    for (int j = 0; j < static_cast<int>(n); ++j) {
        cum += u[static_cast<std::size_t>(j)];
        const double t = (cum - 1.0) / (j + 1);
        if (u[static_cast<std::size_t>(j)] - t > 0.0) theta = t;
    }
    RVector w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = std::max(v(i) - theta, 0.0);
    return w;
}

struct SolverConfig {
    int N = 6;                ///< points per restart
    int restarts = 8;
    int max_iters = 2000;     ///< inner-iteration budget per restart
    int outer_iters = 40;     ///< cap on augmented-Lagrangian updates
    double penalty_init = 10.0;
    double penalty_growth = 4.0;
    double step_init = 1.0;   ///< initial line-search step scale
    double step_shrink = 0.5; ///< backtracking / pattern-radius factor
    double fd_step = 1e-6;    ///< relative central-difference step
    double tol_el = 1e-7;     ///< relative Euler-Lagrange residual target
    double tol_feas = 1e-9;   ///< constraint residual target (sup norm, relative to k)
    double prune_tol = 1e-12; ///< weight threshold for the final support
    std::uint64_t seed = 1;

    void validate() const {
        if (N < 1) throw std::invalid_argument("SolverConfig: N must be >= 1");
        if (restarts < 1) throw std::invalid_argument("SolverConfig: restarts must be >= 1");
        if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
        if (outer_iters < 1)
            throw std::invalid_argument("SolverConfig: outer_iters must be >= 1");
        if (penalty_init <= 0.0 || penalty_growth <= 1.0)
            throw std::invalid_argument("SolverConfig: penalty schedule must grow");
        if (!(step_shrink > 0.0 && step_shrink < 1.0))
            throw std::invalid_argument("SolverConfig: step_shrink must lie in (0, 1)");
        if (step_init <= 0.0) throw std::invalid_argument("SolverConfig: step_init <= 0");
        if (fd_step <= 0.0 || tol_el <= 0.0 || tol_feas <= 0.0 || prune_tol < 0.0)
            throw std::invalid_argument("SolverConfig: tolerances must be positive");
    }
};

struct SolveResult {
    DiscreteMeasure measure;  ///< pruned final measure
    double S_value = 0.0;
    double T_value = 0.0;
    double constraint_residual_norm = 0.0; ///< sup norm of the (TC)/(IC) residuals
    double bc_violation = 0.0;             ///< max(0, T - C)
    bool bc_active = false;
    bool converged = false;
    int iterations = 0;       ///< accepted inner iterations of this restart
    int outer_updates = 0;
    int best_restart = 0;
    double el_residual_rel = 0.0; ///< relative EL residual of the final measure
    double kappa = 0.0;           ///< fitted boundedness multiplier
    std::string termination;
    std::uint64_t chain_evaluations = 0; ///< deterministic work counters, all restarts
    std::uint64_t objective_evaluations = 0;
};

/// Observation hook: accepted (phase, penalized objective) pairs, one phase
/// per (restart, outer update).  Within a phase the values never increase.
struct SolveTrace {
    std::vector<std::pair<int, double>> accepted;
};

namespace detail {

struct ALState {
    RVector mu;
    double r = 10.0;
    double beta = 10.0;
};

/// Mutable optimization state plus cached pairwise tables.
class SolveWorkspace {
  public:
    SolveWorkspace(ModelParams mp, const ConstraintSpec& spec, bool minimize_T)
        : mp_(mp), spec_(&spec), minimize_T_(minimize_T) {
        targets_.resize(spec.L());
        for (int l = 0; l < spec.L(); ++l)
            targets_(l) = spec.basis[static_cast<std::size_t>(l)].trace().real();
    }

    void load(std::vector<CMatrix> a, std::vector<CMatrix> b, RVector w) {
        a_ = std::move(a);
        b_ = std::move(b);
        w_ = std::move(w);
        const auto n = static_cast<Eigen::Index>(a_.size());
        pts_.clear();
        pts_.reserve(a_.size());
        for (std::size_t i = 0; i < a_.size(); ++i) pts_.emplace_back(a_[i], b_[i]);
        lag_.resize(n, n);
        bc_.resize(n, n);
        g_.resize(static_cast<Eigen::Index>(spec_->basis.size()), n);
        for (Eigen::Index i = 0; i < n; ++i) refresh_row(i);
    }

    int size() const { return static_cast<int>(a_.size()); }
    ModelParams params() const { return mp_; }
    const ConstraintSpec& spec() const { return *spec_; }
    bool minimize_T() const { return minimize_T_; }
    const RVector& weights() const { return w_; }
    const std::vector<CMatrix>& afac() const { return a_; }
    const std::vector<CMatrix>& bfac() const { return b_; }

    void set_point(int i, const CMatrix& a, const CMatrix& b) {
        const auto iu = static_cast<std::size_t>(i);
        a_[iu] = a;
        b_[iu] = b;
        pts_[iu] = FPoint(a, b);
        refresh_row(i);
    }

    void set_weights(const RVector& w) { w_ = w; }

    DiscreteMeasure measure() const {
        DiscreteMeasure m;
        m.points = pts_;
        m.weights = w_;
        return m;
    }

    double S() const { return w_.dot(lag_ * w_); }
    double T() const { return w_.dot(bc_ * w_); }

    /// Signed residuals c_l = Tr(e_l) - sum_i w_i Tr(e_l x_i) of the linear
    /// constraints (for the trace constraint this is k - sum w Tr x).
    RVector constraint() const { return targets_ - g_ * w_; }

    double penalized(const ALState& al) const {
        ++obj_evals;
        const double t = T();
        double p = minimize_T_ ? t : S();
        const RVector c = constraint();
        p += al.mu.dot(c) + 0.5 * al.r * c.squaredNorm();
        if (!minimize_T_ && std::isfinite(spec_->C)) {
            const double v = std::max(0.0, t - spec_->C);
            p += 0.5 * al.beta * v * v;
        }
        return p;
    }

    /// Analytic gradient of the penalized objective in the weights.
    RVector weight_gradient(const ALState& al) const {
        RVector g = minimize_T_ ? RVector(2.0 * (bc_ * w_)) : RVector(2.0 * (lag_ * w_));
        const RVector c = constraint();
        g -= g_.transpose() * (al.mu + al.r * c);
        if (!minimize_T_ && std::isfinite(spec_->C)) {
            const double v = std::max(0.0, T() - spec_->C);
            if (v > 0.0) g += al.beta * v * 2.0 * (bc_ * w_);
        }
        return g;
    }

    mutable std::uint64_t chain_evals = 0;
    mutable std::uint64_t obj_evals = 0;

  private:
    void refresh_row(Eigen::Index i) {
        const auto n = static_cast<Eigen::Index>(pts_.size());
        const auto iu = static_cast<std::size_t>(i);
        for (Eigen::Index j = 0; j < n; ++j) {
            const ChainSpectrum cs =
                closed_chain_spectrum(pts_[iu], pts_[static_cast<std::size_t>(j)]);
            ++chain_evals;
            const double sw = spectral_weight(cs);
            const double sw2 = spectral_weight_sq(cs);
            const double lag = sw2 - sw * sw / (2.0 * mp_.n);
            lag_(i, j) = lag_(j, i) = lag;
            bc_(i, j) = bc_(j, i) = sw2;
        }
        for (Eigen::Index l = 0; l < g_.rows(); ++l)
            g_(l, i) =
                (spec_->basis[static_cast<std::size_t>(l)] * pts_[iu].matrix()).trace().real();
    }

    ModelParams mp_;
    const ConstraintSpec* spec_;
    bool minimize_T_;
    RVector targets_;
    std::vector<CMatrix> a_, b_;
    std::vector<FPoint> pts_;
    RVector w_;
    RMatrix lag_, bc_, g_;
};

/// Number of real factor coordinates per point: a then b, row-major,
/// real part then imaginary part of each entry.
inline int factor_dim(const ModelParams& mp) { return 4 * mp.k * mp.n; }

inline double get_fc(const CMatrix& a, const CMatrix& b, int c) {
    const int kn = static_cast<int>(a.size());
    const CMatrix& m = c < 2 * kn ? a : b;
    const int cc = c < 2 * kn ? c : c - 2 * kn;
    const int e = cc / 2;
    const Complex v = m(e / static_cast<int>(a.cols()), e % static_cast<int>(a.cols()));
    return cc % 2 == 0 ? v.real() : v.imag();
}

inline void add_fc(CMatrix& a, CMatrix& b, int c, double delta) {
    const int kn = static_cast<int>(a.size());
    CMatrix& m = c < 2 * kn ? a : b;
    const int cc = c < 2 * kn ? c : c - 2 * kn;
    const int e = cc / 2;
    m(e / static_cast<int>(a.cols()), e % static_cast<int>(a.cols())) +=
        cc % 2 == 0 ? Complex(delta, 0.0) : Complex(0.0, delta);
}

/// Plain value snapshot of the optimization state.
struct State {
    std::vector<CMatrix> a, b;
    RVector w;
};

inline State snapshot(const SolveWorkspace& ws) {
    return State{ws.afac(), ws.bfac(), ws.weights()};
}

inline void load_state(SolveWorkspace& ws, const State& s) { ws.load(s.a, s.b, s.w); }

inline RVector flatten(const State& s, const ModelParams& mp) {
    const int fd = factor_dim(mp);
    const auto n = static_cast<int>(s.a.size());
    RVector v(n * fd + n);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < fd; ++c)
            v(i * fd + c) = get_fc(s.a[static_cast<std::size_t>(i)],
                                   s.b[static_cast<std::size_t>(i)], c);
    v.tail(n) = s.w;
    return v;
}

/// theta(alpha): factor coordinates move along -alpha g, weights move and are
/// projected back onto the simplex.
inline State step_state(const State& s, const RVector& g, double alpha,
                        const ModelParams& mp) {
    State t = s;
    const int fd = factor_dim(mp);
    const auto n = static_cast<int>(s.a.size());
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < fd; ++c)
            add_fc(t.a[static_cast<std::size_t>(i)], t.b[static_cast<std::size_t>(i)], c,
                   -alpha * g(i * fd + c));
    t.w = project_simplex(s.w - alpha * g.tail(n));
    return t;
}

/// Central-difference factor gradient plus analytic weight gradient.
/// Leaves the workspace in its incoming state.
inline RVector full_gradient(SolveWorkspace& ws, const ALState& al, double fd_step) {
    const ModelParams mp = ws.params();
    const int fd = factor_dim(mp);
    const int n = ws.size();
    RVector g(n * fd + n);
    for (int i = 0; i < n; ++i) {
        const CMatrix a0 = ws.afac()[static_cast<std::size_t>(i)];
        const CMatrix b0 = ws.bfac()[static_cast<std::size_t>(i)];
        for (int c = 0; c < fd; ++c) {
            const double x0 = get_fc(a0, b0, c);
            const double h = fd_step * std::max(1.0, std::abs(x0));
            CMatrix ap = a0, bp = b0;
            add_fc(ap, bp, c, +h);
            ws.set_point(i, ap, bp);
            const double fp = ws.penalized(al);
            CMatrix am = a0, bm = b0;
            add_fc(am, bm, c, -h);
            ws.set_point(i, am, bm);
            const double fm = ws.penalized(al);
            g(i * fd + c) = (fp - fm) / (2.0 * h);
        }
        ws.set_point(i, a0, b0);
    }
    g.tail(n) = ws.weight_gradient(al);
    return g;
}

/// One greedy first-improvement sweep over factor coordinates and pairwise
/// weight transfers.  On success `cur` and `P` are updated and the workspace
/// holds the improved state; on failure the workspace is restored.
inline bool pattern_sweep(SolveWorkspace& ws, const ALState& al, State& cur, double& P,
                          double radius) {
    const ModelParams mp = ws.params();
    const int fd = factor_dim(mp);
    const int n = ws.size();
    bool any = false;
    const auto accept_cut = [&](double p) { return p < P - 1e-15 * (1.0 + std::abs(P)); };

    for (int i = 0; i < n; ++i) {
        const auto iu = static_cast<std::size_t>(i);
        for (int c = 0; c < fd; ++c) {
            const double x0 = get_fc(cur.a[iu], cur.b[iu], c);
            const double d = radius * std::max(1.0, std::abs(x0));
            bool taken = false;
            for (const double sgn : {1.0, -1.0}) {
                CMatrix at = cur.a[iu], bt = cur.b[iu];
                add_fc(at, bt, c, sgn * d);
                ws.set_point(i, at, bt);
                const double pt = ws.penalized(al);
                if (accept_cut(pt)) {
                    cur.a[iu] = at;
                    cur.b[iu] = bt;
                    P = pt;
                    any = taken = true;
                    break;
                }
            }
            if (!taken) ws.set_point(i, cur.a[iu], cur.b[iu]);
        }
    }

    if (n > 1) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                RVector wt = cur.w;
                wt(i) += radius;
                wt(j) -= radius;
                wt = project_simplex(wt);
                ws.set_weights(wt);
                const double pt = ws.penalized(al);
                if (accept_cut(pt)) {
                    cur.w = wt;
                    P = pt;
                    any = true;
                } else {
                    ws.set_weights(cur.w);
                }
            }
    }
    return any;
}

struct InnerResult {
    double P = 0.0;
    int iters = 0;
    bool stationary = false;
};

/// Monotone projected descent until stall or budget exhaustion.
inline InnerResult inner_solve(SolveWorkspace& ws, const ALState& al, const SolverConfig& cfg,
                               int budget, int phase, SolveTrace* trace) {
    const ModelParams mp = ws.params();
    State cur = snapshot(ws);
    double P = ws.penalized(al);
    RVector g = full_gradient(ws, al, cfg.fd_step);
    double alpha = cfg.step_init / std::max(1.0, g.norm());
    double pattern_radius = 1e-2;
    std::vector<double> hist{P};
    if (trace) trace->accepted.emplace_back(phase, P);

    InnerResult out;
    while (out.iters < budget) {
        ++out.iters;
        bool accepted = false;
        double a_try = alpha;
        State trial;
        double pt = 0.0;
        for (int bt = 0; bt < 60 && a_try > 1e-16; ++bt) {
            trial = step_state(cur, g, a_try, mp);
            load_state(ws, trial);
            pt = ws.penalized(al);
            const RVector d = flatten(trial, mp) - flatten(cur, mp);
            const double dirdot = g.dot(d);
            if (pt < P && pt <= P + 1e-4 * std::min(0.0, dirdot)) {
                accepted = true;
                break;
            }
            a_try *= cfg.step_shrink;
        }
        if (accepted) {
            const State prev = std::move(cur);
            cur = std::move(trial);
            const RVector g_new = full_gradient(ws, al, cfg.fd_step);
            const RVector s = flatten(cur, mp) - flatten(prev, mp);
            const RVector y = g_new - g;
            const double sy = s.dot(y);
            alpha = sy > 1e-300 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e4)
                                : std::min(a_try * 10.0, 1.0);
            g = g_new;
            P = pt;
        } else {
            load_state(ws, cur);
            if (pattern_sweep(ws, al, cur, P, pattern_radius)) {
                g = full_gradient(ws, al, cfg.fd_step);
                alpha = cfg.step_init / std::max(1.0, g.norm());
            } else {
                pattern_radius *= cfg.step_shrink;
                if (pattern_radius < 1e-12) {
                    out.stationary = true;
                    break;
                }
                continue;
            }
        }
        if (trace) trace->accepted.emplace_back(phase, P);
        hist.push_back(P);
        if (hist.size() > 50) {
            const double past = hist[hist.size() - 51];
            if (past - P <= 1e-12 * (1.0 + std::abs(P))) {
                out.stationary = true;
                break;
            }
        }
    }
    load_state(ws, cur);
    out.P = P;
    return out;
}

/// Random initial state: Gaussian factors, biased so the mean trace is
/// positive, then rescaled to satisfy the trace normalization
/// sum_i w_i Tr x_i = k exactly; uniform weights.
inline State random_init(const ModelParams& mp, int n, Rng& rng) {
    State s;
    s.a.resize(static_cast<std::size_t>(n));
    s.b.resize(static_cast<std::size_t>(n));
    s.w = RVector::Constant(n, 1.0 / n);
    double t0 = 0.0;
    for (int attempt = 0; attempt < 64; ++attempt) {
        t0 = 0.0;
        for (int i = 0; i < n; ++i) {
            CMatrix a(mp.k, mp.n), b(mp.k, mp.n);
            for (int r = 0; r < mp.k; ++r)
                for (int c = 0; c < mp.n; ++c) {
                    a(r, c) = Complex(rng.gaussian(), rng.gaussian());
                    b(r, c) = 0.5 * Complex(rng.gaussian(), rng.gaussian());
                }
            s.a[static_cast<std::size_t>(i)] = a;
            s.b[static_cast<std::size_t>(i)] = b;
            t0 += s.w(i) * (a.squaredNorm() - b.squaredNorm());
        }
        if (std::abs(t0) > 1e-3) break;
    }
    if (t0 < 0.0) {
        std::swap(s.a, s.b);
        t0 = -t0;
    }
    const double scale = std::sqrt(static_cast<double>(mp.k) / t0);
    for (auto& m : s.a) m *= scale;
    for (auto& m : s.b) m *= scale;
    return s;
}

inline State state_from_measure(const DiscreteMeasure& m) {
    m.validate(1e-9);
    State s;
    s.w = m.weights;
    s.w /= s.w.sum();
    for (const auto& p : m.points) {
        s.a.push_back(p.a_factor());
        s.b.push_back(p.b_factor());
    }
    return s;
}

/// Relative EL residual of a measure under the certificate's multiplier fit.
inline std::pair<double, double> el_residual_and_kappa(const DiscreteMeasure& m,
                                                       const ConstraintSpec& spec) {
    const double S = action_S(m);
    const double T = action_T(m);
    const SupportFunctions sf = support_functions(m, spec);
    const MultiplierFit fit = fit_multipliers(sf, S, T, spec.C, m);
    return {fit.el_residual_max / std::max(std::abs(fit.c_value), 1e-300), fit.kappa};
}

/// One restart: augmented-Lagrangian outer loop around the monotone inner
/// descent.
inline SolveResult solve_restart(const ModelParams& mp, const ConstraintSpec& spec,
                                 const SolverConfig& cfg, const State& init, bool minimize_T,
                                 int restart_index, SolveTrace* trace,
                                 std::uint64_t& chain_evals, std::uint64_t& obj_evals) {
    SolveWorkspace ws(mp, spec, minimize_T);
    ws.load(init.a, init.b, init.w);

    ALState al;
    al.mu = RVector::Zero(spec.L());
    al.r = cfg.penalty_init;
    al.beta = cfg.penalty_init;

    const double feas_scale = std::max(1.0, static_cast<double>(mp.k));
    const double feas_tol = cfg.tol_feas * feas_scale;
    const int slice = std::max(60, cfg.max_iters / 8);

    int budget = cfg.max_iters;
    int iters = 0;
    int outer = 0;
    bool converged = false;
    bool stationary_exit = false;
    double feas_prev = std::numeric_limits<double>::infinity();
    std::string reason = "iteration budget exhausted";

    for (outer = 0; outer < cfg.outer_iters && budget > 0; ++outer) {
        const InnerResult ir = inner_solve(ws, al, cfg, std::min(budget, slice),
                                           restart_index * 1000 + outer, trace);
        budget -= ir.iters;
        iters += ir.iters;

        const RVector c = ws.constraint();
        const double t_now = ws.T();
        const double bc_viol = (!minimize_T && std::isfinite(spec.C))
                                   ? std::max(0.0, t_now - spec.C)
                                   : 0.0;
        const double feas = std::max(c.lpNorm<Eigen::Infinity>(), bc_viol);

        if (feas <= feas_tol) {
            if (minimize_T) {
                if (ir.stationary) {
                    converged = true;
                    reason = "feasible and stationary";
                    break;
                }
            } else {
                const auto [el_rel, kap] =
                    el_residual_and_kappa(pruned(ws.measure(), cfg.prune_tol), spec);
                (void)kap;
                if (el_rel <= cfg.tol_el) {
                    converged = true;
                    reason = "feasible with EL residual below target";
                    break;
                }
                if (ir.stationary) {
                    stationary_exit = true;
                    reason = "stationary without meeting the EL target";
                    break;
                }
            }
        }

        al.mu += al.r * c;
        if (feas > 0.25 * feas_prev) al.r *= cfg.penalty_growth;
        if (bc_viol > feas_tol) al.beta *= cfg.penalty_growth;
        feas_prev = feas;
    }
    (void)stationary_exit;

    chain_evals += ws.chain_evals;
    obj_evals += ws.obj_evals;

    SolveResult res;
    res.measure = pruned(ws.measure(), cfg.prune_tol);
    res.S_value = action_S(res.measure);
    res.T_value = action_T(res.measure);
    res.constraint_residual_norm =
        constraint_residuals(res.measure, spec).lpNorm<Eigen::Infinity>();
    res.bc_violation =
        std::isfinite(spec.C) ? std::max(0.0, res.T_value - spec.C) : 0.0;
    res.bc_active = std::isfinite(spec.C) &&
                    res.T_value >= spec.C - 1e-6 * std::max(1.0, std::abs(spec.C));
    res.iterations = iters;
    res.outer_updates = outer;
    res.best_restart = restart_index;

    const bool feasible = res.constraint_residual_norm <= feas_tol &&
                          res.bc_violation <= feas_tol;
    if (minimize_T) {
        res.converged = feasible && converged;
    } else {
        const auto [el_rel, kap] = el_residual_and_kappa(res.measure, spec);
        res.el_residual_rel = el_rel;
        res.kappa = kap;
        res.converged = feasible && el_rel <= cfg.tol_el;
        if (res.converged) reason = "feasible with EL residual below target";
    }
    res.termination = reason;
    return res;
}

/// Selection order: feasible-and-converged runs first, then lower objective,
/// then lower constraint residual, then lower restart index.
inline bool better_result(const SolveResult& a, const SolveResult& b, bool minimize_T) {
    if (a.converged != b.converged) return a.converged;
    const double oa = minimize_T ? a.T_value : a.S_value;
    const double ob = minimize_T ? b.T_value : b.S_value;
    const bool fa = a.constraint_residual_norm <= 1e-6 && a.bc_violation <= 1e-6;
    const bool fb = b.constraint_residual_norm <= 1e-6 && b.bc_violation <= 1e-6;
    if (fa != fb) return fa;
    if (oa != ob) return oa < ob;
    if (a.constraint_residual_norm != b.constraint_residual_norm)
        return a.constraint_residual_norm < b.constraint_residual_norm;
    return a.best_restart < b.best_restart;
}

inline SolveResult multistart(const ModelParams& mp, const ConstraintSpec& spec,
                              const SolverConfig& cfg, bool minimize_T,
                              const std::optional<DiscreteMeasure>& init, SolveTrace* trace) {
    mp.validate();
    cfg.validate();
    std::uint64_t chain_evals = 0, obj_evals = 0;
    std::optional<SolveResult> best;
    for (int r = 0; r < cfg.restarts; ++r) {
        State s0;
        if (r == 0 && init.has_value()) {
            s0 = state_from_measure(*init);
        } else {
            Rng rng(Rng::substream_seed(cfg.seed, static_cast<std::uint64_t>(r)));
            s0 = random_init(mp, cfg.N, rng);
        }
        SolveResult res = solve_restart(mp, spec, cfg, s0, minimize_T, r, trace, chain_evals,
                                        obj_evals);
        if (!best || better_result(res, *best, minimize_T)) best = std::move(res);
    }
    best->chain_evaluations = chain_evals;
    best->objective_evaluations = obj_evals;
    return *best;
}

} // namespace detail

/// Minimize the causal action S under the chosen constraints.
inline SolveResult minimize(const ModelParams& mp, const ConstraintSpec& spec,
                            const SolverConfig& cfg,
                            const std::optional<DiscreteMeasure>& init = std::nullopt,
                            SolveTrace* trace = nullptr) {
    return detail::multistart(mp, spec, cfg, /*minimize_T=*/false, init, trace);
}

/// Minimize the boundedness functional T under the same linear constraints
/// (the bound C itself plays no role here).
inline SolveResult minimize_boundedness(const ModelParams& mp, const ConstraintSpec& spec,
                                        const SolverConfig& cfg,
                                        const std::optional<DiscreteMeasure>& init =
                                            std::nullopt,
                                        SolveTrace* trace = nullptr) {
    ConstraintSpec unbounded = spec;
    unbounded.C = std::numeric_limits<double>::infinity();
    return detail::multistart(mp, unbounded, cfg, /*minimize_T=*/true, init, trace);
}

/// Estimate of C_min = inf { T(rho) : rho satisfies the linear constraints }.
inline double estimate_cmin(const ModelParams& mp, const ConstraintSpec& spec,
                            const SolverConfig& cfg) {
    return minimize_boundedness(mp, spec, cfg).T_value;
}

} // namespace cvp
