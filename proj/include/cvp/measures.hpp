// SPDX-License-Identifier: MIT
//
// Discrete measures on F and everything one integrates against them:
//
//   action_S(rho)    = sum_ij w_i w_j L(x_i, x_j)        (causal action)
//   action_T(rho)    = sum_ij w_i w_j |A_{x_i x_j}|^2    (boundedness functional)
//   bnorm            = sum_i |w_i| (1 + ||x_i||^2)       (measure-space norm)
//   constraint residuals for the trace constraint  (TC)  sum_i w_i Tr x_i = k
//   and the identity constraint                    (IC)  sum_i w_i x_i = 1,
//   expressed against a basis e_1 = 1, e_2..e_L trace-free.
//
// The moment-measure view splits every support point into a direction on the
// compact set K (unit sphere of F together with the origin) and a scalar
// graph value f, so that rho is recovered as the pushforward of the measure m
// on K under x -> f(x) x.  Minimizers are supported on such graphs; measures
// with two support points on one line through the origin are flagged as not
// of graph form.

#pragma once

#include "fgeometry.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cvp {

/// Weighted finite point set representing a normalized positive measure.
struct DiscreteMeasure {
    std::vector<FPoint> points;
    RVector weights;

    std::size_t size() const { return points.size(); }

    /// Enforce the measure invariants: matching lengths, weights >= 0,
    /// total mass 1 within `tol`.
    void validate(double tol = 1e-12) const {
        if (static_cast<Eigen::Index>(points.size()) != weights.size())
            throw std::invalid_argument("DiscreteMeasure: points/weights length mismatch");
        double total = 0.0;
        for (Eigen::Index i = 0; i < weights.size(); ++i) {
            if (weights(i) < 0.0)
                throw std::invalid_argument("DiscreteMeasure: negative weight");
            total += weights(i);
        }
        if (std::abs(total - 1.0) > tol)
            throw std::invalid_argument("DiscreteMeasure: weights do not sum to 1");
    }
};

/// Single-atom measure.
inline DiscreteMeasure dirac(const FPoint& x) {
    DiscreteMeasure rho;
    rho.points.push_back(x);
    rho.weights = RVector::Ones(1);
    return rho;
}

/// Drop support points with weight below `tol` and renormalize the rest.
inline DiscreteMeasure pruned(const DiscreteMeasure& rho, double tol = 1e-12) {
    DiscreteMeasure out;
    std::vector<double> w;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho.weights(static_cast<Eigen::Index>(i)) >= tol) {
            out.points.push_back(rho.points[i]);
            w.push_back(rho.weights(static_cast<Eigen::Index>(i)));
        }
    }
    if (w.empty()) throw std::invalid_argument("pruned: measure has no support left");
    out.weights = Eigen::Map<const RVector>(w.data(), static_cast<Eigen::Index>(w.size()));
    out.weights /= out.weights.sum();
    return out;
}

/// Pairwise Lagrangian and |A|^2 tables (symmetric, deterministic fill order).
struct PairTables {
    RMatrix lag; ///< lag(i,j) = L(x_i, x_j)
    RMatrix bc;  ///< bc(i,j)  = |A_{x_i x_j}|^2
};

inline PairTables pairwise_tables(const std::vector<FPoint>& pts) {
    const auto n = static_cast<Eigen::Index>(pts.size());
    PairTables t;
    t.lag.resize(n, n);
    t.bc.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const ChainSpectrum s = closed_chain_spectrum(pts[i], pts[j]);
            const double sw = spectral_weight(s);
            t.lag(i, j) = t.lag(j, i) = lagrangian_of(s);
            t.bc(i, j) = t.bc(j, i) = sw * sw;
        }
    }
    return t;
}

namespace detail {

/// Quadratic form sum_ij w_i w_j M_ij accumulated in a fixed index order
/// (diagonal first order i, then off-diagonal pairs i<j doubled).
inline double quad_form_fixed_order(const RMatrix& m, const RVector& w) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) acc += w(i) * w(i) * m(i, i);
    for (Eigen::Index i = 0; i < w.size(); ++i)
        for (Eigen::Index j = i + 1; j < w.size(); ++j) acc += 2.0 * w(i) * w(j) * m(i, j);
    return acc;
}

} // namespace detail

/// Causal action S(rho).
inline double action_S(const DiscreteMeasure& rho) {
    return detail::quad_form_fixed_order(pairwise_tables(rho.points).lag, rho.weights);
}

/// Boundedness functional T(rho).
inline double action_T(const DiscreteMeasure& rho) {
    return detail::quad_form_fixed_order(pairwise_tables(rho.points).bc, rho.weights);
}

/// Norm sum_i |w_i| (1 + ||x_i||^2) of a signed discrete measure
/// (operator norms).
inline double bnorm(const std::vector<FPoint>& points, const RVector& signed_weights) {
    if (static_cast<Eigen::Index>(points.size()) != signed_weights.size())
        throw std::invalid_argument("bnorm: points/weights length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double nrm = points[i].norm();
        acc += std::abs(signed_weights(static_cast<Eigen::Index>(i))) * (1.0 + nrm * nrm);
    }
    return acc;
}

/// Which linear constraint the problem carries.
enum class ConstraintKind { trace, identity };

/// Basis flavor for the identity constraint: the full Hermitian basis has
/// real dimension k^2; the real-symmetric restriction has k(k+1)/2.
enum class BasisFlavor { hermitian, symmetric };

/// Linear constraint specification: basis e_1 = 1, e_2..e_L trace-free,
/// plus the boundedness bound C.
struct ConstraintSpec {
    ConstraintKind kind = ConstraintKind::trace;
    std::vector<CMatrix> basis;
    double C = 0.0;
    bool c_auto = false; ///< C to be derived from a C_min estimate

    int L() const { return static_cast<int>(basis.size()); }

    static ConstraintSpec trace_constraint(int k, double C, bool c_auto = false) {
        ConstraintSpec s;
        s.kind = ConstraintKind::trace;
        s.basis = {CMatrix::Identity(k, k)};
        s.C = C;
        s.c_auto = c_auto;
        return s;
    }

    static ConstraintSpec identity_constraint(int k, double C,
                                              BasisFlavor flavor = BasisFlavor::hermitian,
                                              bool c_auto = false) {
        ConstraintSpec s;
        s.kind = ConstraintKind::identity;
        s.C = C;
        s.c_auto = c_auto;
        s.basis.push_back(CMatrix::Identity(k, k));
        // Trace-free diagonal elements.
        for (int d = 1; d < k; ++d) {
            CMatrix e = CMatrix::Zero(k, k);
            e(0, 0) = 1.0;
            e(d, d) = -1.0;
            s.basis.push_back(e);
        }
        // Symmetric off-diagonal elements.
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                CMatrix e = CMatrix::Zero(k, k);
                e(i, j) = e(j, i) = 1.0;
                s.basis.push_back(e);
            }
        // Antisymmetric-imaginary elements (Hermitian flavor only).
        if (flavor == BasisFlavor::hermitian) {
            for (int i = 0; i < k; ++i)
                for (int j = i + 1; j < k; ++j) {
                    CMatrix e = CMatrix::Zero(k, k);
                    e(i, j) = Complex(0.0, -1.0);
                    e(j, i) = Complex(0.0, 1.0);
                    s.basis.push_back(e);
                }
        }
        return s;
    }
};

/// Residual vector of the linear constraints:
///   trace:    G_1 = k - sum_i w_i Tr(x_i)
///   identity: G_l = Tr(e_l (1 - sum_i w_i x_i)),  l = 1..L
/// The all-zero vector means the constraint holds.
inline RVector constraint_residuals(const DiscreteMeasure& rho, const ConstraintSpec& spec) {
    if (rho.size() == 0) throw std::invalid_argument("constraint_residuals: empty measure");
    const int k = rho.points.front().k();
    if (spec.kind == ConstraintKind::trace) {
        double tr = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i)
            tr += rho.weights(static_cast<Eigen::Index>(i)) * rho.points[i].trace();
        RVector r(1);
        r(0) = static_cast<double>(k) - tr;
        return r;
    }
    CMatrix first = CMatrix::Identity(k, k);
    for (std::size_t i = 0; i < rho.size(); ++i)
        first -= rho.weights(static_cast<Eigen::Index>(i)) * rho.points[i].matrix();
    RVector r(spec.L());
    for (int l = 0; l < spec.L(); ++l) r(l) = (spec.basis[l] * first).trace().real();
    return r;
}

/// Argument rescaling (s_tau rho)(Omega) = rho(tau Omega): points map to
/// x_i / tau, weights unchanged.  tau = 0 is rejected.
inline DiscreteMeasure scale_measure(double tau, const DiscreteMeasure& rho) {
    if (tau == 0.0) throw std::invalid_argument("scale_measure: tau must be nonzero");
    DiscreteMeasure out;
    out.weights = rho.weights;
    out.points.reserve(rho.size());
    for (const auto& x : rho.points) out.points.push_back(x.scaled(1.0 / tau));
    return out;
}

// ---------------------------------------------------------------------------
// Moment-measure view
// ---------------------------------------------------------------------------

namespace detail {

/// Operator-norm distance of two Hermitian matrices.
inline double op_distance(const CMatrix& x, const CMatrix& y) {
    CMatrix d = x - y;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(d, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
}

inline double op_distance(const FPoint& x, const FPoint& y) {
    return op_distance(x.matrix(), y.matrix());
}

/// Canonical sign of a Hermitian matrix: the sign of the first entry of a
/// fixed traversal (diagonal, then real and imaginary off-diagonal parts)
/// whose magnitude exceeds `cut`.  Used to pick one representative of each
/// antipodal direction pair {p, -p}.
inline double canonical_sign(const CMatrix& m, double cut) {
    const int k = static_cast<int>(m.rows());
    for (int d = 0; d < k; ++d)
        if (std::abs(m(d, d).real()) > cut) return m(d, d).real() > 0.0 ? 1.0 : -1.0;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            if (std::abs(m(i, j).real()) > cut) return m(i, j).real() > 0.0 ? 1.0 : -1.0;
            if (std::abs(m(i, j).imag()) > cut) return m(i, j).imag() > 0.0 ? 1.0 : -1.0;
        }
    return 1.0;
}

} // namespace detail

/// Moment-measure decomposition of a discrete measure: directions on K (unit
/// operator norm, canonical sign, or the zero point), signed graph values f,
/// and the masses m.  A single representative per antipodal pair is stored;
/// the sign lives in f (the odd extension is implicit).
struct MomentView {
    std::vector<FPoint> directions;
    RVector f_values;
    RVector m_weights;
    bool graph_form = true;
};

/// Decompose rho into its moment view.  Two support points sharing a
/// canonical direction (within merge_tol, operator norm) but carrying
/// different graph values f lie on one line through the origin, so the view
/// is flagged as not of graph form.
inline MomentView moment_decompose(const DiscreteMeasure& rho, double merge_tol = 1e-9) {
    MomentView v;
    v.m_weights = rho.weights;
    v.f_values.resize(static_cast<Eigen::Index>(rho.size()));
    v.directions.reserve(rho.size());

    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double nrm = rho.points[i].norm();
        if (nrm == 0.0) {
            v.directions.push_back(zero_point(rho.points[i].params()));
            v.f_values(static_cast<Eigen::Index>(i)) = 0.0;
            continue;
        }
        FPoint dir = rho.points[i].scaled(1.0 / nrm);
        const double sign = detail::canonical_sign(dir.matrix(), merge_tol);
        if (sign < 0.0) dir = dir.negated();
        v.directions.push_back(std::move(dir));
        v.f_values(static_cast<Eigen::Index>(i)) = sign * nrm;
    }

    for (std::size_t i = 0; i < rho.size() && v.graph_form; ++i) {
        for (std::size_t j = i + 1; j < rho.size(); ++j) {
            const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
            if (v.f_values(ii) == 0.0 && v.f_values(jj) == 0.0) continue; // both at origin
            const double fi = v.f_values(ii), fj = v.f_values(jj);
            const bool same_dir = (fi == 0.0 || fj == 0.0)
                                      ? (fi == 0.0 && fj == 0.0)
                                      : detail::op_distance(v.directions[i], v.directions[j]) <=
                                            merge_tol;
            if (same_dir && std::abs(fi - fj) > merge_tol * std::max({1.0, std::abs(fi),
                                                                      std::abs(fj)})) {
                v.graph_form = false;
                break;
            }
        }
    }
    return v;
}

/// Rebuild the measure with points f_i * p_i; exactly coincident points are
/// merged (so several zero-f atoms collapse to one atom at the origin).
inline DiscreteMeasure graph_reconstruct(const MomentView& view) {
    DiscreteMeasure out;
    std::vector<double> w;
    for (std::size_t i = 0; i < view.directions.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        FPoint x = view.directions[i].scaled(view.f_values(ii));
        bool merged = false;
        for (std::size_t j = 0; j < out.points.size(); ++j) {
            if ((out.points[j].matrix().array() == x.matrix().array()).all()) {
                w[j] += view.m_weights(ii);
                merged = true;
                break;
            }
        }
        if (!merged) {
            out.points.push_back(std::move(x));
            w.push_back(view.m_weights(ii));
        }
    }
    out.weights = Eigen::Map<const RVector>(w.data(), static_cast<Eigen::Index>(w.size()));
    return out;
}

/// Evaluate (S, T) directly from the moment view using the degree-four
/// homogeneity L(f_i p_i, f_j p_j) = f_i^2 f_j^2 L(p_i, p_j).
inline std::pair<double, double> functionals_via_moments(const MomentView& view) {
    const auto n = static_cast<Eigen::Index>(view.directions.size());
    RMatrix lag(n, n), bc(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) {
            const ChainSpectrum s =
                closed_chain_spectrum(view.directions[i], view.directions[j]);
            const double sw = spectral_weight(s);
            const double scale = view.f_values(i) * view.f_values(i) * view.f_values(j) *
                                 view.f_values(j);
            lag(i, j) = lag(j, i) = scale * lagrangian_of(s);
            bc(i, j) = bc(j, i) = scale * sw * sw;
        }
    return {detail::quad_form_fixed_order(lag, view.m_weights),
            detail::quad_form_fixed_order(bc, view.m_weights)};
}

} // namespace cvp
