// SPDX-License-Identifier: MIT
//
// Geometry of the matrix set F.
//
// F is the set of Hermitian k x k matrices of rank at most 2n with at most n
// positive and at most n negative eigenvalues.  A point is stored in factored
// form x = A A* - B B* with A, B complex k x n, which guarantees membership in
// F structurally (by Weyl's eigenvalue inequalities) and lets the closed-chain
// eigenvalue problem be compressed from k x k to 2n x 2n.
//
// For a pair x, y the closed chain is the operator product A_xy = x * y.  Its
// 2n eigenvalues (zero-padded, algebraic multiplicity) drive everything else:
//
//   spectral weight      |A_xy|   = sum_j |lambda_j|
//   squared weight       |A_xy^2| = sum_j |lambda_j|^2
//   Lagrangian           L(x,y)   = |A_xy^2| - |A_xy|^2 / (2n)   >= 0
//   boundedness integrand          |A_xy|^2
//
// plus the causal classification: a pair is timelike separated if all chain
// eigenvalues are real, spacelike if they are all non-real with equal
// modulus (then L vanishes), and lightlike otherwise.

#pragma once

#include "rng.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvp {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Model dimensions: matrix size k and spin dimension n, with k >= 2n.
struct ModelParams {
    int k = 2;
    int n = 1;

    ModelParams() = default;
    ModelParams(int k_, int n_) : k(k_), n(n_) { validate(); }

    void validate() const {
        if (n < 1 || k < 2 * n)
            throw std::invalid_argument("ModelParams: need n >= 1 and k >= 2n, got k=" +
                                        std::to_string(k) + ", n=" + std::to_string(n));
    }

    bool operator==(const ModelParams&) const = default;
};

/// A point of F in factored form, with the Hermitian matrix cached.
class FPoint {
  public:
    FPoint() = default;

    FPoint(CMatrix a, CMatrix b) : a_(std::move(a)), b_(std::move(b)) {
        if (a_.rows() != b_.rows() || a_.cols() != b_.cols())
            throw std::invalid_argument("FPoint: factor dimensions differ");
        if (a_.rows() < 2 * a_.cols() || a_.cols() < 1)
            throw std::invalid_argument("FPoint: factors must be k x n with k >= 2n");
        mat_ = a_ * a_.adjoint() - b_ * b_.adjoint();
        // Force exact Hermiticity of the cache; the factored product is
        // Hermitian up to rounding only.
        mat_ = 0.5 * (mat_ + CMatrix(mat_.adjoint()));
    }

    int k() const { return static_cast<int>(a_.rows()); }
    int n() const { return static_cast<int>(a_.cols()); }
    ModelParams params() const { return ModelParams(k(), n()); }

    const CMatrix& a_factor() const { return a_; }
    const CMatrix& b_factor() const { return b_; }
    const CMatrix& matrix() const { return mat_; }

    /// Combined factor F = [A B] (k x 2n); x = F J F* with J = diag(I_n, -I_n).
    CMatrix combined_factor() const {
        CMatrix f(k(), 2 * n());
        f.leftCols(n()) = a_;
        f.rightCols(n()) = b_;
        return f;
    }

    double trace() const { return mat_.trace().real(); }

    /// Operator norm (largest absolute eigenvalue; the matrix is Hermitian).
    double norm() const {
        Eigen::SelfAdjointEigenSolver<CMatrix> es(mat_, Eigen::EigenvaluesOnly);
        const auto& ev = es.eigenvalues();
        return std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
    }

    /// The point -x (factors swapped); stays in F by symmetry of the signature bound.
    FPoint negated() const { return FPoint(b_, a_); }

    /// x scaled by s >= 0 (factors scaled by sqrt(s)).
    FPoint scaled(double s) const {
        if (s < 0.0) return negated().scaled(-s);
        const double r = std::sqrt(s);
        return FPoint(r * a_, r * b_);
    }

    bool same_params(const FPoint& o) const { return k() == o.k() && n() == o.n(); }

  private:
    CMatrix a_, b_;
    CMatrix mat_;
};

/// Build a point of F from its factors; rejects dimension mismatches.
inline FPoint make_point(const CMatrix& a_factor, const CMatrix& b_factor) {
    return FPoint(a_factor, b_factor);
}

/// Zero point of F for given dimensions.
inline FPoint zero_point(const ModelParams& p) {
    return FPoint(CMatrix::Zero(p.k, p.n), CMatrix::Zero(p.k, p.n));
}

/// Point of F with the given real diagonal, which must have at most n
/// positive and at most n negative entries.
inline FPoint diagonal_point(const RVector& diag, int n) {
    const int k = static_cast<int>(diag.size());
    CMatrix a = CMatrix::Zero(k, n), b = CMatrix::Zero(k, n);
    int ia = 0, ib = 0;
    for (int r = 0; r < k; ++r) {
        if (diag(r) > 0.0) {
            if (ia >= n)
                throw std::invalid_argument("diagonal_point: more than n positive entries");
            a(r, ia++) = std::sqrt(diag(r));
        } else if (diag(r) < 0.0) {
            if (ib >= n)
                throw std::invalid_argument("diagonal_point: more than n negative entries");
            b(r, ib++) = std::sqrt(-diag(r));
        }
    }
    return FPoint(std::move(a), std::move(b));
}

/// Factor a Hermitian matrix into a point of F.  The matrix must have at
/// most n positive and at most n negative eigenvalues (within tol relative
/// to the largest modulus); eigenvalues below that threshold are dropped.
inline FPoint point_from_hermitian(const CMatrix& m, int n, double tol = 1e-12) {
    if (m.rows() != m.cols()) throw std::invalid_argument("point_from_hermitian: not square");
    const int k = static_cast<int>(m.rows());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (m + CMatrix(m.adjoint())));
    const RVector& ev = es.eigenvalues();
    const double scale = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
    CMatrix a = CMatrix::Zero(k, n), b = CMatrix::Zero(k, n);
    int ia = 0, ib = 0;
    for (int i = 0; i < k; ++i) {
        if (std::abs(ev(i)) <= tol * scale) continue;
        if (ev(i) > 0.0) {
            if (ia >= n)
                throw std::invalid_argument(
                    "point_from_hermitian: more than n positive eigenvalues");
            a.col(ia++) = std::sqrt(ev(i)) * es.eigenvectors().col(i);
        } else {
            if (ib >= n)
                throw std::invalid_argument(
                    "point_from_hermitian: more than n negative eigenvalues");
            b.col(ib++) = std::sqrt(-ev(i)) * es.eigenvectors().col(i);
        }
    }
    return FPoint(std::move(a), std::move(b));
}

/// Random factored point: factor entries are independent complex Gaussians
/// with the given componentwise standard deviations.
inline FPoint random_point(const ModelParams& p, Rng& rng, double a_sigma = 1.0,
                           double b_sigma = 1.0) {
    CMatrix a(p.k, p.n), b(p.k, p.n);
    for (Eigen::Index c = 0; c < a.cols(); ++c)
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            a(r, c) = Complex(a_sigma * rng.gaussian(), a_sigma * rng.gaussian());
            b(r, c) = Complex(b_sigma * rng.gaussian(), b_sigma * rng.gaussian());
        }
    return FPoint(std::move(a), std::move(b));
}

/// The 2n eigenvalues of a closed chain x*y, zero-padded and sorted by
/// (modulus descending, argument ascending).
struct ChainSpectrum {
    CVector eigenvalues;
};

namespace detail {

/// Deterministic eigenvalue order: modulus descending, then argument ascending.
inline void sort_spectrum(std::vector<Complex>& ev) {
    std::sort(ev.begin(), ev.end(), [](const Complex& u, const Complex& v) {
        const double au = std::abs(u), av = std::abs(v);
        if (au != av) return au > av;
        return std::arg(u) < std::arg(v);
    });
}

/// Stable eigenvalues of a complex 2x2 matrix.  The root of larger modulus is
/// computed from the quadratic formula with the sign chosen to avoid
/// cancellation; the second root comes from the product of roots.
inline void eig2x2(const CMatrix& m, Complex& l1, Complex& l2) {
    const Complex tr = m(0, 0) + m(1, 1);
    const Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const Complex disc = std::sqrt(tr * tr - 4.0 * det);
    const Complex cand1 = tr + disc, cand2 = tr - disc;
    const Complex big = (std::abs(cand1) >= std::abs(cand2)) ? cand1 : cand2;
    if (std::abs(big) == 0.0) {
        l1 = l2 = Complex(0, 0);
        return;
    }
    l1 = 0.5 * big;
    l2 = det / l1;
}

} // namespace detail

/// Eigenvalues of the closed chain A_xy = x * y (algebraic multiplicity,
/// zero-padded to exactly 2n entries).
///
/// Uses the compression of x*y onto the factored representation: with
/// F_x = [A_x B_x], J = diag(I_n, -I_n) and G = F_x^H F_y, the nonzero
/// spectrum of x*y equals the nonzero spectrum of the 2n x 2n matrix
/// M = J G J G^H, and M's full spectrum realizes the zero-padding.
inline ChainSpectrum closed_chain_spectrum(const FPoint& x, const FPoint& y) {
    if (!x.same_params(y))
        throw std::invalid_argument("closed_chain_spectrum: dimension mismatch");
    const int n = x.n();
    const int m = 2 * n;

    // G = F_x^H F_y; applying J flips the sign of the bottom n rows / right
    // n columns, so M = J G J G^H is assembled without forming J.
    CMatrix g = x.combined_factor().adjoint() * y.combined_factor();
    CMatrix jgj = g;
    jgj.bottomRows(n) *= -1.0;
    jgj.rightCols(n) *= -1.0;
    CMatrix chain = jgj * g.adjoint();

    std::vector<Complex> ev(m);
    if (m == 2) {
        detail::eig2x2(chain, ev[0], ev[1]);
    } else {
        Eigen::ComplexEigenSolver<CMatrix> es(chain, /*computeEigenvectors=*/false);
        for (int i = 0; i < m; ++i) ev[i] = es.eigenvalues()(i);
    }
    detail::sort_spectrum(ev);

    ChainSpectrum s;
    s.eigenvalues = Eigen::Map<const CVector>(ev.data(), m);
    return s;
}

/// Spectral weight |A_xy| = sum of eigenvalue moduli.
inline double spectral_weight(const ChainSpectrum& s) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) acc += std::abs(s.eigenvalues(i));
    return acc;
}

/// Squared spectral weight |A_xy^2| = sum of squared eigenvalue moduli.
inline double spectral_weight_sq(const ChainSpectrum& s) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) acc += std::norm(s.eigenvalues(i));
    return acc;
}

/// Lagrangian L(x,y) = |A_xy^2| - |A_xy|^2 / (2n); nonnegative by
/// Cauchy-Schwarz over the 2n moduli, and zero exactly when all moduli agree
/// (in particular for spacelike separation).
inline double lagrangian_of(const ChainSpectrum& s) {
    const double sw = spectral_weight(s);
    const auto terms = static_cast<double>(s.eigenvalues.size());
    return spectral_weight_sq(s) - sw * sw / terms;
}

inline double lagrangian(const FPoint& x, const FPoint& y) {
    return lagrangian_of(closed_chain_spectrum(x, y));
}

/// Integrand of the boundedness functional: |A_xy|^2.
inline double bc_integrand(const FPoint& x, const FPoint& y) {
    const double sw = spectral_weight(closed_chain_spectrum(x, y));
    return sw * sw;
}

/// Effective Lagrangian L_eff = L + kappa * |A_xy|^2 with kappa >= 0.
inline double eff_lagrangian(const FPoint& x, const FPoint& y, double kappa) {
    if (kappa < 0.0) throw std::invalid_argument("eff_lagrangian: kappa must be >= 0");
    const ChainSpectrum s = closed_chain_spectrum(x, y);
    const double sw = spectral_weight(s);
    return lagrangian_of(s) + kappa * sw * sw;
}

/// Causal class of a pair of points.
enum class CausalClass { timelike, spacelike, lightlike };

inline const char* to_string(CausalClass c) {
    switch (c) {
        case CausalClass::timelike: return "timelike";
        case CausalClass::spacelike: return "spacelike";
        default: return "lightlike";
    }
}

/// Classification of the chain spectrum with relative tolerance `tol`
/// (scaled by the spectral radius):
///   timelike   all eigenvalues real,
///   spacelike  all eigenvalues non-real with equal modulus,
///   lightlike  otherwise.
/// A zero spectrum is spacelike by convention (consistent with L = 0).
inline CausalClass classify_causal_of(const ChainSpectrum& s, double tol = 1e-9) {
    if (tol <= 0.0) throw std::invalid_argument("classify_causal: tol must be > 0");
    double rho_max = 0.0, rho_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
        const double r = std::abs(s.eigenvalues(i));
        rho_max = std::max(rho_max, r);
        rho_min = std::min(rho_min, r);
    }
    if (rho_max == 0.0) return CausalClass::spacelike;

    const double cut = tol * rho_max;
    bool all_real = true, all_nonreal = true;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) {
        if (std::abs(s.eigenvalues(i).imag()) <= cut)
            all_nonreal = false;
        else
            all_real = false;
    }
    if (all_real) return CausalClass::timelike;
    if (all_nonreal && (rho_max - rho_min) <= cut) return CausalClass::spacelike;
    return CausalClass::lightlike;
}

inline CausalClass classify_causal(const FPoint& x, const FPoint& y, double tol = 1e-9) {
    return classify_causal_of(closed_chain_spectrum(x, y), tol);
}

} // namespace cvp
