// Shared construction helpers for the test suite.

#pragma once

#include <cvp/measures.hpp>
#include <cvp/rng.hpp>

#include <vector>

namespace cvp::testing {

/// diag(d0, d1) as a point of F with k = 2, n = 1.
inline FPoint diag2(double d0, double d1) {
    return diagonal_point(Eigen::Vector2d(d0, d1), 1);
}

/// Haar-ish random unitary: QR of a complex Gaussian matrix with the phase
/// convention fixed by positive diagonal of R.
inline CMatrix random_unitary(int k, Rng& rng) {
    CMatrix g(k, k);
    for (Eigen::Index c = 0; c < k; ++c)
        for (Eigen::Index r = 0; r < k; ++r) g(r, c) = Complex(rng.gaussian(), rng.gaussian());
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < k; ++i) {
        const Complex d = r(i, i);
        if (std::abs(d) > 0.0) q.col(i) *= d / std::abs(d);
    }
    return q;
}

/// The point U x U* (factors conjugate covariantly).
inline FPoint conjugated(const FPoint& x, const CMatrix& u) {
    return FPoint(u * x.a_factor(), u * x.b_factor());
}

/// Measure with every point conjugated by the same unitary.
inline DiscreteMeasure conjugated(const DiscreteMeasure& m, const CMatrix& u) {
    DiscreteMeasure out;
    out.weights = m.weights;
    out.points.reserve(m.size());
    for (const auto& x : m.points) out.points.push_back(conjugated(x, u));
    return out;
}

/// Random measure with `count` Gaussian-factor points and Dirichlet weights.
inline DiscreteMeasure random_measure(const ModelParams& mp, int count, Rng& rng) {
    DiscreteMeasure m;
    m.points.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) m.points.push_back(random_point(mp, rng));
    const std::vector<double> w = rng.simplex(static_cast<std::size_t>(count));
    m.weights.resize(count);
    for (int i = 0; i < count; ++i) m.weights(i) = w[static_cast<std::size_t>(i)];
    return m;
}

/// Random measure guaranteed to be of graph form: distinct directions are
/// enforced by rejecting near-collisions of the canonical directions.
inline DiscreteMeasure random_graph_measure(const ModelParams& mp, int count, Rng& rng) {
    for (;;) {
        DiscreteMeasure m = random_measure(mp, count, rng);
        const MomentView v = moment_decompose(m);
        if (v.graph_form) return m;
    }
}

/// Four-point rank-one measure (Bloch tetrahedron) minimizing the action for
/// k = 2, n = 1 under the trace constraint: S = 8/3, T = 16/3.
inline DiscreteMeasure tetrahedron_measure() {
    auto bloch = [](double tx, double ty, double tz) {
        CMatrix m(2, 2);
        m(0, 0) = 1.0 + tz;
        m(1, 1) = 1.0 - tz;
        m(0, 1) = Complex(tx, -ty);
        m(1, 0) = Complex(tx, ty);
        return point_from_hermitian(m, 1);
    };
    const double s = 1.0 / std::sqrt(3.0);
    DiscreteMeasure m;
    m.points.push_back(bloch(s, s, s));
    m.points.push_back(bloch(s, -s, -s));
    m.points.push_back(bloch(-s, s, -s));
    m.points.push_back(bloch(-s, -s, s));
    m.weights = RVector::Constant(4, 0.25);
    return m;
}

} // namespace cvp::testing
