// Minimal library usage: minimize the causal action for k = 2, n = 1 under
// the trace constraint, then certify the result.  The expected minimizer is
// supported on four rank-one points whose Bloch directions form a regular
// tetrahedron, with action S = 8/3.

#include <cvp/solver.hpp>
#include <cvp/verifier.hpp>

#include <cstdio>

int main() {
    using namespace cvp;

    const ModelParams mp(2, 1);
    const ConstraintSpec spec = ConstraintSpec::trace_constraint(mp.k, /*C=*/100.0);

    SolverConfig cfg;
    cfg.N = 6;
    cfg.restarts = 4;
    cfg.seed = 1;

    const SolveResult result = minimize(mp, spec, cfg);
    std::printf("converged   : %s (%s)\n", result.converged ? "yes" : "no",
                result.termination.c_str());
    std::printf("S           : %.12f   (8/3 = %.12f)\n", result.S_value, 8.0 / 3.0);
    std::printf("T           : %.12f   (16/3 = %.12f)\n", result.T_value, 16.0 / 3.0);
    std::printf("support     : %zu points\n", result.measure.size());
    for (std::size_t i = 0; i < result.measure.size(); ++i)
        std::printf("  point %zu: weight %.6f, norm %.6f, trace %.6f\n", i,
                    result.measure.weights(static_cast<Eigen::Index>(i)),
                    result.measure.points[i].norm(), result.measure.points[i].trace());

    VerifyOptions vo;
    vo.scan_count = 2000;
    vo.seed = cfg.seed;
    const ELCertificate cert = certify(result.measure, spec, vo);
    std::printf("el residual : %.3e (tolerance %.1e relative)\n", cert.el_residual_max,
                vo.el_tol_rel);
    std::printf("scan gap    : %.3e over %d samples\n", cert.scan_min_gap, vo.scan_count);
    if (cert.secvar_min_eig)
        std::printf("second var. : min eigenvalue %.6f on a %d-dimensional subspace\n",
                    *cert.secvar_min_eig, cert.secvar_dim_J);
    std::printf("certified   : %s\n", cert.certified ? "yes" : "no");
    return cert.certified && result.converged ? 0 : 1;
}
