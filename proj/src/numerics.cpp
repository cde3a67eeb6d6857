#include "fasm/numerics.hpp"

#include <cmath>

namespace fasm {

EigenDecomposition sym_eig_desc(const Eigen::MatrixXd& S) {
    if (S.rows() != S.cols())
        throw numeric_error("sym_eig_desc: matrix must be square");
    if (!S.allFinite())
        throw numeric_error("sym_eig_desc: non-finite entries");

    const Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success)
        throw numeric_error("sym_eig_desc: eigensolver failed to converge");

    const auto m = S.rows();
    EigenDecomposition out;
    out.values.resize(m);
    out.vectors.resize(m, m);
    // Eigen returns ascending order; reverse, then fix each column's sign so
    // its first component of largest magnitude is nonnegative.
    for (Eigen::Index k = 0; k < m; ++k) {
        out.values(k) = solver.eigenvalues()(m - 1 - k);
        Eigen::VectorXd v = solver.eigenvectors().col(m - 1 - k);
        Eigen::Index lead = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double mag = std::abs(v(i));
            if (mag > best) {
                best = mag;
                lead = i;
            }
        }
        if (v(lead) < 0.0) v = -v;
        out.vectors.col(k) = v;
    }
    return out;
}

Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& M, const Eigen::MatrixXd& B) {
    if (M.rows() != M.cols())
        throw numeric_error("solve_spd: system matrix must be square");
    if (M.rows() != B.rows())
        throw numeric_error("solve_spd: dimension mismatch between system and right-hand side");
    if (!M.allFinite() || !B.allFinite())
        throw numeric_error("solve_spd: non-finite entries");

    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw spd_error("solve_spd: Cholesky factorization failed (matrix not positive definite)");
    return llt.solve(B);
}

}  // namespace fasm
