#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace fasm {

// Numerical failure surfaced by any fasm operation.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Cholesky factorization failed: the system is not positive definite.
struct spd_error : numeric_error {
    explicit spd_error(const std::string& what) : numeric_error(what) {}
};

struct EigenDecomposition {
    Eigen::VectorXd values;   // descending
    Eigen::MatrixXd vectors;  // orthonormal columns, deterministic signs
};

// Full spectrum of a symmetric matrix, eigenvalues descending. The input is
// symmetrized internally; each eigenvector is normalized so that its first
// component of largest magnitude is nonnegative, making the output
// reproducible across runs and platforms.
EigenDecomposition sym_eig_desc(const Eigen::MatrixXd& S);

// Solve M X = B for symmetric positive-definite M via Cholesky.
// Throws spd_error if the factorization fails.
Eigen::MatrixXd solve_spd(const Eigen::MatrixXd& M, const Eigen::MatrixXd& B);

}  // namespace fasm
