#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "fasm/basis.hpp"
#include "fasm/numerics.hpp"

namespace fasm {

std::vector<double> default_alpha_grid();  // 41 log-spaced points, 1e-6 .. 1e4

enum class AlphaMode { FixedPerRun, ReselectEachIteration };

struct FasmConfig {
    int r = 0;
    std::vector<double> alpha_grid = default_alpha_grid();
    double delta = 1e-6;   // convergence tolerance on the coefficient drift
    int max_iter = 100;
    bool center = false;
    AlphaMode alpha_mode = AlphaMode::ReselectEachIteration;
};

struct IterationRecord {
    int iteration = 0;
    double drift = 0.0;        // max_i ||c_i^(t) - c_i^(t-1)||
    double alpha = 0.0;
    double mgcv_score = 0.0;
    double df = 0.0;           // smoothing df (trace term only)
    double objective = 0.0;    // sum_i ||M(Y_i - Phi c_i)||^2 + alpha tr(C' R C)
    double sse_projected = 0.0;
    double sse_raw = 0.0;
    bool eigen_tie = false;    // lambda_r / lambda_{r+1} within 1e-8 of 1
};

struct FasmFit {
    Eigen::MatrixXd C_hat;  // K x n
    Eigen::MatrixXd A_hat;  // p x r, A'A/p = I_r
    Eigen::MatrixXd F_hat;  // n x r
    Eigen::MatrixXd E_hat;  // p x n, remainder Y - Phi C - A F'
    double alpha = 0.0;
    double df = 0.0;        // trace of the final hat operator plus r
    int iterations = 0;
    bool converged = false;
    std::vector<IterationRecord> trace;
    bool pca_degenerate = false;   // near-zero trailing eigenvalue seen in a PCA step

    // set when centering is enabled
    Eigen::VectorXd row_means;  // empty unless centered
    Eigen::VectorXd mean_coef;  // ridge coefficients of the mean curve
};

struct ProjectionComplement {
    Eigen::MatrixXd M;  // I_p - A A'/p
    Eigen::MatrixXd A;  // the generating loadings (p x r)
    int r = 0;
};

struct PcaResult {
    Eigen::MatrixXd A_hat;       // p x r, sqrt(p)-scaled top eigenvectors
    Eigen::VectorXd eigenvalues; // top r eigenvalues of (1/np) Z Z'
    bool degenerate = false;     // trailing eigenvalue ratio below 1e-12
};

struct McvResult {
    double score = 0.0;
    double df = 0.0;
    Eigen::VectorXd sse;  // per-subject projected residual sum of squares
};

struct FactorSelection {
    int r = 0;
    Eigen::VectorXd eigenvalues;  // full scree, descending
};

// M = I_p - A A'/p. Requires ||A'A/p - I_r|| <= 1e-6; r = 0 gives the identity.
ProjectionComplement projection_complement(const Eigen::MatrixXd& A);

// All n penalized coefficient columns against the shared system matrix:
// (Phi' M Phi + alpha R) C = Phi' M Y, one factorization, n right-hand sides.
Eigen::MatrixXd ridge_step(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Phi,
                           const PenaltyMatrix& R, double alpha,
                           const ProjectionComplement& M);

// Loadings from the residual second-moment matrix: A_hat = sqrt(p) times the
// top-r eigenvectors of (1/np) Z Z' with Z = Y - Phi C_hat.
PcaResult pca_step(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Phi,
                   const Eigen::MatrixXd& C_hat, int r);

// Mean generalized cross-validation: score = (1/n) sum_i p SSE_i / (p - df)^2
// with df = trace[Phi (Phi'M Phi + alpha R)^{-1} Phi' M] and the SSE taken in
// the projected problem. df >= p yields an infinite score.
McvResult mgcv(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Phi,
               const PenaltyMatrix& R, double alpha, const ProjectionComplement& M);

// Grid minimizer of the mgcv score; ties break toward the larger alpha.
// Throws numeric_error if every grid point scores infinite.
std::pair<double, double> select_alpha(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Phi,
                                       const PenaltyMatrix& R, const ProjectionComplement& M,
                                       const std::vector<double>& grid);

// Alternating ridge/PCA estimation starting from A = 0, reselecting alpha
// each iteration unless the mode says otherwise; stops when the coefficient
// drift falls below delta or max_iter is reached.
FasmFit fit_fasm(const Eigen::MatrixXd& Y, const BasisSystem& basis,
                 const Eigen::VectorXd& grid, const FasmConfig& config);

// One-shot penalized smoothing with mGCV selection; no factor component.
FasmFit fit_smoothing_only(const Eigen::MatrixXd& Y, const BasisSystem& basis,
                           const Eigen::VectorXd& grid,
                           const std::vector<double>& alpha_grid);

// F' = A'(Y - Phi C)/p, the least-squares factors under the A'A/p = I_r constraint.
Eigen::MatrixXd extract_factors(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Phi,
                                const Eigen::MatrixXd& C_hat, const Eigen::MatrixXd& A_hat);

// Smooth curves evaluated at arbitrary points: column i is c_i' Phi(u).
Eigen::MatrixXd reconstruct(const FasmFit& fit, const BasisSystem& basis,
                            const Eigen::VectorXd& points);

// Eigenvalue-ratio choice of the factor count on a residual matrix:
// r = argmax_{1<=k<=r_max} lambda_k / lambda_{k+1}.
FactorSelection select_num_factors(const Eigen::MatrixXd& Z, int r_max);

}  // namespace fasm
