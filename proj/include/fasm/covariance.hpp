#pragma once

#include <Eigen/Dense>

#include "fasm/estimator.hpp"
#include "fasm/sim.hpp"

namespace fasm {

enum class CovSource { Fasm, Sample, Population };

struct CovarianceEstimate {
    Eigen::MatrixXd Sigma;  // p x p, exactly symmetric
    CovSource source = CovSource::Sample;
};

// Model-based estimator: Phi S_c Phi' + A S_f A' + diag(E E'/n), where S_c and
// S_f are the centered second-moment matrices of the coefficients and factors
// with divisor n-1.
CovarianceEstimate fasm_covariance(const FasmFit& fit, const Eigen::MatrixXd& Phi);

// (Y - Ybar)(Y - Ybar)'/(n-1) with Ybar the rank-one row-mean matrix.
CovarianceEstimate sample_covariance(const Eigen::MatrixXd& Y);

// (1/p) * sum of squared entry differences.
double frobenius_mse(const CovarianceEstimate& estimate, const CovarianceEstimate& truth);

// Exact population covariance from a generator's parameters. Only the factor
// scenarios have a closed form; others throw numeric_error.
CovarianceEstimate population_covariance(const Scenario& scenario);

}  // namespace fasm
