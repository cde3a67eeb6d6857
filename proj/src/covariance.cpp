#include "fasm/covariance.hpp"

#include <stdexcept>

namespace fasm {

namespace {

// Centered second-moment matrix with divisor n-1, written exactly as
// X X'/(n-1) - (X1)(X1)'/(n(n-1)) for the m x n matrix X of per-subject columns.
Eigen::MatrixXd centered_moment(const Eigen::MatrixXd& X) {
    const double n = static_cast<double>(X.cols());
    const Eigen::VectorXd rowsum = X.rowwise().sum();
    Eigen::MatrixXd S = X * X.transpose() / (n - 1.0);
    S.noalias() -= rowsum * rowsum.transpose() / (n * (n - 1.0));
    return S;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& S) {
    return 0.5 * (S + S.transpose());
}

}  // namespace

CovarianceEstimate fasm_covariance(const FasmFit& fit, const Eigen::MatrixXd& Phi) {
    const Eigen::Index n = fit.C_hat.cols();
    if (n < 2) throw std::invalid_argument("fasm_covariance: need n >= 2 subjects");
    if (Phi.cols() != fit.C_hat.rows())
        throw std::invalid_argument("fasm_covariance: Phi and C_hat dimensions disagree");

    const Eigen::MatrixXd Sigma_c = centered_moment(fit.C_hat);
    Eigen::MatrixXd Sigma = Phi * Sigma_c * Phi.transpose();
    if (fit.A_hat.cols() > 0) {
        const Eigen::MatrixXd Sigma_f = centered_moment(fit.F_hat.transpose());
        Sigma.noalias() += fit.A_hat * Sigma_f * fit.A_hat.transpose();
    }
    Sigma += (fit.E_hat.rowwise().squaredNorm() / static_cast<double>(n))
                 .asDiagonal()
                 .toDenseMatrix();
    return CovarianceEstimate{symmetrized(Sigma), CovSource::Fasm};
}

CovarianceEstimate sample_covariance(const Eigen::MatrixXd& Y) {
    const Eigen::Index n = Y.cols();
    if (n < 2) throw std::invalid_argument("sample_covariance: need n >= 2 subjects");
    const Eigen::VectorXd mean = Y.rowwise().mean();
    const Eigen::MatrixXd centered = Y.colwise() - mean;
    Eigen::MatrixXd Sigma = centered * centered.transpose() / static_cast<double>(n - 1);
    return CovarianceEstimate{symmetrized(Sigma), CovSource::Sample};
}

double frobenius_mse(const CovarianceEstimate& estimate, const CovarianceEstimate& truth) {
    if (estimate.Sigma.rows() != truth.Sigma.rows() ||
        estimate.Sigma.cols() != truth.Sigma.cols())
        throw std::invalid_argument("frobenius_mse: dimension mismatch");
    const double p = static_cast<double>(estimate.Sigma.rows());
    return (estimate.Sigma - truth.Sigma).squaredNorm() / p;
}

CovarianceEstimate population_covariance(const Scenario& scenario) {
    if (scenario.kind != ScenarioKind::BSplineFactor &&
        scenario.kind != ScenarioKind::FourierFactor)
        throw numeric_error(
            "population_covariance: no closed-form truth for this scenario kind");

    // coefficients vary by subject with covariance coef_sd^2 I, the realized
    // factor rows act as fixed loadings for the sigma^2-scaled subject loadings,
    // and the measurement error contributes eps_sd^2 on the diagonal
    const double c2 = scenario.coef_sd * scenario.coef_sd;
    const double s2 = scenario.sigma_or_delta * scenario.sigma_or_delta;
    const double e2 = scenario.eps_sd * scenario.eps_sd;
    Eigen::MatrixXd Sigma = c2 * scenario.Phi_truth * scenario.Phi_truth.transpose();
    if (scenario.factor_rows.size() > 0)
        Sigma.noalias() += s2 * scenario.factor_rows.transpose() * scenario.factor_rows;
    Sigma.diagonal().array() += e2;
    return CovarianceEstimate{symmetrized(Sigma), CovSource::Population};
}

}  // namespace fasm
