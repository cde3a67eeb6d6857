#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "fasm/covariance.hpp"
#include "fasm/estimator.hpp"
#include "fasm/numerics.hpp"
#include "fasm/sim.hpp"

using namespace fasm;

namespace {

Eigen::MatrixXd gaussian(int rows, int cols, std::mt19937& rng) {
    std::normal_distribution<double> normal;
    Eigen::MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) M(i, j) = normal(rng);
    return M;
}

FasmFit make_fit(const Eigen::MatrixXd& C, const Eigen::MatrixXd& A, const Eigen::MatrixXd& F,
                 const Eigen::MatrixXd& E) {
    FasmFit fit;
    fit.C_hat = C;
    fit.A_hat = A;
    fit.F_hat = F;
    fit.E_hat = E;
    return fit;
}

// Textbook two-pass sample covariance used as an oracle.
Eigen::MatrixXd two_pass_covariance(const Eigen::MatrixXd& Y) {
    const int p = static_cast<int>(Y.rows());
    const int n = static_cast<int>(Y.cols());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < n; ++i) mean += Y.col(i);
    mean /= n;
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd d = Y.col(i) - mean;
        S += d * d.transpose();
    }
    return S / (n - 1);
}

}  // namespace

TEST_CASE("smooth-part hand example") {
    // K = 1, Phi = ones: coefficients (0, 2) have centered moment 2, no factor
    // part, zero remainder, so Sigma is the constant matrix 2.
    const int p = 3;
    Eigen::MatrixXd C(1, 2);
    C << 0.0, 2.0;
    const FasmFit fit = make_fit(C, Eigen::MatrixXd::Zero(p, 0), Eigen::MatrixXd::Zero(2, 0),
                                 Eigen::MatrixXd::Zero(p, 2));
    const CovarianceEstimate est = fasm_covariance(fit, Eigen::MatrixXd::Ones(p, 1));
    CHECK(est.source == CovSource::Fasm);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) CHECK(est.Sigma(i, j) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("remainder contributes only to the diagonal with divisor n") {
    const int p = 3;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(1, 2);
    Eigen::MatrixXd E(p, 2);
    E << 1, -1, 0, 0, 2, 2;
    const FasmFit fit = make_fit(C, Eigen::MatrixXd::Zero(p, 0), Eigen::MatrixXd::Zero(2, 0), E);
    const CovarianceEstimate est = fasm_covariance(fit, Eigen::MatrixXd::Ones(p, 1));
    CHECK(est.Sigma(0, 0) == doctest::Approx(1.0).epsilon(1e-14));  // (1 + 1)/2
    CHECK(est.Sigma(1, 1) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(est.Sigma(2, 2) == doctest::Approx(4.0).epsilon(1e-14));  // (4 + 4)/2
    CHECK(std::abs(est.Sigma(0, 1)) < 1e-15);
    CHECK(std::abs(est.Sigma(0, 2)) < 1e-15);
}

TEST_CASE("factor part uses the centered factor moment") {
    std::mt19937 rng(31);
    const int p = 8, n = 2;
    Eigen::MatrixXd G = gaussian(p, 1, rng);
    Eigen::MatrixXd A = std::sqrt(static_cast<double>(p)) / G.norm() * G;
    Eigen::MatrixXd F(n, 1);
    F << 1.0, 3.0;
    // centered moment of (1, 3): 10/1 - 16/2 = 2
    const FasmFit fit = make_fit(Eigen::MatrixXd::Zero(1, n), A, F, Eigen::MatrixXd::Zero(p, n));
    const CovarianceEstimate est = fasm_covariance(fit, Eigen::MatrixXd::Ones(p, 1));
    const Eigen::MatrixXd expected = 2.0 * A * A.transpose();
    CHECK((est.Sigma - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("the three components add") {
    std::mt19937 rng(32);
    const int p = 12, n = 7, K = 4, r = 2;
    const Eigen::MatrixXd Phi = gaussian(p, K, rng);
    const Eigen::MatrixXd C = gaussian(K, n, rng);
    Eigen::MatrixXd G = gaussian(p, r, rng);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    const Eigen::MatrixXd A =
        std::sqrt(static_cast<double>(p)) * Eigen::MatrixXd(qr.householderQ()).leftCols(r);
    const Eigen::MatrixXd F = gaussian(n, r, rng);
    const Eigen::MatrixXd E = gaussian(p, n, rng);

    const FasmFit full = make_fit(C, A, F, E);
    const FasmFit smooth_only =
        make_fit(C, Eigen::MatrixXd::Zero(p, 0), Eigen::MatrixXd::Zero(n, 0),
                 Eigen::MatrixXd::Zero(p, n));
    const FasmFit factor_only =
        make_fit(Eigen::MatrixXd::Zero(K, n), A, F, Eigen::MatrixXd::Zero(p, n));
    const FasmFit noise_only =
        make_fit(Eigen::MatrixXd::Zero(K, n), Eigen::MatrixXd::Zero(p, 0),
                 Eigen::MatrixXd::Zero(n, 0), E);

    const Eigen::MatrixXd total = fasm_covariance(full, Phi).Sigma;
    const Eigen::MatrixXd parts = fasm_covariance(smooth_only, Phi).Sigma +
                                  fasm_covariance(factor_only, Phi).Sigma +
                                  fasm_covariance(noise_only, Phi).Sigma;
    CHECK((total - parts).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("model covariance is exactly symmetric") {
    std::mt19937 rng(33);
    const int p = 15, n = 9;
    const Eigen::MatrixXd Phi = gaussian(p, 5, rng);
    const FasmFit fit = make_fit(gaussian(5, n, rng), Eigen::MatrixXd::Zero(p, 0),
                                 Eigen::MatrixXd::Zero(n, 0), gaussian(p, n, rng));
    const Eigen::MatrixXd S = fasm_covariance(fit, Phi).Sigma;
    CHECK((S - S.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample covariance hand examples") {
    Eigen::MatrixXd Y1(1, 2);
    Y1 << 1.0, -1.0;
    CHECK(sample_covariance(Y1).Sigma(0, 0) == doctest::Approx(2.0).epsilon(1e-14));

    Eigen::MatrixXd Y2(2, 2);
    Y2 << 1, 2, 3, 5;
    const Eigen::MatrixXd S = sample_covariance(Y2).Sigma;
    CHECK(S(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(S(0, 1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(S(1, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(S(1, 1) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("sample covariance matches a two-pass oracle") {
    std::mt19937 rng(34);
    for (int rep = 0; rep < 30; ++rep) {
        const int p = 2 + static_cast<int>(rng() % 30);
        const int n = 2 + static_cast<int>(rng() % 30);
        const Eigen::MatrixXd Y = gaussian(p, n, rng);
        const Eigen::MatrixXd S = sample_covariance(Y).Sigma;
        const Eigen::MatrixXd oracle = two_pass_covariance(Y);
        CHECK((S - oracle).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("sample covariance is positive semidefinite") {
    std::mt19937 rng(35);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::MatrixXd Y = gaussian(12, 6, rng);
        const auto eig = sym_eig_desc(sample_covariance(Y).Sigma);
        CHECK(eig.values.minCoeff() > -1e-10);
    }
}

TEST_CASE("frobenius mse hand values") {
    CovarianceEstimate a{Eigen::MatrixXd::Identity(2, 2), CovSource::Fasm};
    CovarianceEstimate b{Eigen::MatrixXd::Zero(2, 2), CovSource::Population};
    // squared difference is 2, divided by p = 2
    CHECK(frobenius_mse(a, b) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(frobenius_mse(a, a) == 0.0);

    CovarianceEstimate c{Eigen::MatrixXd::Zero(3, 3), CovSource::Population};
    CHECK_THROWS_AS(frobenius_mse(a, c), std::invalid_argument);
}

TEST_CASE("single-subject input is rejected") {
    const FasmFit fit = make_fit(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(3, 0),
                                 Eigen::MatrixXd::Zero(1, 0), Eigen::MatrixXd::Zero(3, 1));
    CHECK_THROWS_AS(fasm_covariance(fit, Eigen::MatrixXd::Ones(3, 1)), std::invalid_argument);
    CHECK_THROWS_AS(sample_covariance(Eigen::MatrixXd::Zero(3, 1)), std::invalid_argument);
}

TEST_CASE("basis and coefficient dimensions must agree") {
    const FasmFit fit = make_fit(Eigen::MatrixXd::Zero(2, 4), Eigen::MatrixXd::Zero(5, 0),
                                 Eigen::MatrixXd::Zero(4, 0), Eigen::MatrixXd::Zero(5, 4));
    CHECK_THROWS_AS(fasm_covariance(fit, Eigen::MatrixXd::Ones(5, 3)), std::invalid_argument);
}

TEST_CASE("population covariance without factors") {
    const Scenario s = gen_bspline_factor(5, 20, 0.0, 11);
    const CovarianceEstimate pop = population_covariance(s);
    const Eigen::MatrixXd expected =
        s.coef_sd * s.coef_sd * s.Phi_truth * s.Phi_truth.transpose() +
        s.eps_sd * s.eps_sd * Eigen::MatrixXd::Identity(20, 20);
    CHECK((pop.Sigma - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(pop.source == CovSource::Population);
}

TEST_CASE("population covariance includes the realized factor loadings") {
    const Scenario s = gen_bspline_factor(6, 25, 2.0, 12);
    const CovarianceEstimate pop = population_covariance(s);
    const Eigen::MatrixXd expected =
        s.coef_sd * s.coef_sd * s.Phi_truth * s.Phi_truth.transpose() +
        4.0 * s.factor_rows.transpose() * s.factor_rows +
        s.eps_sd * s.eps_sd * Eigen::MatrixXd::Identity(25, 25);
    CHECK((pop.Sigma - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("population covariance is only defined for the factor scenarios") {
    CHECK_THROWS_AS(population_covariance(gen_misspec_fourier(10, 21, 13)), numeric_error);
    CHECK_THROWS_AS(population_covariance(gen_stepjump(10, 50, 1.0, 13)), numeric_error);
    CHECK_NOTHROW(population_covariance(gen_fourier_factor(5, 20, 1.0, 13)));
}

TEST_CASE("model covariance of a tight fit tracks the population truth") {
    // moderate-size factor scenario: the fitted covariance should land much
    // closer to the truth than chance level
    const Scenario s = gen_bspline_factor(40, 31, 1.0, 14);
    const auto basis = make_bspline_basis(4, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9},
                                          {0.0, 1.0});
    FasmConfig config;
    config.r = 4;
    const FasmFit fit = fit_fasm(s.Y, basis, s.grid, config);
    const Eigen::MatrixXd Phi = eval_basis(basis, s.grid);
    const CovarianceEstimate model = fasm_covariance(fit, Phi);
    const CovarianceEstimate pop = population_covariance(s);
    const CovarianceEstimate sample = sample_covariance(s.Y);
    const double mse_model = frobenius_mse(model, pop);
    const double mse_sample = frobenius_mse(sample, pop);
    CHECK(std::isfinite(mse_model));
    CHECK(mse_model < mse_sample);
}
