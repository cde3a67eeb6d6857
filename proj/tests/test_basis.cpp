#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "fasm/basis.hpp"

using fasm::BasisSystem;
using fasm::Interval;
using fasm::eval_basis;
using fasm::eval_basis_deriv2;
using fasm::make_bspline_basis;
using fasm::make_fourier_basis;
using fasm::make_smoothing_spline_basis;
using fasm::penalty_matrix;

namespace {

constexpr double kPi = 3.14159265358979323846;

Eigen::VectorXd linspace(double a, double b, int n) {
    return Eigen::VectorXd::LinSpaced(n, a, b);
}

// Midpoint-rule approximation of the curvature penalty, used as an
// independent oracle for penalty_matrix.
Eigen::MatrixXd riemann_penalty(const BasisSystem& basis, int subintervals) {
    const double a = basis.domain.a;
    const double b = basis.domain.b;
    const double h = (b - a) / subintervals;
    Eigen::VectorXd mids(subintervals);
    for (int i = 0; i < subintervals; ++i) mids(i) = a + (i + 0.5) * h;
    const Eigen::MatrixXd D2 = eval_basis_deriv2(basis, mids);
    return h * (D2.transpose() * D2);
}

}  // namespace

TEST_CASE("fourier single-function system is the constant") {
    const BasisSystem basis = make_fourier_basis(1, {0.0, 1.0}, 1.0);
    CHECK(basis.K == 1);
    const Eigen::MatrixXd Phi = eval_basis(basis, linspace(0.0, 1.0, 11));
    CHECK(Phi.rows() == 11);
    CHECK(Phi.cols() == 1);
    for (int j = 0; j < 11; ++j) CHECK(Phi(j, 0) == 1.0);

    const Eigen::MatrixXd R = penalty_matrix(basis).R;
    CHECK(R.rows() == 1);
    CHECK(R(0, 0) == 0.0);

    const Eigen::MatrixXd D2 = eval_basis_deriv2(basis, linspace(0.0, 1.0, 5));
    CHECK(D2.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("fourier evaluation hand values") {
    const BasisSystem basis = make_fourier_basis(7, {0.0, 1.0}, 1.0);
    Eigen::VectorXd pts(2);
    pts << 0.25, 0.0;
    const Eigen::MatrixXd Phi = eval_basis(basis, pts);
    CHECK(Phi.cols() == 7);
    // second function is 2 sin(2 pi u): equals 2 at u = 0.25
    CHECK(Phi(0, 1) == doctest::Approx(2.0).epsilon(1e-14));
    // third function is 2 cos(2 pi u): equals the amplitude at u = 0
    CHECK(Phi(1, 2) == doctest::Approx(2.0).epsilon(1e-14));
    // sines vanish at the left endpoint
    CHECK(std::abs(Phi(1, 1)) < 1e-14);
    CHECK(std::abs(Phi(1, 3)) < 1e-14);
    // frequencies double: column 3 is 2 sin(4 pi u), zero at u = 0.25
    CHECK(std::abs(Phi(0, 3)) < 1e-13);
}

TEST_CASE("fourier second derivative hand value") {
    // For phi(u) = 2 sin(2 pi u), D2 phi(0.25) = -2 (2 pi)^2 = -8 pi^2.
    const BasisSystem basis = make_fourier_basis(3, {0.0, 1.0}, 1.0);
    Eigen::VectorXd pt(1);
    pt << 0.25;
    const Eigen::MatrixXd D2 = eval_basis_deriv2(basis, pt);
    CHECK(D2(0, 1) == doctest::Approx(-78.95683520871486).epsilon(1e-13));
    CHECK(D2(0, 0) == 0.0);
}

TEST_CASE("fourier penalty diagonal matches the closed form") {
    // With amplitude 1 and period 1 on [0,1], the sin(2 pi u) entry is
    // (2 pi)^4 / 2 = 8 pi^4.
    const BasisSystem basis = make_fourier_basis(3, {0.0, 1.0}, 1.0, 1.0);
    const Eigen::MatrixXd R = penalty_matrix(basis).R;
    const double expected = 779.2727282720195;  // 8 pi^4
    CHECK(R(1, 1) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(R(2, 2) == doctest::Approx(expected).epsilon(1e-13));
    CHECK(std::abs(R(1, 2)) < 1e-9);
    for (int k = 0; k < 3; ++k) {
        CHECK(R(0, k) == 0.0);
        CHECK(R(k, 0) == 0.0);
    }
}

TEST_CASE("fourier penalty matches a quadrature oracle on a shifted domain") {
    const BasisSystem basis = make_fourier_basis(5, {0.2, 1.5}, 0.7, 2.0);
    const Eigen::MatrixXd R = penalty_matrix(basis).R;
    const Eigen::MatrixXd oracle = riemann_penalty(basis, 100000);
    const double scale = R.cwiseAbs().maxCoeff();
    CHECK((R - oracle).cwiseAbs().maxCoeff() < 1e-8 * scale);
}

TEST_CASE("orthonormal fourier functions have unit norm") {
    const double a = 0.0, b = 2.0;
    const BasisSystem basis = make_fourier_basis(5, {a, b}, b - a, 2.0, true);
    // constant column equals 1/sqrt(b - a)
    Eigen::VectorXd pt(1);
    pt << 0.7;
    const Eigen::MatrixXd Phi0 = eval_basis(basis, pt);
    CHECK(Phi0(0, 0) == doctest::Approx(1.0 / std::sqrt(b - a)).epsilon(1e-14));

    const int nq = 200001;
    const Eigen::VectorXd q = linspace(a, b, nq);
    const Eigen::MatrixXd Phi = eval_basis(basis, q);
    const double h = (b - a) / (nq - 1);
    for (int k = 0; k < basis.K; ++k) {
        // trapezoid rule for the squared norm
        double integral = 0.5 * (Phi(0, k) * Phi(0, k) + Phi(nq - 1, k) * Phi(nq - 1, k));
        for (int j = 1; j < nq - 1; ++j) integral += Phi(j, k) * Phi(j, k);
        integral *= h;
        CHECK(integral == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("fourier construction rejects bad arguments") {
    CHECK_THROWS_AS(make_fourier_basis(4, {0.0, 1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_fourier_basis(0, {0.0, 1.0}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_fourier_basis(3, {0.0, 1.0}, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(make_fourier_basis(3, {1.0, 0.0}, 1.0), std::invalid_argument);
}

TEST_CASE("bspline dimension bookkeeping") {
    std::vector<double> nine;
    for (int i = 1; i <= 9; ++i) nine.push_back(i / 10.0);
    CHECK(make_bspline_basis(4, nine, {0.0, 1.0}).K == 13);
    CHECK(make_bspline_basis(4, {}, {0.0, 1.0}).K == 4);
    CHECK(make_bspline_basis(3, {0.5}, {0.0, 1.0}).K == 4);

    const BasisSystem basis = make_bspline_basis(4, nine, {0.0, 1.0});
    CHECK(basis.knots.size() == static_cast<std::size_t>(basis.K + basis.order));
    CHECK(basis.knots.front() == 0.0);
    CHECK(basis.knots.back() == 1.0);
}

TEST_CASE("bspline partition of unity and nonnegativity") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const BasisSystem basis = make_bspline_basis(4, {0.2, 0.35, 0.5, 0.9}, {0.0, 1.0});
    Eigen::VectorXd pts(1000);
    for (int i = 0; i < 1000; ++i) pts(i) = unif(rng);
    pts(0) = 0.0;
    pts(1) = 1.0;
    const Eigen::MatrixXd Phi = eval_basis(basis, pts);
    CHECK(Phi.minCoeff() >= 0.0);
    CHECK(Phi.maxCoeff() <= 1.0 + 1e-12);
    for (int j = 0; j < 1000; ++j)
        CHECK(Phi.row(j).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single-segment cubic reduces to the Bernstein polynomials") {
    const BasisSystem basis = make_bspline_basis(4, {}, {0.0, 1.0});
    Eigen::VectorXd pts(3);
    pts << 0.0, 0.3, 1.0;
    const Eigen::MatrixXd Phi = eval_basis(basis, pts);
    const Eigen::MatrixXd D2 = eval_basis_deriv2(basis, pts);
    for (int j = 0; j < 3; ++j) {
        const double u = pts(j);
        CHECK(Phi(j, 0) == doctest::Approx(std::pow(1 - u, 3)).epsilon(1e-13));
        CHECK(Phi(j, 1) == doctest::Approx(3 * u * (1 - u) * (1 - u)).epsilon(1e-13));
        CHECK(Phi(j, 2) == doctest::Approx(3 * u * u * (1 - u)).epsilon(1e-13));
        CHECK(Phi(j, 3) == doctest::Approx(u * u * u).epsilon(1e-13));
        CHECK(D2(j, 0) == doctest::Approx(6 * (1 - u)).epsilon(1e-12));
        CHECK(D2(j, 1) == doctest::Approx(18 * u - 12).epsilon(1e-12));
        CHECK(D2(j, 2) == doctest::Approx(6 - 18 * u).epsilon(1e-12));
        CHECK(D2(j, 3) == doctest::Approx(6 * u).epsilon(1e-12));
    }
}

TEST_CASE("bspline second derivative is right-continuous at interior knots") {
    // With order 3 the second derivative is piecewise constant, so the value
    // reported exactly at a knot must match the segment to its right.
    const BasisSystem basis = make_bspline_basis(3, {0.5}, {0.0, 1.0});
    Eigen::VectorXd pts(3);
    pts << 0.5, 0.5 + 1e-9, 0.5 - 1e-9;
    const Eigen::MatrixXd D2 = eval_basis_deriv2(basis, pts);
    for (int k = 0; k < basis.K; ++k) {
        CHECK(D2(0, k) == doctest::Approx(D2(1, k)).epsilon(1e-12));
    }
    // and the left-limit differs for at least one function
    CHECK((D2.row(0) - D2.row(2)).cwiseAbs().maxCoeff() > 1.0);
}

TEST_CASE("bspline penalty matches the quadrature oracle") {
    const BasisSystem basis = make_bspline_basis(4, {0.3, 0.6}, {0.0, 1.0});
    const Eigen::MatrixXd R = penalty_matrix(basis).R;
    const Eigen::MatrixXd oracle = riemann_penalty(basis, 100000);
    const double scale = R.cwiseAbs().maxCoeff();
    CHECK((R - oracle).cwiseAbs().maxCoeff() < 1e-8 * scale);
}

TEST_CASE("penalty matrices are symmetric positive semidefinite") {
    std::vector<BasisSystem> systems;
    systems.push_back(make_fourier_basis(9, {0.0, 1.0}, 1.0));
    systems.push_back(make_bspline_basis(4, {0.25, 0.5, 0.75}, {0.0, 1.0}));
    systems.push_back(make_bspline_basis(5, {0.2, 0.4, 0.6, 0.8}, {-1.0, 2.0}));
    for (const auto& basis : systems) {
        const Eigen::MatrixXd R = penalty_matrix(basis).R;
        CHECK((R - R.transpose()).cwiseAbs().maxCoeff() == 0.0);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
        CHECK(es.eigenvalues().minCoeff() > -1e-8 * std::max(1.0, R.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("bspline construction rejects bad arguments") {
    CHECK_THROWS_AS(make_bspline_basis(1, {}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_bspline_basis(4, {0.5, 0.4}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_bspline_basis(4, {0.5, 0.5}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_bspline_basis(4, {1.5}, {0.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_bspline_basis(4, {}, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("evaluation outside the domain is rejected") {
    const BasisSystem basis = make_bspline_basis(4, {0.5}, {0.0, 1.0});
    Eigen::VectorXd bad(1);
    bad << 1.5;
    CHECK_THROWS_AS(eval_basis(basis, bad), std::invalid_argument);
    CHECK_THROWS_AS(eval_basis_deriv2(basis, bad), std::invalid_argument);
}

TEST_CASE("smoothing spline dimensions follow the grid") {
    auto grid = [](int p) {
        std::vector<double> g(p);
        for (int j = 0; j < p; ++j) g[j] = static_cast<double>(j) / (p - 1);
        return g;
    };
    CHECK(make_smoothing_spline_basis(grid(51)).K == 53);
    CHECK(make_smoothing_spline_basis(grid(2)).K == 4);
    CHECK(make_smoothing_spline_basis(grid(5)).K == 7);

    const BasisSystem basis = make_smoothing_spline_basis(grid(5));
    Eigen::VectorXd pts = Eigen::VectorXd::LinSpaced(5, 0.0, 1.0);
    const Eigen::MatrixXd Phi = eval_basis(basis, pts);
    CHECK(Phi.rows() == 5);
    CHECK(Phi.cols() == 7);
}

TEST_CASE("smoothing spline rejects degenerate grids") {
    CHECK_THROWS_AS(make_smoothing_spline_basis({0.5}), std::invalid_argument);
    CHECK_THROWS_AS(make_smoothing_spline_basis({0.0, 0.5, 0.5, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_smoothing_spline_basis({0.0, 0.6, 0.4, 1.0}), std::invalid_argument);
}

TEST_CASE("penalty annihilates linear functions") {
    // A straight line has zero curvature, so coefficient vectors that
    // reproduce linear functions must lie in the null space of R.
    const BasisSystem basis = make_bspline_basis(4, {0.3, 0.7}, {0.0, 1.0});
    const Eigen::MatrixXd R = penalty_matrix(basis).R;
    const Eigen::VectorXd pts = linspace(0.0, 1.0, 200);
    const Eigen::MatrixXd Phi = eval_basis(basis, pts);

    // solve for coefficients reproducing f(u) = 2u + 1 on a fine grid
    const Eigen::VectorXd target = 2.0 * pts.array() + 1.0;
    const Eigen::VectorXd coef = Phi.colPivHouseholderQr().solve(target);
    CHECK((Phi * coef - target).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(std::abs(coef.dot(R * coef)) < 1e-8);
}
