#pragma once

#include <Eigen/Dense>
#include <vector>

namespace fasm {

struct Interval {
    double a = 0.0;
    double b = 1.0;
};

enum class BasisKind { Fourier, BSpline };

// A family of K basis functions on [a,b] with evaluable values and second
// derivatives. Fourier systems hold one constant function plus sine/cosine
// pairs at integer multiples of the base frequency; B-spline systems are
// clamped (endpoint knots repeated `order` times), so K = #interior + order.
struct BasisSystem {
    BasisKind kind = BasisKind::Fourier;
    int K = 0;
    Interval domain;

    // Fourier parameters
    double period = 1.0;
    double const_value = 1.0;      // value of the constant function
    double pair_amplitude = 2.0;   // amplitude of the sine/cosine pairs

    // B-spline parameters
    int order = 4;
    std::vector<double> knots;     // full clamped knot vector, length K + order
};

struct PenaltyMatrix {
    Eigen::MatrixXd R;  // K x K, symmetric PSD
};

// K odd: one constant plus (K-1)/2 sine/cosine pairs. The default amplitude 2
// matches the convention phi_k(u) = 2 sin(k pi u); pass orthonormal=true for
// the L2-orthonormal scaling instead (amplitude is then ignored).
BasisSystem make_fourier_basis(int K, Interval domain, double period,
                               double amplitude = 2.0, bool orthonormal = false);

BasisSystem make_bspline_basis(int order, const std::vector<double>& interior_knots,
                               Interval domain);

// Knots at every interior grid point: K = p + order - 2 basis functions
// (p + 2 for the default order 4).
BasisSystem make_smoothing_spline_basis(const std::vector<double>& grid, int order = 4);

// Entry (j,k) = phi_k(u_j). Points must lie inside the domain.
Eigen::MatrixXd eval_basis(const BasisSystem& basis, const Eigen::VectorXd& points);

// Second derivatives, same layout as eval_basis. At interior knots the
// right-continuous limit is returned.
Eigen::MatrixXd eval_basis_deriv2(const BasisSystem& basis, const Eigen::VectorXd& points);

// R[k,l] = integral of D2 phi_k * D2 phi_l over the domain. Fourier entries
// are analytic; B-spline entries use per-knot-interval Gauss-Legendre
// quadrature exact for the piecewise-polynomial integrand.
PenaltyMatrix penalty_matrix(const BasisSystem& basis);

}  // namespace fasm
