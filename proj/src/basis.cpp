#include "fasm/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fasm {

namespace {

constexpr double kPi = std::numbers::pi;

void check_domain(const Interval& domain) {
    if (!(domain.a < domain.b))
        throw std::invalid_argument("basis domain must satisfy a < b");
}

double domain_tol(const Interval& d) { return 1e-12 * std::max(1.0, d.b - d.a); }

void check_point(const BasisSystem& basis, double u) {
    const double tol = domain_tol(basis.domain);
    if (u < basis.domain.a - tol || u > basis.domain.b + tol)
        throw std::invalid_argument("evaluation point " + std::to_string(u) +
                                    " outside basis domain [" + std::to_string(basis.domain.a) +
                                    ", " + std::to_string(basis.domain.b) + "]");
}

// ---- B-spline machinery (clamped knots, Cox-de Boor with derivatives) ----

int find_span(const std::vector<double>& knots, int K, int order, double u) {
    // valid spans are [knots[i], knots[i+1]) for i in [order-1, K-1];
    // u at or past the right boundary maps to the last span
    if (u >= knots[static_cast<std::size_t>(K)]) return K - 1;
    int lo = order - 1, hi = K;
    while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        if (u < knots[static_cast<std::size_t>(mid)])
            hi = mid;
        else
            lo = mid;
    }
    return lo;
}

// Values and derivatives of the `order` basis functions that are nonzero on
// the span containing u (the A2.3 algorithm). ders is (nd+1) x order; row d
// holds the d-th derivatives of basis functions span-order+1 .. span.
void basis_ders(const std::vector<double>& knots, int order, int span, double u, int nd,
                std::vector<std::vector<double>>& ders) {
    const int d = order - 1;  // degree
    std::vector<std::vector<double>> ndu(static_cast<std::size_t>(order),
                                         std::vector<double>(static_cast<std::size_t>(order)));
    std::vector<double> left(static_cast<std::size_t>(order)), right(static_cast<std::size_t>(order));
    ndu[0][0] = 1.0;
    for (int j = 1; j <= d; ++j) {
        left[static_cast<std::size_t>(j)] = u - knots[static_cast<std::size_t>(span + 1 - j)];
        right[static_cast<std::size_t>(j)] = knots[static_cast<std::size_t>(span + j)] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)] =
                right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
            const double temp = ndu[static_cast<std::size_t>(r)][static_cast<std::size_t>(j - 1)] /
                                ndu[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
            ndu[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] =
                saved + right[static_cast<std::size_t>(r + 1)] * temp;
            saved = left[static_cast<std::size_t>(j - r)] * temp;
        }
        ndu[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)] = saved;
    }

    ders.assign(static_cast<std::size_t>(nd + 1), std::vector<double>(static_cast<std::size_t>(order), 0.0));
    for (int j = 0; j <= d; ++j)
        ders[0][static_cast<std::size_t>(j)] = ndu[static_cast<std::size_t>(j)][static_cast<std::size_t>(d)];

    const int max_d = std::min(nd, d);
    std::vector<std::vector<double>> a(2, std::vector<double>(static_cast<std::size_t>(order)));
    for (int r = 0; r <= d; ++r) {
        int s1 = 0, s2 = 1;
        a[0][0] = 1.0;
        for (int k = 1; k <= max_d; ++k) {
            double der = 0.0;
            const int rk = r - k, pk = d - k;
            if (r >= k) {
                a[static_cast<std::size_t>(s2)][0] =
                    a[static_cast<std::size_t>(s1)][0] /
                    ndu[static_cast<std::size_t>(pk + 1)][static_cast<std::size_t>(rk)];
                der = a[static_cast<std::size_t>(s2)][0] *
                      ndu[static_cast<std::size_t>(rk)][static_cast<std::size_t>(pk)];
            }
            const int j1 = (rk >= -1) ? 1 : -rk;
            const int j2 = (r - 1 <= pk) ? k - 1 : d - r;
            for (int j = j1; j <= j2; ++j) {
                a[static_cast<std::size_t>(s2)][static_cast<std::size_t>(j)] =
                    (a[static_cast<std::size_t>(s1)][static_cast<std::size_t>(j)] -
                     a[static_cast<std::size_t>(s1)][static_cast<std::size_t>(j - 1)]) /
                    ndu[static_cast<std::size_t>(pk + 1)][static_cast<std::size_t>(rk + j)];
                der += a[static_cast<std::size_t>(s2)][static_cast<std::size_t>(j)] *
                       ndu[static_cast<std::size_t>(rk + j)][static_cast<std::size_t>(pk)];
            }
            if (r <= pk) {
                a[static_cast<std::size_t>(s2)][static_cast<std::size_t>(k)] =
                    -a[static_cast<std::size_t>(s1)][static_cast<std::size_t>(k - 1)] /
                    ndu[static_cast<std::size_t>(pk + 1)][static_cast<std::size_t>(r)];
                der += a[static_cast<std::size_t>(s2)][static_cast<std::size_t>(k)] *
                       ndu[static_cast<std::size_t>(r)][static_cast<std::size_t>(pk)];
            }
            ders[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)] = der;
            std::swap(s1, s2);
        }
    }
    double factor = static_cast<double>(d);
    for (int k = 1; k <= max_d; ++k) {
        for (int j = 0; j <= d; ++j)
            ders[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] *= factor;
        factor *= static_cast<double>(d - k);
    }
}

Eigen::MatrixXd eval_bspline(const BasisSystem& basis, const Eigen::VectorXd& points, int deriv) {
    const auto p = points.size();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p, basis.K);
    std::vector<std::vector<double>> ders;
    for (Eigen::Index j = 0; j < p; ++j) {
        check_point(basis, points(j));
        const double u = std::clamp(points(j), basis.domain.a, basis.domain.b);
        const int span = find_span(basis.knots, basis.K, basis.order, u);
        basis_ders(basis.knots, basis.order, span, u, deriv, ders);
        const int first = span - basis.order + 1;
        for (int local = 0; local < basis.order; ++local)
            out(j, first + local) = ders[static_cast<std::size_t>(deriv)][static_cast<std::size_t>(local)];
    }
    return out;
}

// ---- Gauss-Legendre nodes on [-1,1] (Newton on the Legendre recurrence) ----

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(static_cast<std::size_t>(n));
    weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = x;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

// ---- Fourier trig-product integrals over [a,b] ----

// frequencies are integer multiples of om, so equality of the m indices is exact
double int_trig(int mj, bool sj, int mk, bool sk, double om, double a, double b) {
    const double al = mj * om, be = mk * om;
    auto S = [](double w, double u) { return (w == 0.0) ? u : std::sin(w * u) / w; };
    auto C = [](double w, double u) { return (w == 0.0) ? 0.0 : -std::cos(w * u) / w; };
    if (sj && sk) {  // sin * sin = [cos((al-be)u) - cos((al+be)u)] / 2
        if (mj == mk) return 0.5 * ((b - a) - (S(2.0 * al, b) - S(2.0 * al, a)));
        return 0.5 * ((S(al - be, b) - S(al - be, a)) - (S(al + be, b) - S(al + be, a)));
    }
    if (!sj && !sk) {  // cos * cos = [cos((al-be)u) + cos((al+be)u)] / 2
        if (mj == mk) return 0.5 * ((b - a) + (S(2.0 * al, b) - S(2.0 * al, a)));
        return 0.5 * ((S(al - be, b) - S(al - be, a)) + (S(al + be, b) - S(al + be, a)));
    }
    // sin(al u) * cos(be u) = [sin((al+be)u) + sin((al-be)u)] / 2, swap so j is the sine
    if (!sj) return int_trig(mk, sk, mj, sj, om, a, b);
    return 0.5 * ((C(al + be, b) - C(al + be, a)) + (C(al - be, b) - C(al - be, a)));
}

}  // namespace

BasisSystem make_fourier_basis(int K, Interval domain, double period, double amplitude,
                               bool orthonormal) {
    check_domain(domain);
    if (K < 1) throw std::invalid_argument("make_fourier_basis: K must be >= 1");
    if (K % 2 == 0)
        throw std::invalid_argument(
            "make_fourier_basis: K must be odd (one constant plus complete sine/cosine pairs); got " +
            std::to_string(K));
    if (!(period > 0.0)) throw std::invalid_argument("make_fourier_basis: period must be positive");

    BasisSystem basis;
    basis.kind = BasisKind::Fourier;
    basis.K = K;
    basis.domain = domain;
    basis.period = period;
    if (orthonormal) {
        const double len = domain.b - domain.a;
        basis.const_value = 1.0 / std::sqrt(len);
        basis.pair_amplitude = std::sqrt(2.0 / len);
    } else {
        basis.const_value = 1.0;
        basis.pair_amplitude = amplitude;
    }
    return basis;
}

BasisSystem make_bspline_basis(int order, const std::vector<double>& interior_knots,
                               Interval domain) {
    check_domain(domain);
    if (order < 2) throw std::invalid_argument("make_bspline_basis: order must be >= 2");
    for (std::size_t i = 0; i < interior_knots.size(); ++i) {
        if (interior_knots[i] <= domain.a || interior_knots[i] >= domain.b)
            throw std::invalid_argument("make_bspline_basis: interior knot " +
                                        std::to_string(interior_knots[i]) +
                                        " not strictly inside the domain");
        if (i > 0 && interior_knots[i] <= interior_knots[i - 1])
            throw std::invalid_argument("make_bspline_basis: interior knots must be strictly increasing");
    }

    BasisSystem basis;
    basis.kind = BasisKind::BSpline;
    basis.order = order;
    basis.domain = domain;
    basis.K = static_cast<int>(interior_knots.size()) + order;
    basis.knots.reserve(interior_knots.size() + 2 * static_cast<std::size_t>(order));
    basis.knots.insert(basis.knots.end(), static_cast<std::size_t>(order), domain.a);
    basis.knots.insert(basis.knots.end(), interior_knots.begin(), interior_knots.end());
    basis.knots.insert(basis.knots.end(), static_cast<std::size_t>(order), domain.b);
    return basis;
}

BasisSystem make_smoothing_spline_basis(const std::vector<double>& grid, int order) {
    if (grid.size() < 2)
        throw std::invalid_argument("make_smoothing_spline_basis: need at least 2 grid points");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i] == grid[i - 1])
            throw std::invalid_argument("make_smoothing_spline_basis: duplicate grid point " +
                                        std::to_string(grid[i]));
        if (grid[i] < grid[i - 1])
            throw std::invalid_argument("make_smoothing_spline_basis: grid must be sorted");
    }
    const std::vector<double> interior(grid.begin() + 1, grid.end() - 1);
    return make_bspline_basis(order, interior, Interval{grid.front(), grid.back()});
}

Eigen::MatrixXd eval_basis(const BasisSystem& basis, const Eigen::VectorXd& points) {
    if (basis.kind == BasisKind::BSpline) return eval_bspline(basis, points, 0);

    const double om = 2.0 * kPi / basis.period;
    Eigen::MatrixXd out(points.size(), basis.K);
    for (Eigen::Index j = 0; j < points.size(); ++j) {
        check_point(basis, points(j));
        const double u = points(j);
        out(j, 0) = basis.const_value;
        for (int k = 1; k < basis.K; ++k) {
            const int m = (k + 1) / 2;
            out(j, k) = (k % 2 == 1) ? basis.pair_amplitude * std::sin(m * om * u)
                                     : basis.pair_amplitude * std::cos(m * om * u);
        }
    }
    return out;
}

Eigen::MatrixXd eval_basis_deriv2(const BasisSystem& basis, const Eigen::VectorXd& points) {
    if (basis.kind == BasisKind::BSpline) return eval_bspline(basis, points, 2);

    const double om = 2.0 * kPi / basis.period;
    Eigen::MatrixXd out(points.size(), basis.K);
    for (Eigen::Index j = 0; j < points.size(); ++j) {
        check_point(basis, points(j));
        const double u = points(j);
        out(j, 0) = 0.0;
        for (int k = 1; k < basis.K; ++k) {
            const int m = (k + 1) / 2;
            const double scale = -basis.pair_amplitude * (m * om) * (m * om);
            out(j, k) = (k % 2 == 1) ? scale * std::sin(m * om * u) : scale * std::cos(m * om * u);
        }
    }
    return out;
}

PenaltyMatrix penalty_matrix(const BasisSystem& basis) {
    Eigen::MatrixXd R = Eigen::MatrixXd::Zero(basis.K, basis.K);

    if (basis.kind == BasisKind::Fourier) {
        const double om = 2.0 * kPi / basis.period;
        const double amp2 = basis.pair_amplitude * basis.pair_amplitude;
        for (int j = 1; j < basis.K; ++j) {
            const int mj = (j + 1) / 2;
            const bool sin_j = (j % 2 == 1);
            for (int k = j; k < basis.K; ++k) {
                const int mk = (k + 1) / 2;
                const bool sin_k = (k % 2 == 1);
                const double coef = amp2 * (mj * om) * (mj * om) * (mk * om) * (mk * om);
                const double val =
                    coef * int_trig(mj, sin_j, mk, sin_k, om, basis.domain.a, basis.domain.b);
                R(j, k) = val;
                R(k, j) = val;
            }
        }
        return PenaltyMatrix{R};
    }

    // Per-knot-interval Gauss-Legendre: the integrand is piecewise polynomial
    // of degree 2(order-3), so this node count integrates it exactly.
    const int n_nodes = std::max(2, (2 * (basis.order - 3) + 1 + 1) / 2);
    std::vector<double> nodes, weights;
    gauss_legendre(n_nodes, nodes, weights);

    std::vector<double> breaks;
    for (double t : basis.knots)
        if (breaks.empty() || t > breaks.back()) breaks.push_back(t);

    std::vector<std::vector<double>> ders;
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
        const double mid = 0.5 * (breaks[s] + breaks[s + 1]);
        const double half = 0.5 * (breaks[s + 1] - breaks[s]);
        for (int g = 0; g < n_nodes; ++g) {
            const double u = mid + half * nodes[static_cast<std::size_t>(g)];
            const double w = half * weights[static_cast<std::size_t>(g)];
            const int span = find_span(basis.knots, basis.K, basis.order, u);
            basis_ders(basis.knots, basis.order, span, u, 2, ders);
            const int first = span - basis.order + 1;
            for (int li = 0; li < basis.order; ++li) {
                const double vi = ders[2][static_cast<std::size_t>(li)];
                if (vi == 0.0) continue;
                for (int lj = 0; lj < basis.order; ++lj)
                    R(first + li, first + lj) += w * vi * ders[2][static_cast<std::size_t>(lj)];
            }
        }
    }
    R = 0.5 * (R + R.transpose()).eval();
    return PenaltyMatrix{R};
}

}  // namespace fasm
