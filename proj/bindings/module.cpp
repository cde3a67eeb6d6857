#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fasm/basis.hpp"
#include "fasm/covariance.hpp"
#include "fasm/estimator.hpp"
#include "fasm/numerics.hpp"
#include "fasm/sim.hpp"

namespace py = pybind11;
using namespace fasm;

PYBIND11_MODULE(_core, m) {
    m.doc() = "factor-augmented smoothing for discretized functional data";

    py::register_exception<numeric_error>(m, "NumericError");

    py::class_<Interval>(m, "Interval")
        .def(py::init<double, double>(), py::arg("a"), py::arg("b"))
        .def_readonly("a", &Interval::a)
        .def_readonly("b", &Interval::b);

    py::class_<BasisSystem>(m, "BasisSystem")
        .def_readonly("K", &BasisSystem::K)
        .def_readonly("domain", &BasisSystem::domain)
        .def_readonly("period", &BasisSystem::period)
        .def_readonly("order", &BasisSystem::order)
        .def_readonly("knots", &BasisSystem::knots);

    m.def("make_fourier_basis", &make_fourier_basis, py::arg("K"), py::arg("domain"),
          py::arg("period"), py::arg("amplitude") = 2.0, py::arg("orthonormal") = false);
    m.def("make_bspline_basis", &make_bspline_basis, py::arg("order"),
          py::arg("interior_knots"), py::arg("domain"));
    m.def("make_smoothing_spline_basis", &make_smoothing_spline_basis, py::arg("grid"),
          py::arg("order") = 4);
    m.def("eval_basis", &eval_basis, py::arg("basis"), py::arg("points"));
    m.def("eval_basis_deriv2", &eval_basis_deriv2, py::arg("basis"), py::arg("points"));
    m.def(
        "penalty_matrix", [](const BasisSystem& b) { return penalty_matrix(b).R; },
        py::arg("basis"));

    py::enum_<AlphaMode>(m, "AlphaMode")
        .value("FixedPerRun", AlphaMode::FixedPerRun)
        .value("ReselectEachIteration", AlphaMode::ReselectEachIteration);

    py::class_<FasmConfig>(m, "FasmConfig")
        .def(py::init<>())
        .def_readwrite("r", &FasmConfig::r)
        .def_readwrite("alpha_grid", &FasmConfig::alpha_grid)
        .def_readwrite("delta", &FasmConfig::delta)
        .def_readwrite("max_iter", &FasmConfig::max_iter)
        .def_readwrite("center", &FasmConfig::center)
        .def_readwrite("alpha_mode", &FasmConfig::alpha_mode);

    py::class_<FasmFit>(m, "FasmFit")
        .def_readonly("C_hat", &FasmFit::C_hat)
        .def_readonly("A_hat", &FasmFit::A_hat)
        .def_readonly("F_hat", &FasmFit::F_hat)
        .def_readonly("E_hat", &FasmFit::E_hat)
        .def_readonly("alpha", &FasmFit::alpha)
        .def_readonly("df", &FasmFit::df)
        .def_readonly("iterations", &FasmFit::iterations)
        .def_readonly("converged", &FasmFit::converged);

    m.def("default_alpha_grid", &default_alpha_grid);
    m.def("fit_fasm", &fit_fasm, py::arg("Y"), py::arg("basis"), py::arg("grid"),
          py::arg("config"));
    m.def("fit_smoothing_only", &fit_smoothing_only, py::arg("Y"), py::arg("basis"),
          py::arg("grid"), py::arg("alpha_grid"));
    m.def(
        "reconstruct",
        [](const FasmFit& fit, const BasisSystem& basis, const Eigen::VectorXd& points) {
            return reconstruct(fit, basis, points);
        },
        py::arg("fit"), py::arg("basis"), py::arg("points"));
    m.def(
        "select_num_factors",
        [](const Eigen::MatrixXd& Z, int r_max) {
            const FactorSelection sel = select_num_factors(Z, r_max);
            return py::make_tuple(sel.r, sel.eigenvalues);
        },
        py::arg("Z"), py::arg("r_max"));

    m.def(
        "fasm_covariance",
        [](const FasmFit& fit, const Eigen::MatrixXd& Phi) {
            return fasm_covariance(fit, Phi).Sigma;
        },
        py::arg("fit"), py::arg("Phi"));
    m.def(
        "sample_covariance", [](const Eigen::MatrixXd& Y) { return sample_covariance(Y).Sigma; },
        py::arg("Y"));
    m.def(
        "frobenius_mse",
        [](const Eigen::MatrixXd& estimate, const Eigen::MatrixXd& truth) {
            return frobenius_mse(CovarianceEstimate{estimate, CovSource::Fasm},
                                 CovarianceEstimate{truth, CovSource::Population});
        },
        py::arg("estimate"), py::arg("truth"));

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("n", &Scenario::n)
        .def_readonly("p", &Scenario::p)
        .def_readonly("grid", &Scenario::grid)
        .def_readonly("Y", &Scenario::Y)
        .def_readonly("X_true", &Scenario::X_true);

    m.def("gen_bspline_factor", &gen_bspline_factor, py::arg("n"), py::arg("p"),
          py::arg("sigma"), py::arg("seed"), py::arg("coef_sd") = 1.5,
          py::arg("factor_sd") = 0.5, py::arg("eps_sd") = 0.5);
    m.def("gen_fourier_factor", &gen_fourier_factor, py::arg("n"), py::arg("p"),
          py::arg("sigma"), py::arg("seed"), py::arg("coef_sd") = 1.5,
          py::arg("factor_sd") = 0.5, py::arg("eps_sd") = 0.5);
    m.def("gen_misspec_fourier", &gen_misspec_fourier, py::arg("n"), py::arg("p"),
          py::arg("seed"), py::arg("coef_sd") = 0.5, py::arg("eps_sd") = 0.5);
    m.def("gen_stepjump", &gen_stepjump, py::arg("n"), py::arg("p"), py::arg("delta"),
          py::arg("seed"), py::arg("coef_sd") = 1.5, py::arg("eps_sd") = 0.5);
    m.def("amse", &amse, py::arg("X_true"), py::arg("X_hat"));
}
