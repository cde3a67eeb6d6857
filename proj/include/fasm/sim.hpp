#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fasm/basis.hpp"
#include "fasm/estimator.hpp"

namespace fasm {

// Counter-based stream built on the SplitMix64 mixer. Each (seed, replication,
// tag) triple names an independent stream whose draws depend only on their
// index, so replications generate identically whether run serially or in
// parallel. Normals come from Box-Muller on the stream's uniforms.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t replication, std::uint64_t tag);

    double uniform();              // (0, 1)
    double normal(double sd);      // N(0, sd^2)
    void fill_normal(Eigen::MatrixXd& out, double sd);  // column-major order

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

enum class ScenarioKind { BSplineFactor, FourierFactor, MisspecFourier, StepJump };

// One seeded synthetic data set bundling the observations with their truth.
struct Scenario {
    ScenarioKind kind;
    int n = 0;
    int p = 0;
    double sigma_or_delta = 0.0;  // loading scale for factor scenarios, jump size for StepJump
    std::uint64_t seed = 0;

    Eigen::VectorXd grid;    // p equispaced points on [0,1]
    Eigen::MatrixXd Y;       // p x n observed
    Eigen::MatrixXd X_true;  // p x n true smooth curves

    // truth parameters
    Eigen::MatrixXd Phi_truth;    // p x K generating design
    Eigen::MatrixXd factor_rows;  // realized F (4 x p) for factor scenarios, else empty
    double coef_sd = 0.0;
    double eps_sd = 0.0;
    Eigen::VectorXd mu;                     // step-jump mean on the grid, else empty
    std::optional<BasisSystem> wrong_basis; // misspec only: first-half basis extended globally
};

// Order-4 B-spline truth with K=13 (9 equispaced interior knots), 4 latent
// factors with loading scale sigma. The sd overrides exist for tests that
// need the noiseless degenerate cases.
Scenario gen_bspline_factor(int n, int p, double sigma, std::uint64_t seed,
                            double coef_sd = 1.5, double factor_sd = 0.5,
                            double eps_sd = 0.5);

// Fourier truth with K=9, otherwise the same factor and error laws.
Scenario gen_fourier_factor(int n, int p, double sigma, std::uint64_t seed,
                            double coef_sd = 1.5, double factor_sd = 0.5,
                            double eps_sd = 0.5);

// Piecewise-frequency Fourier truth: the second half of the interval doubles
// every frequency. The scenario carries the globally-extended first-half
// basis as the "wrong" basis handed to the estimator.
Scenario gen_misspec_fourier(int n, int p, std::uint64_t seed,
                             double coef_sd = 0.5, double eps_sd = 0.5);

// Smooth-plus-noise curves shifted by a common mean with a sharp sigmoidal
// ramp of height delta at u = 0.5, built from 25 order-4 B-spline coefficients.
Scenario gen_stepjump(int n, int p, double delta, std::uint64_t seed,
                      double coef_sd = 1.5, double eps_sd = 0.5);

// (1/np) sum of squared differences.
double amse(const Eigen::MatrixXd& X_true, const Eigen::MatrixXd& X_hat);

// sqrt of the mean squared residual of the full fit, factor term included.
double rmse_fit(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Y_hat);

enum class Method { Fasm, Smoothing };

struct McCell {
    ScenarioKind kind;
    int n = 0;
    int p = 0;
    double sigma_or_delta = 0.0;
};

struct RepRecord {
    int rep = 0;
    Method method = Method::Fasm;
    double amse = 0.0;
    double cov_mse = 0.0;  // NaN when no population truth exists
    double rmse = 0.0;
    double df = 0.0;
    double alpha = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct MethodStats {
    Method method = Method::Fasm;
    int reps_ok = 0;
    int reps_failed = 0;
    double mean_amse = 0.0, se_amse = 0.0;
    double mean_cov_mse = 0.0, se_cov_mse = 0.0;  // NaN when unavailable
    double mean_rmse = 0.0, se_rmse = 0.0;
    double mean_df = 0.0, se_df = 0.0;
};

struct McSummary {
    McCell cell;
    int reps = 0;
    std::uint64_t seed0 = 0;
    std::vector<MethodStats> stats;        // one entry per requested method
    std::vector<RepRecord> replications;   // per-rep metrics for completed reps
};

// Scenario text names used in CSV output and CLI arguments.
std::string scenario_name(ScenarioKind kind);
std::string method_name(Method method);

// The fitting configuration each scenario was designed for: basis family,
// factor count, and which truth comparisons apply.
struct CellPlan {
    BasisSystem fit_basis;
    int r = 0;
    bool population_truth = false;
};
CellPlan plan_for_cell(const McCell& cell, const Eigen::VectorXd& grid);

// Replication t draws from seed0 + t. Failed replications (numeric errors,
// not mere non-convergence) are excluded from the averages and counted.
// Covariance MSE is recorded on the per-entry scale, frobenius_mse / p.
McSummary run_monte_carlo(const McCell& cell, int reps,
                          const std::vector<Method>& methods, std::uint64_t seed0);

}  // namespace fasm
