#include "fasm/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fasm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The projected quantities every ridge/mGCV evaluation needs. G is formed as
// a Gram matrix of M Phi, which keeps it exactly symmetric PSD; M itself is
// never materialized here (I - A A'/p is applied directly).
struct Projected {
    Eigen::MatrixXd G;    // Phi' M Phi
    Eigen::MatrixXd B;    // Phi' M Y
    Eigen::VectorXd yMy;  // per-subject ||M Y_i||^2
    Eigen::Index p = 0;
    Eigen::Index n = 0;
};

Eigen::MatrixXd apply_complement(const Eigen::MatrixXd& A, const Eigen::MatrixXd& X) {
    if (A.cols() == 0) return X;
    const double p = static_cast<double>(A.rows());
    return X - A * ((A.transpose() * X) / p);
}

Projected project(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Phi,
                  const Eigen::MatrixXd& A) {
    Projected out;
    const Eigen::MatrixXd MPhi = apply_complement(A, Phi);
    const Eigen::MatrixXd MY = apply_complement(A, Y);
    out.G.noalias() = MPhi.transpose() * MPhi;
    out.B.noalias() = MPhi.transpose() * Y;
    out.yMy = MY.colwise().squaredNorm();
    out.p = Y.rows();
    out.n = Y.cols();
    return out;
}

struct RidgeEval {
    double score = kInf;
    double df = 0.0;
    Eigen::VectorXd sse;
    Eigen::MatrixXd C;
    bool spd_ok = false;
};

// Shared-factorization evaluation at one alpha: coefficients, df, projected
// SSE via SSE_i = y'My - 2 c'B_i + c'G c (valid because M is idempotent).
RidgeEval eval_alpha(const Projected& proj, const Eigen::MatrixXd& R, double alpha) {
    RidgeEval out;
    Eigen::MatrixXd S = proj.G + alpha * R;
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) return out;
    out.spd_ok = true;
    out.C = llt.solve(proj.B);
    out.df = llt.solve(proj.G).trace();

    const Eigen::VectorXd cross = (out.C.array() * proj.B.array()).colwise().sum();
    const Eigen::VectorXd quad = (out.C.array() * (proj.G * out.C).array()).colwise().sum();
    out.sse = (proj.yMy - 2.0 * cross + quad).cwiseMax(0.0);

    const double p = static_cast<double>(proj.p);
    if (out.df >= p) {
        out.score = kInf;
    } else {
        const double denom = (p - out.df) * (p - out.df);
        out.score = (p / denom) * out.sse.mean();
    }
    return out;
}

// Grid search with ties resolved toward the larger alpha.
std::pair<std::size_t, RidgeEval> select_on_grid(const Projected& proj, const Eigen::MatrixXd& R,
                                                 const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("alpha grid must be nonempty");
    std::size_t best_idx = 0;
    RidgeEval best;
    bool found = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        RidgeEval ev = eval_alpha(proj, R, grid[i]);
        if (!ev.spd_ok || !std::isfinite(ev.score)) continue;
        if (!found || ev.score < best.score ||
            (ev.score == best.score && grid[i] > grid[best_idx])) {
            best = std::move(ev);
            best_idx = i;
            found = true;
        }
    }
    if (!found)
        throw numeric_error(
            "select_alpha: every grid point scored infinite (over-parameterized configuration)");
    return {best_idx, std::move(best)};
}

// Full spectrum of (1/np) Z Z'; the caller slices what it needs.
EigenDecomposition residual_spectrum(const Eigen::MatrixXd& Z) {
    const double np = static_cast<double>(Z.rows()) * static_cast<double>(Z.cols());
    Eigen::MatrixXd S = (Z * Z.transpose()) / np;
    return sym_eig_desc(S);
}

void check_constraint(const Eigen::MatrixXd& A, const char* who) {
    if (A.cols() == 0) return;
    const double p = static_cast<double>(A.rows());
    const Eigen::MatrixXd gram = A.transpose() * A / p;
    const Eigen::MatrixXd dev =
        gram - Eigen::MatrixXd::Identity(A.cols(), A.cols());
    if (dev.cwiseAbs().maxCoeff() > 1e-6)
        throw std::invalid_argument(std::string(who) +
                                    ": loadings violate the A'A/p = I constraint");
}

void validate_config(const FasmConfig& config, Eigen::Index p, Eigen::Index n) {
    if (config.r < 0) throw std::invalid_argument("fit_fasm: r must be nonnegative");
    if (config.r >= std::min(p, n))
        throw std::invalid_argument("fit_fasm: r must be below min(n, p)");
    if (config.alpha_grid.empty())
        throw std::invalid_argument("fit_fasm: alpha grid must be nonempty");
    for (std::size_t i = 0; i < config.alpha_grid.size(); ++i) {
        if (!(config.alpha_grid[i] > 0.0))
            throw std::invalid_argument("fit_fasm: alpha grid must be strictly positive");
        if (i > 0 && config.alpha_grid[i] <= config.alpha_grid[i - 1])
            throw std::invalid_argument("fit_fasm: alpha grid must be sorted ascending");
    }
    if (!(config.delta > 0.0)) throw std::invalid_argument("fit_fasm: delta must be positive");
    if (config.max_iter < 1) throw std::invalid_argument("fit_fasm: max_iter must be >= 1");
}

}  // namespace

std::vector<double> default_alpha_grid() {
    std::vector<double> grid(41);
    for (int i = 0; i < 41; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, -6.0 + 0.25 * i);
    return grid;
}

ProjectionComplement projection_complement(const Eigen::MatrixXd& A) {
    check_constraint(A, "projection_complement");
    const Eigen::Index p = A.rows();
    ProjectionComplement out;
    out.A = A;
    out.r = static_cast<int>(A.cols());
    out.M = Eigen::MatrixXd::Identity(p, p);
    if (A.cols() > 0) out.M.noalias() -= A * A.transpose() / static_cast<double>(p);
    return out;
}

Eigen::MatrixXd ridge_step(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Phi,
                           const PenaltyMatrix& R, double alpha,
                           const ProjectionComplement& M) {
    if (alpha < 0.0) throw std::invalid_argument("ridge_step: alpha must be nonnegative");
    const Projected proj = project(Y, Phi, M.A);
    Eigen::MatrixXd S = proj.G + alpha * R.R;
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success)
        throw spd_error(
            "ridge_step: projected system is not positive definite "
            "(alpha too small for a rank-deficient design)");
    return llt.solve(proj.B);
}

PcaResult pca_step(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Phi,
                   const Eigen::MatrixXd& C_hat, int r) {
    const Eigen::Index p = Y.rows(), n = Y.cols();
    if (r < 0 || r > std::min(p, n))
        throw std::invalid_argument("pca_step: need 0 <= r <= min(n, p)");
    PcaResult out;
    if (r == 0) {
        out.A_hat.resize(p, 0);
        out.eigenvalues.resize(0);
        return out;
    }
    Eigen::MatrixXd Z = Y;
    Z.noalias() -= Phi * C_hat;
    const EigenDecomposition eig = residual_spectrum(Z);
    out.A_hat = std::sqrt(static_cast<double>(p)) * eig.vectors.leftCols(r);
    out.eigenvalues = eig.values.head(r);
    const double lead = out.eigenvalues(0);
    out.degenerate = !(lead > 0.0);
    for (int k = 0; k < r; ++k)
        if (!(out.eigenvalues(k) > 1e-12 * lead)) out.degenerate = true;
    return out;
}

McvResult mgcv(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Phi, const PenaltyMatrix& R,
               double alpha, const ProjectionComplement& M) {
    const Projected proj = project(Y, Phi, M.A);
    RidgeEval ev = eval_alpha(proj, R.R, alpha);
    if (!ev.spd_ok)
        throw spd_error("mgcv: projected system is not positive definite at alpha=" +
                        std::to_string(alpha));
    return McvResult{ev.score, ev.df, std::move(ev.sse)};
}

std::pair<double, double> select_alpha(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Phi,
                                       const PenaltyMatrix& R, const ProjectionComplement& M,
                                       const std::vector<double>& grid) {
    const Projected proj = project(Y, Phi, M.A);
    const auto [idx, ev] = select_on_grid(proj, R.R, grid);
    return {grid[idx], ev.score};
}

Eigen::MatrixXd extract_factors(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Phi,
                                const Eigen::MatrixXd& C_hat, const Eigen::MatrixXd& A_hat) {
    check_constraint(A_hat, "extract_factors");
    const double p = static_cast<double>(Y.rows());
    Eigen::MatrixXd Z = Y;
    Z.noalias() -= Phi * C_hat;
    return Z.transpose() * A_hat / p;  // n x r
}

FasmFit fit_fasm(const Eigen::MatrixXd& Y, const BasisSystem& basis,
                 const Eigen::VectorXd& grid, const FasmConfig& config) {
    const Eigen::Index p = Y.rows(), n = Y.cols();
    if (!Y.allFinite()) throw std::invalid_argument("fit_fasm: Y contains non-finite entries");
    if (grid.size() != p)
        throw std::invalid_argument("fit_fasm: grid length must match the number of rows of Y");
    validate_config(config, p, n);

    const Eigen::MatrixXd Phi = eval_basis(basis, grid);
    const PenaltyMatrix R = penalty_matrix(basis);
    const int r = config.r;

    FasmFit fit;
    Eigen::MatrixXd Yw = Y;
    if (config.center) {
        fit.row_means = Y.rowwise().mean();
        Yw.colwise() -= fit.row_means;
    }

    Eigen::MatrixXd A(p, 0);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(Phi.cols(), n);
    double alpha = 0.0;
    double df_smooth = 0.0;
    bool converged = false;
    int iterations = 0;

    for (int t = 1; t <= config.max_iter; ++t) {
        bool tie = false;
        if (t > 1 && r > 0) {
            Eigen::MatrixXd Z = Yw;
            Z.noalias() -= Phi * C;
            const EigenDecomposition eig = residual_spectrum(Z);
            A = std::sqrt(static_cast<double>(p)) * eig.vectors.leftCols(r);
            const double lead = eig.values(0);
            if (!(lead > 0.0) || eig.values(r - 1) <= 1e-12 * lead)
                fit.pca_degenerate = true;
            if (r < std::min(p, n)) {
                const double lr = eig.values(r - 1), lnext = eig.values(r);
                if (lnext > 0.0 && lr / lnext < 1.0 + 1e-8) tie = true;
            }
        }

        const Projected proj = project(Yw, Phi, A);
        RidgeEval ev;
        if (t == 1 || config.alpha_mode == AlphaMode::ReselectEachIteration) {
            auto [idx, best] = select_on_grid(proj, R.R, config.alpha_grid);
            alpha = config.alpha_grid[idx];
            ev = std::move(best);
        } else {
            ev = eval_alpha(proj, R.R, alpha);
            if (!ev.spd_ok)
                throw spd_error("fit_fasm: projected system lost positive definiteness at alpha=" +
                                std::to_string(alpha));
        }
        df_smooth = ev.df;

        double drift = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            drift = std::max(drift, (ev.C.col(i) - C.col(i)).norm());
        C = std::move(ev.C);
        iterations = t;

        IterationRecord rec;
        rec.iteration = t;
        rec.drift = drift;
        rec.alpha = alpha;
        rec.mgcv_score = ev.score;
        rec.df = ev.df;
        rec.sse_projected = ev.sse.mean();
        Eigen::MatrixXd raw = Yw;
        raw.noalias() -= Phi * C;
        rec.sse_raw = raw.colwise().squaredNorm().mean();
        rec.objective = ev.sse.sum() + alpha * (C.array() * (R.R * C).array()).sum();
        rec.eigen_tie = tie;
        fit.trace.push_back(rec);

        if (drift < config.delta) {
            converged = true;
            break;
        }
    }

    if (r > 0 && A.cols() == 0) {
        // the loop never reached a PCA step (max_iter == 1 or immediate stop)
        const PcaResult pca = pca_step(Yw, Phi, C, r);
        A = pca.A_hat;
        if (pca.degenerate) fit.pca_degenerate = true;
    }

    fit.C_hat = std::move(C);
    fit.A_hat = A;
    Eigen::MatrixXd Z = Yw;
    Z.noalias() -= Phi * fit.C_hat;
    fit.F_hat = (r > 0) ? Eigen::MatrixXd(Z.transpose() * A / static_cast<double>(p))
                        : Eigen::MatrixXd(n, 0);
    fit.E_hat = std::move(Z);
    if (r > 0) fit.E_hat.noalias() -= fit.A_hat * fit.F_hat.transpose();
    fit.alpha = alpha;
    fit.df = df_smooth + r;
    fit.iterations = iterations;
    fit.converged = converged;

    if (config.center) {
        // the mean curve gets its own ridge fit at the selected alpha
        const Projected mean_proj = project(fit.row_means, Phi, Eigen::MatrixXd(p, 0));
        Eigen::LLT<Eigen::MatrixXd> llt(Eigen::MatrixXd(mean_proj.G + alpha * R.R));
        if (llt.info() != Eigen::Success)
            throw spd_error("fit_fasm: mean-curve ridge system is not positive definite");
        fit.mean_coef = llt.solve(mean_proj.B);
    }
    return fit;
}

FasmFit fit_smoothing_only(const Eigen::MatrixXd& Y, const BasisSystem& basis,
                           const Eigen::VectorXd& grid,
                           const std::vector<double>& alpha_grid) {
    FasmConfig config;
    config.r = 0;
    config.alpha_grid = alpha_grid;
    config.max_iter = 1;
    FasmFit fit = fit_fasm(Y, basis, grid, config);
    fit.converged = true;  // closed-form solve, nothing left to iterate
    return fit;
}

Eigen::MatrixXd reconstruct(const FasmFit& fit, const BasisSystem& basis,
                            const Eigen::VectorXd& points) {
    const Eigen::MatrixXd Phi_pts = eval_basis(basis, points);
    Eigen::MatrixXd curves = Phi_pts * fit.C_hat;
    if (fit.mean_coef.size() > 0)
        curves.colwise() += Eigen::VectorXd(Phi_pts * fit.mean_coef);
    return curves;
}

FactorSelection select_num_factors(const Eigen::MatrixXd& Z, int r_max) {
    const Eigen::Index m = std::min(Z.rows(), Z.cols());
    if (r_max < 1 || r_max >= m)
        throw std::invalid_argument("select_num_factors: need 1 <= r_max < min(n, p)");
    const EigenDecomposition eig = residual_spectrum(Z);
    FactorSelection out;
    out.eigenvalues = eig.values.cwiseMax(0.0);
    if (!(out.eigenvalues(0) > 0.0)) {
        out.r = 0;  // zero residual: no factor structure to rank
        return out;
    }
    double best_ratio = -1.0;
    for (int k = 1; k <= r_max; ++k) {
        const double lk = out.eigenvalues(k - 1), lnext = out.eigenvalues(k);
        const double ratio = (lnext == 0.0) ? kInf : lk / lnext;
        if (ratio > best_ratio) {
            best_ratio = ratio;
            out.r = k;
        }
        if (ratio == kInf) break;  // exact low rank: the first infinite ratio wins
    }
    return out;
}

}  // namespace fasm
