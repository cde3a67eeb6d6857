// Command-line front end: fit CSV data, run simulation grids, compare
// covariance estimators, and print residual scree diagnostics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fasm/basis.hpp"
#include "fasm/covariance.hpp"
#include "fasm/estimator.hpp"
#include "fasm/io.hpp"
#include "fasm/numerics.hpp"
#include "fasm/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::string command;
    std::string config_path;
    std::string input;
    std::string grid_path;
    std::string output_dir = ".";
    std::string basis = "bspline";
    std::string preset;
    std::string scenario = "bspline-factor";
    int K = 13;
    int order = 4;
    int r = 0;
    int max_iter = 100;
    int reps = 100;
    int n = 50;
    int p = 51;
    double alpha = -1.0;  // negative means "select on the grid"
    std::string alpha_grid_spec;
    double delta_tol = 1e-6;
    double sigma = 1.0;
    double period = 0.0;  // 0 means "domain length"
    std::uint64_t seed = 1;
    bool transpose = false;
    bool emit_data = false;
    bool center = false;
};

std::string one_line(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ';';
    return s;
}

fasm::ScenarioKind parse_scenario(const std::string& name) {
    if (name == "bspline-factor") return fasm::ScenarioKind::BSplineFactor;
    if (name == "fourier-factor") return fasm::ScenarioKind::FourierFactor;
    if (name == "misspec") return fasm::ScenarioKind::MisspecFourier;
    if (name == "step-jump") return fasm::ScenarioKind::StepJump;
    throw std::invalid_argument("unknown scenario '" + name + "'");
}

int scenario_code(fasm::ScenarioKind kind) { return static_cast<int>(kind); }
int method_code(fasm::Method method) { return method == fasm::Method::Fasm ? 0 : 1; }

std::vector<double> parse_alpha_grid_spec(const std::string& spec) {
    const std::size_t c1 = spec.find(':');
    const std::size_t c2 = (c1 == std::string::npos) ? std::string::npos : spec.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw std::invalid_argument("--alpha-grid expects min:max:count");
    const double lo = std::stod(spec.substr(0, c1));
    const double hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
    const int count = std::stoi(spec.substr(c2 + 1));
    if (!(lo > 0.0) || !(hi >= lo) || count < 1)
        throw std::invalid_argument("--alpha-grid needs 0 < min <= max and count >= 1");
    std::vector<double> grid(static_cast<std::size_t>(count));
    if (count == 1) {
        grid[0] = lo;
        return grid;
    }
    const double step = (std::log10(hi) - std::log10(lo)) / (count - 1);
    for (int i = 0; i < count; ++i)
        grid[static_cast<std::size_t>(i)] = std::pow(10.0, std::log10(lo) + i * step);
    return grid;
}

// Config-file values fill in any option whose flag was not passed.
void apply_config_file(Options& opt, const CLI::App& cmd) {
    std::ifstream in(opt.config_path);
    if (!in) throw fasm::io_error("cannot open config file '" + opt.config_path + "'");
    const json cfg = json::parse(in, nullptr, true, true);
    if (!cfg.is_object()) throw std::invalid_argument("config file must hold a JSON object");

    auto unset = [&cmd](const std::string& flag) { return cmd.count(flag) == 0; };
    auto take = [&cfg](const char* key, auto& into) {
        if (cfg.contains(key)) into = cfg.at(key).template get<std::decay_t<decltype(into)>>();
    };

    if (unset("--input")) take("input", opt.input);
    if (unset("--grid")) take("grid", opt.grid_path);
    if (unset("--output-dir")) take("output_dir", opt.output_dir);
    if (unset("--basis")) take("basis", opt.basis);
    if (unset("--preset")) take("preset", opt.preset);
    if (unset("--scenario")) take("scenario", opt.scenario);
    if (unset("--K")) take("K", opt.K);
    if (unset("--order")) take("order", opt.order);
    if (unset("--r")) take("r", opt.r);
    if (unset("--max-iter")) take("max_iter", opt.max_iter);
    if (unset("--reps")) take("reps", opt.reps);
    if (unset("--n")) take("n", opt.n);
    if (unset("--p")) take("p", opt.p);
    if (unset("--alpha")) take("alpha", opt.alpha);
    if (unset("--alpha-grid")) take("alpha_grid", opt.alpha_grid_spec);
    if (unset("--delta-tol")) take("delta_tol", opt.delta_tol);
    if (unset("--sigma")) take("sigma", opt.sigma);
    if (cfg.contains("period")) take("period", opt.period);
    if (unset("--seed")) take("seed", opt.seed);
    if (unset("--transpose")) take("transpose", opt.transpose);
    if (unset("--emit-data")) take("emit_data", opt.emit_data);
    if (cfg.contains("center")) take("center", opt.center);
}

json resolved_config(const Options& opt) {
    json j;
    j["command"] = opt.command;
    if (!opt.config_path.empty()) j["config"] = opt.config_path;
    if (!opt.input.empty()) j["input"] = opt.input;
    if (!opt.grid_path.empty()) j["grid"] = opt.grid_path;
    j["output_dir"] = opt.output_dir;
    j["basis"] = opt.basis;
    if (!opt.preset.empty()) j["preset"] = opt.preset;
    j["scenario"] = opt.scenario;
    j["K"] = opt.K;
    j["order"] = opt.order;
    j["r"] = opt.r;
    j["max_iter"] = opt.max_iter;
    j["reps"] = opt.reps;
    j["n"] = opt.n;
    j["p"] = opt.p;
    if (opt.alpha >= 0.0) j["alpha"] = opt.alpha;
    if (!opt.alpha_grid_spec.empty()) j["alpha_grid"] = opt.alpha_grid_spec;
    j["delta_tol"] = opt.delta_tol;
    j["sigma"] = opt.sigma;
    if (opt.period > 0.0) j["period"] = opt.period;
    j["seed"] = opt.seed;
    j["transpose"] = opt.transpose;
    j["emit_data"] = opt.emit_data;
    j["center"] = opt.center;
    return j;
}

Eigen::VectorXd default_grid(int p) {
    Eigen::VectorXd grid(p);
    for (int j = 0; j < p; ++j)
        grid(j) = (p == 1) ? 0.0 : static_cast<double>(j) / static_cast<double>(p - 1);
    return grid;
}

Eigen::VectorXd load_grid(const Options& opt, int p) {
    if (opt.grid_path.empty()) return default_grid(p);
    const fasm::CsvMatrix m = fasm::read_csv_matrix(opt.grid_path);
    Eigen::VectorXd grid;
    if (m.values.cols() == 1)
        grid = m.values.col(0);
    else if (m.values.rows() == 1)
        grid = m.values.row(0).transpose();
    else
        throw std::invalid_argument("grid file must hold a single row or column");
    if (grid.size() != p)
        throw std::invalid_argument("grid has " + std::to_string(grid.size()) +
                                    " points, data has " + std::to_string(p) + " rows");
    return grid;
}

fasm::BasisSystem resolve_basis(const Options& opt, const Eigen::VectorXd& grid) {
    const fasm::Interval domain{grid.minCoeff(), grid.maxCoeff()};
    if (opt.basis == "fourier") {
        const double period = opt.period > 0.0 ? opt.period : domain.b - domain.a;
        return fasm::make_fourier_basis(opt.K, domain, period);
    }
    if (opt.basis == "bspline") {
        const int n_interior = opt.K - opt.order;
        if (n_interior < 0)
            throw std::invalid_argument("bspline basis needs K >= order");
        std::vector<double> interior(static_cast<std::size_t>(n_interior));
        for (int i = 0; i < n_interior; ++i)
            interior[static_cast<std::size_t>(i)] =
                domain.a + (domain.b - domain.a) * (i + 1) / (n_interior + 1.0);
        return fasm::make_bspline_basis(opt.order, interior, domain);
    }
    if (opt.basis == "smoothing-spline") {
        std::vector<double> g(grid.data(), grid.data() + grid.size());
        return fasm::make_smoothing_spline_basis(g, opt.order);
    }
    throw std::invalid_argument("unknown basis '" + opt.basis +
                                "' (expected fourier|bspline|smoothing-spline)");
}

std::vector<double> resolve_alpha_grid(const Options& opt) {
    if (opt.alpha >= 0.0) return {opt.alpha};
    if (!opt.alpha_grid_spec.empty()) return parse_alpha_grid_spec(opt.alpha_grid_spec);
    return fasm::default_alpha_grid();
}

fasm::FasmConfig resolve_fit_config(const Options& opt) {
    fasm::FasmConfig config;
    config.r = opt.r;
    config.alpha_grid = resolve_alpha_grid(opt);
    config.delta = opt.delta_tol;
    config.max_iter = opt.max_iter;
    config.center = opt.center;
    config.alpha_mode =
        opt.alpha >= 0.0 ? fasm::AlphaMode::FixedPerRun : fasm::AlphaMode::ReselectEachIteration;
    return config;
}

Eigen::MatrixXd load_input_matrix(const Options& opt) {
    if (opt.input.empty()) throw std::invalid_argument("--input is required for this command");
    fasm::CsvMatrix m = fasm::read_csv_matrix(opt.input);
    if (!m.values.allFinite()) {
        for (Eigen::Index i = 0; i < m.values.rows(); ++i)
            for (Eigen::Index j = 0; j < m.values.cols(); ++j)
                if (!std::isfinite(m.values(i, j)))
                    throw std::invalid_argument(
                        "input row " + std::to_string(i + 1 + (m.header.empty() ? 0 : 1)) +
                        " column " + std::to_string(j + 1) + ": non-finite value");
    }
    if (opt.transpose) return m.values.transpose();
    return m.values;
}

fasm::Scenario generate_scenario(const Options& opt, std::uint64_t seed) {
    switch (parse_scenario(opt.scenario)) {
        case fasm::ScenarioKind::BSplineFactor:
            return fasm::gen_bspline_factor(opt.n, opt.p, opt.sigma, seed);
        case fasm::ScenarioKind::FourierFactor:
            return fasm::gen_fourier_factor(opt.n, opt.p, opt.sigma, seed);
        case fasm::ScenarioKind::MisspecFourier:
            return fasm::gen_misspec_fourier(opt.n, opt.p, seed);
        case fasm::ScenarioKind::StepJump:
            return fasm::gen_stepjump(opt.n, opt.p, opt.sigma, seed);
    }
    throw std::invalid_argument("unknown scenario");
}

std::vector<fasm::McCell> preset_cells(const std::string& preset) {
    std::vector<fasm::McCell> cells;
    const std::vector<std::pair<int, int>> dims = {{20, 51}, {20, 101}, {50, 51}, {100, 101}};
    const std::vector<double> sigmas = {0.5, 0.75, 1.0};
    if (preset == "table1" || preset == "table2") {
        for (const auto& [n, p] : dims)
            for (double s : sigmas)
                cells.push_back({fasm::ScenarioKind::BSplineFactor, n, p, s});
    } else if (preset == "table3") {
        for (const auto& [n, p] : dims)
            for (double s : sigmas)
                cells.push_back({fasm::ScenarioKind::FourierFactor, n, p, s});
    } else if (preset == "table4") {
        for (double delta : {1.0, 2.0, 3.0})
            cells.push_back({fasm::ScenarioKind::StepJump, 50, 50, delta});
    } else if (preset == "misspec") {
        cells.push_back({fasm::ScenarioKind::MisspecFourier, 100, 51, 0.0});
    } else {
        throw std::invalid_argument("unknown preset '" + preset +
                                    "' (expected table1|table2|table3|table4|misspec)");
    }
    return cells;
}

std::string report_header(const Options& opt) {
    return "resolved config: " + resolved_config(opt).dump() + "\n";
}

int cmd_fit(const Options& opt) {
    const Eigen::MatrixXd Y = load_input_matrix(opt);
    const int p = static_cast<int>(Y.rows());
    const Eigen::VectorXd grid = load_grid(opt, p);
    const fasm::BasisSystem basis = resolve_basis(opt, grid);
    const fasm::FasmConfig config = resolve_fit_config(opt);

    const fasm::FasmFit fit = fasm::fit_fasm(Y, basis, grid, config);

    const fs::path dir(opt.output_dir);
    fs::create_directories(dir);
    fasm::write_csv_matrix(dir / "coefficients.csv", fit.C_hat);
    if (config.r > 0) {
        fasm::write_csv_matrix(dir / "loadings.csv", fit.A_hat);
        fasm::write_csv_matrix(dir / "factors.csv", fit.F_hat);
    }
    fasm::write_csv_matrix(dir / "residuals.csv", fit.E_hat);
    fasm::write_csv_matrix(dir / "fitted_curves.csv", fasm::reconstruct(fit, basis, grid));

    std::string report = report_header(opt);
    report += "mode: ";
    report += (config.r == 0 ? "smoothing-only" : "factor-augmented");
    report += "\nK: " + std::to_string(basis.K);
    report += "\nr: " + std::to_string(config.r);
    report += "\nalpha: " + fasm::format_double(fit.alpha);
    report += "\ndf: " + fasm::format_double(fit.df);
    report += "\niterations: " + std::to_string(fit.iterations);
    report += std::string("\nconverged: ") + (fit.converged ? "true" : "false");
    report += "\n";
    fasm::write_file_atomic(dir / "report.txt", report);

    std::cout << "config: " << resolved_config(opt).dump() << "\n";
    std::cout << "wrote: " << (config.r > 0 ? 6 : 4) << " files to " << dir.string() << "\n";
    return 0;
}

int cmd_simulate(const Options& opt) {
    std::vector<fasm::McCell> cells;
    if (!opt.preset.empty()) {
        cells = preset_cells(opt.preset);
    } else {
        cells.push_back({parse_scenario(opt.scenario), opt.n, opt.p, opt.sigma});
    }

    const fs::path dir(opt.output_dir);
    fs::create_directories(dir);

    const std::vector<std::string> summary_header = {
        "scenario", "n", "p", "sigma_or_delta", "method", "mean_amse", "se_amse",
        "mean_cov_mse", "mean_rmse", "mean_df", "reps_ok", "reps_failed"};
    const std::vector<std::string> rep_header = {
        "scenario", "n", "p", "sigma_or_delta", "method", "rep", "amse",
        "cov_mse", "rmse", "df", "alpha", "iterations", "converged"};

    std::vector<std::array<double, 12>> summary_rows;
    std::vector<std::array<double, 13>> rep_rows;

    for (const fasm::McCell& cell : cells) {
        const fasm::McSummary result = fasm::run_monte_carlo(
            cell, opt.reps, {fasm::Method::Fasm, fasm::Method::Smoothing}, opt.seed);

        for (const fasm::MethodStats& st : result.stats) {
            summary_rows.push_back({static_cast<double>(scenario_code(cell.kind)),
                                    static_cast<double>(cell.n), static_cast<double>(cell.p),
                                    cell.sigma_or_delta,
                                    static_cast<double>(method_code(st.method)), st.mean_amse,
                                    st.se_amse, st.mean_cov_mse, st.mean_rmse, st.mean_df,
                                    static_cast<double>(st.reps_ok),
                                    static_cast<double>(st.reps_failed)});
        }
        for (const fasm::RepRecord& rec : result.replications) {
            rep_rows.push_back({static_cast<double>(scenario_code(cell.kind)),
                                static_cast<double>(cell.n), static_cast<double>(cell.p),
                                cell.sigma_or_delta,
                                static_cast<double>(method_code(rec.method)),
                                static_cast<double>(rec.rep), rec.amse, rec.cov_mse, rec.rmse,
                                rec.df, rec.alpha, static_cast<double>(rec.iterations),
                                rec.converged ? 1.0 : 0.0});
        }

        if (opt.emit_data) {
            const fasm::Scenario sc0 = [&] {
                Options cell_opt = opt;
                cell_opt.scenario = fasm::scenario_name(cell.kind);
                cell_opt.n = cell.n;
                cell_opt.p = cell.p;
                cell_opt.sigma = cell.sigma_or_delta;
                return generate_scenario(cell_opt, opt.seed);
            }();
            const std::string stem = fasm::scenario_name(cell.kind) + "_n" +
                                     std::to_string(cell.n) + "_p" + std::to_string(cell.p) +
                                     "_s" + fasm::format_double(cell.sigma_or_delta);
            fasm::write_csv_matrix(dir / ("data_" + stem + ".csv"), sc0.Y);
            fasm::write_csv_matrix(dir / ("truth_" + stem + ".csv"), sc0.X_true);
        }
    }

    Eigen::MatrixXd summary(static_cast<Eigen::Index>(summary_rows.size()), 12);
    for (std::size_t i = 0; i < summary_rows.size(); ++i)
        for (int j = 0; j < 12; ++j)
            summary(static_cast<Eigen::Index>(i), j) = summary_rows[i][static_cast<std::size_t>(j)];
    fasm::write_csv_matrix(dir / "summary.csv", summary, summary_header);

    Eigen::MatrixXd per_rep(static_cast<Eigen::Index>(rep_rows.size()), 13);
    for (std::size_t i = 0; i < rep_rows.size(); ++i)
        for (int j = 0; j < 13; ++j)
            per_rep(static_cast<Eigen::Index>(i), j) = rep_rows[i][static_cast<std::size_t>(j)];
    fasm::write_csv_matrix(dir / "per_rep.csv", per_rep, rep_header);

    std::cout << "config: " << resolved_config(opt).dump() << "\n";
    std::cout << "wrote: summary.csv (" << summary_rows.size() << " rows), per_rep.csv ("
              << rep_rows.size() << " rows) to " << dir.string() << "\n";
    return 0;
}

int cmd_covariance(const Options& opt) {
    const fs::path dir(opt.output_dir);
    fs::create_directories(dir);

    std::string report = report_header(opt);
    report += "scale: mean squared error per matrix entry\n";

    if (!opt.input.empty()) {
        const Eigen::MatrixXd Y = load_input_matrix(opt);
        const int p = static_cast<int>(Y.rows());
        if (Y.cols() < 2) throw std::invalid_argument("covariance needs n >= 2 subjects");
        const Eigen::VectorXd grid = load_grid(opt, p);
        const fasm::BasisSystem basis = resolve_basis(opt, grid);
        const fasm::FasmConfig config = resolve_fit_config(opt);
        const fasm::FasmFit fit = fasm::fit_fasm(Y, basis, grid, config);
        const Eigen::MatrixXd Phi = fasm::eval_basis(basis, grid);

        const fasm::CovarianceEstimate cov_f = fasm::fasm_covariance(fit, Phi);
        const fasm::CovarianceEstimate cov_s = fasm::sample_covariance(Y);
        fasm::write_csv_matrix(dir / "cov_fasm.csv", cov_f.Sigma);
        fasm::write_csv_matrix(dir / "cov_sample.csv", cov_s.Sigma);
        report += "truth: unavailable (real data), no MSE computed\n";
    } else {
        const fasm::McCell cell{parse_scenario(opt.scenario), opt.n, opt.p, opt.sigma};
        const fasm::Scenario sc = generate_scenario(opt, opt.seed);
        const fasm::CellPlan plan = fasm::plan_for_cell(cell, sc.grid);
        fasm::FasmConfig config = resolve_fit_config(opt);
        if (config.r == 0) config.r = plan.r;
        const fasm::FasmFit fit = fasm::fit_fasm(sc.Y, plan.fit_basis, sc.grid, config);
        const Eigen::MatrixXd Phi = fasm::eval_basis(plan.fit_basis, sc.grid);

        const fasm::CovarianceEstimate cov_f = fasm::fasm_covariance(fit, Phi);
        const fasm::CovarianceEstimate cov_s = fasm::sample_covariance(sc.Y);
        fasm::write_csv_matrix(dir / "cov_fasm.csv", cov_f.Sigma);
        fasm::write_csv_matrix(dir / "cov_sample.csv", cov_s.Sigma);

        if (plan.population_truth) {
            const fasm::McSummary mc = fasm::run_monte_carlo(
                cell, opt.reps, {fasm::Method::Fasm, fasm::Method::Smoothing}, opt.seed);
            double mse_f = std::numeric_limits<double>::quiet_NaN();
            double mse_s = std::numeric_limits<double>::quiet_NaN();
            for (const fasm::MethodStats& st : mc.stats) {
                if (st.method == fasm::Method::Fasm) mse_f = st.mean_cov_mse;
                if (st.method == fasm::Method::Smoothing) mse_s = st.mean_cov_mse;
            }
            report += "reps: " + std::to_string(opt.reps) + "\n";
            report += "mse_fasm: " + fasm::format_double(mse_f) + "\n";
            report += "mse_sample: " + fasm::format_double(mse_s) + "\n";
            report += "ratio: " + fasm::format_double(mse_f / mse_s) + "\n";
        } else {
            report += "truth: no population covariance for scenario " + opt.scenario + "\n";
        }
    }

    fasm::write_file_atomic(dir / "mse_report.txt", report);
    std::cout << "config: " << resolved_config(opt).dump() << "\n";
    std::cout << "wrote: cov_fasm.csv, cov_sample.csv, mse_report.txt to " << dir.string()
              << "\n";
    return 0;
}

int cmd_scree(const Options& opt) {
    Eigen::MatrixXd Y;
    Eigen::VectorXd grid;
    fasm::BasisSystem basis;
    if (!opt.input.empty()) {
        Y = load_input_matrix(opt);
        grid = load_grid(opt, static_cast<int>(Y.rows()));
        basis = resolve_basis(opt, grid);
    } else {
        const fasm::McCell cell{parse_scenario(opt.scenario), opt.n, opt.p, opt.sigma};
        const fasm::Scenario sc = generate_scenario(opt, opt.seed);
        Y = sc.Y;
        grid = sc.grid;
        basis = fasm::plan_for_cell(cell, grid).fit_basis;
    }

    const fasm::FasmFit fit =
        fasm::fit_smoothing_only(Y, basis, grid, resolve_alpha_grid(opt));
    const int p = static_cast<int>(Y.rows());
    const int n = static_cast<int>(Y.cols());
    const int r_max =
        opt.r > 0 ? opt.r : std::min(10, std::max(1, std::min(p, n) - 1));
    const fasm::FactorSelection sel = fasm::select_num_factors(fit.E_hat, r_max);

    const Eigen::Index m = sel.eigenvalues.size();
    Eigen::MatrixXd out(m, 4);
    for (Eigen::Index k = 0; k < m; ++k) {
        out(k, 0) = static_cast<double>(k + 1);
        out(k, 1) = sel.eigenvalues(k);
        out(k, 2) = (k + 1 < m && sel.eigenvalues(k + 1) > 0.0)
                        ? sel.eigenvalues(k) / sel.eigenvalues(k + 1)
                        : std::numeric_limits<double>::quiet_NaN();
        out(k, 3) = static_cast<double>(sel.r);
    }
    const fs::path dir(opt.output_dir);
    fs::create_directories(dir);
    fasm::write_csv_matrix(dir / "eigenvalues.csv", out,
                           {"index", "eigenvalue", "ratio_to_next", "suggested_r"});

    std::cout << "config: " << resolved_config(opt).dump() << "\n";
    if (sel.eigenvalues.size() == 0 || sel.eigenvalues(0) <= 0.0)
        std::cout << "note: residual spectrum is zero, no factor structure detectable\n";
    std::cout << "suggested_r: " << sel.r << "\n";
    std::cout << "wrote: eigenvalues.csv to " << dir.string() << "\n";
    return 0;
}

void add_common_flags(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.config_path, "JSON config file; flags override its values");
    cmd->add_option("--input", opt.input, "input CSV, rows = grid points, columns = subjects");
    cmd->add_option("--grid", opt.grid_path, "CSV with the p grid points (default equispaced on [0,1])");
    cmd->add_option("--output-dir", opt.output_dir, "directory for output files");
    cmd->add_option("--basis", opt.basis, "fourier | bspline | smoothing-spline");
    cmd->add_option("--K", opt.K, "number of basis functions");
    cmd->add_option("--order", opt.order, "spline order (4 = cubic)");
    cmd->add_option("--r", opt.r, "number of latent factors (0 = smoothing only)");
    cmd->add_option("--alpha", opt.alpha, "fixed penalty weight (skips selection)");
    cmd->add_option("--alpha-grid", opt.alpha_grid_spec, "selection grid as min:max:count, log-spaced");
    cmd->add_option("--delta-tol", opt.delta_tol, "coefficient drift threshold for convergence");
    cmd->add_option("--max-iter", opt.max_iter, "iteration cap for the alternation");
    cmd->add_option("--seed", opt.seed, "base seed; replication t draws from seed+t");
    cmd->add_option("--reps", opt.reps, "Monte Carlo replications");
    cmd->add_option("--preset", opt.preset, "table1 | table2 | table3 | table4 | misspec");
    cmd->add_option("--scenario", opt.scenario,
                    "bspline-factor | fourier-factor | misspec | step-jump");
    cmd->add_option("--n", opt.n, "subjects for generated scenarios");
    cmd->add_option("--p", opt.p, "grid points for generated scenarios");
    cmd->add_option("--sigma", opt.sigma, "loading scale (factor scenarios) or jump height");
    cmd->add_flag("--transpose", opt.transpose, "input CSV has subjects as rows");
    cmd->add_flag("--emit-data", opt.emit_data, "dump replication 0 data and truth per cell");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"factor-augmented smoothing for discretized functional data"};
    app.require_subcommand(1);

    Options opt;
    CLI::App* fit = app.add_subcommand("fit", "fit one CSV data set");
    CLI::App* simulate = app.add_subcommand("simulate", "run a Monte Carlo grid");
    CLI::App* covariance = app.add_subcommand("covariance", "compare covariance estimators");
    CLI::App* scree = app.add_subcommand("scree", "residual eigenvalue diagnostics");
    for (CLI::App* cmd : {fit, simulate, covariance, scree}) add_common_flags(cmd, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << one_line(e.what()) << "\n";
        return 1;
    }

    CLI::App* active = fit->parsed() ? fit
                       : simulate->parsed() ? simulate
                       : covariance->parsed() ? covariance
                                              : scree;
    opt.command = active->get_name();

    try {
        if (!opt.config_path.empty()) apply_config_file(opt, *active);
        if (opt.command == "fit") return cmd_fit(opt);
        if (opt.command == "simulate") return cmd_simulate(opt);
        if (opt.command == "covariance") return cmd_covariance(opt);
        return cmd_scree(opt);
    } catch (const fasm::io_error& e) {
        std::cerr << "error: io: " << one_line(e.what()) << "\n";
        return 2;
    } catch (const fasm::numeric_error& e) {
        std::cerr << "error: numeric: " << one_line(e.what()) << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: invalid: " << one_line(e.what()) << "\n";
        return 4;
    } catch (const json::exception& e) {
        std::cerr << "error: invalid: " << one_line(e.what()) << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << one_line(e.what()) << "\n";
        return 5;
    }
}
