#pragma once

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "fdm/io.hpp"
#include "fdm/ridge.hpp"
#include "fdm/svg.hpp"
#include "fdm/validation.hpp"

namespace fdm::cli {

// exit codes: 0 success, 2 usage/validation, 3 pipeline failure
inline constexpr int kUsageError = 2;
inline constexpr int kPipelineError = 3;

namespace detail {

inline std::string now_stamp() {
    std::time_t t = std::time(nullptr);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

inline ManifoldTag tag_from_name(const std::string& name) {
    if (name == "circle") return ManifoldTag::Circle;
    if (name == "sphere") return ManifoldTag::Sphere;
    if (name == "interval") return ManifoldTag::Interval;
    if (name == "external") return ManifoldTag::External;
    throw std::invalid_argument("unknown manifold '" + name + "'");
}

inline DistanceMode mode_from_name(const std::string& name) {
    if (name == "dijkstra") return DistanceMode::GraphDijkstra;
    if (name == "analytic-sphere") return DistanceMode::AnalyticSphere;
    if (name == "euclidean") return DistanceMode::RawEuclidean;
    throw std::invalid_argument("unknown distance mode '" + name + "'");
}

inline PointCloud load_cloud(const std::string& path, const std::string& manifold) {
    if (!std::filesystem::exists(path))
        throw std::invalid_argument("input file does not exist: " + path);
    PointCloud cloud = read_point_cloud_csv(path);
    cloud.tag = tag_from_name(manifold);
    cloud.validate();
    return cloud;
}

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

struct SampleArgs {
    std::string manifold = "circle";
    std::string kind = "uniform";
    int n = 500;
    int level = 4;
    std::uint64_t seed = 0;
    std::string out;
};

struct FdmArgs {
    std::string input;
    std::string manifold = "external";
    double beta = 2.0;
    double eps = 1e-3;
    int d = 1;
    int l = 10;
    double threshold = 0.0;
    double kde_bandwidth = 0.0;
    std::string mode = "dijkstra";
    bool no_calibration = false;
    bool dump_heat = false;
    bool allow_long = false;
    int threads = 0;
    std::string out_dir = ".";
};

struct ValidateArgs {
    std::string experiment = "sweep";
    std::string manifold = "circle";
    std::string kind = "uniform";
    int n = 500;
    int level = 4;
    std::uint64_t seed = 0;
    double beta = 2.0;
    double eps = std::pow(2.0, -12);
    double eps_min = std::pow(2.0, -16);
    double eps_max = std::pow(2.0, -2);
    int eps_count = 15;
    int l = 60;
    double threshold = 0.0;
    bool analytic_geodesic = false;
    bool allow_long = false;
    bool svg = false;
    int spectral_terms = 1000;
    std::string out_dir = ".";
};

struct KrrArgs {
    int n = 500;
    double sigma = 0.05;
    std::uint64_t seed = 7;
    int eps_count = 16;
    int delta_count = 19;
    std::string out_dir = ".";
};

inline PointCloud build_cloud(const std::string& manifold, const std::string& kind, int n,
                              int level, std::uint64_t seed) {
    if (manifold == "circle") {
        if (kind == "uniform") return circle_uniform_grid(n);
        if (kind == "nonuniform") return circle_nonuniform_grid(n);
        if (kind == "random") return circle_random(n, seed);
        throw std::invalid_argument("unknown circle kind '" + kind + "'");
    }
    if (manifold == "sphere") return sphere_icosphere_grid(level);
    if (manifold == "interval") return interval_grid(n);
    throw std::invalid_argument("unknown manifold '" + manifold + "'");
}

inline void guard_long_run(Eigen::Index n, double beta, DistanceMode mode, bool allow_long) {
    if (beta < 2.0 && mode == DistanceMode::GraphDijkstra && n >= 10242 && !allow_long)
        throw std::invalid_argument(
            "all-pairs graph distances at N >= 10242 run for minutes; pass --allow-long to proceed");
}

inline int cmd_sample(const SampleArgs& a, const WriteOptions& w, std::ostream& out) {
    PointCloud cloud = build_cloud(a.manifold, a.kind, a.n, a.level, a.seed);
    cloud.validate();
    write_point_cloud_csv(a.out, cloud, w);
    out << "wrote " << cloud.size() << " points to " << a.out << "\n";
    return 0;
}

inline int cmd_fdm(const FdmArgs& a, const WriteOptions& w, std::ostream& out) {
    PointCloud cloud = load_cloud(a.input, a.manifold);

    FdmConfig cfg;
    cfg.beta = a.beta;
    cfg.epsilon = a.eps;
    cfg.dim = a.d;
    cfg.num_eigs = a.l;
    cfg.graph_threshold = a.threshold;
    cfg.kde_bandwidth = a.kde_bandwidth;
    cfg.distance_mode = mode_from_name(a.mode);
    cfg.calibrate = !a.no_calibration;
    cfg.threads = a.threads;
    for (const auto& warning : cfg.validate()) std::cerr << "warning: " << warning << "\n";
    guard_long_run(cloud.size(), cfg.beta, cfg.distance_mode, a.allow_long);

    out << "branch: " << (cfg.local_branch() ? "local" : "nonlocal") << "\n";
    auto t0 = std::chrono::steady_clock::now();
    auto [stack, result] = run_fdm(cloud, cfg);
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out << "pipeline time: " << fmt(dt) << " s\n";

    std::filesystem::create_directories(a.out_dir);
    write_eigenvalues_csv(a.out_dir + "/eigenvalues.csv", result, w);
    write_eigenfunctions_csv(a.out_dir + "/eigenfunctions.csv", result, w);
    if (a.dump_heat) {
        MatrixKind kind = stack.K.family == KernelFamily::Local ? MatrixKind::KernelLocal
                                                                : MatrixKind::KernelNonlocal;
        write_matrix_binary(a.out_dir + "/heat.fdmd", stack.H, kind);
    }
    out << "lambda_1.." << std::min<Eigen::Index>(6, result.count() - 1) << ":";
    for (Eigen::Index i = 1; i < std::min<Eigen::Index>(7, result.count()); ++i)
        out << " " << fmt(result.lambda[i]);
    out << "\n";
    return 0;
}

inline int cmd_validate(const ValidateArgs& a, const WriteOptions& w, std::ostream& out) {
    std::filesystem::create_directories(a.out_dir);

    if (a.experiment == "interval") {
        auto cmp = interval_comparison(a.n, a.beta, a.eps, a.spectral_terms);
        std::vector<std::vector<double>> rows;
        for (Eigen::Index i = 0; i < cmp.x.size(); ++i)
            rows.push_back({cmp.x[i], cmp.fdm[i], cmp.regional[i], cmp.spectral[i]});
        std::ostringstream js;
        js << "{\"experiment\":\"interval\",\"n\":" << a.n << ",\"beta\":" << a.beta
           << ",\"eps\":" << a.eps << "}";
        write_report_csv(a.out_dir + "/interval_comparison.csv", js.str(),
                         {"x", "fdm", "regional", "spectral"}, rows, w);
        write_key_values(a.out_dir + "/interval_summary.txt",
                         {{"l2_to_regional", fmt(cmp.l2_regional)},
                          {"l2_to_spectral", fmt(cmp.l2_spectral)}},
                         w);
        if (a.svg) {
            SvgSeries f{"estimate", "#2ca02c", {cmp.x.begin(), cmp.x.end()}, {cmp.fdm.begin(), cmp.fdm.end()}};
            SvgSeries r{"regional", "#1f77b4", {cmp.x.begin(), cmp.x.end()}, {cmp.regional.begin(), cmp.regional.end()}};
            SvgSeries s{"spectral", "#d62728", {cmp.x.begin(), cmp.x.end()}, {cmp.spectral.begin(), cmp.spectral.end()}};
            write_svg_chart(a.out_dir + "/interval_comparison.svg",
                            "regional vs spectral fractional laplacian", {f, r, s}, false, false);
        }
        out << "l2 to regional: " << fmt(cmp.l2_regional)
            << ", l2 to spectral: " << fmt(cmp.l2_spectral) << "\n";
        return 0;
    }

    PointCloud cloud = build_cloud(a.manifold, a.kind, a.n, a.level, a.seed);
    const bool sphere = a.manifold == "sphere";
    std::unique_ptr<AnalyticTruth> truth;
    if (sphere)
        truth = std::make_unique<SphereTruth>();
    else if (a.manifold == "circle")
        truth = std::make_unique<CircleTruth>();
    else
        throw std::invalid_argument("validation needs a manifold with analytic truth");
    FitIndexing indexing = sphere ? FitIndexing::Raw : FitIndexing::PairCollapsed;
    int fit_lo = 2, fit_hi = sphere ? 100 : 50;

    FdmConfig base;
    base.dim = sphere ? 2 : 1;
    base.num_eigs = a.l;
    base.graph_threshold = a.threshold;
    base.distance_mode =
        (sphere && a.analytic_geodesic) ? DistanceMode::AnalyticSphere : DistanceMode::GraphDijkstra;
    base.threads = 0;
    guard_long_run(cloud.size(), a.beta, base.distance_mode, a.allow_long);

    if (a.experiment == "spectrum") {
        base.beta = a.beta;
        base.epsilon = a.eps;
        auto [stack, result] = run_fdm(cloud, base);
        auto rep = validate_against_truth(result, *truth, cloud, a.beta, indexing, fit_lo, fit_hi);
        write_eigenvalues_csv(a.out_dir + "/eigenvalues.csv", result, w);
        write_eigenfunctions_csv(a.out_dir + "/eigenfunctions.csv", result, w);
        double expected_slope = a.beta / base.dim;
        write_key_values(a.out_dir + "/validation_summary.txt",
                         {{"mean_rmse", fmt(rep.mean_rmse)},
                          {"count_below_0.2", std::to_string(rep.count_below(0.2))},
                          {"count_below_0.4", std::to_string(rep.count_below(0.4))},
                          {"power_law_slope", fmt(rep.power_law_slope)},
                          {"power_law_r2", fmt(rep.power_law_r2)},
                          {"expected_slope", fmt(expected_slope)}},
                         w);
        if (a.svg) {
            SvgSeries est{"estimated", "#1f77b4", {}, {}};
            SvgSeries ref{"reference power law", "#7f7f7f", {}, {}};
            Eigen::VectorXd seq = (indexing == FitIndexing::PairCollapsed)
                                      ? pair_collapse(result.lambda)
                                      : Eigen::VectorXd(result.lambda.tail(result.count() - 1));
            double anchor = seq[fit_lo - 1] / std::pow(fit_lo, expected_slope);
            for (int j = 1; j <= seq.size(); ++j) {
                est.x.push_back(j);
                est.y.push_back(seq[j - 1]);
                ref.x.push_back(j);
                ref.y.push_back(anchor * std::pow(j, expected_slope));
            }
            write_svg_chart(a.out_dir + "/spectrum.svg", "eigenvalue growth", {est, ref}, true, true);
        }
        out << "slope " << fmt(rep.power_law_slope) << " (expected " << fmt(expected_slope)
            << "), mean rmse " << fmt(rep.mean_rmse) << "\n";
        return 0;
    }

    if (a.experiment != "sweep")
        throw std::invalid_argument("unknown experiment '" + a.experiment + "'");

    std::vector<double> grid = log_spaced(a.eps_min, a.eps_max, a.eps_count);
    auto rows = bandwidth_sweep(cloud, a.beta, grid, base, *truth, indexing, fit_lo, fit_hi);
    std::vector<std::vector<double>> table;
    for (const auto& r : rows)
        table.push_back({r.epsilon, r.ok ? 1.0 : 0.0, r.mean_rmse,
                         static_cast<double>(r.count_02), static_cast<double>(r.count_04),
                         r.slope});
    std::ostringstream js;
    js << "{\"experiment\":\"sweep\",\"manifold\":\"" << a.manifold << "\",\"kind\":\"" << a.kind
       << "\",\"n\":" << cloud.size() << ",\"beta\":" << a.beta << ",\"l\":" << a.l << "}";
    write_report_csv(a.out_dir + "/sweep.csv", js.str(),
                     {"epsilon", "ok", "mean_rmse", "count_below_02", "count_below_04", "slope"},
                     table, w);
    if (a.svg) {
        SvgSeries rmse{"mean rmse", "#1f77b4", {}, {}};
        for (const auto& r : rows)
            if (r.ok) {
                rmse.x.push_back(r.epsilon);
                rmse.y.push_back(r.mean_rmse);
            }
        write_svg_chart(a.out_dir + "/sweep.svg", "rmse vs bandwidth", {rmse}, true, true);
    }
    int ok_rows = 0;
    for (const auto& r : rows) ok_rows += r.ok ? 1 : 0;
    out << "sweep finished: " << ok_rows << "/" << rows.size() << " bandwidths succeeded\n";
    return 0;
}

inline int cmd_krr(const KrrArgs& a, const WriteOptions& w, std::ostream& out) {
    std::filesystem::create_directories(a.out_dir);
    auto res = indicator_experiment(a.n, a.sigma, a.seed, log_spaced(1e-3, 1.0, a.eps_count),
                                    log_spaced(1e-20, 1e-2, a.delta_count));

    std::vector<std::vector<double>> table;
    std::vector<std::pair<std::string, std::string>> summary;
    summary.emplace_back("n", std::to_string(a.n));
    summary.emplace_back("sigma", fmt(a.sigma));
    summary.emplace_back("seed", std::to_string(a.seed));
    for (const auto& r : res.rows) {
        table.push_back({r.beta, r.best_epsilon, r.best_delta, r.overshoot_at_zero,
                         r.overshoot_at_pi, r.l2_error});
        summary.emplace_back(r.family + ".eps", fmt(r.best_epsilon));
        summary.emplace_back(r.family + ".delta", fmt(r.best_delta));
        summary.emplace_back(r.family + ".overshoot_at_zero", fmt(r.overshoot_at_zero));
        summary.emplace_back(r.family + ".overshoot_at_pi", fmt(r.overshoot_at_pi));
        summary.emplace_back(r.family + ".l2_error", fmt(r.l2_error));

        std::vector<std::vector<double>> curve;
        for (int i = 0; i < res.theta.size(); ++i)
            curve.push_back({res.theta[i], res.f_true[i], res.y[i], r.regression[i]});
        write_report_csv(a.out_dir + "/regression_" + r.family + ".csv", "",
                         {"theta", "f_true", "y", "regression"}, curve, w);
    }
    std::ostringstream js;
    js << "{\"n\":" << a.n << ",\"sigma\":" << a.sigma << ",\"seed\":" << a.seed << "}";
    write_report_csv(a.out_dir + "/krr_table.csv", js.str(),
                     {"beta", "best_eps", "best_delta", "overshoot_at_zero", "overshoot_at_pi",
                      "l2_error"},
                     table, w);
    write_key_values(a.out_dir + "/krr_summary.txt", summary, w);
    for (const auto& r : res.rows)
        out << r.family << ": eps=" << fmt(r.best_epsilon) << " delta=" << fmt(r.best_delta)
            << " overshoot=" << fmt(std::max(r.overshoot_at_zero, r.overshoot_at_pi)) << "\n";
    return 0;
}

} // namespace detail

/// Parses and runs one CLI invocation; returns the process exit code.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"fractional diffusion maps toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value configuration file");
    app.allow_config_extras(false);
    bool reproducible = false;
    app.add_flag("--reproducible", reproducible, "suppress timestamp header lines");

    detail::SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "generate a point cloud");
    sample->fallthrough();
    sample->add_option("--manifold", sa.manifold)->required();
    sample->add_option("--kind", sa.kind);
    sample->add_option("--n", sa.n);
    sample->add_option("--level", sa.level);
    sample->add_option("--seed", sa.seed);
    sample->add_option("--out", sa.out)->required();

    detail::FdmArgs fa;
    auto* fdm_cmd = app.add_subcommand("fdm", "run the spectral pipeline on a cloud");
    fdm_cmd->fallthrough();
    fdm_cmd->add_option("--input", fa.input)->required();
    fdm_cmd->add_option("--manifold", fa.manifold);
    fdm_cmd->add_option("--beta", fa.beta)->required();
    fdm_cmd->add_option("--eps", fa.eps)->required();
    fdm_cmd->add_option("--d", fa.d);
    fdm_cmd->add_option("--l", fa.l);
    fdm_cmd->add_option("--threshold", fa.threshold);
    fdm_cmd->add_option("--kde-bandwidth", fa.kde_bandwidth);
    fdm_cmd->add_option("--distance-mode", fa.mode);
    fdm_cmd->add_flag("--no-calibration", fa.no_calibration);
    fdm_cmd->add_flag("--dump-heat", fa.dump_heat);
    fdm_cmd->add_flag("--allow-long", fa.allow_long);
    fdm_cmd->add_option("--threads", fa.threads);
    fdm_cmd->add_option("--out-dir", fa.out_dir);

    detail::ValidateArgs va;
    auto* val = app.add_subcommand("validate", "reproduce a validation experiment");
    val->fallthrough();
    val->add_option("--experiment", va.experiment);
    val->add_option("--manifold", va.manifold);
    val->add_option("--kind", va.kind);
    val->add_option("--n", va.n);
    val->add_option("--level", va.level);
    val->add_option("--seed", va.seed);
    val->add_option("--beta", va.beta);
    val->add_option("--eps", va.eps);
    val->add_option("--eps-min", va.eps_min);
    val->add_option("--eps-max", va.eps_max);
    val->add_option("--eps-count", va.eps_count);
    val->add_option("--l", va.l);
    val->add_option("--threshold", va.threshold);
    val->add_flag("--analytic-geodesic", va.analytic_geodesic);
    val->add_flag("--allow-long", va.allow_long);
    val->add_flag("--svg", va.svg);
    val->add_option("--spectral-terms", va.spectral_terms);
    val->add_option("--out-dir", va.out_dir);

    detail::KrrArgs ka;
    auto* krr = app.add_subcommand("krr", "indicator-function kernel ridge regression");
    krr->fallthrough();
    krr->add_option("--n", ka.n);
    krr->add_option("--sigma", ka.sigma);
    krr->add_option("--seed", ka.seed);
    krr->add_option("--eps-count", ka.eps_count);
    krr->add_option("--delta-count", ka.delta_count);
    krr->add_option("--out-dir", ka.out_dir);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }

    WriteOptions w;
    if (!reproducible) w.timestamp = detail::now_stamp();

    try {
        if (sample->parsed()) return detail::cmd_sample(sa, w, out);
        if (fdm_cmd->parsed()) return detail::cmd_fdm(fa, w, out);
        if (val->parsed()) return detail::cmd_validate(va, w, out);
        if (krr->parsed()) return detail::cmd_krr(ka, w, out);
        err << "error: no subcommand given\n";
        return kUsageError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const std::length_error& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const DisconnectedGraphError& e) {
        err << "pipeline error: " << e.what() << "\n";
        return kPipelineError;
    } catch (const SpectralFailure& e) {
        err << "pipeline error: " << e.what() << "\n";
        return kPipelineError;
    } catch (const std::exception& e) {
        err << "pipeline error: " << e.what() << "\n";
        return kPipelineError;
    }
}

} // namespace fdm::cli
