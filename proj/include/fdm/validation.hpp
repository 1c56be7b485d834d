#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fdm/analytic.hpp"
#include "fdm/spectral.hpp"

namespace fdm {

class DegenerateEigenspaceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Contiguous indices sharing a (true) eigenvalue, plus the fitted alignment map.
struct EigenspaceGroup {
    int start = 0;
    int size = 0;
    Eigen::MatrixXd alignment; // size x size, filled once aligned

    int multiplicity() const { return size; }
};

/// Chains consecutive eigenvalues within tol into multiplicity groups.
inline std::vector<EigenspaceGroup> group_eigenspaces(const Eigen::VectorXd& true_lambdas,
                                                      double tol) {
    std::vector<EigenspaceGroup> groups;
    const int n = static_cast<int>(true_lambdas.size());
    int i = 0;
    while (i < n) {
        int j = i + 1;
        while (j < n && true_lambdas[j] - true_lambdas[j - 1] <= tol) ++j;
        groups.push_back({i, j - i, {}});
        i = j;
    }
    return groups;
}

/**
 * Least-squares alignment of an estimated eigenfunction block onto the
 * analytic one: M = argmin |estimated*M - truth|_F through the normal
 * equations, then the per-column RMSE of the residual.
 */
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> align_and_rmse(
    const Eigen::MatrixXd& estimated, const Eigen::MatrixXd& truth) {
    if (estimated.rows() != truth.rows() || estimated.cols() != truth.cols())
        throw std::invalid_argument("align_and_rmse: block shapes must match");
    const Eigen::Index N = estimated.rows();
    const Eigen::Index k = estimated.cols();
    if (k < 1) throw std::invalid_argument("align_and_rmse: empty block");

    Eigen::MatrixXd G = estimated.transpose() * estimated;
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success)
        throw DegenerateEigenspaceError("align_and_rmse: estimated block is rank deficient");
    double dmin = llt.matrixL().toDenseMatrix().diagonal().minCoeff();
    double dmax = llt.matrixL().toDenseMatrix().diagonal().maxCoeff();
    if (dmin <= 1e-10 * dmax)
        throw DegenerateEigenspaceError("align_and_rmse: estimated block is nearly rank deficient");

    Eigen::MatrixXd M = llt.solve(estimated.transpose() * truth);
    Eigen::MatrixXd R = estimated * M - truth;
    Eigen::VectorXd rmse(k);
    for (Eigen::Index c = 0; c < k; ++c)
        rmse[c] = std::sqrt(R.col(c).squaredNorm() / static_cast<double>(N));
    return {std::move(M), std::move(rmse)};
}

struct PowerLawFit {
    double slope = 0.0;
    double r2 = 0.0;
};

/**
 * Ordinary least squares of log(lambdas[j-1]) against log(j) over the
 * 1-based index window [j_lo, j_hi].
 */
inline PowerLawFit power_law_fit(const Eigen::VectorXd& lambdas, int j_lo, int j_hi) {
    if (j_lo < 1 || j_hi > lambdas.size() || j_lo >= j_hi)
        throw std::invalid_argument("power_law_fit: bad index window");
    const int n = j_hi - j_lo + 1;
    Eigen::VectorXd lx(n), ly(n);
    for (int j = j_lo; j <= j_hi; ++j) {
        double v = lambdas[j - 1];
        if (!(v > 0.0))
            throw std::invalid_argument("power_law_fit: non-positive eigenvalue in fit range");
        lx[j - j_lo] = std::log(static_cast<double>(j));
        ly[j - j_lo] = std::log(v);
    }
    double mx = lx.mean(), my = ly.mean();
    double sxx = (lx.array() - mx).square().sum();
    double sxy = ((lx.array() - mx) * (ly.array() - my)).sum();
    double syy = (ly.array() - my).square().sum();
    PowerLawFit fit;
    fit.slope = sxy / sxx;
    double ss_res = syy - fit.slope * sxy;
    fit.r2 = (syy > 0.0) ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

/// Eigenvalue sequence collapsed over symmetry pairs: entry j-1 is the mean of pair j.
inline Eigen::VectorXd pair_collapse(const Eigen::VectorXd& lambda) {
    const int pairs = static_cast<int>((lambda.size() - 1) / 2);
    Eigen::VectorXd out(pairs);
    for (int j = 1; j <= pairs; ++j) out[j - 1] = (lambda[2 * j - 1] + lambda[2 * j]) / 2.0;
    return out;
}

enum class FitIndexing { Raw, PairCollapsed };

struct ValidationReport {
    Eigen::VectorXd per_eigenfunction_rmse; // aligned, index 0 is the constant
    double mean_rmse = 0.0;                 // over the nontrivial indices
    double power_law_slope = 0.0;
    double power_law_r2 = 0.0;

    int count_below(double threshold) const {
        int c = 0;
        for (Eigen::Index i = 1; i < per_eigenfunction_rmse.size(); ++i)
            if (per_eigenfunction_rmse[i] < threshold) ++c;
        return c;
    }
};

/**
 * Aligned-RMSE + power-law report for one pipeline result against the
 * manifold's analytic truth. Eigenspaces are grouped on the true spectrum
 * (tolerance group_tol), each block aligned by least squares before the
 * RMSE is taken. The power-law fit runs over [fit_lo, fit_hi] of either
 * the raw or the pair-collapsed eigenvalue sequence.
 */
inline ValidationReport validate_against_truth(const SpectralResult& result,
                                               const AnalyticTruth& truth,
                                               const PointCloud& cloud, double beta,
                                               FitIndexing indexing, int fit_lo, int fit_hi,
                                               double group_tol = 1e-6) {
    const int count = static_cast<int>(result.count());
    Eigen::VectorXd true_lams = truth.eigenvalues(count, beta);
    Eigen::MatrixXd basis = truth.basis(count, cloud);

    ValidationReport rep;
    rep.per_eigenfunction_rmse.resize(count);
    for (const auto& g : group_eigenspaces(true_lams, group_tol)) {
        auto [M, rmse] = align_and_rmse(result.phi.middleCols(g.start, g.size),
                                        basis.middleCols(g.start, g.size));
        rep.per_eigenfunction_rmse.segment(g.start, g.size) = rmse;
    }
    rep.mean_rmse = (count > 1)
                        ? rep.per_eigenfunction_rmse.tail(count - 1).mean()
                        : 0.0;

    Eigen::VectorXd seq = (indexing == FitIndexing::PairCollapsed)
                              ? pair_collapse(result.lambda)
                              : Eigen::VectorXd(result.lambda.tail(count - 1));
    fit_hi = std::min<int>(fit_hi, static_cast<int>(seq.size()));
    bool fittable = fit_lo < fit_hi;
    for (int j = fit_lo; fittable && j <= fit_hi; ++j)
        if (!(seq[j - 1] > 0.0)) fittable = false;
    if (fittable) {
        auto fit = power_law_fit(seq, fit_lo, fit_hi);
        rep.power_law_slope = fit.slope;
        rep.power_law_r2 = fit.r2;
    } else {
        rep.power_law_slope = std::numeric_limits<double>::quiet_NaN();
        rep.power_law_r2 = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

struct SweepRow {
    double epsilon = 0.0;
    bool ok = false;
    std::string failure; // reason when !ok
    double mean_rmse = 0.0;
    int count_02 = 0;
    int count_04 = 0;
    double slope = 0.0;
};

/**
 * One pipeline + validation per bandwidth. Disconnected graphs and
 * spectral failures become missing rows rather than errors. The base
 * config's graph_threshold (when set) is held fixed across the sweep so
 * the nonlocal branch can reach bandwidths whose default graph would
 * disconnect.
 */
inline std::vector<SweepRow> bandwidth_sweep(const PointCloud& cloud, double beta,
                                             const std::vector<double>& eps_grid,
                                             const FdmConfig& base, const AnalyticTruth& truth,
                                             FitIndexing indexing, int fit_lo, int fit_hi) {
    std::vector<SweepRow> rows;
    for (double eps : eps_grid) {
        SweepRow row;
        row.epsilon = eps;
        FdmConfig cfg = base;
        cfg.beta = beta;
        cfg.epsilon = eps;
        try {
            auto [stack, result] = run_fdm(cloud, cfg);
            auto rep = validate_against_truth(result, truth, cloud, beta, indexing, fit_lo, fit_hi);
            row.ok = true;
            row.mean_rmse = rep.mean_rmse;
            row.count_02 = rep.count_below(0.2);
            row.count_04 = rep.count_below(0.4);
            row.slope = rep.power_law_slope;
        } catch (const DisconnectedGraphError& e) {
            row.failure = e.what();
        } catch (const SpectralFailure& e) {
            row.failure = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

struct IntervalComparison {
    Eigen::VectorXd x;        // interior grid points
    Eigen::VectorXd fdm;      // (u - Hu)/t, min-normalized to -1
    Eigen::VectorXd regional; // closed form, min-normalized
    Eigen::VectorXd spectral; // truncated eigenseries, min-normalized
    double l2_regional = 0.0; // distances over x in [0.1, 0.9]
    double l2_spectral = 0.0;
};

namespace detail {
inline Eigen::VectorXd min_normalize(const Eigen::VectorXd& v) {
    double mn = v.minCoeff();
    if (!(mn < 0.0))
        throw std::logic_error("min_normalize: curve has no negative part");
    return v / (-mn);
}
} // namespace detail

/**
 * The flat-manifold-with-boundary comparison: the pipeline's generator
 * estimate (u - Hu)/t for u(x) = x^2 on the interval grid against the
 * regional closed form and the spectral eigenseries, each rescaled so its
 * interior minimum is exactly -1.
 */
inline IntervalComparison interval_comparison(int N, double beta, double eps,
                                              int spectral_terms = 1000) {
    if (beta != 1.0)
        throw std::invalid_argument("interval_comparison: defined for beta = 1 (s = 1/2)");
    PointCloud cloud = interval_grid(N);
    FdmConfig cfg;
    cfg.beta = beta;
    cfg.epsilon = eps;
    cfg.dim = 1;
    cfg.num_eigs = 1; // the eigensolve is not needed here
    KernelStack stack = build_kernel_stack(cloud, cfg);

    Eigen::VectorXd u = cloud.ambient.col(0).array().square();
    Eigen::VectorXd g = (u - stack.H * u) / cfg.t();

    IntervalComparison out;
    const int M = N - 2;
    out.x.resize(M);
    Eigen::VectorXd fdm_raw(M);
    for (int i = 0; i < M; ++i) {
        out.x[i] = cloud.ambient(i + 1, 0);
        fdm_raw[i] = g[i + 1];
    }
    Eigen::VectorXd reg_raw(M);
    for (int i = 0; i < M; ++i) reg_raw[i] = regional_frac_laplacian_half(out.x[i]);
    Eigen::VectorXd spec_raw = spectral_frac_laplacian_interval(out.x, beta / 2.0, spectral_terms);

    out.fdm = detail::min_normalize(fdm_raw);
    out.regional = detail::min_normalize(reg_raw);
    out.spectral = detail::min_normalize(spec_raw);

    double acc_r = 0.0, acc_s = 0.0;
    int n_sel = 0;
    for (int i = 0; i < M; ++i) {
        if (out.x[i] < 0.1 || out.x[i] > 0.9) continue;
        acc_r += std::pow(out.fdm[i] - out.regional[i], 2);
        acc_s += std::pow(out.fdm[i] - out.spectral[i], 2);
        ++n_sel;
    }
    out.l2_regional = std::sqrt(acc_r / n_sel);
    out.l2_spectral = std::sqrt(acc_s / n_sel);
    return out;
}

} // namespace fdm
