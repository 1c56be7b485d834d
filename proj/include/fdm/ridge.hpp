#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fdm/kernels.hpp"
#include "fdm/rng.hpp"
#include "fdm/shortest_paths.hpp"
#include "fdm/spectral.hpp"

namespace fdm {

/// One regularized regression: y ~ K c with ridge weight delta.
struct RidgeProblem {
    Eigen::MatrixXd K;
    Eigen::VectorXd y;
    double delta = 0.0;
    Eigen::VectorXd c;

    Eigen::VectorXd fitted() const { return K * c; }
};

/// Solves (K^T K + delta I) c = K^T y by Cholesky factorization.
inline Eigen::VectorXd krr_fit(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                               double delta) {
    if (K.rows() != K.cols())
        throw std::invalid_argument("krr_fit: kernel matrix must be square");
    if (K.rows() != y.size())
        throw std::invalid_argument("krr_fit: observation size mismatch");
    if (delta < 0.0)
        throw std::invalid_argument("krr_fit: ridge weight must be nonnegative");
    Eigen::MatrixXd M = K.transpose() * K;
    M.diagonal().array() += delta;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("krr_fit: normal equations are not positive definite");
    return llt.solve(K.transpose() * y);
}

/// How the nonlocal branch picks its neighbor-graph threshold inside cross-validation.
enum class ThresholdPolicy {
    PerEpsilonSqrt, // Algorithm default: sqrt(eps) per grid cell; disconnection invalidates the cell
    FixedAuto,      // 1.5x the minimal connecting threshold, shared across the grid
    FixedValue,     // user-provided constant
};

struct KrrOptions {
    int dim = 1;
    bool calibrate = true;
    ThresholdPolicy threshold_policy = ThresholdPolicy::PerEpsilonSqrt;
    double fixed_threshold = 0.0; // used with ThresholdPolicy::FixedValue
    int threads = 0;
};

struct CvCell {
    double epsilon = 0.0;
    double delta = 0.0;
    double error = 0.0;
    bool valid = false;
};

struct CvResult {
    double best_epsilon = 0.0;
    double best_delta = 0.0;
    std::vector<CvCell> table;
};

namespace detail {

/// Markov matrix of the training block plus its density estimate.
inline Eigen::MatrixXd markov_from_blocks(const Eigen::MatrixXd& euclid,
                                          const Eigen::MatrixXd& kernel_dist, double beta,
                                          double eps, const KrrOptions& opts,
                                          Eigen::VectorXd& q_out) {
    const Eigen::Index n = euclid.rows();
    double kde_scale = std::pow(2.0 * M_PI * eps, -opts.dim / 2.0) / static_cast<double>(n);
    q_out = kde_scale * (-(euclid.array().square()) / (2.0 * eps)).exp().rowwise().sum();

    double c = 1.0;
    if (opts.calibrate)
        c = (beta >= 2.0) ? local_bandwidth_factor(beta / (beta - 1.0), opts.dim)
                          : nonlocal_bandwidth_factor(opts.dim, beta);
    double eps_k = c * c * eps;
    Eigen::MatrixXd K;
    if (beta >= 2.0) {
        double alpha = beta / (beta - 1.0);
        K = (-(kernel_dist.array() / std::sqrt(eps_k)).pow(alpha)).exp();
    } else {
        K = (1.0 + kernel_dist.array() / std::sqrt(eps_k)).pow(-(opts.dim + beta));
    }
    Eigen::VectorXd qi = q_out.cwiseInverse();
    Eigen::MatrixXd Kt = qi.asDiagonal() * K * qi.asDiagonal();
    Eigen::VectorXd Dt = Kt.rowwise().sum();
    return Dt.cwiseInverse().asDiagonal() * Kt;
}

/// Row-stochastic extension of the training kernel onto held-out points.
inline Eigen::MatrixXd markov_rectangular(const Eigen::MatrixXd& euclid_ho_tr,
                                          const Eigen::MatrixXd& kernel_dist_ho_tr,
                                          const Eigen::VectorXd& q_train, double beta,
                                          double eps, const KrrOptions& opts, bool& ok) {
    const Eigen::Index n_tr = euclid_ho_tr.cols();
    double kde_scale = std::pow(2.0 * M_PI * eps, -opts.dim / 2.0) / static_cast<double>(n_tr);
    Eigen::VectorXd q_ho =
        kde_scale * (-(euclid_ho_tr.array().square()) / (2.0 * eps)).exp().rowwise().sum();

    double c = 1.0;
    if (opts.calibrate)
        c = (beta >= 2.0) ? local_bandwidth_factor(beta / (beta - 1.0), opts.dim)
                          : nonlocal_bandwidth_factor(opts.dim, beta);
    double eps_k = c * c * eps;
    Eigen::MatrixXd K;
    if (beta >= 2.0) {
        double alpha = beta / (beta - 1.0);
        K = (-(kernel_dist_ho_tr.array() / std::sqrt(eps_k)).pow(alpha)).exp();
    } else {
        K = (1.0 + kernel_dist_ho_tr.array() / std::sqrt(eps_k)).pow(-(opts.dim + beta));
    }
    Eigen::MatrixXd Kt = q_ho.cwiseInverse().asDiagonal() * K * q_train.cwiseInverse().asDiagonal();
    Eigen::VectorXd rows = Kt.rowwise().sum();
    ok = (rows.array() > 0.0).all() && rows.allFinite();
    if (!ok) return Kt;
    return rows.cwiseInverse().asDiagonal() * Kt;
}

inline Eigen::MatrixXd submatrix(const Eigen::MatrixXd& A, const std::vector<int>& rows,
                                 const std::vector<int>& cols) {
    Eigen::MatrixXd S(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) S(i, j) = A(rows[i], cols[j]);
    return S;
}

/// d(h, t) through the training graph: attach h to its in-threshold neighbors.
inline Eigen::MatrixXd attach_heldout(const Eigen::MatrixXd& euclid_ho_tr,
                                      const Eigen::MatrixXd& dG_train, double threshold,
                                      bool& ok) {
    const Eigen::Index n_ho = euclid_ho_tr.rows();
    const Eigen::Index n_tr = euclid_ho_tr.cols();
    Eigen::MatrixXd out(n_ho, n_tr);
    ok = true;
    for (Eigen::Index h = 0; h < n_ho; ++h) {
        bool any = false;
        out.row(h).setConstant(std::numeric_limits<double>::infinity());
        for (Eigen::Index u = 0; u < n_tr; ++u) {
            double d = euclid_ho_tr(h, u);
            if (d >= threshold) continue;
            any = true;
            out.row(h) = out.row(h).cwiseMin((dG_train.row(u).array() + d).matrix());
        }
        if (!any) {
            ok = false;
            return out;
        }
    }
    return out;
}

inline double connect_threshold(const Eigen::MatrixXd& euclid) {
    DistanceMatrix d{euclid, MatrixKind::Euclidean};
    return min_connecting_threshold(d);
}

} // namespace detail

/**
 * Half/half split cross-validation over an (epsilon, delta) grid.
 *
 * The split is a seeded random permutation; the first ceil(N/2) points
 * train. Each cell builds the training Markov kernel, fits the ridge
 * coefficients and scores squared error on the held-out half through the
 * row-stochastic kernel extension. Cells whose nonlocal training graph
 * disconnects (or whose held-out points cannot attach) are marked invalid
 * and skipped. Ties resolve to the lexicographically first (eps, delta).
 */
inline CvResult cross_validate(const PointCloud& cloud, const Eigen::VectorXd& y, double beta,
                               const std::vector<double>& eps_grid,
                               const std::vector<double>& delta_grid, std::uint64_t seed,
                               const KrrOptions& opts = {}) {
    const int N = static_cast<int>(cloud.size());
    if (y.size() != N) throw std::invalid_argument("cross_validate: label size mismatch");
    if (eps_grid.empty() || delta_grid.empty())
        throw std::invalid_argument("cross_validate: empty grid");

    // seeded half/half split; odd N gives the extra point to the training half
    std::vector<int> perm(N);
    std::iota(perm.begin(), perm.end(), 0);
    CounterRng rng(seed);
    for (int i = N - 1; i > 0; --i)
        std::swap(perm[i], perm[rng.next_u64() % static_cast<std::uint64_t>(i + 1)]);
    const int n_tr = (N + 1) / 2;
    std::vector<int> train(perm.begin(), perm.begin() + n_tr);
    std::vector<int> held(perm.begin() + n_tr, perm.end());
    std::sort(train.begin(), train.end());
    std::sort(held.begin(), held.end());

    DistanceMatrix full = pairwise_euclidean(cloud);
    Eigen::MatrixXd A_tr = detail::submatrix(full.values, train, train);
    Eigen::MatrixXd A_ho_tr = detail::submatrix(full.values, held, train);

    const bool local = beta >= 2.0;
    Eigen::MatrixXd dG_tr, dist_ho;
    bool fixed_ready = false;
    double fixed_threshold = 0.0;
    if (!local && opts.threshold_policy != ThresholdPolicy::PerEpsilonSqrt) {
        fixed_threshold = (opts.threshold_policy == ThresholdPolicy::FixedValue)
                              ? opts.fixed_threshold
                              : 1.5 * detail::connect_threshold(A_tr);
        DistanceMatrix dtr{A_tr, MatrixKind::Euclidean};
        SparseGraph g = epsilon_graph(dtr, fixed_threshold);
        require_connected(g, &dtr);
        dG_tr = all_pairs_shortest_paths(g, opts.threads).values;
        bool ok = true;
        dist_ho = detail::attach_heldout(A_ho_tr, dG_tr, fixed_threshold, ok);
        if (!ok)
            throw std::runtime_error("cross_validate: held-out point has no in-threshold neighbor");
        fixed_ready = true;
    }

    Eigen::VectorXd y_tr(n_tr), y_ho(N - n_tr);
    for (int i = 0; i < n_tr; ++i) y_tr[i] = y[train[i]];
    for (int i = 0; i < N - n_tr; ++i) y_ho[i] = y[held[i]];

    CvResult res;
    double best = std::numeric_limits<double>::infinity();
    for (double eps : eps_grid) {
        bool cell_ok = true;
        Eigen::MatrixXd kdist_tr, kdist_ho;
        if (local) {
            kdist_tr = A_tr;
            kdist_ho = A_ho_tr;
        } else if (fixed_ready) {
            kdist_tr = dG_tr;
            kdist_ho = dist_ho;
        } else {
            double thr = std::sqrt(eps);
            DistanceMatrix dtr{A_tr, MatrixKind::Euclidean};
            SparseGraph g = epsilon_graph(dtr, thr);
            if (component_sizes(g).size() > 1) {
                cell_ok = false;
            } else {
                kdist_tr = all_pairs_shortest_paths(g, opts.threads).values;
                bool ok = true;
                kdist_ho = detail::attach_heldout(A_ho_tr, kdist_tr, thr, ok);
                cell_ok = ok;
            }
        }

        Eigen::MatrixXd H_tr, H_rect, M;
        Eigen::VectorXd q_tr, b;
        if (cell_ok) {
            H_tr = detail::markov_from_blocks(A_tr, kdist_tr, beta, eps, opts, q_tr);
            bool rect_ok = true;
            H_rect = detail::markov_rectangular(A_ho_tr, kdist_ho, q_tr, beta, eps, opts, rect_ok);
            cell_ok = rect_ok;
        }
        if (cell_ok) {
            M = H_tr.transpose() * H_tr;
            b = H_tr.transpose() * y_tr;
        }

        for (double delta : delta_grid) {
            CvCell cell;
            cell.epsilon = eps;
            cell.delta = delta;
            if (!cell_ok) {
                res.table.push_back(cell);
                continue;
            }
            Eigen::MatrixXd Md = M;
            Md.diagonal().array() += delta;
            Eigen::LLT<Eigen::MatrixXd> llt(Md);
            if (llt.info() != Eigen::Success) {
                res.table.push_back(cell);
                continue;
            }
            Eigen::VectorXd c = llt.solve(b);
            cell.error = (H_rect * c - y_ho).squaredNorm();
            cell.valid = true;
            res.table.push_back(cell);
            if (cell.error < best) {
                best = cell.error;
                res.best_epsilon = eps;
                res.best_delta = delta;
            }
        }
    }
    if (!std::isfinite(best))
        throw std::runtime_error("cross_validate: every grid cell was invalid");
    return res;
}

/**
 * Noise-free regression at fixed (eps, delta): c = (K^T K + delta I)^-1 K^T f,
 * with K the pipeline's Markov heat estimate on the full cloud.
 */
inline Eigen::VectorXd expected_regression(const PointCloud& cloud,
                                           const Eigen::VectorXd& f_true, double beta,
                                           double eps, double delta,
                                           const KrrOptions& opts = {}) {
    FdmConfig cfg;
    cfg.beta = beta;
    cfg.epsilon = eps;
    cfg.dim = opts.dim;
    cfg.calibrate = opts.calibrate;
    cfg.threads = opts.threads;
    if (beta < 2.0) {
        if (opts.threshold_policy == ThresholdPolicy::FixedValue)
            cfg.graph_threshold = opts.fixed_threshold;
        else if (opts.threshold_policy == ThresholdPolicy::FixedAuto) {
            DistanceMatrix full = pairwise_euclidean(cloud);
            cfg.graph_threshold = 1.5 * min_connecting_threshold(full);
        }
    }
    cfg.num_eigs = 1;
    KernelStack stack = build_kernel_stack(cloud, cfg);
    Eigen::VectorXd c = krr_fit(stack.H, f_true, delta);
    return stack.H * c;
}

struct IndicatorRow {
    std::string family;     // "exponential" or "polynomial"
    double beta = 0.0;
    double best_epsilon = 0.0;
    double best_delta = 0.0;
    double overshoot_at_zero = 0.0; // window of geodesic half-width 0.25 at theta = 0
    double overshoot_at_pi = 0.0;   // same at theta = pi
    double l2_error = 0.0;
    Eigen::VectorXd regression;     // expected regression values
};

struct IndicatorResult {
    int n = 0;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    Eigen::VectorXd theta;
    Eigen::VectorXd f_true;
    Eigen::VectorXd y;
    std::vector<IndicatorRow> rows;
};

inline std::vector<double> log_spaced(double lo, double hi, int count) {
    std::vector<double> grid(count);
    for (int i = 0; i < count; ++i) {
        double t = (count == 1) ? 0.0 : static_cast<double>(i) / (count - 1);
        grid[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
    }
    return grid;
}

/**
 * The circle indicator-function comparison: noisy samples of 1_[0,pi] on
 * the uniform circle grid, tuned by cross-validation per kernel family,
 * then scored on overshoot near the discontinuities and global L2 error.
 */
inline IndicatorResult indicator_experiment(int N, double sigma, std::uint64_t seed,
                                            std::vector<double> eps_grid = {},
                                            std::vector<double> delta_grid = {}) {
    if (sigma < 0.0) throw std::invalid_argument("indicator_experiment: sigma must be >= 0");
    if (eps_grid.empty()) eps_grid = log_spaced(1e-3, 1.0, 16);
    if (delta_grid.empty()) delta_grid = log_spaced(1e-20, 1e-2, 19);

    IndicatorResult out;
    out.n = N;
    out.sigma = sigma;
    out.seed = seed;

    PointCloud cloud = circle_uniform_grid(N);
    out.theta = cloud.intrinsic->col(0);
    out.f_true.resize(N);
    for (int i = 0; i < N; ++i) out.f_true[i] = (out.theta[i] <= M_PI) ? 1.0 : 0.0;

    CounterRng noise(CounterRng::mix(seed));
    out.y = out.f_true;
    for (int i = 0; i < N; ++i) out.y[i] += sigma * noise.next_gaussian();

    for (double beta : {2.0, 1.0}) {
        KrrOptions opts;
        opts.dim = 1;
        opts.threshold_policy =
            (beta < 2.0) ? ThresholdPolicy::FixedAuto : ThresholdPolicy::PerEpsilonSqrt;
        CvResult cv = cross_validate(cloud, out.y, beta, eps_grid, delta_grid, seed, opts);

        IndicatorRow row;
        row.family = (beta >= 2.0) ? "exponential" : "polynomial";
        row.beta = beta;
        row.best_epsilon = cv.best_epsilon;
        row.best_delta = cv.best_delta;
        row.regression =
            expected_regression(cloud, out.f_true, beta, cv.best_epsilon, cv.best_delta, opts);

        auto window_overshoot = [&](double center) {
            double worst = 0.0;
            for (int i = 0; i < N; ++i) {
                double d = std::abs(out.theta[i] - center);
                d = std::min(d, 2.0 * M_PI - d);
                if (d > 0.25) continue;
                worst = std::max(worst, row.regression[i] - 1.0);
                worst = std::max(worst, -row.regression[i]);
            }
            return worst;
        };
        row.overshoot_at_zero = window_overshoot(2.0 * M_PI); // theta = 0 == 2 pi on this grid
        row.overshoot_at_pi = window_overshoot(M_PI);
        row.l2_error = std::sqrt((row.regression - out.f_true).squaredNorm() / N);
        out.rows.push_back(std::move(row));
    }
    return out;
}

} // namespace fdm
