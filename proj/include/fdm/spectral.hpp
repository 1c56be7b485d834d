#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "fdm/config.hpp"
#include "fdm/eigensolver.hpp"
#include "fdm/geodesic.hpp"
#include "fdm/kernels.hpp"

namespace fdm {

/// Raised when the requested eigenpairs contain non-positive semigroup values.
class SpectralFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * The normalization chain K -> K~ -> (H, K^).
 *
 * D is the density normalizer, K~ = D^-1 K D^-1, D~ its row sums,
 * H = D~^-1 K~ the Markov matrix and K^ the symmetrized similar matrix
 * D~^-1/2 K~ D~^-1/2 whose eigenpairs the solver consumes.
 */
struct KernelStack {
    KernelMatrix K;
    Eigen::VectorXd D;       // right normalizer, D_ii = q_i
    Eigen::MatrixXd K_tilde;
    Eigen::VectorXd D_tilde; // row sums of K~
    Eigen::MatrixXd H;       // row stochastic
    Eigen::MatrixXd K_hat;   // symmetric
};

/// Semigroup eigenvalues, generator eigenvalues and eigenfunction estimates.
struct SpectralResult {
    Eigen::VectorXd eta;        // descending, in (0, 1]
    Eigen::VectorXd lambda;     // -log(eta)/t, ascending
    Eigen::VectorXd lambda_hat; // -log(eta)/epsilon
    Eigen::MatrixXd psi;        // orthonormal eigenvectors of K^
    Eigen::MatrixXd phi;        // D~^-1/2 psi, unit discrete RMS, sign-fixed
    double t = 0.0;

    Eigen::Index count() const { return eta.size(); }
};

/// K~_ij = K_ij / (q_i q_j); rejects non-positive densities.
inline Eigen::MatrixXd right_normalize(const KernelMatrix& K, const Eigen::VectorXd& q_hat) {
    if (q_hat.size() != K.size())
        throw std::invalid_argument("right_normalize: density size mismatch");
    if ((q_hat.array() <= 0.0).any())
        throw std::invalid_argument("right_normalize: density estimate must be strictly positive");
    Eigen::VectorXd inv = q_hat.cwiseInverse();
    return inv.asDiagonal() * K.values * inv.asDiagonal();
}

/// D~ = row sums of K~; H = D~^-1 K~; K^ = D~^-1/2 K~ D~^-1/2 then symmetrized.
inline void left_normalize(const Eigen::MatrixXd& K_tilde, Eigen::VectorXd& D_tilde,
                           Eigen::MatrixXd& H, Eigen::MatrixXd& K_hat) {
    D_tilde = K_tilde.rowwise().sum();
    if ((D_tilde.array() <= 0.0).any())
        throw std::invalid_argument("left_normalize: zero or negative row sum");
    H = D_tilde.cwiseInverse().asDiagonal() * K_tilde;
    Eigen::VectorXd rsq = D_tilde.cwiseSqrt().cwiseInverse();
    K_hat = rsq.asDiagonal() * K_tilde * rsq.asDiagonal();
    K_hat = ((K_hat + K_hat.transpose()) / 2.0).eval();
}

/**
 * Turns raw eigenpairs of K^ into the spectral estimate: eta clamped into
 * (0,1], lambda = -log(eta)/t, phi = D~^-1/2 psi rescaled to unit discrete
 * RMS with the first significant component positive.
 */
inline SpectralResult postprocess(const EigenResult& pairs, const Eigen::VectorXd& D_tilde,
                                  double t, double epsilon) {
    const Eigen::Index count = pairs.values.size();
    const Eigen::Index N = D_tilde.size();
    SpectralResult r;
    r.t = t;
    r.eta.resize(count);
    r.lambda.resize(count);
    r.lambda_hat.resize(count);
    for (Eigen::Index i = 0; i < count; ++i) {
        double eta = pairs.values[i];
        if (eta <= 0.0)
            throw SpectralFailure("postprocess: non-positive semigroup eigenvalue (kernel too narrow or singular)");
        if (eta > 1.0) eta = 1.0; // rounding above 1 clamps so lambda_0 = 0 exactly
        r.eta[i] = eta;
        r.lambda[i] = (eta == 1.0) ? 0.0 : -std::log(eta) / t;
        r.lambda_hat[i] = (eta == 1.0) ? 0.0 : -std::log(eta) / epsilon;
    }

    r.psi = pairs.vectors;
    Eigen::VectorXd rsq = D_tilde.cwiseSqrt().cwiseInverse();
    r.phi.resize(N, count);
    for (Eigen::Index i = 0; i < count; ++i) {
        Eigen::VectorXd f = rsq.asDiagonal() * r.psi.col(i);
        double rms = std::sqrt(f.squaredNorm() / static_cast<double>(N));
        if (rms > 0.0) f /= rms;
        double scale = f.cwiseAbs().maxCoeff();
        for (Eigen::Index k = 0; k < N; ++k) {
            if (std::abs(f[k]) > 1e-12 * scale) {
                if (f[k] < 0.0) {
                    f = -f;
                    r.psi.col(i) = -r.psi.col(i);
                }
                break;
            }
        }
        r.phi.col(i) = f;
    }
    return r;
}

/**
 * Distances, kernel, density estimate and both normalizations: the full
 * pipeline up to (but not including) the eigensolve.
 */
inline KernelStack build_kernel_stack(const PointCloud& cloud, const FdmConfig& config) {
    config.validate();
    DistanceMatrix euclidean = pairwise_euclidean(cloud);
    FdmConfig kernel_cfg = calibrated_kernel_config(config);

    KernelStack s;
    if (config.local_branch()) {
        s.K = local_kernel(euclidean, kernel_cfg);
    } else {
        DistanceMatrix geo = geodesic_estimate(cloud, config);
        s.K = nonlocal_kernel(geo, kernel_cfg);
    }
    s.D = gaussian_kde(euclidean, config);
    s.K_tilde = right_normalize(s.K, s.D);
    left_normalize(s.K_tilde, s.D_tilde, s.H, s.K_hat);
    return s;
}

/// The full pipeline: kernel stack, symmetric eigensolve, postprocessing.
inline std::pair<KernelStack, SpectralResult> run_fdm(const PointCloud& cloud,
                                                      const FdmConfig& config) {
    KernelStack stack = build_kernel_stack(cloud, config);
    const Eigen::Index N = stack.K_hat.rows();
    int count = config.num_eigs + 1;
    if (count > N)
        throw std::invalid_argument("run_fdm: num_eigs + 1 exceeds the number of points");
    EigenResult pairs = symmetric_eig_top(stack.K_hat, count);
    SpectralResult result = postprocess(pairs, stack.D_tilde, config.t(), config.epsilon);
    return {std::move(stack), std::move(result)};
}

} // namespace fdm
