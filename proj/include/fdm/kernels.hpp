#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "fdm/analytic.hpp"
#include "fdm/config.hpp"
#include "fdm/distance.hpp"

namespace fdm {

enum class KernelFamily { Local, Nonlocal };

/// Symmetric kernel matrix with unit diagonal and entries in (0,1].
struct KernelMatrix {
    Eigen::MatrixXd values;
    KernelFamily family = KernelFamily::Local;
    double alpha = 0.0; // local family
    int dim = 0;        // nonlocal family
    double beta = 0.0;  // nonlocal family

    Eigen::Index size() const { return values.rows(); }
};

/// K_ij = exp(-(A_ij/sqrt(eps))^alpha) with alpha = beta/(beta-1); beta >= 2 only.
inline KernelMatrix local_kernel(const DistanceMatrix& dist, const FdmConfig& config) {
    if (!config.local_branch())
        throw std::invalid_argument("local_kernel: beta < 2 belongs to the nonlocal branch");
    if (dist.kind != MatrixKind::Euclidean)
        throw std::invalid_argument("local_kernel: expected Euclidean distances");
    const double alpha = config.alpha();
    const double root_eps = std::sqrt(config.epsilon);
    KernelMatrix k;
    k.family = KernelFamily::Local;
    k.alpha = alpha;
    k.values = (-(dist.values.array() / root_eps).pow(alpha)).exp();
    return k;
}

/// K_ij = (1 + d_G/sqrt(eps))^{-(d+beta)}; requires graph or analytic geodesics.
inline KernelMatrix nonlocal_kernel(const DistanceMatrix& dist, const FdmConfig& config) {
    if (config.local_branch())
        throw std::invalid_argument("nonlocal_kernel: beta >= 2 belongs to the local branch");
    if (dist.kind != MatrixKind::Graph && dist.kind != MatrixKind::AnalyticGeodesic)
        throw std::invalid_argument(
            "nonlocal_kernel: requires graph or analytic geodesic distances, not raw Euclidean");
    const double root_eps = std::sqrt(config.epsilon);
    KernelMatrix k;
    k.family = KernelFamily::Nonlocal;
    k.dim = config.dim;
    k.beta = config.beta;
    k.values = (1.0 + dist.values.array() / root_eps).pow(-(config.dim + config.beta));
    return k;
}

/// q_i = (2 pi eps)^{-d/2}/N * sum_j exp(-A_ij^2/(2 eps)), self term included.
inline Eigen::VectorXd gaussian_kde(const DistanceMatrix& dist, const FdmConfig& config) {
    if (dist.kind != MatrixKind::Euclidean)
        throw std::invalid_argument("gaussian_kde: expected Euclidean distances");
    const double eps = config.effective_kde_bandwidth();
    const Eigen::Index N = dist.size();
    const double scale = std::pow(2.0 * M_PI * eps, -config.dim / 2.0) / static_cast<double>(N);
    Eigen::VectorXd q =
        scale * (-(dist.values.array().square()) / (2.0 * eps)).exp().rowwise().sum();
    return q;
}

/**
 * Bandwidth factor making the local-kernel generator estimate carry a unit
 * constant: with K_ij = exp(-(A_ij/(c sqrt(eps)))^alpha) the discrete
 * quotient (f - Hf)/eps tends to the (negative) Laplacian itself rather
 * than a Gamma-function multiple of it. c^2 = 2 d G(d/a)/G((d+2)/a); for
 * alpha = 2 this is the familiar exp(-A^2/(4 eps)) scaling.
 */
inline double local_bandwidth_factor(double alpha, int d) {
    return std::sqrt(2.0 * d * std::tgamma(d / alpha) / std::tgamma((d + 2.0) / alpha));
}

/**
 * Same role for the nonlocal family: c = (m0 * c_{d,beta/2})^{1/beta},
 * where m0 is the full-space mass of (1+|z|)^{-(d+beta)} and c_{n,s} is
 * the fractional-Laplacian normalization constant. Makes the estimated
 * generator match the order-beta operator with unit constant.
 */
inline double nonlocal_bandwidth_factor(int d, double beta) {
    double surface = 2.0 * std::pow(M_PI, d / 2.0) / std::tgamma(d / 2.0);
    double m0 = surface * std::tgamma(static_cast<double>(d)) * std::tgamma(beta) /
                std::tgamma(d + beta);
    return std::pow(m0 * fractional_constant(d, beta / 2.0), 1.0 / beta);
}

/// Config with epsilon rescaled by the family's calibration factor squared.
inline FdmConfig calibrated_kernel_config(const FdmConfig& config) {
    FdmConfig kc = config;
    if (!config.calibrate) return kc;
    double c = config.local_branch() ? local_bandwidth_factor(config.alpha(), config.dim)
                                     : nonlocal_bandwidth_factor(config.dim, config.beta);
    kc.epsilon = c * c * config.epsilon;
    return kc;
}

} // namespace fdm
