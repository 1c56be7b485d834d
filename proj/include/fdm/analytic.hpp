#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fdm/point_cloud.hpp"

namespace fdm {

/// Normalization constant c_{n,s} = s 4^s Gamma((n+2s)/2) / (pi^{n/2} Gamma(1-s)).
inline double fractional_constant(int n, double s) {
    if (n < 1 || s <= 0.0 || s >= 1.0)
        throw std::invalid_argument("fractional_constant: need n >= 1 and s in (0,1)");
    return s * std::pow(2.0, 2.0 * s) * std::tgamma((n + 2.0 * s) / 2.0) /
           (std::pow(M_PI, n / 2.0) * std::tgamma(1.0 - s));
}

/// Great-circle distance acos(x . y) for unit vectors; inputs are validated.
inline double sphere_geodesic(const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
    if (std::abs(x.norm() - 1.0) > 1e-9 || std::abs(y.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("sphere_geodesic: inputs must lie on the unit sphere");
    double dot = std::clamp(x.dot(y), -1.0, 1.0);
    return std::acos(dot);
}

/**
 * Regional fractional Laplacian of u(x) = x^2 on (0,1) at s = 1/2:
 * c_{1,1/2} * (-1 + 2 x log(x/(1-x))). Diverges at the endpoints.
 */
inline double regional_frac_laplacian_half(double x) {
    if (!(x > 0.0 && x < 1.0))
        throw std::domain_error("regional_frac_laplacian_half: x must lie strictly inside (0,1)");
    return fractional_constant(1, 0.5) * (-1.0 + 2.0 * x * std::log(x / (1.0 - x)));
}

/**
 * Truncated spectral fractional Laplacian of u(x) = x^2 on [0,1] with the
 * Neumann basis phi_k = cos(pi k x), lambda_k = pi^2 k^2. The coefficients
 * u_k = <u,phi_k>/||phi_k||^2 = 4(-1)^k/(pi k)^2 are the exact integrals.
 */
inline Eigen::VectorXd spectral_frac_laplacian_interval(const Eigen::VectorXd& x, double s, int M) {
    if (M < 1) throw std::invalid_argument("spectral_frac_laplacian_interval: M must be >= 1");
    if (s <= 0.0 || s >= 1.0)
        throw std::invalid_argument("spectral_frac_laplacian_interval: s must lie in (0,1)");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
    for (int k = 1; k <= M; ++k) {
        double uk = 4.0 * ((k % 2 == 0) ? 1.0 : -1.0) / (M_PI * M_PI * k * k);
        double lam_s = std::pow(M_PI * M_PI * static_cast<double>(k) * k, s);
        out.array() += lam_s * uk * (M_PI * k * x.array()).cos();
    }
    return out;
}

/**
 * Analytic spectra and eigenfunctions used to validate estimated pipelines.
 * Index j is 1-based and counts eigenpairs with multiplicity; j = 1 is the
 * constant function with eigenvalue 0.
 */
class AnalyticTruth {
public:
    virtual ~AnalyticTruth() = default;

    /// Eigenvalue of the order-beta generator at (1-based) index j.
    virtual double eigenvalue(int j, double beta) const = 0;

    /// Eigenfunction j sampled at the cloud's intrinsic coordinates.
    virtual Eigen::VectorXd eigenfunction(int j, const PointCloud& cloud) const = 0;

    virtual double geodesic(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const = 0;

    /// First `count` eigenvalues, ascending.
    Eigen::VectorXd eigenvalues(int count, double beta) const {
        Eigen::VectorXd v(count);
        for (int j = 1; j <= count; ++j) v[j - 1] = eigenvalue(j, beta);
        return v;
    }

    /// N x count matrix of sampled eigenfunctions, each scaled to unit discrete RMS.
    Eigen::MatrixXd basis(int count, const PointCloud& cloud) const {
        Eigen::MatrixXd B(cloud.size(), count);
        for (int j = 1; j <= count; ++j) {
            Eigen::VectorXd f = eigenfunction(j, cloud);
            double rms = std::sqrt(f.squaredNorm() / f.size());
            B.col(j - 1) = (rms > 0) ? Eigen::VectorXd(f / rms) : f;
        }
        return B;
    }
};

/// S^1: lambda_1 = 0, lambda_{2j} = lambda_{2j+1} = j^beta with sin/cos pairs.
class CircleTruth final : public AnalyticTruth {
public:
    double eigenvalue(int j, double beta) const override {
        if (j < 1) throw std::invalid_argument("CircleTruth: index must be >= 1");
        if (j == 1) return 0.0;
        int pair = j / 2; // indices (2k, 2k+1) share the eigenvalue k^beta
        return std::pow(static_cast<double>(pair), beta);
    }

    Eigen::VectorXd eigenfunction(int j, const PointCloud& cloud) const override {
        const Eigen::VectorXd theta = intrinsic_angle(cloud);
        if (j == 1) return Eigen::VectorXd::Ones(theta.size());
        int pair = j / 2;
        if (j % 2 == 0) return (pair * theta.array()).sin();
        return (pair * theta.array()).cos();
    }

    double geodesic(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
        double a = std::atan2(x[1], x[0]), b = std::atan2(y[1], y[0]);
        double d = std::abs(a - b);
        return std::min(d, 2.0 * M_PI - d);
    }

private:
    static Eigen::VectorXd intrinsic_angle(const PointCloud& cloud) {
        if (cloud.intrinsic) return cloud.intrinsic->col(0);
        Eigen::VectorXd theta(cloud.size());
        for (Eigen::Index i = 0; i < cloud.size(); ++i)
            theta[i] = std::atan2(cloud.ambient(i, 1), cloud.ambient(i, 0));
        return theta;
    }
};

/**
 * S^2: real spherical harmonics Y_l^m with generator eigenvalues
 * (l(l+1))^{beta/2}; degree l contributes 2l+1 eigenfunctions.
 */
class SphereTruth final : public AnalyticTruth {
public:
    double eigenvalue(int j, double beta) const override {
        auto [l, m] = degree_order(j);
        (void)m;
        return std::pow(static_cast<double>(l) * (l + 1), beta / 2.0);
    }

    Eigen::VectorXd eigenfunction(int j, const PointCloud& cloud) const override {
        auto [l, m] = degree_order(j);
        const Eigen::Index N = cloud.size();
        Eigen::VectorXd f(N);
        for (Eigen::Index i = 0; i < N; ++i) {
            const auto v = cloud.ambient.row(i);
            double azimuth = std::atan2(v[1], v[0]);
            double ct = std::clamp(v[2], -1.0, 1.0);
            f[i] = real_sph(l, m, ct, azimuth);
        }
        return f;
    }

    double geodesic(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
        return sphere_geodesic(x.head<3>(), y.head<3>());
    }

    /// Maps 1-based index to (l, m); index 1 -> (0,0), 2..4 -> l=1, etc.
    static std::pair<int, int> degree_order(int j) {
        if (j < 1) throw std::invalid_argument("SphereTruth: index must be >= 1");
        int l = 0, base = 0;
        while (base + 2 * l + 1 < j) {
            base += 2 * l + 1;
            ++l;
        }
        int m = (j - base - 1) - l;
        return {l, m};
    }

private:
    // Associated Legendre P_l^m(x) (no Condon-Shortley phase), upward recurrence.
    static double legendre_p(int l, int m, double x) {
        double pmm = 1.0;
        if (m > 0) {
            double somx2 = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
            double fact = 1.0;
            for (int i = 1; i <= m; ++i) {
                pmm *= fact * somx2;
                fact += 2.0;
            }
        }
        if (l == m) return pmm;
        double pmmp1 = x * (2.0 * m + 1.0) * pmm;
        if (l == m + 1) return pmmp1;
        double pll = 0.0;
        for (int ll = m + 2; ll <= l; ++ll) {
            pll = ((2.0 * ll - 1.0) * x * pmmp1 - (ll + m - 1.0) * pmm) / (ll - m);
            pmm = pmmp1;
            pmmp1 = pll;
        }
        return pll;
    }

    static double real_sph(int l, int m, double cos_theta, double azimuth) {
        int am = std::abs(m);
        double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * M_PI) *
                                std::tgamma(l - am + 1.0) / std::tgamma(l + am + 1.0));
        double p = legendre_p(l, am, cos_theta);
        if (m == 0) return norm * p;
        if (m > 0) return std::sqrt(2.0) * norm * p * std::cos(am * azimuth);
        return std::sqrt(2.0) * norm * p * std::sin(am * azimuth);
    }
};

/// [0,1] with Neumann boundary: phi_1 = 1, phi_{k+1}(x) = cos(pi k x), lambda = (pi^2 k^2)^{beta/2}.
class IntervalTruth final : public AnalyticTruth {
public:
    double eigenvalue(int j, double beta) const override {
        if (j < 1) throw std::invalid_argument("IntervalTruth: index must be >= 1");
        if (j == 1) return 0.0;
        double k = j - 1;
        return std::pow(M_PI * M_PI * k * k, beta / 2.0);
    }

    Eigen::VectorXd eigenfunction(int j, const PointCloud& cloud) const override {
        const Eigen::VectorXd x = cloud.ambient.col(0);
        if (j == 1) return Eigen::VectorXd::Ones(x.size());
        return (M_PI * (j - 1) * x.array()).cos();
    }

    double geodesic(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const override {
        return std::abs(x[0] - y[0]);
    }
};

} // namespace fdm
