#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "fdm/analytic.hpp"
#include "fdm/point_cloud.hpp"

namespace fdm {

enum class MatrixKind : std::uint8_t {
    Euclidean = 0,
    Graph = 1,
    AnalyticGeodesic = 2,
    KernelLocal = 3,
    KernelNonlocal = 4,
};

/// Dense symmetric pairwise distances with zero diagonal.
struct DistanceMatrix {
    Eigen::MatrixXd values;
    MatrixKind kind = MatrixKind::Euclidean;

    Eigen::Index size() const { return values.rows(); }
};

/// A_ij = |x_i - x_j| for all pairs, symmetric by construction.
inline DistanceMatrix pairwise_euclidean(const PointCloud& cloud) {
    const Eigen::Index N = cloud.size();
    if (N < 2) throw std::invalid_argument("pairwise_euclidean: need at least 2 points");
    const Eigen::MatrixXd& X = cloud.ambient;
    Eigen::MatrixXd D(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        D(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < N; ++j) {
            double d = (X.row(i) - X.row(j)).norm();
            D(i, j) = d;
            D(j, i) = d;
        }
    }
    return {std::move(D), MatrixKind::Euclidean};
}

/// Exact great-circle distances for a sphere cloud.
inline DistanceMatrix pairwise_sphere_geodesic(const PointCloud& cloud) {
    if (cloud.tag != ManifoldTag::Sphere)
        throw std::invalid_argument("pairwise_sphere_geodesic: cloud is not tagged as a sphere");
    const Eigen::Index N = cloud.size();
    Eigen::MatrixXd D(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        D(i, i) = 0.0;
        Eigen::Vector3d xi = cloud.ambient.row(i).head<3>();
        for (Eigen::Index j = i + 1; j < N; ++j) {
            double d = sphere_geodesic(xi, cloud.ambient.row(j).head<3>());
            D(i, j) = d;
            D(j, i) = d;
        }
    }
    return {std::move(D), MatrixKind::AnalyticGeodesic};
}

} // namespace fdm
