#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fdm/rng.hpp"

namespace fdm {

enum class ManifoldTag { Circle, Sphere, Interval, External };

/**
 * A sampled manifold: N ambient coordinates, optional chart coordinates.
 *
 * Circle clouds embed theta as (cos t, sin t); sphere clouds live on the
 * unit sphere in R^3 with (azimuth, polar) charts; interval clouds are
 * points of [0,1] with ambient == intrinsic.
 */
struct PointCloud {
    Eigen::MatrixXd ambient;                  // N x n
    std::optional<Eigen::MatrixXd> intrinsic; // N x m
    ManifoldTag tag = ManifoldTag::External;

    Eigen::Index size() const { return ambient.rows(); }
    Eigen::Index ambient_dim() const { return ambient.cols(); }

    /// Checks the per-manifold structural invariants; throws on violation.
    void validate(double tol = 1e-12) const {
        const Eigen::Index N = size();
        if (N == 0) throw std::invalid_argument("PointCloud: empty cloud");
        switch (tag) {
        case ManifoldTag::Circle: {
            if (ambient_dim() != 2)
                throw std::invalid_argument("PointCloud: circle cloud must have ambient dimension 2");
            for (Eigen::Index i = 0; i < N; ++i) {
                if (std::abs(ambient.row(i).norm() - 1.0) > tol)
                    throw std::invalid_argument("PointCloud: circle point off the unit circle");
            }
            break;
        }
        case ManifoldTag::Sphere: {
            if (ambient_dim() != 3)
                throw std::invalid_argument("PointCloud: sphere cloud must have ambient dimension 3");
            for (Eigen::Index i = 0; i < N; ++i) {
                if (std::abs(ambient.row(i).norm() - 1.0) > tol)
                    throw std::invalid_argument("PointCloud: sphere point off the unit sphere");
            }
            break;
        }
        case ManifoldTag::Interval: {
            if (ambient_dim() != 1)
                throw std::invalid_argument("PointCloud: interval cloud must have ambient dimension 1");
            if ((ambient.array() < -tol).any() || (ambient.array() > 1.0 + tol).any())
                throw std::invalid_argument("PointCloud: interval point outside [0,1]");
            break;
        }
        case ManifoldTag::External:
            break;
        }
        if (intrinsic && intrinsic->rows() != N)
            throw std::invalid_argument("PointCloud: intrinsic row count mismatch");
    }
};

namespace detail {

inline Eigen::MatrixXd embed_circle(const Eigen::VectorXd& theta) {
    Eigen::MatrixXd X(theta.size(), 2);
    X.col(0) = theta.array().cos();
    X.col(1) = theta.array().sin();
    return X;
}

} // namespace detail

/// Equally spaced angles theta_i = 2*pi*i/N, i = 1..N, on the unit circle.
inline PointCloud circle_uniform_grid(int N) {
    if (N < 3) throw std::invalid_argument("circle_uniform_grid: N must be >= 3");
    Eigen::VectorXd theta(N);
    for (int i = 1; i <= N; ++i) theta[i - 1] = 2.0 * M_PI * i / N;
    PointCloud c{detail::embed_circle(theta), theta, ManifoldTag::Circle};
    return c;
}

/// Warped grid theta_i - sin(theta_i)/2 over the uniform angles.
inline PointCloud circle_nonuniform_grid(int N) {
    if (N < 3) throw std::invalid_argument("circle_nonuniform_grid: N must be >= 3");
    Eigen::VectorXd theta(N);
    for (int i = 1; i <= N; ++i) {
        double t = 2.0 * M_PI * i / N;
        theta[i - 1] = t - std::sin(t) / 2.0;
    }
    PointCloud c{detail::embed_circle(theta), theta, ManifoldTag::Circle};
    return c;
}

/// theta_i = 2*pi*r_i with r_i uniform on [0,1) from the counter generator.
inline PointCloud circle_random(int N, std::uint64_t seed) {
    if (N < 3) throw std::invalid_argument("circle_random: N must be >= 3");
    CounterRng rng(seed);
    Eigen::VectorXd theta(N);
    for (int i = 0; i < N; ++i) theta[i] = 2.0 * M_PI * rng.next_uniform();
    PointCloud c{detail::embed_circle(theta), theta, ManifoldTag::Circle};
    return c;
}

/// Uniform grid x_i = (i-1)/(N-1) on [0,1], endpoints included.
inline PointCloud interval_grid(int N) {
    if (N < 3) throw std::invalid_argument("interval_grid: N must be >= 3");
    Eigen::VectorXd x(N);
    for (int i = 0; i < N; ++i) x[i] = static_cast<double>(i) / (N - 1);
    PointCloud c{x, x, ManifoldTag::Interval};
    return c;
}

/**
 * Icosphere mesh: repeatedly subdivided icosahedron projected onto the
 * unit sphere. Vertex count is 10*4^level + 2; the 12 original vertices
 * keep degree 5, every later vertex has degree 6.
 */
struct IcosphereMesh {
    Eigen::MatrixXd vertices;                 // N x 3, unit norm
    std::vector<std::array<int, 3>> faces;

    std::vector<int> vertex_degrees() const {
        std::vector<std::vector<int>> adj(vertices.rows());
        auto link = [&](int a, int b) {
            for (int v : adj[a]) if (v == b) return;
            adj[a].push_back(b);
            adj[b].push_back(a);
        };
        for (const auto& f : faces) {
            link(f[0], f[1]);
            link(f[1], f[2]);
            link(f[2], f[0]);
        }
        std::vector<int> deg(adj.size());
        for (std::size_t i = 0; i < adj.size(); ++i) deg[i] = static_cast<int>(adj[i].size());
        return deg;
    }
};

inline IcosphereMesh icosphere_mesh(int level) {
    if (level < 0) throw std::invalid_argument("icosphere_mesh: level must be >= 0");
    if (level > 6) throw std::length_error("icosphere_mesh: level > 6 exceeds the supported size budget");

    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Eigen::Vector3d> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
        {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
        {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (auto& v : verts) v.normalize();
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};

    for (int lv = 0; lv < level; ++lv) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Eigen::Vector3d m = (verts[a] + verts[b]).normalized();
            verts.push_back(m);
            int idx = static_cast<int>(verts.size()) - 1;
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    IcosphereMesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
    for (std::size_t i = 0; i < verts.size(); ++i) mesh.vertices.row(static_cast<Eigen::Index>(i)) = verts[i];
    mesh.faces = std::move(faces);
    return mesh;
}

/// Near-uniform unit-sphere sample from icosahedral subdivision; N = 10*4^level + 2.
inline PointCloud sphere_icosphere_grid(int level) {
    IcosphereMesh mesh = icosphere_mesh(level);
    const Eigen::Index N = mesh.vertices.rows();
    Eigen::MatrixXd chart(N, 2);
    for (Eigen::Index i = 0; i < N; ++i) {
        const auto v = mesh.vertices.row(i);
        double azimuth = std::atan2(v[1], v[0]);
        if (azimuth < 0) azimuth += 2.0 * M_PI;
        chart(i, 0) = azimuth;
        chart(i, 1) = std::acos(std::clamp(v[2], -1.0, 1.0));
    }
    PointCloud c{mesh.vertices, chart, ManifoldTag::Sphere};
    return c;
}

} // namespace fdm
