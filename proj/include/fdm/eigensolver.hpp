#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "fdm/rng.hpp"

namespace fdm {

/// Eigenpairs sorted by descending eigenvalue; columns of `vectors` are orthonormal.
struct EigenResult {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

namespace detail {

/**
 * Implicit-shift QL sweeps on a symmetric tridiagonal matrix.
 * d: diagonal, e: subdiagonal in e[0..n-2] (e[n-1] is workspace),
 * Z: rotations are accumulated into its columns.
 */
inline void tridiagonal_ql(Eigen::VectorXd& d, Eigen::VectorXd& e, Eigen::MatrixXd& Z) {
    const int n = static_cast<int>(d.size());
    if (n == 0) return;
    e[n - 1] = 0.0;

    const double eps = std::numeric_limits<double>::epsilon();
    double scale = 0.0; // running magnitude for the absolute deflation test

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        scale = std::max(scale, std::abs(d[l]) + std::abs(e[l]));
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= eps * dd || std::abs(e[m]) <= eps * scale) break;
            }
            if (m != l) {
                if (iter++ == 60)
                    throw std::runtime_error("tridiagonal_ql: too many iterations");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    // rotate eigenvector columns i and i+1
                    for (Eigen::Index k = 0; k < Z.rows(); ++k) {
                        f = Z(k, i + 1);
                        Z(k, i + 1) = s * Z(k, i) + c * f;
                        Z(k, i) = c * Z(k, i) - s * f;
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

/**
 * Householder reduction A = Q T Q^T with backward-accumulated Q.
 * On return d is the diagonal of T and e[0..n-2] its subdiagonal.
 * Only the lower triangle of A is referenced or updated.
 */
inline void householder_tridiagonalize(Eigen::MatrixXd& A, Eigen::VectorXd& d,
                                       Eigen::VectorXd& e, Eigen::MatrixXd& Q) {
    const int n = static_cast<int>(A.rows());
    d.resize(n);
    e.resize(n);
    e.setZero();
    std::vector<Eigen::VectorXd> reflectors(std::max(0, n - 2));

    for (int k = 0; k + 2 < n; ++k) {
        const int m = n - k - 1;
        Eigen::VectorXd x = A.col(k).segment(k + 1, m);
        double norm = x.norm();
        if (norm == 0.0) {
            e[k] = 0.0;
            continue;
        }
        double alpha = (x[0] >= 0.0) ? -norm : norm;
        Eigen::VectorXd v = x;
        v[0] -= alpha;
        double vn = v.norm();
        if (vn == 0.0) {
            e[k] = alpha;
            continue;
        }
        v /= vn;

        auto B = A.block(k + 1, k + 1, m, m);
        Eigen::VectorXd w = B.selfadjointView<Eigen::Lower>() * v;
        double kappa = v.dot(w);
        Eigen::VectorXd p = 2.0 * (w - kappa * v);
        B.selfadjointView<Eigen::Lower>().rankUpdate(v, p, -1.0);

        e[k] = alpha;
        reflectors[k] = std::move(v);
    }
    if (n >= 2) e[n - 2] = A(n - 1, n - 2);
    for (int i = 0; i < n; ++i) d[i] = A(i, i);

    Q = Eigen::MatrixXd::Identity(n, n);
    for (int k = n - 3; k >= 0; --k) {
        const auto& v = reflectors[k];
        if (v.size() == 0) continue;
        const int m = n - k - 1;
        auto Zb = Q.block(k + 1, k + 1, m, m);
        Eigen::RowVectorXd vtZ = v.transpose() * Zb;
        Zb.noalias() -= 2.0 * v * vtZ;
    }
}

inline void check_symmetric(const Eigen::MatrixXd& A, double tol) {
    if (A.rows() != A.cols())
        throw std::invalid_argument("symmetric_eig: matrix must be square");
    double worst = 0.0;
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = i + 1; j < A.cols(); ++j)
            worst = std::max(worst, std::abs(A(i, j) - A(j, i)));
    if (worst > tol)
        throw std::invalid_argument("symmetric_eig: input is asymmetric beyond tolerance");
}

inline EigenResult take_top(const Eigen::VectorXd& d, const Eigen::MatrixXd& Z, int count) {
    const int n = static_cast<int>(d.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] > d[b]; });
    EigenResult r;
    r.values.resize(count);
    r.vectors.resize(Z.rows(), count);
    for (int i = 0; i < count; ++i) {
        r.values[i] = d[order[i]];
        r.vectors.col(i) = Z.col(order[i]);
    }
    return r;
}

} // namespace detail

/// Full dense solve (Householder + implicit-shift QL), returning the top `count` pairs.
inline EigenResult symmetric_eig_dense(Eigen::MatrixXd A, int count,
                                       double symmetry_tol = 1e-12) {
    detail::check_symmetric(A, symmetry_tol);
    const int n = static_cast<int>(A.rows());
    if (count < 1 || count > n)
        throw std::invalid_argument("symmetric_eig_dense: count must lie in [1, N]");

    Eigen::VectorXd d, e;
    Eigen::MatrixXd Q;
    detail::householder_tridiagonalize(A, d, e, Q);
    detail::tridiagonal_ql(d, e, Q);
    return detail::take_top(d, Q, count);
}

/**
 * Lanczos with full reorthogonalization for the top `count` eigenpairs.
 * The Krylov basis grows until the Ritz residuals |beta_m s_{m,i}| drop
 * below tol * ||T|| for every requested pair, or the basis is exhausted.
 */
inline EigenResult symmetric_eig_lanczos(const Eigen::MatrixXd& A, int count,
                                         double tol = 1e-12, int max_basis = 0,
                                         double symmetry_tol = 1e-12) {
    detail::check_symmetric(A, symmetry_tol);
    const int n = static_cast<int>(A.rows());
    if (count < 1 || count > n)
        throw std::invalid_argument("symmetric_eig_lanczos: count must lie in [1, N]");
    if (max_basis <= 0) max_basis = n;
    max_basis = std::min(max_basis, n);

    CounterRng rng(0x5EEDF00DULL);
    Eigen::MatrixXd V(n, std::min(max_basis, std::max(2 * count + 20, 64)));
    std::vector<double> alpha, beta;

    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.next_uniform() - 0.5;
    v.normalize();
    V.col(0) = v;

    Eigen::VectorXd w(n);
    int m = 0;

    while (true) {
        w.noalias() = A.selfadjointView<Eigen::Lower>() * V.col(m);
        if (m > 0) w -= beta[m - 1] * V.col(m - 1);
        double a = V.col(m).dot(w);
        alpha.push_back(a);
        w -= a * V.col(m);
        // full reorthogonalization, two passes
        for (int pass = 0; pass < 2; ++pass) {
            Eigen::VectorXd proj = V.leftCols(m + 1).transpose() * w;
            w.noalias() -= V.leftCols(m + 1) * proj;
        }
        double b = w.norm();
        ++m;

        bool basis_full = (m >= max_basis);
        if (basis_full || (m >= count + 2 && m % 10 == 0)) {
            Eigen::VectorXd d(m), esub(m);
            for (int i = 0; i < m; ++i) d[i] = alpha[i];
            for (int i = 0; i + 1 < m; ++i) esub[i] = beta[i];
            esub[m - 1] = 0.0;
            Eigen::MatrixXd S = Eigen::MatrixXd::Identity(m, m);
            detail::tridiagonal_ql(d, esub, S);
            std::vector<int> order(m);
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](int x, int y) { return d[x] > d[y]; });
            double tnorm = d.cwiseAbs().maxCoeff();
            bool converged = (m >= count);
            if (converged) {
                for (int i = 0; i < count; ++i) {
                    if (std::abs(b * S(m - 1, order[i])) > tol * std::max(tnorm, 1e-300)) {
                        converged = false;
                        break;
                    }
                }
            }
            if (converged || basis_full) {
                EigenResult ritz;
                ritz.values.resize(count);
                ritz.vectors.resize(n, count);
                for (int i = 0; i < count; ++i) {
                    ritz.values[i] = d[order[i]];
                    ritz.vectors.col(i).noalias() = V.leftCols(m) * S.col(order[i]);
                    ritz.vectors.col(i).normalize();
                }
                return ritz;
            }
        }

        if (b < 1e-14) {
            // invariant subspace found; continue in a fresh orthogonal direction
            for (int i = 0; i < n; ++i) w[i] = rng.next_uniform() - 0.5;
            for (int pass = 0; pass < 2; ++pass) {
                Eigen::VectorXd proj = V.leftCols(m).transpose() * w;
                w.noalias() -= V.leftCols(m) * proj;
            }
            b = w.norm();
            if (b < 1e-300) throw std::runtime_error("symmetric_eig_lanczos: basis exhausted");
            beta.push_back(0.0);
        } else {
            beta.push_back(b);
        }
        if (m + 1 > V.cols())
            V.conservativeResize(Eigen::NoChange,
                                 std::min<Eigen::Index>(max_basis, std::max<Eigen::Index>(V.cols() * 2, m + 1)));
        V.col(m) = w / b;
    }
}

/// Dense Householder+QL up to N = 4096, Lanczos with full reorthogonalization above.
inline EigenResult symmetric_eig_top(const Eigen::MatrixXd& A, int count) {
    if (A.rows() <= 4096) return symmetric_eig_dense(A, count);
    return symmetric_eig_lanczos(A, count);
}

} // namespace fdm
