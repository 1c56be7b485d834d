#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdm/distance.hpp"
#include "fdm/kernels.hpp"
#include "fdm/point_cloud.hpp"
#include "fdm/spectral.hpp"

namespace fdm {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace io_detail {

inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    return in;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

} // namespace io_detail

/// Optional "# generated ..." stamp; empty means fully reproducible output.
struct WriteOptions {
    std::string timestamp;
};

inline void write_point_cloud_csv(const std::string& path, const PointCloud& cloud,
                                  const WriteOptions& opts = {}) {
    auto out = io_detail::open_out(path);
    if (!opts.timestamp.empty()) out << "# generated " << opts.timestamp << "\n";
    const Eigen::Index n = cloud.ambient_dim();
    const Eigen::Index m = cloud.intrinsic ? cloud.intrinsic->cols() : 0;
    for (Eigen::Index j = 0; j < n; ++j) out << (j ? "," : "") << "x" << (j + 1);
    for (Eigen::Index j = 0; j < m; ++j) out << ",theta" << (j + 1);
    out << "\n";
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        for (Eigen::Index j = 0; j < n; ++j)
            out << (j ? "," : "") << io_detail::fmt17(cloud.ambient(i, j));
        for (Eigen::Index j = 0; j < m; ++j)
            out << "," << io_detail::fmt17((*cloud.intrinsic)(i, j));
        out << "\n";
    }
}

/// Reads a cloud CSV; x-columns become ambient, theta-columns intrinsic.
inline PointCloud read_point_cloud_csv(const std::string& path) {
    auto in = io_detail::open_in(path);
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        header = io_detail::split_csv(line);
        break;
    }
    if (header.empty()) throw IoError("point cloud csv has no header: " + path);
    int n = 0, m = 0;
    for (const auto& h : header) {
        if (h.rfind("x", 0) == 0) ++n;
        else if (h.rfind("theta", 0) == 0) ++m;
        else throw IoError("unknown column '" + h + "' in " + path);
    }
    if (n == 0) throw IoError("no coordinate columns in " + path);

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = io_detail::split_csv(line);
        if (static_cast<int>(fields.size()) != n + m)
            throw IoError("row width mismatch in " + path);
        std::vector<double> vals(fields.size());
        for (std::size_t i = 0; i < fields.size(); ++i) vals[i] = std::stod(fields[i]);
        rows.push_back(std::move(vals));
    }
    PointCloud cloud;
    cloud.ambient.resize(static_cast<Eigen::Index>(rows.size()), n);
    if (m > 0) cloud.intrinsic = Eigen::MatrixXd(rows.size(), m);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int j = 0; j < n; ++j) cloud.ambient(static_cast<Eigen::Index>(i), j) = rows[i][j];
        for (int j = 0; j < m; ++j)
            (*cloud.intrinsic)(static_cast<Eigen::Index>(i), j) = rows[i][n + j];
    }
    cloud.tag = ManifoldTag::External;
    return cloud;
}

inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& M,
                             const WriteOptions& opts = {}) {
    auto out = io_detail::open_out(path);
    if (!opts.timestamp.empty()) out << "# generated " << opts.timestamp << "\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            out << (j ? "," : "") << io_detail::fmt17(M(i, j));
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// binary matrix format: magic "FDMD", u32 N, u8 kind, N*N doubles row-major,
// all little-endian
// ---------------------------------------------------------------------------

inline void write_matrix_binary(const std::string& path, const Eigen::MatrixXd& M,
                                MatrixKind kind) {
    if (M.rows() != M.cols()) throw IoError("binary matrix format stores square matrices");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write("FDMD", 4);
    std::uint32_t n = static_cast<std::uint32_t>(M.rows());
    out.write(reinterpret_cast<const char*>(&n), 4);
    std::uint8_t k = static_cast<std::uint8_t>(kind);
    out.write(reinterpret_cast<const char*>(&k), 1);
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            double v = M(i, j);
            out.write(reinterpret_cast<const char*>(&v), 8);
        }
    if (!out) throw IoError("short write: " + path);
}

struct BinaryMatrix {
    Eigen::MatrixXd values;
    MatrixKind kind;
};

inline BinaryMatrix read_matrix_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "FDMD", 4) != 0)
        throw IoError("bad magic in " + path);
    std::uint32_t n = 0;
    in.read(reinterpret_cast<char*>(&n), 4);
    std::uint8_t k = 0;
    in.read(reinterpret_cast<char*>(&k), 1);
    if (!in || k > 4) throw IoError("bad header in " + path);
    BinaryMatrix bm;
    bm.kind = static_cast<MatrixKind>(k);
    bm.values.resize(n, n);
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) {
            double v;
            in.read(reinterpret_cast<char*>(&v), 8);
            bm.values(i, j) = v;
        }
    if (!in) throw IoError("short read: " + path);
    return bm;
}

inline void write_distance_matrix_binary(const std::string& path, const DistanceMatrix& D) {
    write_matrix_binary(path, D.values, D.kind);
}

inline void write_kernel_matrix_binary(const std::string& path, const KernelMatrix& K) {
    write_matrix_binary(path, K.values,
                        K.family == KernelFamily::Local ? MatrixKind::KernelLocal
                                                        : MatrixKind::KernelNonlocal);
}

// ---------------------------------------------------------------------------
// spectral results
// ---------------------------------------------------------------------------

inline void write_eigenvalues_csv(const std::string& path, const SpectralResult& r,
                                  const WriteOptions& opts = {}) {
    auto out = io_detail::open_out(path);
    if (!opts.timestamp.empty()) out << "# generated " << opts.timestamp << "\n";
    out << "index,eta,lambda,lambda_hat\n";
    for (Eigen::Index i = 0; i < r.count(); ++i)
        out << i << "," << io_detail::fmt17(r.eta[i]) << "," << io_detail::fmt17(r.lambda[i])
            << "," << io_detail::fmt17(r.lambda_hat[i]) << "\n";
}

inline void write_eigenfunctions_csv(const std::string& path, const SpectralResult& r,
                                     const WriteOptions& opts = {}) {
    auto out = io_detail::open_out(path);
    if (!opts.timestamp.empty()) out << "# generated " << opts.timestamp << "\n";
    for (Eigen::Index j = 0; j < r.count(); ++j) out << (j ? "," : "") << "phi" << j;
    out << "\n";
    for (Eigen::Index i = 0; i < r.phi.rows(); ++i) {
        for (Eigen::Index j = 0; j < r.count(); ++j)
            out << (j ? "," : "") << io_detail::fmt17(r.phi(i, j));
        out << "\n";
    }
}

// ---------------------------------------------------------------------------
// generic report tables
// ---------------------------------------------------------------------------

/// CSV with a one-line JSON-style config comment ahead of the header.
inline void write_report_csv(const std::string& path, const std::string& json_config,
                             const std::vector<std::string>& columns,
                             const std::vector<std::vector<double>>& rows,
                             const WriteOptions& opts = {}) {
    auto out = io_detail::open_out(path);
    if (!opts.timestamp.empty()) out << "# generated " << opts.timestamp << "\n";
    if (!json_config.empty()) out << "# " << json_config << "\n";
    for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j];
    out << "\n";
    for (const auto& row : rows) {
        if (row.size() != columns.size()) throw IoError("report row width mismatch");
        for (std::size_t j = 0; j < row.size(); ++j)
            out << (j ? "," : "") << io_detail::fmt17(row[j]);
        out << "\n";
    }
}

inline void write_key_values(const std::string& path,
                             const std::vector<std::pair<std::string, std::string>>& kv,
                             const WriteOptions& opts = {}) {
    auto out = io_detail::open_out(path);
    if (!opts.timestamp.empty()) out << "# generated " << opts.timestamp << "\n";
    for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

} // namespace fdm
