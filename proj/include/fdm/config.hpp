#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdm {

enum class DistanceMode { GraphDijkstra, AnalyticSphere, RawEuclidean };

/**
 * Parameters of one pipeline run.
 *
 * beta in (0,3] selects the kernel family (local for beta >= 2, nonlocal
 * below); epsilon is the squared-distance bandwidth. graph_threshold and
 * kde_bandwidth are optional overrides; zero means "use the default"
 * (sqrt(epsilon) and epsilon respectively).
 */
struct FdmConfig {
    double beta = 2.0;
    double epsilon = 1e-3;
    int dim = 1;       // intrinsic dimension d
    int num_eigs = 10; // ell; ell+1 eigenpairs are computed
    DistanceMode distance_mode = DistanceMode::GraphDijkstra;
    double graph_threshold = 0.0;
    double kde_bandwidth = 0.0;

    // Rescales the kernel bandwidth so the estimated generator carries a
    // unit constant (see kernels.hpp). Off reproduces the raw kernels.
    bool calibrate = true;

    int threads = 0; // for the all-pairs stage; 0 = hardware concurrency

    bool local_branch() const { return beta >= 2.0; }

    double t() const { return std::pow(epsilon, beta / 2.0); }

    double alpha() const {
        if (!local_branch())
            throw std::logic_error("FdmConfig::alpha: only defined on the local branch");
        return beta / (beta - 1.0);
    }

    double effective_graph_threshold() const {
        return graph_threshold > 0.0 ? graph_threshold : std::sqrt(epsilon);
    }

    double effective_kde_bandwidth() const {
        return kde_bandwidth > 0.0 ? kde_bandwidth : epsilon;
    }

    /// Throws on invalid parameters; returns non-fatal warnings.
    std::vector<std::string> validate() const {
        if (!(beta > 0.0 && beta <= 3.0))
            throw std::invalid_argument("FdmConfig: beta must lie in (0, 3]");
        if (!(epsilon > 0.0))
            throw std::invalid_argument("FdmConfig: epsilon must be positive");
        if (dim < 1)
            throw std::invalid_argument("FdmConfig: dim must be a positive integer");
        if (num_eigs < 1)
            throw std::invalid_argument("FdmConfig: num_eigs must be a positive integer");
        if (graph_threshold < 0.0)
            throw std::invalid_argument("FdmConfig: graph_threshold must be positive");
        if (kde_bandwidth < 0.0)
            throw std::invalid_argument("FdmConfig: kde_bandwidth must be positive");
        std::vector<std::string> warnings;
        if (beta > dim + 1.0)
            warnings.push_back("beta exceeds dim+1; the heat-kernel scale-invariance bound does not cover this regime");
        return warnings;
    }
};

} // namespace fdm
