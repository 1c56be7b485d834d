#pragma once

#include <algorithm>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdm/distance.hpp"

namespace fdm {

/// Weighted undirected graph with per-node neighbor lists sorted by index.
struct SparseGraph {
    int n = 0;
    std::vector<std::vector<std::pair<int, double>>> adj;

    std::size_t edge_count() const {
        std::size_t e = 0;
        for (const auto& a : adj) e += a.size();
        return e / 2;
    }
};

/// Raised when an operation requires a connected neighbor graph.
class DisconnectedGraphError : public std::runtime_error {
public:
    DisconnectedGraphError(int components, int largest, int second_largest,
                           double suggested_threshold)
        : std::runtime_error(format(components, largest, second_largest, suggested_threshold)),
          components(components),
          largest(largest),
          second_largest(second_largest),
          suggested_threshold(suggested_threshold) {}

    int components;
    int largest;
    int second_largest;
    double suggested_threshold; // NaN when no suggestion is available

private:
    static std::string format(int c, int l, int s, double thr) {
        std::ostringstream os;
        os << "neighbor graph is disconnected: " << c << " components (largest " << l
           << ", second largest " << s << ")";
        if (thr == thr)
            os << "; smallest connecting threshold is " << thr;
        return os.str();
    }
};

/// Edge (i,j) present iff 0 < dist_ij < threshold (strict on both sides).
inline SparseGraph epsilon_graph(const DistanceMatrix& dist, double threshold) {
    if (dist.kind != MatrixKind::Euclidean)
        throw std::invalid_argument("epsilon_graph: expected Euclidean distances");
    if (!(threshold > 0.0))
        throw std::invalid_argument("epsilon_graph: threshold must be positive");
    const int N = static_cast<int>(dist.size());
    SparseGraph g;
    g.n = N;
    g.adj.resize(N);
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            double d = dist.values(i, j);
            if (d > 0.0 && d < threshold) {
                g.adj[i].emplace_back(j, d);
                g.adj[j].emplace_back(i, d);
            }
        }
    }
    // neighbor lists come out sorted by construction; keep the invariant explicit
    for (auto& a : g.adj) std::sort(a.begin(), a.end());
    return g;
}

/// Connected component sizes, largest first.
inline std::vector<int> component_sizes(const SparseGraph& g) {
    std::vector<int> comp(g.n, -1);
    std::vector<int> sizes;
    std::vector<int> stack;
    for (int s = 0; s < g.n; ++s) {
        if (comp[s] >= 0) continue;
        int c = static_cast<int>(sizes.size());
        sizes.push_back(0);
        stack.push_back(s);
        comp[s] = c;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            ++sizes[c];
            for (const auto& [v, w] : g.adj[u]) {
                if (comp[v] < 0) {
                    comp[v] = c;
                    stack.push_back(v);
                }
            }
        }
    }
    std::sort(sizes.rbegin(), sizes.rend());
    return sizes;
}

/**
 * Largest edge of a minimum spanning tree over the full distance matrix;
 * any strict threshold above this value yields a connected epsilon-graph.
 */
inline double min_connecting_threshold(const DistanceMatrix& dist) {
    const Eigen::Index N = dist.size();
    if (N < 2) return 0.0;
    std::vector<double> best(N, std::numeric_limits<double>::infinity());
    std::vector<bool> used(N, false);
    best[0] = 0.0;
    double max_edge = 0.0;
    for (Eigen::Index it = 0; it < N; ++it) {
        int u = -1;
        for (Eigen::Index i = 0; i < N; ++i)
            if (!used[i] && (u < 0 || best[i] < best[u])) u = static_cast<int>(i);
        used[u] = true;
        max_edge = std::max(max_edge, best[u]);
        for (Eigen::Index v = 0; v < N; ++v)
            if (!used[v] && dist.values(u, v) < best[v]) best[v] = dist.values(u, v);
    }
    return max_edge;
}

/// Throws DisconnectedGraphError (with an MST-based suggestion) if g is disconnected.
inline void require_connected(const SparseGraph& g, const DistanceMatrix* euclidean = nullptr) {
    auto sizes = component_sizes(g);
    if (sizes.size() <= 1) return;
    double suggestion = std::numeric_limits<double>::quiet_NaN();
    if (euclidean) suggestion = min_connecting_threshold(*euclidean);
    throw DisconnectedGraphError(static_cast<int>(sizes.size()), sizes[0],
                                 sizes.size() > 1 ? sizes[1] : 0, suggestion);
}

} // namespace fdm
