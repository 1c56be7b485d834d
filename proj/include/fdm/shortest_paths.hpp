#pragma once

#include <atomic>
#include <limits>
#include <queue>
#include <thread>
#include <vector>

#include "fdm/graph.hpp"

namespace fdm {

namespace detail {

/// Single-source Dijkstra with a binary heap; writes distances into `out`.
inline void dijkstra_row(const SparseGraph& g, int source, double* out) {
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.n; ++i) out[i] = inf;
    out[source] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        auto [d, u] = heap.top();
        heap.pop();
        if (d > out[u]) continue; // stale entry
        for (const auto& [v, w] : g.adj[u]) {
            double nd = d + w;
            if (nd < out[v]) {
                out[v] = nd;
                heap.emplace(nd, v);
            }
        }
    }
}

} // namespace detail

/**
 * All-pairs shortest path distances by per-source Dijkstra runs.
 *
 * Sources are independent and are distributed over `threads` workers
 * (0 = hardware concurrency). Each pair's value is taken from the
 * lower-indexed source, so the result is exactly symmetric and does not
 * depend on scheduling.
 */
inline DistanceMatrix all_pairs_shortest_paths(const SparseGraph& g, int threads = 0) {
    require_connected(g);
    const int N = g.n;
    Eigen::MatrixXd D(N, N);

    int nthreads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (nthreads < 1) nthreads = 1;
    nthreads = std::min(nthreads, N);

    std::atomic<int> next_source{0};
    auto worker = [&]() {
        std::vector<double> row(N);
        for (;;) {
            int s = next_source.fetch_add(1);
            if (s >= N) break;
            detail::dijkstra_row(g, s, row.data());
            for (int j = 0; j < N; ++j) D(s, j) = row[j];
        }
    };

    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    // mirror the upper triangle so values(i,j) == values(j,i) bit-for-bit
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) D(j, i) = D(i, j);

    return {std::move(D), MatrixKind::Graph};
}

} // namespace fdm
