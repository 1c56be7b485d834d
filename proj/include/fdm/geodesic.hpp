#pragma once

#include "fdm/config.hpp"
#include "fdm/distance.hpp"
#include "fdm/graph.hpp"
#include "fdm/shortest_paths.hpp"

namespace fdm {

/**
 * Pairwise distance estimate used by the nonlocal branch.
 *
 * GraphDijkstra thresholds the Euclidean distances at
 * config.effective_graph_threshold() and runs all-pairs shortest paths;
 * AnalyticSphere uses exact great-circle distances (sphere clouds only);
 * RawEuclidean returns the plain Euclidean matrix.
 */
inline DistanceMatrix geodesic_estimate(const PointCloud& cloud, const FdmConfig& config) {
    switch (config.distance_mode) {
    case DistanceMode::RawEuclidean:
        return pairwise_euclidean(cloud);
    case DistanceMode::AnalyticSphere:
        if (cloud.tag != ManifoldTag::Sphere)
            throw std::invalid_argument("geodesic_estimate: AnalyticSphere requires a sphere cloud");
        return pairwise_sphere_geodesic(cloud);
    case DistanceMode::GraphDijkstra: {
        DistanceMatrix euc = pairwise_euclidean(cloud);
        SparseGraph g = epsilon_graph(euc, config.effective_graph_threshold());
        require_connected(g, &euc);
        return all_pairs_shortest_paths(g, config.threads);
    }
    }
    throw std::logic_error("geodesic_estimate: unknown distance mode");
}

} // namespace fdm
