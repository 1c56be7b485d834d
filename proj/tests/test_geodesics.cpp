#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fdm/geodesic.hpp"
#include "fdm/point_cloud.hpp"
#include "fdm/rng.hpp"
#include "oracle_utils.hpp"

using namespace fdm;
using Catch::Approx;

namespace {

PointCloud random_cloud(int n, int dim, std::uint64_t seed) {
    CounterRng rng(seed);
    PointCloud c;
    c.ambient.resize(n, dim);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < dim; ++j) c.ambient(i, j) = rng.next_uniform() * 2.0 - 1.0;
    c.tag = ManifoldTag::External;
    return c;
}

SparseGraph random_connected_graph(int n, std::uint64_t seed) {
    CounterRng rng(seed);
    SparseGraph g;
    g.n = n;
    g.adj.resize(n);
    auto add_edge = [&](int a, int b, double w) {
        for (auto& [v, _] : g.adj[a])
            if (v == b) return;
        g.adj[a].emplace_back(b, w);
        g.adj[b].emplace_back(a, w);
    };
    for (int i = 1; i < n; ++i) {
        int j = static_cast<int>(rng.next_u64() % i);
        add_edge(i, j, 0.1 + rng.next_uniform());
    }
    int extra = n;
    for (int e = 0; e < extra; ++e) {
        int a = static_cast<int>(rng.next_u64() % n);
        int b = static_cast<int>(rng.next_u64() % n);
        if (a != b) add_edge(a, b, 0.1 + rng.next_uniform());
    }
    for (auto& a : g.adj) std::sort(a.begin(), a.end());
    return g;
}

} // namespace

TEST_CASE("pairwise_euclidean basics") {
    PointCloud c;
    c.ambient.resize(2, 2);
    c.ambient << 0, 0, 3, 4;
    auto D = pairwise_euclidean(c);
    CHECK(D.values(0, 1) == 5.0);
    CHECK(D.values(1, 0) == 5.0);
    CHECK(D.values(0, 0) == 0.0);
    CHECK(D.kind == MatrixKind::Euclidean);

    PointCloud single;
    single.ambient.resize(1, 2);
    CHECK_THROWS_AS(pairwise_euclidean(single), std::invalid_argument);
}

TEST_CASE("pairwise_euclidean matches the reference loop") {
    auto c = random_cloud(6, 3, 99);
    auto D = pairwise_euclidean(c);
    for (int i = 0; i < 6; ++i) {
        CHECK(D.values(i, i) == 0.0);
        for (int j = 0; j < 6; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) {
                double diff = c.ambient(i, k) - c.ambient(j, k);
                acc += diff * diff;
            }
            CHECK(D.values(i, j) == Approx(std::sqrt(acc)).margin(1e-14));
        }
    }
}

TEST_CASE("epsilon_graph thresholds") {
    auto c = random_cloud(12, 2, 5);
    auto D = pairwise_euclidean(c);
    double dmin = 1e300, dmax = 0;
    for (int i = 0; i < 12; ++i)
        for (int j = i + 1; j < 12; ++j) {
            dmin = std::min(dmin, D.values(i, j));
            dmax = std::max(dmax, D.values(i, j));
        }

    CHECK(epsilon_graph(D, dmin * 0.99).edge_count() == 0);
    CHECK(epsilon_graph(D, dmax * 1.01).edge_count() == 12 * 11 / 2);
    CHECK_THROWS_AS(epsilon_graph(D, 0.0), std::invalid_argument);

    // neighbor count from the chord-length formula 2 sin(k pi / N): with
    // threshold 3*(2pi/100) the chords at one, two and three steps all fall
    // strictly below it (a chord is shorter than its arc), so each node
    // links three neighbors per side.
    auto circle = circle_uniform_grid(100);
    auto Dc = pairwise_euclidean(circle);
    auto g = epsilon_graph(Dc, 3.0 * 2.0 * M_PI / 100.0);
    int per_side = 0;
    for (int k = 1; k < 50; ++k)
        if (2.0 * std::sin(k * M_PI / 100.0) < 3.0 * 2.0 * M_PI / 100.0) ++per_side;
    REQUIRE(per_side == 3);
    for (int i = 0; i < 100; ++i) CHECK(g.adj[i].size() == 2 * per_side);
}

TEST_CASE("all_pairs on a path graph") {
    SparseGraph g;
    g.n = 3;
    g.adj = {{{1, 1.0}}, {{0, 1.0}, {2, 1.0}}, {{1, 1.0}}};
    auto D = all_pairs_shortest_paths(g);
    CHECK(D.values(0, 2) == 2.0);
    CHECK(D.kind == MatrixKind::Graph);
}

TEST_CASE("all_pairs equals exhaustive path enumeration") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        auto g = random_connected_graph(5, seed);
        auto D = all_pairs_shortest_paths(g);
        // enumerate from the lower index, matching the stored accumulation order
        for (int s = 0; s < 5; ++s)
            for (int t = 0; t < 5; ++t)
                CHECK(D.values(s, t) ==
                      oracle::shortest_simple_path(g, std::min(s, t), std::max(s, t)));
    }
}

TEST_CASE("square circle underestimates the arc") {
    // N=4 uniform circle, nearest-neighbor edges: the antipodal graph
    // distance is two chords, 2*sqrt(2), below the arc length pi
    auto c = circle_uniform_grid(4);
    auto D = pairwise_euclidean(c);
    auto g = epsilon_graph(D, 1.5); // chords sqrt(2) pass, diameter 2 does not
    auto G = all_pairs_shortest_paths(g);
    CHECK(G.values(0, 2) == Approx(2.0 * std::sqrt(2.0)));
    CHECK(G.values(0, 2) < M_PI);
}

TEST_CASE("all_pairs is deterministic across thread counts") {
    auto c = random_cloud(60, 2, 17);
    auto D = pairwise_euclidean(c);
    auto g = epsilon_graph(D, 1.2);
    require_connected(g);
    auto a = all_pairs_shortest_paths(g, 1);
    auto b = all_pairs_shortest_paths(g, 4);
    REQUIRE(a.values == b.values);
}

TEST_CASE("graph-distance invariants") {
    auto c = circle_uniform_grid(120);
    auto D = pairwise_euclidean(c);
    auto g = epsilon_graph(D, 4.0 * 2.0 * M_PI / 120.0);
    auto G = all_pairs_shortest_paths(g);

    // a path is never shorter than the straight chord
    for (int i = 0; i < 120; i += 7)
        for (int j = 0; j < 120; j += 11)
            CHECK(G.values(i, j) >= D.values(i, j) - 1e-12);

    // symmetry is exact and the diagonal is zero
    for (int i = 0; i < 120; ++i) {
        CHECK(G.values(i, i) == 0.0);
        for (int j = 0; j < i; ++j) CHECK(G.values(i, j) == G.values(j, i));
    }

    // triangle inequality over sampled triples
    CounterRng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        int a = static_cast<int>(rng.next_u64() % 120);
        int b = static_cast<int>(rng.next_u64() % 120);
        int d = static_cast<int>(rng.next_u64() % 120);
        CHECK(G.values(a, d) <= G.values(a, b) + G.values(b, d) + 1e-12);
    }
}

TEST_CASE("disconnected graphs raise a structured error") {
    // two clusters far apart
    PointCloud c;
    c.ambient.resize(7, 2);
    c.ambient << 0, 0, 0.1, 0, 0, 0.1, 0.1, 0.1, 10, 10, 10.1, 10, 10, 10.1;
    auto D = pairwise_euclidean(c);
    auto g = epsilon_graph(D, 0.5);
    try {
        require_connected(g, &D);
        FAIL("expected DisconnectedGraphError");
    } catch (const DisconnectedGraphError& e) {
        CHECK(e.components == 2);
        CHECK(e.largest == 4);
        CHECK(e.second_largest == 3);
        // the suggested threshold is the bridging gap; above it reconnects
        CHECK(e.suggested_threshold == Approx(std::sqrt(2.0 * 9.9 * 9.9)).epsilon(0.05));
        auto g2 = epsilon_graph(D, e.suggested_threshold * 1.001);
        CHECK(component_sizes(g2).size() == 1);
    }

    FdmConfig cfg;
    cfg.beta = 1.0;
    cfg.epsilon = 0.25;
    cfg.distance_mode = DistanceMode::GraphDijkstra;
    CHECK_THROWS_AS(geodesic_estimate(c, cfg), DisconnectedGraphError);
}

TEST_CASE("geodesic_estimate dispatch") {
    auto sphere = sphere_icosphere_grid(1);
    FdmConfig cfg;
    cfg.distance_mode = DistanceMode::AnalyticSphere;
    auto D = geodesic_estimate(sphere, cfg);
    CHECK(D.kind == MatrixKind::AnalyticGeodesic);
    // antipodal icosahedron vertices are both present
    int found = 0;
    for (int i = 0; i < 12; ++i)
        for (int j = i + 1; j < 12; ++j)
            if (D.values(i, j) == Approx(M_PI).margin(1e-12)) ++found;
    CHECK(found == 6);

    cfg.distance_mode = DistanceMode::AnalyticSphere;
    auto circ = circle_uniform_grid(10);
    CHECK_THROWS_AS(geodesic_estimate(circ, cfg), std::invalid_argument);

    cfg.distance_mode = DistanceMode::RawEuclidean;
    auto E = geodesic_estimate(circ, cfg);
    auto E2 = pairwise_euclidean(circ);
    CHECK(E.values == E2.values);
    CHECK(E.kind == MatrixKind::Euclidean);
}

TEST_CASE("dijkstra arc accuracy on the fine circle") {
    auto c = circle_uniform_grid(500);
    FdmConfig cfg;
    cfg.beta = 1.0;
    cfg.epsilon = std::pow(2.0, -12);
    cfg.distance_mode = DistanceMode::GraphDijkstra;
    auto G = geodesic_estimate(c, cfg);
    const auto theta = c.intrinsic->col(0);
    double worst = 0.0;
    for (int i = 0; i < 500; i += 13)
        for (int j = 0; j < 500; j += 17) {
            if (i == j) continue;
            double arc = std::abs(theta[i] - theta[j]);
            arc = std::min(arc, 2.0 * M_PI - arc);
            worst = std::max(worst, std::abs(G.values(i, j) - arc) / arc);
        }
    CHECK(worst < 0.01);
}
