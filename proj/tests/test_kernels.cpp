#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "fdm/kernels.hpp"
#include "fdm/point_cloud.hpp"
#include "fdm/rng.hpp"

using namespace fdm;
using Catch::Approx;

namespace {

DistanceMatrix make_dist(const Eigen::MatrixXd& values, MatrixKind kind) {
    return DistanceMatrix{values, kind};
}

Eigen::MatrixXd random_symmetric_distances(int n, std::uint64_t seed, double scale) {
    CounterRng rng(seed);
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double d = rng.next_uniform() * scale;
            D(i, j) = d;
            D(j, i) = d;
        }
    return D;
}

} // namespace

TEST_CASE("local kernel formula") {
    FdmConfig cfg;
    cfg.beta = 2.0;
    cfg.epsilon = 0.01;
    Eigen::MatrixXd D = random_symmetric_distances(5, 2, 0.3);
    auto K = local_kernel(make_dist(D, MatrixKind::Euclidean), cfg);
    CHECK(K.family == KernelFamily::Local);
    CHECK(K.alpha == Approx(2.0));
    for (int i = 0; i < 5; ++i) {
        CHECK(K.values(i, i) == 1.0); // zero distance maps to 1
        for (int j = 0; j < 5; ++j)
            CHECK(K.values(i, j) == Approx(std::exp(-D(i, j) * D(i, j) / cfg.epsilon)));
    }

    // beta = 3 gives alpha = 3/2; at distance sqrt(eps) the kernel is 1/e
    cfg.beta = 3.0;
    Eigen::MatrixXd U(2, 2);
    U << 0.0, std::sqrt(cfg.epsilon), std::sqrt(cfg.epsilon), 0.0;
    auto K2 = local_kernel(make_dist(U, MatrixKind::Euclidean), cfg);
    CHECK(K2.alpha == Approx(1.5));
    CHECK(K2.values(0, 1) == Approx(std::exp(-1.0)));

    cfg.beta = 1.0;
    CHECK_THROWS_AS(local_kernel(make_dist(D, MatrixKind::Euclidean), cfg),
                    std::invalid_argument);
    cfg.beta = 2.0;
    CHECK_THROWS_AS(local_kernel(make_dist(D, MatrixKind::Graph), cfg),
                    std::invalid_argument);
}

TEST_CASE("nonlocal kernel formula") {
    FdmConfig cfg;
    cfg.beta = 1.0;
    cfg.dim = 1;
    cfg.epsilon = 0.04;
    double rt = std::sqrt(cfg.epsilon);

    Eigen::MatrixXd D(2, 2);
    D << 0.0, rt, rt, 0.0;
    auto K = nonlocal_kernel(make_dist(D, MatrixKind::Graph), cfg);
    CHECK(K.family == KernelFamily::Nonlocal);
    CHECK(K.values(0, 0) == 1.0);
    CHECK(K.values(0, 1) == Approx(0.25)); // (1+1)^-(1+1)

    cfg.beta = 0.5;
    cfg.dim = 2;
    Eigen::MatrixXd D2(2, 2);
    D2 << 0.0, 3.0 * rt, 3.0 * rt, 0.0;
    auto K2 = nonlocal_kernel(make_dist(D2, MatrixKind::AnalyticGeodesic), cfg);
    CHECK(K2.values(0, 1) == Approx(std::pow(4.0, -2.5))); // = 1/32

    // the dichotomy is enforced on both sides
    CHECK_THROWS_AS(nonlocal_kernel(make_dist(D, MatrixKind::Euclidean), cfg),
                    std::invalid_argument);
    cfg.beta = 2.0;
    CHECK_THROWS_AS(nonlocal_kernel(make_dist(D, MatrixKind::Graph), cfg),
                    std::invalid_argument);
}

TEST_CASE("nonlocal tail decays polynomially") {
    FdmConfig cfg;
    cfg.beta = 1.0;
    cfg.dim = 1;
    cfg.epsilon = 1.0;
    Eigen::MatrixXd D(3, 3);
    D << 0, 10, 5, 10, 0, 1, 5, 1, 0;
    auto K = nonlocal_kernel(make_dist(D, MatrixKind::Graph), cfg);
    CHECK(K.values(0, 1) == Approx(1.0 / 121.0));
    double ratio = K.values(0, 1) / K.values(0, 2);
    CHECK(ratio == Approx(std::pow(6.0 / 11.0, 2)));
    CHECK(ratio > std::exp(-5.0)); // polynomial, not exponential, falloff
}

TEST_CASE("kernels are monotone in distance") {
    FdmConfig loc;
    loc.beta = 2.5;
    loc.epsilon = 0.02;
    FdmConfig nl;
    nl.beta = 0.7;
    nl.dim = 2;
    nl.epsilon = 0.02;

    Eigen::MatrixXd A = random_symmetric_distances(8, 4, 0.5);
    Eigen::MatrixXd B = A + random_symmetric_distances(8, 5, 0.2); // entrywise >= A
    auto KA = local_kernel(make_dist(A, MatrixKind::Euclidean), loc);
    auto KB = local_kernel(make_dist(B, MatrixKind::Euclidean), loc);
    CHECK(((KA.values - KB.values).array() >= -1e-15).all());

    auto NA = nonlocal_kernel(make_dist(A, MatrixKind::Graph), nl);
    auto NB = nonlocal_kernel(make_dist(B, MatrixKind::Graph), nl);
    CHECK(((NA.values - NB.values).array() >= -1e-15).all());
}

TEST_CASE("gaussian kde") {
    FdmConfig cfg;
    cfg.dim = 1;
    cfg.epsilon = 0.04;

    Eigen::MatrixXd single = Eigen::MatrixXd::Zero(1, 1);
    auto q1 = gaussian_kde(make_dist(single, MatrixKind::Euclidean), cfg);
    CHECK(q1[0] == Approx(std::pow(2.0 * M_PI * cfg.epsilon, -0.5)));

    // two coincident points: both density values equal the single-point one
    Eigen::MatrixXd twin = Eigen::MatrixXd::Zero(2, 2);
    auto q2 = gaussian_kde(make_dist(twin, MatrixKind::Euclidean), cfg);
    CHECK(q2[0] == Approx(q1[0]));
    CHECK(q2[1] == Approx(q1[0]));

    CHECK_THROWS_AS(gaussian_kde(make_dist(twin, MatrixKind::Graph), cfg),
                    std::invalid_argument);

    // near-constant density on the uniform circle
    auto circle = circle_uniform_grid(500);
    auto D = pairwise_euclidean(circle);
    cfg.epsilon = std::pow(2.0, -8);
    auto q = gaussian_kde(D, cfg);
    double mean = q.mean();
    double sd = std::sqrt((q.array() - mean).square().mean());
    CHECK(sd / mean < 0.05);
    CHECK((q.array() > 0).all());

    // permutation invariance
    std::vector<int> perm = {3, 1, 4, 0, 2};
    Eigen::MatrixXd Dp(5, 5);
    Eigen::MatrixXd D5 = random_symmetric_distances(5, 8, 0.4);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) Dp(i, j) = D5(perm[i], perm[j]);
    auto qa = gaussian_kde(make_dist(D5, MatrixKind::Euclidean), cfg);
    auto qb = gaussian_kde(make_dist(Dp, MatrixKind::Euclidean), cfg);
    for (int i = 0; i < 5; ++i) CHECK(qb[i] == Approx(qa[perm[i]]).epsilon(1e-14));
}

TEST_CASE("kde bandwidth override") {
    FdmConfig cfg;
    cfg.dim = 1;
    cfg.epsilon = 0.01;
    cfg.kde_bandwidth = 0.09;
    Eigen::MatrixXd D(2, 2);
    D << 0.0, 0.3, 0.3, 0.0;
    auto q = gaussian_kde(make_dist(D, MatrixKind::Euclidean), cfg);
    double expect = std::pow(2.0 * M_PI * 0.09, -0.5) / 2.0 * (1.0 + std::exp(-0.09 / 0.18));
    CHECK(q[0] == Approx(expect));
}

TEST_CASE("scale-invariance sandwich is an identity for the gaussian kernel") {
    FdmConfig cfg;
    cfg.beta = 2.0;
    cfg.epsilon = 0.05;
    Eigen::MatrixXd D = random_symmetric_distances(6, 12, 0.6);
    auto K = local_kernel(make_dist(D, MatrixKind::Euclidean), cfg);
    // with c1 = c2 and C1 = C2 the two-sided profile bound collapses to equality
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            double a = D(i, j) / std::sqrt(cfg.epsilon);
            CHECK(K.values(i, j) == Approx(std::exp(-a * a)).margin(1e-15));
        }
}

TEST_CASE("calibration constants") {
    // the gaussian case reduces to the quarter-bandwidth convention
    CHECK(local_bandwidth_factor(2.0, 1) == Approx(2.0).epsilon(1e-12));
    CHECK(local_bandwidth_factor(2.0, 2) == Approx(2.0).epsilon(1e-12));
    // order-one profile on the line: c = 2/pi
    CHECK(nonlocal_bandwidth_factor(1, 1.0) == Approx(2.0 / M_PI).epsilon(1e-12));

    FdmConfig cfg;
    cfg.beta = 2.0;
    cfg.epsilon = 0.01;
    auto kc = calibrated_kernel_config(cfg);
    CHECK(kc.epsilon == Approx(0.04));
    cfg.calibrate = false;
    CHECK(calibrated_kernel_config(cfg).epsilon == Approx(0.01));
}

TEST_CASE("config validation") {
    FdmConfig cfg;
    cfg.beta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.beta = 3.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.beta = 2.0;
    cfg.epsilon = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.epsilon = 0.01;
    cfg.num_eigs = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.num_eigs = 5;

    // beta above d+1 is legal but warned about
    cfg.beta = 2.5;
    cfg.dim = 1;
    auto warnings = cfg.validate();
    REQUIRE(warnings.size() == 1);
    cfg.dim = 2;
    CHECK(cfg.validate().empty());

    // derived quantities
    cfg.beta = 3.0;
    cfg.epsilon = 0.04;
    CHECK(cfg.t() == Approx(std::pow(0.04, 1.5)));
    CHECK(cfg.alpha() == Approx(1.5));
    CHECK(cfg.effective_graph_threshold() == Approx(0.2));
    CHECK(cfg.effective_kde_bandwidth() == Approx(0.04));
    cfg.graph_threshold = 0.5;
    cfg.kde_bandwidth = 0.02;
    CHECK(cfg.effective_graph_threshold() == Approx(0.5));
    CHECK(cfg.effective_kde_bandwidth() == Approx(0.02));
}
