#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>

#include "fdm/validation.hpp"
#include "fdm/rng.hpp"

using namespace fdm;
using Catch::Approx;

TEST_CASE("group_eigenspaces") {
    Eigen::VectorXd circle(7);
    circle << 0, 1, 1, 4, 4, 9, 9;
    auto groups = group_eigenspaces(circle, 1e-6);
    REQUIRE(groups.size() == 4);
    CHECK(groups[0].start == 0);
    CHECK(groups[0].size == 1);
    CHECK(groups[1].start == 1);
    CHECK(groups[1].size == 2);
    CHECK(groups[2].start == 3);
    CHECK(groups[2].size == 2);
    CHECK(groups[3].start == 5);
    CHECK(groups[3].multiplicity() == 2);

    Eigen::VectorXd distinct(4);
    distinct << 0, 1, 2, 3.5;
    CHECK(group_eigenspaces(distinct, 1e-6).size() == 4);

    auto one = group_eigenspaces(distinct, std::numeric_limits<double>::infinity());
    REQUIRE(one.size() == 1);
    CHECK(one[0].size == 4);

    // every index lands in exactly one group
    int covered = 0;
    for (const auto& g : groups) covered += g.size;
    CHECK(covered == 7);
}

TEST_CASE("align_and_rmse recovers exact transformations") {
    CounterRng rng(51);
    Eigen::MatrixXd T(40, 2);
    for (int i = 0; i < 40; ++i) {
        T(i, 0) = rng.next_gaussian();
        T(i, 1) = rng.next_gaussian();
    }

    // identical blocks align with the identity
    auto [M0, r0] = align_and_rmse(T, T);
    CHECK((M0 - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r0.maxCoeff() < 1e-12);

    // a rotated estimate aligns back with zero residual
    double th = 0.7;
    Eigen::MatrixXd R(2, 2);
    R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    Eigen::MatrixXd E = T * R;
    auto [M1, r1] = align_and_rmse(E, T);
    CHECK((M1 - R.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r1.maxCoeff() < 1e-12);

    // noise orthogonal to the estimated span shows up exactly as its RMS
    Eigen::VectorXd noise(40);
    for (int i = 0; i < 40; ++i) noise[i] = rng.next_gaussian();
    // project out the span of E
    Eigen::MatrixXd P = E * (E.transpose() * E).inverse() * E.transpose();
    noise = noise - P * noise;
    noise *= 0.05 / std::sqrt(noise.squaredNorm() / 40.0);
    Eigen::MatrixXd T2 = E;
    T2.col(0) += noise;
    auto [M2, r2] = align_and_rmse(E, T2);
    CHECK(r2[0] == Approx(0.05).margin(1e-10));
    CHECK(r2[1] == Approx(0.0).margin(1e-10));

    // invariance under invertible recombination of the estimated block
    Eigen::MatrixXd G(2, 2);
    G << 1.3, -0.4, 0.2, 0.9;
    auto [M3, r3] = align_and_rmse(E * G, T2);
    CHECK((r3 - r2).cwiseAbs().maxCoeff() < 1e-10);

    // rank-deficient estimates are rejected
    Eigen::MatrixXd bad = E;
    bad.col(1) = 2.0 * bad.col(0);
    CHECK_THROWS_AS(align_and_rmse(bad, T), DegenerateEigenspaceError);
}

TEST_CASE("power_law_fit") {
    Eigen::VectorXd lam(60);
    for (int j = 1; j <= 60; ++j) lam[j - 1] = static_cast<double>(j) * j;
    auto fit = power_law_fit(lam, 2, 50);
    CHECK(fit.slope == Approx(2.0).margin(1e-12));
    CHECK(fit.r2 == Approx(1.0).margin(1e-12));

    // log-shift invariance: scaling does not move the slope
    auto fit2 = power_law_fit(3.7 * lam, 2, 50);
    CHECK(fit2.slope == Approx(fit.slope).margin(1e-12));

    lam[10] = 0.0;
    CHECK_THROWS_AS(power_law_fit(lam, 2, 50), std::invalid_argument);
    CHECK_THROWS_AS(power_law_fit(lam, 0, 5), std::invalid_argument);
}

TEST_CASE("pair collapse") {
    Eigen::VectorXd lam(7);
    lam << 0, 1.0, 1.2, 3.9, 4.1, 9.0, 9.2;
    Eigen::VectorXd c = pair_collapse(lam);
    REQUIRE(c.size() == 3);
    CHECK(c[0] == Approx(1.1));
    CHECK(c[1] == Approx(4.0));
    CHECK(c[2] == Approx(9.1));
}

TEST_CASE("validated circle run") {
    auto cloud = circle_uniform_grid(240);
    FdmConfig cfg;
    cfg.beta = 2.0;
    cfg.epsilon = std::pow(2.0, -9);
    cfg.num_eigs = 20;
    auto [stack, result] = run_fdm(cloud, cfg);
    CircleTruth truth;
    auto rep = validate_against_truth(result, truth, cloud, cfg.beta,
                                      FitIndexing::PairCollapsed, 2, 10);
    CHECK(rep.mean_rmse < 0.01);
    CHECK(rep.count_below(0.2) == 20);
    CHECK(rep.count_below(0.4) >= rep.count_below(0.2)); // monotone in the threshold
    CHECK(rep.power_law_slope == Approx(2.0).margin(0.05));
    CHECK(rep.power_law_r2 > 0.999);
}

TEST_CASE("bandwidth sweep records failures as missing rows") {
    auto cloud = circle_uniform_grid(100);
    FdmConfig base;
    base.dim = 1;
    base.num_eigs = 10;
    CircleTruth truth;

    // single-bandwidth grid produces a single row
    auto single = bandwidth_sweep(cloud, 2.0, {1e-3}, base, truth,
                                  FitIndexing::PairCollapsed, 2, 4);
    REQUIRE(single.size() == 1);
    CHECK(single[0].ok);

    // the tiny bandwidth disconnects the default nonlocal graph: missing, not thrown
    auto rows = bandwidth_sweep(cloud, 1.0, {1e-8, 1e-2}, base, truth,
                                FitIndexing::PairCollapsed, 2, 4);
    REQUIRE(rows.size() == 2);
    CHECK_FALSE(rows[0].ok);
    CHECK(!rows[0].failure.empty());
    CHECK(rows[1].ok);

    // a fixed threshold keeps the same bandwidth connected
    base.graph_threshold = 4.0 * 2.0 * M_PI / 100.0;
    auto fixed_rows = bandwidth_sweep(cloud, 1.0, {1e-8, 1e-2}, base, truth,
                                      FitIndexing::PairCollapsed, 2, 4);
    CHECK(fixed_rows[0].ok);
}

TEST_CASE("random-grid sweep has an interior optimum and family ordering") {
    auto cloud = circle_random(300, 5);
    CircleTruth truth;
    std::vector<double> grid;
    for (int k = -14; k <= -2; ++k) grid.push_back(std::pow(2.0, k));

    FdmConfig exp_base;
    exp_base.num_eigs = 80;
    auto exp_rows = bandwidth_sweep(cloud, 2.0, grid, exp_base, truth,
                                    FitIndexing::PairCollapsed, 2, 30);
    int argmin = 0;
    for (std::size_t i = 0; i < exp_rows.size(); ++i)
        if (exp_rows[i].ok && exp_rows[i].mean_rmse < exp_rows[argmin].mean_rmse)
            argmin = static_cast<int>(i);
    CHECK(argmin > 0);
    CHECK(argmin < static_cast<int>(exp_rows.size()) - 1);

    FdmConfig poly_base;
    poly_base.num_eigs = 80;
    poly_base.graph_threshold = 1.5 * min_connecting_threshold(pairwise_euclidean(cloud));
    auto poly_rows = bandwidth_sweep(cloud, 1.0, grid, poly_base, truth,
                                     FitIndexing::PairCollapsed, 2, 30);
    double exp_best = 1e300, poly_best = 1e300;
    for (const auto& r : exp_rows)
        if (r.ok) exp_best = std::min(exp_best, r.mean_rmse);
    for (const auto& r : poly_rows)
        if (r.ok) poly_best = std::min(poly_best, r.mean_rmse);
    // the optimally tuned exponential kernel beats the polynomial one
    CHECK(exp_best < poly_best);
}

TEST_CASE("interval comparison recovers the regional operator") {
    auto cmp = interval_comparison(300, 1.0, std::pow(2.0, -9));
    REQUIRE(cmp.x.size() == 298);

    // every curve is min-normalized to exactly -1 on the interior grid
    CHECK(cmp.fdm.minCoeff() == Approx(-1.0).margin(1e-15));
    CHECK(cmp.regional.minCoeff() == Approx(-1.0).margin(1e-15));
    CHECK(cmp.spectral.minCoeff() == Approx(-1.0).margin(1e-15));

    // the spectral and regional operators differ visibly near the boundary
    double gap = 0.0;
    for (int i = 0; i < cmp.x.size(); ++i)
        if (cmp.x[i] >= 0.02 && cmp.x[i] <= 0.1)
            gap = std::max(gap, std::abs(cmp.regional[i] - cmp.spectral[i]));
    CHECK(gap > 0.2);

    // the pipeline estimate tracks the regional operator, not the spectral one
    CHECK(cmp.l2_regional < cmp.l2_spectral);

    CHECK_THROWS_AS(interval_comparison(300, 2.0, 1e-3), std::invalid_argument);
}
