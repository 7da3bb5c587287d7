#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "hsad/errors.hpp"
#include "hsad/kpca.hpp"
#include "hsad/rng.hpp"

using namespace hsad;

namespace {

Matrix cluster_pair(int per_cluster, uint64_t seed) {
    Rng rng(seed);
    Matrix samples(2 * per_cluster, 2);
    for (int i = 0; i < per_cluster; ++i) {
        samples(i, 0) = rng.normal(-2.0, 0.4);
        samples(i, 1) = rng.normal(0.0, 0.4);
        samples(per_cluster + i, 0) = rng.normal(2.0, 0.4);
        samples(per_cluster + i, 1) = rng.normal(0.0, 0.4);
    }
    return samples;
}

} // namespace

TEST_SUITE("kpca") {

TEST_CASE("centered gram matrix is PSD up to rounding") {
    Rng rng(60);
    Matrix samples(80, 3);
    for (int i = 0; i < 80; ++i)
        for (int j = 0; j < 3; ++j) samples(i, j) = rng.uniform();
    KpcaProjector proj = kpca_fit(samples, 10, 3, 80);
    for (int j = 0; j < 10; ++j) CHECK(proj.eigenvalues(j) >= -1e-8);
    for (int j = 1; j < 10; ++j)
        CHECK(proj.eigenvalues(j) <= proj.eigenvalues(j - 1) + 1e-12);
}

TEST_CASE("first component separates two linear clusters by sign") {
    Matrix samples = cluster_pair(60, 61);
    KpcaProjector proj = kpca_fit(samples, 4, 5, 120);
    Matrix z = kpca_transform(proj, samples);

    int agree = 0;
    // sign agreement with the true cluster labels, up to a global flip
    int flips = 0;
    for (int i = 0; i < 120; ++i) {
        bool left = i < 60;
        if ((z(i, 0) < 0.0) == left)
            ++agree;
        else
            ++flips;
    }
    CHECK(std::max(agree, flips) >= 114); // >= 95%
}

TEST_CASE("landmark projection reproduces its training row") {
    Rng rng(62);
    Matrix samples(50, 3);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 3; ++j) samples(i, j) = rng.normal();
    KpcaProjector proj = kpca_fit(samples, 6, 9, 50);

    // training projection row for landmark i is sqrt(lambda_j) * v_ij =
    // lambda_j * alpha_ij; the out-of-sample path must reproduce it
    Matrix z = kpca_transform(proj, proj.landmarks);
    for (int j = 0; j < 6; ++j) {
        if (proj.eigenvalues(j) <= 1e-10) continue;
        for (int i = 0; i < 50; ++i) {
            double expected = proj.eigenvalues(j) * proj.alpha(i, j);
            CHECK(std::abs(z(i, j) - expected) <= 1e-8);
        }
    }
}

TEST_CASE("median-heuristic gamma is positive even with duplicate landmarks") {
    Matrix samples(40, 2);
    for (int i = 0; i < 39; ++i) samples.row(i) << 1.0, 1.0;
    samples.row(39) << 5.0, 5.0;
    KpcaProjector proj = kpca_fit(samples, 3, 1, 40);
    CHECK(proj.gamma > 0.0);
}

TEST_CASE("landmark subsampling is bit-reproducible for a fixed seed") {
    Matrix samples = cluster_pair(40, 63);
    KpcaProjector a = kpca_fit(samples, 4, 21, 30);
    KpcaProjector b = kpca_fit(samples, 4, 21, 30);
    CHECK(a.landmarks == b.landmarks);
    CHECK(a.gamma == b.gamma);
    CHECK(a.alpha == b.alpha);
}

TEST_CASE("parameter validation") {
    Matrix samples(20, 2);
    for (int i = 0; i < 20; ++i) samples.row(i) << i, i * 0.5;
    CHECK_THROWS_AS(kpca_fit(samples, 5, 1, 30), ParamError);  // landmarks > n
    CHECK_THROWS_AS(kpca_fit(samples, 25, 1, 20), ParamError); // k > landmarks
    CHECK_THROWS_AS(kpca_fit(samples, 5, 1, 20, -1.0), ParamError);
}

} // TEST_SUITE
