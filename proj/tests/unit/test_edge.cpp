#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ksudf/circular/circular_stats.hpp"
#include "ksudf/common/error.hpp"
#include "ksudf/common/rng.hpp"
#include "ksudf/edge/edge_detect.hpp"
#include "ksudf/geometry/kdtree.hpp"
#include "ksudf/geometry/mesh.hpp"
#include "ksudf/toy/toygen.hpp"

using namespace ksudf;

namespace {

Neighborhood disk_neighborhood(std::size_t k, std::uint64_t seed, double thickness = 0.0) {
    Rng rng(seed);
    Neighborhood nb;
    nb.centroid = Vec3::Zero();
    for (const auto& p : sample_unit_disk(k, seed)) nb.neighbors.push_back(p + Vec3(0, 0, thickness * rng.normal()));
    return nb;
}

Mat3 rotation(std::uint64_t seed) {
    Rng rng(seed);
    Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    return q.normalized().toRotationMatrix();
}

}  // namespace

TEST_CASE("pauly descriptor") {
    CHECK(pauly_descriptor(disk_neighborhood(40, 1)) < 1e-12);
    const Points3 iso = {{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    CHECK(pauly_descriptor(local_frame(iso)) == doctest::Approx(1.0 / 3.0));
    const Neighborhood nb = disk_neighborhood(40, 2, 0.05);
    const double p = pauly_descriptor(nb);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0 / 3.0);
}

TEST_CASE("ks descriptor separates flat disks from cone apices") {
    int flat_ok = 0, cone_ok = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        flat_ok += ks_descriptor(disk_neighborhood(40, 100 + t), 0.2).p_value > 0.2;
        const Points3 cone = gen_cone(80.0 * kPi / 180.0, 500, 300 + t).points;
        cone_ok += ks_descriptor(KdTree(cone).knn(Vec3::Zero(), 40), 0.2).p_value < 0.01;
    }
    CHECK(flat_ok >= 0.95 * trials);
    CHECK(cone_ok >= 0.95 * trials);
}

TEST_CASE("ks descriptor is rotation and translation invariant") {
    const Points3 cone = gen_cone(0.6, 500, 9).points;
    const Neighborhood nb = KdTree(cone).knn(Vec3::Zero(), 40);
    const KsDescriptor ref = ks_descriptor(nb, 0.2);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Mat3 r = rotation(s);
        const Vec3 shift(1.5, -2.0, 0.25 * s);
        Neighborhood moved = nb;
        moved.centroid = r * nb.centroid + shift;
        for (auto& p : moved.neighbors) p = r * p + shift;
        const KsDescriptor d = ks_descriptor(moved, 0.2);
        CHECK(d.p_value == doctest::Approx(ref.p_value).epsilon(1e-6));
        CHECK(d.statistic == doctest::Approx(ref.statistic).epsilon(1e-6));
        CHECK(pauly_descriptor(moved) == doctest::Approx(pauly_descriptor(nb)).epsilon(1e-6));
    }
}

TEST_CASE("ks descriptor needs five usable angles") {
    Neighborhood nb;
    nb.centroid = Vec3::Zero();
    nb.neighbors = {{1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}};
    CHECK_THROWS_AS(ks_descriptor(nb, 0.2), InsufficientSampleError);
}

TEST_CASE("detector on meshes") {
    DetectorConfig cfg;
    cfg.seed = 3;
    SUBCASE("smooth sphere has few edges") {
        const auto cloud = detect_edges(normalize_to_unit_ball(gen_icosphere(4)), cfg);
        CHECK(cloud.size() == 2000);
        CHECK(static_cast<double>(cloud.edge.size()) / cloud.size() <= 0.1);
    }
    SUBCASE("cube labels are consistent") {
        const auto cloud = detect_edges(normalize_to_unit_ball(gen_cube()), cfg);
        CHECK(cloud.edge.size() + cloud.flat.size() == cloud.size());
        for (std::size_t i : cloud.edge) CHECK(cloud.p_value[i] <= cfg.p0);
        for (std::size_t i : cloud.flat) CHECK(cloud.p_value[i] > cfg.p0);
    }
    SUBCASE("unit cube creases are flagged more often than face interiors") {
        cfg.seed = 7;
        const auto cloud = detect_edges(gen_cube(), cfg);
        std::size_t near = 0, near_edge = 0, far = 0, far_edge = 0;
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            // on the surface one gap is zero, the crease distance uses the other two
            Vec3 gap = (Vec3::Constant(0.5) - cloud.points.points[i].cwiseAbs()).cwiseMax(0.0);
            std::sort(gap.data(), gap.data() + 3);
            const double to_crease = gap[1];
            if (to_crease < 0.05) {
                ++near;
                near_edge += cloud.ks_label[i];
            } else if (to_crease > 0.15) {
                ++far;
                far_edge += cloud.ks_label[i];
            }
        }
        REQUIRE(near > 0);
        REQUIRE(far > 0);
        const double rate_near = static_cast<double>(near_edge) / near;
        const double rate_far = static_cast<double>(far_edge) / far;
        MESSAGE("edge rate near creases " << rate_near << ", on faces " << rate_far);
        CHECK(rate_near >= 3.0 * rate_far);
    }
    cfg.k = 3;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgumentError);
}

TEST_CASE("odds-ratio descriptor in 2D") {
    const Vec2 origin = Vec2::Zero();
    Points2 line, corner;
    for (int i = 1; i <= 10; ++i) {
        line.emplace_back(i * 0.1, 0.0);
        line.emplace_back(-i * 0.1, 0.0);
        corner.emplace_back(i * 0.1 * std::cos(1.2), i * 0.1 * std::sin(1.2));
        corner.emplace_back(-i * 0.1 * std::cos(1.2), i * 0.1 * std::sin(1.2));
    }
    const auto flat = odds_ratio_descriptor_2d(origin, line);
    CHECK(flat.k_plus == 10);
    CHECK(flat.p_value == doctest::Approx(1.0));
    CHECK_FALSE(flat.edge);
    CHECK(pauly_descriptor_2d(origin, line) < 1e-12);

    const auto sharp = odds_ratio_descriptor_2d(origin, corner);
    CHECK(sharp.p_value < 0.01);
    CHECK(sharp.edge);
    CHECK(pauly_descriptor_2d(origin, corner) > 0.05);
}
