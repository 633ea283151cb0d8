#include <doctest.h>

#include <cmath>

#include "ksudf/common/rng.hpp"
#include "ksudf/geometry/mesh.hpp"
#include "ksudf/toy/toygen.hpp"
#include "ksudf/udf/udf_oracle.hpp"

using namespace ksudf;

TEST_CASE("closest point on triangle regions") {
    const Vec3 a(0, 0, 0), b(1, 0, 0), c(0, 1, 0);
    CHECK(closest_point_on_triangle(Vec3(0.2, 0.2, 3), a, b, c).isApprox(Vec3(0.2, 0.2, 0)));
    CHECK(closest_point_on_triangle(Vec3(-1, -1, 0), a, b, c).isApprox(a));
    CHECK(closest_point_on_triangle(Vec3(2, -1, 1), a, b, c).isApprox(b));
    CHECK(closest_point_on_triangle(Vec3(0.5, -2, 0), a, b, c).isApprox(Vec3(0.5, 0, 0)));
    CHECK(closest_point_on_triangle(Vec3(1, 1, 0), a, b, c).isApprox(Vec3(0.5, 0.5, 0)));
}

TEST_CASE("udf oracle") {
    const TriangleMesh sphere = gen_icosphere(3);
    const UdfOracle oracle(sphere);
    for (const auto& v : sphere.vertices()) CHECK(oracle.udf(v) == 0.0);
    CHECK(oracle.udf(Vec3::Zero()) == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(oracle.udf_batch(std::span<const Vec3>{}).empty());

    Rng rng(31);
    for (int i = 0; i < 500; ++i) {
        const Vec3 x(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
        const auto q = oracle.query(x);
        const auto r = oracle.brute_force(x);
        CHECK(q.distance == doctest::Approx(r.distance).epsilon(1e-12));
        CHECK((q.point - x).norm() == doctest::Approx(q.distance).epsilon(1e-12));
        const Vec3 y = x + 0.3 * Vec3(rng.normal(), rng.normal(), rng.normal());
        CHECK(std::abs(oracle.udf(y) - q.distance) <= (y - x).norm() + 1e-12);
    }
    const Points3 xs = {{0, 0, 0}, {2, 0, 0}};
    const auto batch = oracle.udf_batch(xs);
    CHECK(batch[1] == doctest::Approx(oracle.udf(xs[1])));
}

TEST_CASE("udf of a cube") {
    const UdfOracle oracle(gen_cube());
    CHECK(oracle.udf(Vec3::Zero()) == doctest::Approx(0.5));
    CHECK(oracle.udf(Vec3(1.5, 0, 0)) == doctest::Approx(1.0));
    CHECK(oracle.udf(Vec3(1.5, 1.5, 1.5)) == doctest::Approx(std::sqrt(3.0)));
}
