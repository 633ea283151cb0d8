#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Geometry>

#include "ksudf/geometry/mesh.hpp"

namespace ksudf {

struct ClosestPoint {
    double distance;
    Vec3 point;
    std::size_t triangle;
};

/// Exact closest point on triangle abc (vertex, edge and face regions).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Exact unsigned distance to a triangle mesh, accelerated by a median-split
// AABB hierarchy (leaf size 8). Immutable after construction.
class UdfOracle {
public:
    explicit UdfOracle(TriangleMesh mesh);

    const TriangleMesh& mesh() const { return mesh_; }

    ClosestPoint query(const Vec3& x) const;
    double udf(const Vec3& x) const { return query(x).distance; }
    std::vector<double> udf_batch(std::span<const Vec3> xs) const;

    /// Linear scan over all triangles; reference implementation.
    ClosestPoint brute_force(const Vec3& x) const;

    static constexpr std::size_t kLeafSize = 8;

private:
    struct Node {
        Eigen::AlignedBox3d box;
        std::size_t begin = 0, end = 0;
        int left = -1, right = -1;
    };

    int build(std::size_t begin, std::size_t end);

    TriangleMesh mesh_;
    std::vector<std::size_t> order_;
    std::vector<Vec3> centers_;
    std::vector<Node> nodes_;
};

}  // namespace ksudf
