#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "ksudf/geometry/types.hpp"

namespace ksudf {

using Triangle = std::array<int, 3>;

// Indexed triangle mesh with cached per-triangle areas. Construction drops
// degenerate triangles (repeated index or zero area), so every stored
// triangle has positive area.
class TriangleMesh {
public:
    TriangleMesh() = default;

    /// Throws InvalidInputError on out-of-range indices or when no
    /// triangle survives. `dropped` receives the number of discarded faces.
    TriangleMesh(Points3 vertices, const std::vector<Triangle>& triangles,
                 std::size_t* dropped = nullptr);

    const Points3& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<double>& areas() const { return areas_; }

    std::size_t vertex_count() const { return vertices_.size(); }
    std::size_t triangle_count() const { return triangles_.size(); }
    bool empty() const { return triangles_.empty(); }

    double total_area() const;
    std::array<Vec3, 3> corners(std::size_t t) const;

    /// Number of undirected edges.
    std::size_t edge_count() const;
    /// V - E + F.
    long euler_characteristic() const;
    /// True when every undirected edge is shared by exactly two triangles.
    bool is_closed_manifold() const;

private:
    Points3 vertices_;
    std::vector<Triangle> triangles_;
    std::vector<double> areas_;
};

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);

/// Translate by the vertex centroid and scale uniformly so that the largest
/// vertex norm is exactly 1. Throws InvalidInputError when all vertices
/// coincide.
TriangleMesh normalize_to_unit_ball(const TriangleMesh& mesh);

}  // namespace ksudf
