#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ksudf/geometry/mesh.hpp"
#include "ksudf/geometry/point_cloud.hpp"

namespace ksudf {

struct SurfaceSample {
    PointCloud cloud;
    std::vector<std::size_t> triangle;  // source triangle of each point
};

/// Area-weighted uniform sampling of the mesh surface: a triangle is chosen
/// with probability proportional to its area, then a point uniformly inside
/// it. Deterministic for a given seed. Requires n >= 1.
SurfaceSample sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

inline PointCloud sample_surface_uniform(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
    return sample_surface(mesh, n, seed).cloud;
}

}  // namespace ksudf
