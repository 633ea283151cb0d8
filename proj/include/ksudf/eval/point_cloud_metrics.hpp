#pragma once

#include <cstddef>
#include <vector>

#include "ksudf/geometry/point_cloud.hpp"

namespace ksudf {

/// max over a in A of the distance from a to B.
double directed_hausdorff(const Points3& a, const Points3& b);
double hausdorff(const Points3& a, const Points3& b);

/// Mean nearest-neighbor distance from A to B plus the same from B to A.
double chamfer(const Points3& a, const Points3& b);

inline constexpr std::size_t kMaxAssignmentSize = 512;

/// Minimal total Euclidean cost over bijections A -> B (sum, not mean).
/// Throws InvalidInputError on a size mismatch and CapacityError above
/// kMaxAssignmentSize points.
double wasserstein(const Points3& a, const Points3& b);

/// Optimal assignment for a square row-major cost matrix (Hungarian
/// method with potentials, O(n^3)). Returns column of each row.
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n);

inline double hausdorff(const PointCloud& a, const PointCloud& b) { return hausdorff(a.points, b.points); }
inline double chamfer(const PointCloud& a, const PointCloud& b) { return chamfer(a.points, b.points); }
inline double wasserstein(const PointCloud& a, const PointCloud& b) { return wasserstein(a.points, b.points); }

}  // namespace ksudf
