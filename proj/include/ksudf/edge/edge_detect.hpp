#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "ksudf/geometry/kdtree.hpp"
#include "ksudf/geometry/local_frame.hpp"
#include "ksudf/geometry/mesh.hpp"
#include "ksudf/geometry/point_cloud.hpp"

namespace ksudf {

struct DetectorConfig {
    std::size_t n_s = 2000;  // surface samples
    std::size_t k = 40;      // neighborhood size
    double p0 = 0.2;         // p-values at or below p0 mark an edge
    std::uint64_t seed = 0;

    /// Throws InvalidArgumentError unless k >= 5, n_s > k and p0 in [0, 1].
    void validate() const;
};

/// Surface variation lambda_3 / (lambda_1 + lambda_2 + lambda_3).
double pauly_descriptor(const LocalFrame& frame);
double pauly_descriptor(const Neighborhood& nbhd);

struct KsDescriptor {
    double p_value = 1.0;
    double statistic = 0.0;
    bool edge = false;
    std::size_t usable_angles = 0;
};

/// Kolmogorov-Smirnov edge descriptor at the neighborhood centroid:
/// project on the average plane, center on the projected centroid, take
/// polar angles, center them on their circular Frechet mean and test them
/// for uniformity. Throws InsufficientSampleError when fewer than 5
/// neighbors have a defined angle.
KsDescriptor ks_descriptor(const Neighborhood& nbhd, double p0);

struct EdgeLabeledCloud {
    PointCloud points;
    std::vector<double> pauly;
    std::vector<double> p_value;
    std::vector<int> ks_label;
    std::vector<std::size_t> flat;  // B_s,0
    std::vector<std::size_t> edge;  // B_s,1
    std::size_t insufficient = 0;   // neighborhoods too sparse to test

    std::size_t size() const { return points.size(); }
};

/// Score every point of a cloud; neighborhoods are the k nearest other
/// members. Points with too few usable angles get p = 1 and label 0.
EdgeLabeledCloud label_cloud(Points3 points, std::size_t k, double p0);

/// Sample n_s surface points of a normalized mesh and label them.
EdgeLabeledCloud detect_edges(const TriangleMesh& mesh, const DetectorConfig& cfg);

/// `x,y,z,pauly,p_value,ks_label`
void write_edge_csv(const EdgeLabeledCloud& cloud, const std::filesystem::path& path);
void write_edge_ply(const EdgeLabeledCloud& cloud, const std::filesystem::path& path);

struct OddsRatioDescriptor {
    double p_value = 1.0;
    double statistic = 0.0;
    std::size_t k_plus = 0;
    bool edge = false;
};

inline constexpr double kDefaultOddsRatioThreshold = 0.01;

/// 2D contour descriptor: sign test on the neighbors' offsets from the
/// centroid projected on the first covariance axis of the k+1 points.
OddsRatioDescriptor odds_ratio_descriptor_2d(const Vec2& centroid, std::span<const Vec2> neighbors,
                                             double p0 = kDefaultOddsRatioThreshold);

/// lambda_2 / (lambda_1 + lambda_2) of the k+1 point 2D covariance.
double pauly_descriptor_2d(const Vec2& centroid, std::span<const Vec2> neighbors);

}  // namespace ksudf
