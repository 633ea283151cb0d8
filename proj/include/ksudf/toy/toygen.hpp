#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "ksudf/geometry/mesh.hpp"
#include "ksudf/geometry/point_cloud.hpp"

namespace ksudf {

enum class ToyKind { Cone, Fold, Plate, Contour2d, Cube, Wedge, Icosphere, SpikedIcosphere, FoldPrism };

const char* to_string(ToyKind kind);
/// Throws InvalidArgumentError for unknown names.
ToyKind parse_toy_kind(const std::string& name);
bool is_watertight_kind(ToyKind kind);

struct ToySpec {
    ToyKind kind = ToyKind::Cube;
    double psi = 0.0;        // cone, fold, contour2d
    double d = 0.0;          // plate thickness
    std::size_t count = 500;
    std::uint64_t seed = 0;
    int subdivisions = 3;    // icosphere variants

    void validate() const;
};

/// Uniform in the unit disk of the z = 0 plane, by sqrt-radius inversion.
Points3 sample_unit_disk(std::size_t count, std::uint64_t seed);

/// Each disk point is rotated by psi about its tangent axis, toward +z.
PointCloud gen_cone(double psi, std::size_t count, std::uint64_t seed);

/// Points with x > 0 rotated by +psi about the y axis, x < 0 by -psi, which
/// folds both halves toward -z.
PointCloud gen_fold(double psi, std::size_t count, std::uint64_t seed);

/// ceil(count/2) disk points at z = 0 and floor(count/2) at z = d.
PointCloud gen_plate(double d, std::size_t count, std::uint64_t seed);

/// x stratified over [-1, 1] (one uniform draw per equal-width bin), y = 0,
/// each point rotated by sign(x) psi.
Points2 gen_contour2d(double psi, std::size_t count, std::uint64_t seed);

TriangleMesh gen_cube();
/// Acute triangular prism (apex angle about 22.6 degrees).
TriangleMesh gen_wedge();
TriangleMesh gen_icosphere(int subdivisions);
/// Icosphere with one vertex pushed out radially to `spike_radius`.
TriangleMesh gen_spiked_icosphere(int subdivisions, double spike_radius = 1.8);
/// Prism over a chevron (V-shaped) cross-section.
TriangleMesh gen_fold_prism();

/// Meshes for the watertight kinds; throws InvalidArgumentError otherwise.
TriangleMesh gen_watertight(const ToySpec& spec);
/// Point cloud kinds; contour2d is embedded at z = 0.
PointCloud gen_toy_cloud(const ToySpec& spec);

struct ToyDescriptors {
    double pauly = 0.0;
    double ks_p_value = 1.0;
    std::optional<double> odds_p_value;
};

/// Descriptors at the origin with its k nearest cloud points.
ToyDescriptors toy_descriptors(const Points3& cloud, std::size_t k);
/// Pauly and odds-ratio p-value at the 2D origin over its k nearest points.
ToyDescriptors toy_descriptors_2d(const Points2& contour, std::size_t k);

}  // namespace ksudf
