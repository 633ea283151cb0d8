#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ksudf/edge/edge_detect.hpp"
#include "ksudf/geometry/mesh.hpp"
#include "ksudf/nn/neural_udf.hpp"

namespace ksudf {

struct ReconstructionConfig {
    std::size_t n_r = 2000;
    std::size_t steps = 300;
    double step_size = 1e-3;
    double divergence_norm = 2.0;  // points ending farther from the origin are dropped
    std::uint64_t seed = 0;

    void validate() const;
};

struct ResidualStats {
    double mean = 0.0;
    double median = 0.0;
    double max = 0.0;
};

ResidualStats residual_stats(const std::vector<double>& abs_values);

struct ReconstructionReport {
    Points3 initial;        // B_r
    Points3 reconstructed;  // B-hat, same order and size
    std::vector<double> initial_residual;  // |f| before descent
    std::vector<double> final_residual;    // |f| after descent
    ResidualStats initial_stats, final_stats;
    std::vector<std::size_t> diverged;
    std::vector<std::string> warnings;
    double reduced_fraction = 0.0;  // share of points whose |f| decreased
    double delta = 0.0;             // Hausdorff(B_r, B-hat) over converged points
};

/// Descend every point of `initial` on |field| with per-point Adam.
ReconstructionReport descend_to_zero_set(const DifferentiableField& field, Points3 initial,
                                         const ReconstructionConfig& cfg);

/// Sample B_r on the mesh surface and descend it.
ReconstructionReport reconstruct_zero_set(const DifferentiableField& field, const TriangleMesh& mesh,
                                          const ReconstructionConfig& cfg);

/// Mean |field| over the edge-labeled points. Throws UndefinedMetricError
/// when there are none.
double edge_error(const DifferentiableField& field, const EdgeLabeledCloud& cloud);

}  // namespace ksudf
