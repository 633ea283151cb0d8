#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ksudf/edge/edge_detect.hpp"
#include "ksudf/udf/udf_oracle.hpp"

namespace ksudf {

struct SamplingConfig {
    std::size_t n = 600;       // training points
    double nu = 0.9;           // surface share of the ball/surface mixture
    double xi = 0.6;           // edge oversampling
    double noise_sigma = 0.025;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class Provenance : std::uint8_t { Ball = 0, SurfaceFlat = 1, SurfaceEdge = 2 };

const char* to_string(Provenance p);

struct TrainingSet {
    Points3 inputs;
    std::vector<double> targets;
    std::vector<Provenance> provenance;
    Points3 clean_inputs;  // before the Gaussian perturbation
    std::size_t fallback_draws = 0;  // draws redirected because a subset was empty
    std::vector<std::string> warnings;

    std::size_t size() const { return inputs.size(); }
};

/// |B_s,1| / n_s.
double surface_complexity(const EdgeLabeledCloud& cloud);

/// nu_1 = xi + (1 - xi) tau.
double edge_mixture_weight(double tau, double xi);

/// Uniform draw inside the closed unit ball.
Vec3 sample_unit_ball(class Rng& rng);

/// Each point independently: with probability 1 - nu uniform in the unit
/// ball, otherwise a uniformly chosen member of B_s,1 with probability nu_1
/// or of B_s,0 with probability 1 - nu_1. All points are then perturbed by
/// N(0, sigma^2) per coordinate and labelled with the exact UDF.
TrainingSet sample_training_set(const EdgeLabeledCloud& cloud, const UdfOracle& oracle,
                                const SamplingConfig& cfg);

/// `x,y,z,udf,tag`
void write_training_csv(const TrainingSet& set, const std::filesystem::path& path);

/// Compact binary cache: magic, version, count, then inputs, targets, tags.
void save_training_set(const TrainingSet& set, const std::filesystem::path& path);
TrainingSet load_training_set(const std::filesystem::path& path);

}  // namespace ksudf
