#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ksudf/edge/edge_detect.hpp"
#include "ksudf/eval/reconstruction.hpp"
#include "ksudf/nn/neural_udf.hpp"
#include "ksudf/sampler/training_sampler.hpp"

namespace ksudf {

/// Median; for an even count the lower of the two middle elements.
double median(std::vector<double> values);

/// I = 1 - improved / baseline. Throws UndefinedMetricError for a zero
/// baseline.
double relative_improvement(double improved_median, double baseline_median);

struct PipelineConfig {
    DetectorConfig detector;
    SamplingConfig sampling;
    MlpArchitecture architecture;
    TrainConfig train;
    ReconstructionConfig reconstruction;
    std::uint64_t init_seed = 0;  // network weights

    void validate() const;
};

/// Stage seeds of one run, all derived from a single run seed.
struct RunSeeds {
    std::uint64_t detect, sample, init, train, reconstruct;
    static RunSeeds from(std::uint64_t run_seed);
};

/// Apply the derived seeds to a copy of `cfg`.
PipelineConfig seeded(const PipelineConfig& cfg, std::uint64_t run_seed);

struct RunResult {
    std::uint64_t seed = 0;
    double xi = 0.0;
    double tau = 0.0;
    double delta = 0.0;
    std::optional<double> edge_error;  // absent when no edge was detected
    double final_loss = 0.0;
    std::size_t diverged = 0;
    std::size_t fallback_draws = 0;
};

/// Sample -> train -> reconstruct on an already labeled cloud. `cfg` seeds
/// are used as given.
RunResult run_from_detection(const TriangleMesh& mesh, const UdfOracle& oracle,
                             const EdgeLabeledCloud& cloud, const PipelineConfig& cfg,
                             NeuralUdf* trained = nullptr, ReconstructionReport* report = nullptr);

struct ImprovementReport {
    std::string shape;
    double xi = 0.0;
    std::vector<std::uint64_t> seeds;
    std::vector<RunResult> with_xi;   // per seed, in seed order
    std::vector<RunResult> baseline;  // xi = 0, paired with with_xi
    double median_xi = 0.0;
    double median_baseline = 0.0;
    double improvement = 0.0;
    std::optional<std::string> error;
};

/// Runs detect -> sample -> train -> reconstruct for every seed at
/// cfg.sampling.xi and at xi = 0. Both arms of a seed share the detection,
/// network initialization and all stage seeds. Up to `workers` runs proceed
/// concurrently; results do not depend on the worker count. Failures are
/// captured in `error` instead of thrown.
ImprovementReport improvement_experiment(const std::string& shape, const TriangleMesh& mesh,
                                         const PipelineConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                         std::size_t workers = 1);

/// Worker count from KSUDF_WORKERS, else the hardware concurrency.
std::size_t default_worker_count();

/// Run `count` indexed jobs on at most `workers` threads.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job);

}  // namespace ksudf
