#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ksudf/app/experiment_config.hpp"
#include "ksudf/edge/edge_detect.hpp"
#include "ksudf/eval/improvement.hpp"

namespace ksudf {

/// 64-bit FNV-1a, optionally continuing from `basis`.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
std::uint64_t hash_mesh(const TriangleMesh& mesh);

/// Load or generate the shape and normalize it to the unit ball.
TriangleMesh load_shape(const ShapeSource& shape, std::size_t* dropped = nullptr);

/// tau, label counts and a ten-bucket p-value histogram.
nlohmann::json detection_summary(const EdgeLabeledCloud& cloud);

void save_edge_cloud(const EdgeLabeledCloud& cloud, const std::filesystem::path& path);
EdgeLabeledCloud load_edge_cloud(const std::filesystem::path& path);

using Logger = std::function<void(const std::string&)>;

struct PipelineOutcome {
    nlohmann::json metrics;  // also written to <shape_dir>/metrics.json
    std::vector<std::string> cache_hits;
    std::optional<std::string> error;
};

/// detect -> sample -> train -> reconstruct for one shape with the first
/// config seed. Stage artifacts are cached under `cache_dir` by content
/// hash; outputs of completed stages are kept when a later one fails.
PipelineOutcome run_shape_pipeline(const ShapeSource& shape, const ExperimentConfig& cfg,
                                   const std::filesystem::path& shape_dir, const std::filesystem::path& cache_dir,
                                   const Logger& log = {});

nlohmann::json to_json(const RunResult& r);
nlohmann::json to_json(const ImprovementReport& r);

/// Improvement experiment for every resolved shape. Writes
/// improvement.json, improvement_histogram.csv and runs.csv into the output
/// directory and returns the report.
nlohmann::json run_improvement(const ExperimentConfig& cfg, std::size_t workers, const Logger& log = {});

/// Pretty-printed JSON with a trailing newline.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace ksudf
