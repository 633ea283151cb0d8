#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ksudf/eval/improvement.hpp"
#include "ksudf/toy/toygen.hpp"

namespace ksudf {

// One input surface: either a mesh file or a generated watertight toy.
struct ShapeSource {
    std::string name;
    std::optional<std::filesystem::path> mesh;
    std::optional<ToySpec> toy;

    bool operator==(const ShapeSource&) const;
};

struct ExperimentConfig {
    std::vector<ShapeSource> shapes;
    std::vector<std::filesystem::path> mesh_dirs;  // every .obj/.ply inside becomes a shape
    PipelineConfig pipeline;  // stage seeds are derived from `seeds`
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    std::filesystem::path output_dir = "out";

    /// Throws InvalidArgumentError naming the offending field.
    void validate() const;

    /// `shapes` followed by the sorted contents of `mesh_dirs`.
    std::vector<ShapeSource> resolved_shapes() const;

    nlohmann::json to_json() const;
    /// Unknown keys are rejected; missing keys keep their defaults.
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::filesystem::path& path);

    bool operator==(const ExperimentConfig&) const;
};

bool operator==(const ToySpec& a, const ToySpec& b);

nlohmann::json to_json(const DetectorConfig& c, bool with_seed);
nlohmann::json to_json(const SamplingConfig& c, bool with_seed);
nlohmann::json to_json(const MlpArchitecture& c);
nlohmann::json to_json(const TrainConfig& c, bool with_seed);
nlohmann::json to_json(const ReconstructionConfig& c, bool with_seed);
nlohmann::json to_json(const ToySpec& s);

}  // namespace ksudf
