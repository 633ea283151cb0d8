#include "ksudf/app/experiment_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "ksudf/common/error.hpp"

namespace ksudf {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw InvalidArgumentError(where + " must be a JSON object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items()) {
        if (!allowed.count(k)) throw InvalidArgumentError("unknown key '" + k + "' in " + where);
    }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidArgumentError("bad value for '" + std::string(key) + "' in " + where);
    }
}

DetectorConfig detector_from(const json& j) {
    reject_unknown(j, "detector", {"n_s", "k", "p0", "seed"});
    DetectorConfig c;
    read(j, "n_s", c.n_s, "detector");
    read(j, "k", c.k, "detector");
    read(j, "p0", c.p0, "detector");
    read(j, "seed", c.seed, "detector");
    return c;
}

SamplingConfig sampling_from(const json& j) {
    reject_unknown(j, "sampling", {"n", "nu", "xi", "noise_sigma", "seed"});
    SamplingConfig c;
    read(j, "n", c.n, "sampling");
    read(j, "nu", c.nu, "sampling");
    read(j, "xi", c.xi, "sampling");
    read(j, "noise_sigma", c.noise_sigma, "sampling");
    read(j, "seed", c.seed, "sampling");
    return c;
}

MlpArchitecture architecture_from(const json& j) {
    reject_unknown(j, "architecture", {"hidden", "negative_slope"});
    MlpArchitecture c;
    read(j, "hidden", c.hidden, "architecture");
    read(j, "negative_slope", c.negative_slope, "architecture");
    return c;
}

TrainConfig train_from(const json& j) {
    reject_unknown(j, "train", {"learning_rate", "beta1", "beta2", "epsilon", "batch_size", "epochs", "seed"});
    TrainConfig c;
    read(j, "learning_rate", c.learning_rate, "train");
    read(j, "beta1", c.beta1, "train");
    read(j, "beta2", c.beta2, "train");
    read(j, "epsilon", c.epsilon, "train");
    read(j, "batch_size", c.batch_size, "train");
    read(j, "epochs", c.epochs, "train");
    read(j, "seed", c.seed, "train");
    return c;
}

ReconstructionConfig reconstruction_from(const json& j) {
    reject_unknown(j, "reconstruction", {"n_r", "steps", "step_size", "divergence_norm", "seed"});
    ReconstructionConfig c;
    read(j, "n_r", c.n_r, "reconstruction");
    read(j, "steps", c.steps, "reconstruction");
    read(j, "step_size", c.step_size, "reconstruction");
    read(j, "divergence_norm", c.divergence_norm, "reconstruction");
    read(j, "seed", c.seed, "reconstruction");
    return c;
}

ToySpec toy_from(const json& j) {
    reject_unknown(j, "toy", {"kind", "psi", "d", "count", "seed", "subdivisions"});
    ToySpec s;
    std::string kind = to_string(s.kind);
    read(j, "kind", kind, "toy");
    s.kind = parse_toy_kind(kind);
    read(j, "psi", s.psi, "toy");
    read(j, "d", s.d, "toy");
    read(j, "count", s.count, "toy");
    read(j, "seed", s.seed, "toy");
    read(j, "subdivisions", s.subdivisions, "toy");
    return s;
}

}  // namespace

json to_json(const DetectorConfig& c, bool with_seed) {
    json j = {{"n_s", c.n_s}, {"k", c.k}, {"p0", c.p0}};
    if (with_seed) j["seed"] = c.seed;
    return j;
}

json to_json(const SamplingConfig& c, bool with_seed) {
    json j = {{"n", c.n}, {"nu", c.nu}, {"xi", c.xi}, {"noise_sigma", c.noise_sigma}};
    if (with_seed) j["seed"] = c.seed;
    return j;
}

json to_json(const MlpArchitecture& c) { return {{"hidden", c.hidden}, {"negative_slope", c.negative_slope}}; }

json to_json(const TrainConfig& c, bool with_seed) {
    json j = {{"learning_rate", c.learning_rate}, {"beta1", c.beta1},           {"beta2", c.beta2},
              {"epsilon", c.epsilon},             {"batch_size", c.batch_size}, {"epochs", c.epochs}};
    if (with_seed) j["seed"] = c.seed;
    return j;
}

json to_json(const ReconstructionConfig& c, bool with_seed) {
    json j = {{"n_r", c.n_r}, {"steps", c.steps}, {"step_size", c.step_size}, {"divergence_norm", c.divergence_norm}};
    if (with_seed) j["seed"] = c.seed;
    return j;
}

json to_json(const ToySpec& s) {
    return {{"kind", to_string(s.kind)}, {"psi", s.psi},   {"d", s.d},
            {"count", s.count},          {"seed", s.seed}, {"subdivisions", s.subdivisions}};
}

bool operator==(const ToySpec& a, const ToySpec& b) {
    return a.kind == b.kind && a.psi == b.psi && a.d == b.d && a.count == b.count && a.seed == b.seed &&
           a.subdivisions == b.subdivisions;
}

bool ShapeSource::operator==(const ShapeSource& o) const {
    return name == o.name && mesh == o.mesh && toy == o.toy;
}

void ExperimentConfig::validate() const {
    if (shapes.empty() && mesh_dirs.empty()) throw InvalidArgumentError("shape list is empty");
    std::set<std::string> names;
    for (const auto& s : shapes) {
        if (s.name.empty()) throw InvalidArgumentError("every shape needs a name");
        if (s.name.find_first_of("/\\") != std::string::npos || s.name == "." || s.name == "..") {
            throw InvalidArgumentError("shape name '" + s.name + "' is not a plain file name");
        }
        if (!names.insert(s.name).second) throw InvalidArgumentError("duplicate shape name '" + s.name + "'");
        if (s.mesh.has_value() == s.toy.has_value()) {
            throw InvalidArgumentError("shape '" + s.name + "' needs exactly one of mesh or toy");
        }
        if (s.toy) {
            s.toy->validate();
            if (!is_watertight_kind(s.toy->kind)) {
                throw InvalidArgumentError("shape '" + s.name + "': toy kind " + to_string(s.toy->kind) +
                                           " is not a surface mesh");
            }
        }
    }
    pipeline.validate();
    if (seeds.empty()) throw InvalidArgumentError("seed list is empty");
    if (output_dir.empty()) throw InvalidArgumentError("output_dir is empty");
}

std::vector<ShapeSource> ExperimentConfig::resolved_shapes() const {
    std::vector<ShapeSource> out = shapes;
    for (const auto& dir : mesh_dirs) {
        if (!std::filesystem::is_directory(dir)) throw InvalidInputError("file not found: " + dir.string());
        std::vector<std::filesystem::path> files;
        for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
            if (!e.is_regular_file()) continue;
            auto ext = e.path().extension().string();
            std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
            if (ext == ".obj" || ext == ".ply") files.push_back(e.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            // dir-relative path keeps names unique across nested category folders
            auto rel = std::filesystem::relative(f, dir).replace_extension().generic_string();
            std::replace(rel.begin(), rel.end(), '/', '_');
            out.push_back({rel, f, std::nullopt});
        }
    }
    return out;
}

json ExperimentConfig::to_json() const {
    json shapes_j = json::array();
    for (const auto& s : shapes) {
        json e = {{"name", s.name}};
        if (s.mesh) e["mesh"] = s.mesh->generic_string();
        if (s.toy) e["toy"] = ksudf::to_json(*s.toy);
        shapes_j.push_back(e);
    }
    json dirs = json::array();
    for (const auto& d : mesh_dirs) dirs.push_back(d.generic_string());
    return {{"shapes", shapes_j},
            {"mesh_dirs", dirs},
            {"detector", ksudf::to_json(pipeline.detector, false)},
            {"sampling", ksudf::to_json(pipeline.sampling, false)},
            {"architecture", ksudf::to_json(pipeline.architecture)},
            {"train", ksudf::to_json(pipeline.train, false)},
            {"reconstruction", ksudf::to_json(pipeline.reconstruction, false)},
            {"seeds", seeds},
            {"output_dir", output_dir.generic_string()}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    reject_unknown(j, "config",
                   {"shapes", "mesh_dirs", "detector", "sampling", "architecture", "train", "reconstruction",
                    "seeds", "output_dir"});
    ExperimentConfig c;
    if (j.contains("shapes")) {
        if (!j["shapes"].is_array()) throw InvalidArgumentError("shapes must be an array");
        for (const auto& e : j["shapes"]) {
            reject_unknown(e, "shape", {"name", "mesh", "toy"});
            ShapeSource s;
            read(e, "name", s.name, "shape");
            if (e.contains("mesh")) s.mesh = std::filesystem::path(e["mesh"].get<std::string>());
            if (e.contains("toy")) s.toy = toy_from(e["toy"]);
            if (s.name.empty() && s.toy) s.name = to_string(s.toy->kind);
            if (s.name.empty() && s.mesh) s.name = s.mesh->stem().string();
            c.shapes.push_back(std::move(s));
        }
    }
    if (j.contains("mesh_dirs")) {
        std::vector<std::string> dirs;
        read(j, "mesh_dirs", dirs, "config");
        for (auto& d : dirs) c.mesh_dirs.emplace_back(d);
    }
    if (j.contains("detector")) c.pipeline.detector = detector_from(j["detector"]);
    if (j.contains("sampling")) c.pipeline.sampling = sampling_from(j["sampling"]);
    if (j.contains("architecture")) c.pipeline.architecture = architecture_from(j["architecture"]);
    if (j.contains("train")) c.pipeline.train = train_from(j["train"]);
    if (j.contains("reconstruction")) c.pipeline.reconstruction = reconstruction_from(j["reconstruction"]);
    read(j, "seeds", c.seeds, "config");
    std::string out = c.output_dir.string();
    read(j, "output_dir", out, "config");
    c.output_dir = out;
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("file not found: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError("config is not valid JSON: " + std::string(e.what()), e.byte);
    }
    return from_json(j);
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    return to_json() == o.to_json();
}

}  // namespace ksudf
