#include "ksudf/app/pipeline.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ksudf/common/error.hpp"
#include "ksudf/geometry/mesh_io.hpp"
#include "ksudf/sampler/training_sampler.hpp"
#include "ksudf/udf/udf_oracle.hpp"

namespace ksudf {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::uint64_t hash_mesh(const TriangleMesh& mesh) {
    std::string buf;
    for (const auto& v : mesh.vertices()) buf.append(reinterpret_cast<const char*>(v.data()), 3 * sizeof(double));
    for (const auto& t : mesh.triangles()) buf.append(reinterpret_cast<const char*>(t.data()), 3 * sizeof(int));
    return fnv1a(buf);
}

TriangleMesh load_shape(const ShapeSource& shape, std::size_t* dropped) {
    if (dropped) *dropped = 0;
    if (shape.toy) return normalize_to_unit_ball(gen_watertight(*shape.toy));
    if (!shape.mesh) throw InvalidArgumentError("shape '" + shape.name + "' has no source");
    auto loaded = load_mesh(*shape.mesh);
    if (dropped) *dropped = loaded.dropped_triangles;
    return normalize_to_unit_ball(loaded.mesh);
}

json detection_summary(const EdgeLabeledCloud& cloud) {
    std::vector<std::size_t> buckets(10, 0);
    for (double p : cloud.p_value) {
        auto b = static_cast<std::size_t>(p * 10.0);
        buckets[std::min<std::size_t>(b, 9)]++;
    }
    return {{"tau", surface_complexity(cloud)},
            {"points", cloud.size()},
            {"edge", cloud.edge.size()},
            {"flat", cloud.flat.size()},
            {"insufficient", cloud.insufficient},
            {"p_value_histogram", {{"bucket_width", 0.1}, {"counts", buckets}}}};
}

namespace {

constexpr char kEdgeMagic[4] = {'K', 'S', 'E', 'C'};

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("truncated edge cache", 0);
    return v;
}

json with_stage_seeds(const PipelineConfig& p) {
    return {{"detect", p.detector.seed},
            {"sample", p.sampling.seed},
            {"init", p.init_seed},
            {"train", p.train.seed},
            {"reconstruct", p.reconstruction.seed}};
}

std::string key_of(std::uint64_t parent, const json& j) { return hex64(fnv1a(j.dump(), parent)); }

void log_to(const Logger& log, const std::string& msg) {
    if (log) log(msg);
}

}  // namespace

void save_edge_cloud(const EdgeLabeledCloud& c, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out.write(kEdgeMagic, 4);
    put(out, static_cast<std::uint64_t>(c.size()));
    put(out, static_cast<std::uint64_t>(c.insufficient));
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (int d = 0; d < 3; ++d) put(out, c.points.points[i][d]);
        put(out, c.pauly[i]);
        put(out, c.p_value[i]);
        put(out, static_cast<std::int32_t>(c.ks_label[i]));
    }
}

EdgeLabeledCloud load_edge_cloud(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("file not found: " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kEdgeMagic, 4) != 0) throw FormatError("not an edge cache", 0);
    EdgeLabeledCloud c;
    const auto n = get<std::uint64_t>(in);
    c.insufficient = static_cast<std::size_t>(get<std::uint64_t>(in));
    std::vector<int> labels;
    for (std::uint64_t i = 0; i < n; ++i) {
        Vec3 p;
        for (int d = 0; d < 3; ++d) p[d] = get<double>(in);
        c.points.points.push_back(p);
        c.pauly.push_back(get<double>(in));
        c.p_value.push_back(get<double>(in));
        const int label = get<std::int32_t>(in);
        c.ks_label.push_back(label);
        (label ? c.edge : c.flat).push_back(static_cast<std::size_t>(i));
    }
    c.points.labels = c.ks_label;
    return c;
}

void write_json(const json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

PipelineOutcome run_shape_pipeline(const ShapeSource& shape, const ExperimentConfig& cfg, const fs::path& shape_dir,
                                   const fs::path& cache_dir, const Logger& log) {
    PipelineOutcome outcome;
    fs::create_directories(shape_dir);
    fs::create_directories(cache_dir);
    const PipelineConfig run = seeded(cfg.pipeline, cfg.seeds.front());

    json& m = outcome.metrics;
    m["shape"] = shape.name;
    m["config"] = cfg.to_json();
    m["run_seed"] = cfg.seeds.front();
    m["stage_seeds"] = with_stage_seeds(run);
    std::string stage = "load";
    try {
        std::size_t dropped = 0;
        const TriangleMesh mesh = load_shape(shape, &dropped);
        const std::uint64_t mesh_hash = hash_mesh(mesh);
        m["mesh"] = {{"hash", hex64(mesh_hash)},
                     {"vertices", mesh.vertex_count()},
                     {"triangles", mesh.triangle_count()},
                     {"dropped_triangles", dropped}};

        stage = "detect";
        const std::string detect_key = key_of(mesh_hash, to_json(run.detector, true));
        const fs::path detect_cache = cache_dir / ("detect-" + detect_key + ".bin");
        EdgeLabeledCloud cloud;
        if (fs::exists(detect_cache)) {
            cloud = load_edge_cloud(detect_cache);
            outcome.cache_hits.push_back("detect");
        } else {
            cloud = detect_edges(mesh, run.detector);
            save_edge_cloud(cloud, detect_cache);
        }
        write_edge_csv(cloud, shape_dir / "edges.csv");
        m["detection"] = detection_summary(cloud);
        log_to(log, shape.name + ": tau = " + std::to_string(surface_complexity(cloud)));

        stage = "sample";
        const UdfOracle oracle(mesh);
        const std::string sample_key = key_of(fnv1a(detect_key), to_json(run.sampling, true));
        const fs::path sample_cache = cache_dir / ("sample-" + sample_key + ".bin");
        TrainingSet data;
        if (fs::exists(sample_cache)) {
            data = load_training_set(sample_cache);
            outcome.cache_hits.push_back("sample");
        } else {
            data = sample_training_set(cloud, oracle, run.sampling);
            save_training_set(data, sample_cache);
        }
        for (const auto& w : data.warnings) log_to(log, shape.name + ": warning: " + w);
        write_training_csv(data, shape_dir / "training.csv");
        std::size_t tags[3] = {0, 0, 0};
        for (auto p : data.provenance) tags[static_cast<int>(p)]++;
        m["training_set"] = {{"size", data.size()},
                             {"ball", tags[0]},
                             {"surface_flat", tags[1]},
                             {"surface_edge", tags[2]},
                             {"fallback_draws", data.fallback_draws}};

        stage = "train";
        const std::string train_key = key_of(
            fnv1a(sample_key),
            {{"architecture", to_json(run.architecture)}, {"train", to_json(run.train, true)}, {"init", run.init_seed}});
        const fs::path net_cache = cache_dir / ("net-" + train_key + ".json");
        const fs::path loss_cache = cache_dir / ("loss-" + train_key + ".csv");
        std::optional<NeuralUdf> net;
        if (fs::exists(net_cache) && fs::exists(loss_cache)) {
            net = NeuralUdf::load(net_cache);
            outcome.cache_hits.push_back("train");
        } else {
            net = train(NeuralUdf::init(run.architecture, run.init_seed), data, run.train);
            write_loss_csv(net->metadata().loss_trace, loss_cache);
            net->save(net_cache);
        }
        fs::copy_file(loss_cache, shape_dir / "loss.csv", fs::copy_options::overwrite_existing);
        net->save(shape_dir / "net.json");
        m["training"] = {{"epochs", net->metadata().epochs},
                         {"final_loss", net->metadata().final_loss},
                         {"loss_trace_path", "loss.csv"}};

        stage = "reconstruct";
        const ReconstructionReport rep = reconstruct_zero_set(*net, mesh, run.reconstruction);
        for (const auto& w : rep.warnings) log_to(log, shape.name + ": warning: " + w);
        write_csv(rep.reconstructed, {{"initial_residual", rep.initial_residual}, {"final_residual", rep.final_residual}},
                  shape_dir / "reconstruction.csv");
        m["reconstruction"] = {{"delta", rep.delta},
                               {"diverged", rep.diverged.size()},
                               {"reduced_fraction", rep.reduced_fraction},
                               {"initial_residual", {{"mean", rep.initial_stats.mean},
                                                     {"median", rep.initial_stats.median},
                                                     {"max", rep.initial_stats.max}}},
                               {"final_residual", {{"mean", rep.final_stats.mean},
                                                   {"median", rep.final_stats.median},
                                                   {"max", rep.final_stats.max}}}};
        m["delta"] = rep.delta;
        m["edge_error"] = cloud.edge.empty() ? json(nullptr) : json(edge_error(*net, cloud));
        m["status"] = "ok";
    } catch (const std::exception& e) {
        outcome.error = e.what();
        m["status"] = "failed";
        m["failed_stage"] = stage;
        m["error"] = e.what();
    }
    write_json(m, shape_dir / "metrics.json");
    return outcome;
}

json to_json(const RunResult& r) {
    return {{"seed", r.seed},
            {"xi", r.xi},
            {"tau", r.tau},
            {"delta", r.delta},
            {"edge_error", r.edge_error ? json(*r.edge_error) : json(nullptr)},
            {"final_loss", r.final_loss},
            {"diverged", r.diverged},
            {"fallback_draws", r.fallback_draws}};
}

json to_json(const ImprovementReport& r) {
    json j = {{"shape", r.shape}, {"xi", r.xi}, {"seeds", r.seeds}};
    if (r.error) {
        j["error"] = *r.error;
        return j;
    }
    json a = json::array(), b = json::array();
    for (const auto& x : r.with_xi) a.push_back(to_json(x));
    for (const auto& x : r.baseline) b.push_back(to_json(x));
    j["runs_xi"] = a;
    j["runs_baseline"] = b;
    j["median_delta_xi"] = r.median_xi;
    j["median_delta_baseline"] = r.median_baseline;
    j["improvement"] = r.improvement;
    return j;
}

json run_improvement(const ExperimentConfig& cfg, std::size_t workers, const Logger& log) {
    cfg.validate();
    const auto shapes = cfg.resolved_shapes();
    if (shapes.empty()) throw InvalidArgumentError("shape list is empty");
    fs::create_directories(cfg.output_dir);

    json reports = json::array();
    std::size_t ok = 0, improved = 0;
    double sum = 0.0;
    std::ofstream hist(cfg.output_dir / "improvement_histogram.csv");
    std::ofstream runs(cfg.output_dir / "runs.csv");
    hist << std::setprecision(17) << "shape,improvement,median_delta_xi,median_delta_baseline\n";
    runs << std::setprecision(17) << "shape,seed,xi,delta,edge_error,tau\n";
    for (const auto& shape : shapes) {
        ImprovementReport rep;
        try {
            const TriangleMesh mesh = load_shape(shape);
            rep = improvement_experiment(shape.name, mesh, cfg.pipeline, cfg.seeds, workers);
        } catch (const std::exception& e) {
            rep.shape = shape.name;
            rep.xi = cfg.pipeline.sampling.xi;
            rep.seeds = cfg.seeds;
            rep.error = e.what();
        }
        reports.push_back(to_json(rep));
        if (rep.error) {
            log_to(log, shape.name + ": failed: " + *rep.error);
            continue;
        }
        ++ok;
        sum += rep.improvement;
        if (rep.improvement > 0.0) ++improved;
        log_to(log, shape.name + ": I = " + std::to_string(rep.improvement));
        hist << shape.name << ',' << rep.improvement << ',' << rep.median_xi << ',' << rep.median_baseline << '\n';
        for (const auto* arm : {&rep.with_xi, &rep.baseline})
            for (const auto& r : *arm) {
                runs << shape.name << ',' << r.seed << ',' << r.xi << ',' << r.delta << ',';
                if (r.edge_error) runs << *r.edge_error;
                runs << ',' << r.tau << '\n';
            }
    }
    json summary = {{"shapes", shapes.size()},
                    {"succeeded", ok},
                    {"improved", improved},
                    {"fraction_improved", ok ? json(static_cast<double>(improved) / static_cast<double>(ok)) : json(nullptr)},
                    {"mean_improvement", ok ? json(sum / static_cast<double>(ok)) : json(nullptr)}};
    json out = {{"config", cfg.to_json()}, {"reports", reports}, {"summary", summary}};
    write_json(out, cfg.output_dir / "improvement.json");
    return out;
}

}  // namespace ksudf
