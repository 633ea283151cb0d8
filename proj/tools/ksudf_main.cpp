// ksudf command line: edge detection, sampling, training, reconstruction and
// the experiment drivers.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "ksudf/app/experiment_config.hpp"
#include "ksudf/app/pipeline.hpp"
#include "ksudf/circular/circular_stats.hpp"
#include "ksudf/common/error.hpp"
#include "ksudf/common/rng.hpp"
#include "ksudf/geometry/mesh_io.hpp"
#include "ksudf/toy/toygen.hpp"
#include "ksudf/udf/udf_oracle.hpp"

using namespace ksudf;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct ShapeFlags {
    std::string mesh;
    std::string toy;
    int subdivisions = 3;

    void add(CLI::App* cmd) {
        cmd->add_option("--mesh", mesh, "OBJ or PLY surface mesh");
        cmd->add_option("--toy", toy, "generated shape: cube, wedge, icosphere, spiked_icosphere, fold_prism");
        cmd->add_option("--subdivisions", subdivisions, "icosphere subdivision level")->check(CLI::Range(0, 5));
    }

    ShapeSource source() const {
        if (mesh.empty() == toy.empty()) throw InvalidArgumentError("give exactly one of --mesh or --toy");
        if (!mesh.empty()) return {fs::path(mesh).stem().string(), fs::path(mesh), std::nullopt};
        ToySpec spec;
        spec.kind = parse_toy_kind(toy);
        spec.subdivisions = subdivisions;
        if (!is_watertight_kind(spec.kind)) throw InvalidArgumentError("--toy needs a watertight kind, got " + toy);
        return {toy, std::nullopt, spec};
    }
};

void add_detector_flags(CLI::App* cmd, DetectorConfig& d) {
    cmd->add_option("--ns", d.n_s, "surface sample count");
    cmd->add_option("--k", d.k, "neighborhood size (>= 5)");
    cmd->add_option("--p0", d.p0, "p-value threshold");
}

void add_sampling_flags(CLI::App* cmd, SamplingConfig& s) {
    cmd->add_option("--n", s.n, "training point count");
    cmd->add_option("--nu", s.nu, "surface share of the training mixture");
    cmd->add_option("--xi", s.xi, "edge oversampling in [0, 1]");
    cmd->add_option("--sigma", s.noise_sigma, "Gaussian perturbation standard deviation");
}

void add_train_flags(CLI::App* cmd, MlpArchitecture& a, TrainConfig& t) {
    cmd->add_option("--hidden", a.hidden, "hidden width");
    cmd->add_option("--slope", a.negative_slope, "Leaky-ReLU negative slope");
    cmd->add_option("--lr", t.learning_rate, "Adam learning rate");
    cmd->add_option("--batch", t.batch_size, "mini-batch size");
    cmd->add_option("--epochs", t.epochs, "epoch count");
}

void add_reconstruction_flags(CLI::App* cmd, ReconstructionConfig& r) {
    cmd->add_option("--nr", r.n_r, "reconstruction point count");
    cmd->add_option("--steps", r.steps, "descent iterations");
    cmd->add_option("--step-size", r.step_size, "descent step size");
}

void say(const std::string& msg) { std::cerr << msg << '\n'; }

// -- detect ------------------------------------------------------------------

struct DetectArgs {
    ShapeFlags shape;
    DetectorConfig detector;
    std::string out = "out/detect";
};

int cmd_detect(const DetectArgs& a) {
    a.detector.validate();
    const ShapeSource src = a.shape.source();
    const TriangleMesh mesh = load_shape(src);
    const EdgeLabeledCloud cloud = detect_edges(mesh, a.detector);
    fs::create_directories(a.out);
    write_edge_csv(cloud, fs::path(a.out) / "edges.csv");
    write_edge_ply(cloud, fs::path(a.out) / "edges.ply");
    json summary = detection_summary(cloud);
    summary["shape"] = src.name;
    summary["detector"] = to_json(a.detector, true);
    write_json(summary, fs::path(a.out) / "summary.json");
    std::cout << summary.dump() << '\n';
    return kExitOk;
}

// -- sample ------------------------------------------------------------------

struct SampleArgs {
    ShapeFlags shape;
    DetectorConfig detector;
    SamplingConfig sampling;
    std::string out = "out/sample";
};

int cmd_sample(const SampleArgs& a) {
    a.detector.validate();
    a.sampling.validate();
    const TriangleMesh mesh = load_shape(a.shape.source());
    const EdgeLabeledCloud cloud = detect_edges(mesh, a.detector);
    const UdfOracle oracle(mesh);
    const TrainingSet set = sample_training_set(cloud, oracle, a.sampling);
    for (const auto& w : set.warnings) say("warning: " + w);
    fs::create_directories(a.out);
    write_training_csv(set, fs::path(a.out) / "training.csv");
    save_training_set(set, fs::path(a.out) / "training.bin");
    std::size_t tags[3] = {0, 0, 0};
    for (auto p : set.provenance) tags[static_cast<int>(p)]++;
    const json summary = {{"tau", surface_complexity(cloud)},
                          {"nu1", edge_mixture_weight(surface_complexity(cloud), a.sampling.xi)},
                          {"size", set.size()},
                          {"ball", tags[0]},
                          {"surface_flat", tags[1]},
                          {"surface_edge", tags[2]},
                          {"fallback_draws", set.fallback_draws},
                          {"detector", to_json(a.detector, true)},
                          {"sampling", to_json(a.sampling, true)}};
    write_json(summary, fs::path(a.out) / "summary.json");
    std::cout << summary.dump() << '\n';
    return kExitOk;
}

// -- train -------------------------------------------------------------------

struct TrainArgs {
    std::string data;
    MlpArchitecture arch;
    TrainConfig train;
    std::uint64_t init_seed = 0;
    std::string out = "out/train";
};

int cmd_train(const TrainArgs& a) {
    a.arch.validate();
    a.train.validate();
    const TrainingSet set = load_training_set(a.data);
    const NeuralUdf net = train(NeuralUdf::init(a.arch, a.init_seed), set, a.train);
    fs::create_directories(a.out);
    net.save(fs::path(a.out) / "net.json");
    write_loss_csv(net.metadata().loss_trace, fs::path(a.out) / "loss.csv");
    const json summary = {{"final_loss", net.metadata().final_loss},
                          {"epochs", net.metadata().epochs},
                          {"parameters", net.parameter_count()},
                          {"architecture", to_json(a.arch)},
                          {"train", to_json(a.train, true)},
                          {"init_seed", a.init_seed}};
    write_json(summary, fs::path(a.out) / "summary.json");
    std::cout << summary.dump() << '\n';
    return kExitOk;
}

// -- reconstruct -------------------------------------------------------------

struct ReconstructArgs {
    std::string net;
    ShapeFlags shape;
    ReconstructionConfig recon;
    std::string out = "out/reconstruct";
};

int cmd_reconstruct(const ReconstructArgs& a) {
    a.recon.validate();
    const NeuralUdf net = NeuralUdf::load(a.net);
    const TriangleMesh mesh = load_shape(a.shape.source());
    const ReconstructionReport rep = reconstruct_zero_set(net, mesh, a.recon);
    for (const auto& w : rep.warnings) say("warning: " + w);
    fs::create_directories(a.out);
    write_csv(rep.initial, {}, fs::path(a.out) / "initial.csv");
    write_csv(rep.reconstructed, {{"initial_residual", rep.initial_residual}, {"final_residual", rep.final_residual}},
              fs::path(a.out) / "reconstruction.csv");
    const json summary = {{"delta", rep.delta},
                          {"diverged", rep.diverged.size()},
                          {"reduced_fraction", rep.reduced_fraction},
                          {"final_residual_mean", rep.final_stats.mean},
                          {"reconstruction", to_json(a.recon, true)}};
    write_json(summary, fs::path(a.out) / "summary.json");
    std::cout << summary.dump() << '\n';
    return kExitOk;
}

// -- pipeline / improve ------------------------------------------------------

struct ExperimentArgs {
    std::string config;
    std::string out;
    std::optional<double> xi;
    std::optional<std::size_t> n, epochs;
    std::vector<std::uint64_t> seeds;

    void add(CLI::App* cmd) {
        cmd->add_option("config", config, "experiment JSON")->required();
        cmd->add_option("--out", out, "output directory (overrides the config)");
        cmd->add_option("--xi", xi, "edge oversampling");
        cmd->add_option("--n", n, "training point count");
        cmd->add_option("--epochs", epochs, "epoch count");
        cmd->add_option("--seeds", seeds, "run seeds");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig cfg = ExperimentConfig::load(config);
        if (!out.empty()) cfg.output_dir = out;
        if (xi) cfg.pipeline.sampling.xi = *xi;
        if (n) cfg.pipeline.sampling.n = *n;
        if (epochs) cfg.pipeline.train.epochs = *epochs;
        if (!seeds.empty()) cfg.seeds = seeds;
        cfg.validate();
        return cfg;
    }
};

int cmd_pipeline(const ExperimentArgs& a) {
    const ExperimentConfig cfg = a.resolve();
    const auto shapes = cfg.resolved_shapes();
    fs::create_directories(cfg.output_dir);
    write_json(cfg.to_json(), cfg.output_dir / "config.json");
    int status = kExitOk;
    json index = json::array();
    for (const auto& s : shapes) {
        const auto outcome = run_shape_pipeline(s, cfg, cfg.output_dir / s.name, cfg.output_dir / "cache", say);
        if (!outcome.cache_hits.empty()) {
            std::string hits;
            for (const auto& h : outcome.cache_hits) hits += (hits.empty() ? "" : ", ") + h;
            say(s.name + ": cache hits: " + hits);
        }
        if (outcome.error) {
            say("error: " + s.name + ": " + *outcome.error);
            status = kExitRuntime;
        }
        index.push_back({{"shape", s.name},
                         {"metrics", (fs::path(s.name) / "metrics.json").generic_string()},
                         {"status", outcome.error ? "failed" : "ok"}});
    }
    write_json(index, cfg.output_dir / "pipeline_index.json");
    std::cout << index.dump() << '\n';
    return status;
}

int cmd_improve(const ExperimentArgs& a) {
    const ExperimentConfig cfg = a.resolve();
    const json rep = run_improvement(cfg, default_worker_count(), say);
    std::cout << rep["summary"].dump() << '\n';
    return rep["summary"]["succeeded"].get<std::size_t>() == rep["summary"]["shapes"].get<std::size_t>()
               ? kExitOk
               : kExitRuntime;
}

// -- toy-compare -------------------------------------------------------------

struct ToyCompareArgs {
    std::string kind = "fold";
    std::size_t count = 500;
    std::size_t k = 40;
    std::size_t steps = 100;
    double d_max = 0.5;
    std::size_t seeds = 1;
    std::uint64_t seed = 0;
    std::string out = "out/toy";
};

int cmd_toy_compare(const ToyCompareArgs& a) {
    const ToyKind kind = parse_toy_kind(a.kind);
    if (is_watertight_kind(kind)) throw InvalidArgumentError("toy-compare needs cone, fold, plate or contour2d");
    if (a.steps < 1 || a.seeds < 1) throw InvalidArgumentError("--steps and --seeds must be at least 1");
    if (a.k < 5) throw InvalidArgumentError("k must be at least 5");
    const bool planar = kind == ToyKind::Contour2d;
    fs::create_directories(a.out);
    const fs::path path = fs::path(a.out) / (a.kind + "_sweep.csv");
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out << std::setprecision(17) << (kind == ToyKind::Plate ? "d" : "psi") << ",pauly,"
        << (planar ? "odds_p_value" : "ks_p_value") << '\n';
    for (std::size_t i = 0; i < a.steps; ++i) {
        const double x = kind == ToyKind::Plate ? a.d_max * static_cast<double>(i) / static_cast<double>(a.steps)
                                                : (kPi / 2) * static_cast<double>(i) / static_cast<double>(a.steps);
        std::vector<double> pauly, p;
        for (std::size_t s = 0; s < a.seeds; ++s) {
            const std::uint64_t seed = Rng::derive(a.seed, s);
            ToyDescriptors d;
            switch (kind) {
                case ToyKind::Cone: d = toy_descriptors(gen_cone(x, a.count, seed).points, a.k); break;
                case ToyKind::Fold: d = toy_descriptors(gen_fold(x, a.count, seed).points, a.k); break;
                case ToyKind::Plate: d = toy_descriptors(gen_plate(x, a.count, seed).points, a.k); break;
                default: d = toy_descriptors_2d(gen_contour2d(x, a.count, seed), a.k); break;
            }
            pauly.push_back(d.pauly);
            p.push_back(planar ? *d.odds_p_value : d.ks_p_value);
        }
        out << x << ',' << median(pauly) << ',' << median(p) << '\n';
    }
    std::cout << path.generic_string() << '\n';
    return kExitOk;
}

// -- gen-toy -----------------------------------------------------------------

struct GenToyArgs {
    ToySpec spec;
    std::string kind = "cube";
    std::string format = "auto";
    std::string out = "out/toy";
};

int cmd_gen_toy(GenToyArgs a) {
    a.spec.kind = parse_toy_kind(a.kind);
    a.spec.validate();
    fs::create_directories(a.out);
    fs::path path;
    if (is_watertight_kind(a.spec.kind)) {
        const TriangleMesh mesh = gen_watertight(a.spec);
        const std::string fmt = a.format == "auto" ? "obj" : a.format;
        path = fs::path(a.out) / (a.kind + "." + fmt);
        if (fmt == "obj") write_obj(mesh, path);
        else if (fmt == "ply") write_ply(mesh, path);
        else throw InvalidArgumentError("mesh format must be obj or ply");
    } else {
        const PointCloud cloud = gen_toy_cloud(a.spec);
        const std::string fmt = a.format == "auto" ? "csv" : a.format;
        path = fs::path(a.out) / (a.kind + "." + fmt);
        if (fmt == "csv") write_csv(cloud, path);
        else if (fmt == "ply") write_ply(cloud, path);
        else throw InvalidArgumentError("point cloud format must be csv or ply");
    }
    std::cout << path.generic_string() << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kolmogorov-Smirnov edge detection and edge-focused neural UDF training"};
    app.require_subcommand(1);
    std::function<int()> run;

    DetectArgs detect;
    auto* c_detect = app.add_subcommand("detect", "label surface samples of a mesh as edge or flat");
    detect.shape.add(c_detect);
    add_detector_flags(c_detect, detect.detector);
    c_detect->add_option("--seed", detect.detector.seed, "sampling seed");
    c_detect->add_option("--out", detect.out, "output directory");
    c_detect->callback([&] { run = [&] { return cmd_detect(detect); }; });

    SampleArgs sample;
    auto* c_sample = app.add_subcommand("sample", "build a training set with edge oversampling");
    sample.shape.add(c_sample);
    add_detector_flags(c_sample, sample.detector);
    add_sampling_flags(c_sample, sample.sampling);
    c_sample->add_option("--detect-seed", sample.detector.seed, "surface sampling seed");
    c_sample->add_option("--seed", sample.sampling.seed, "training set seed");
    c_sample->add_option("--out", sample.out, "output directory");
    c_sample->callback([&] { run = [&] { return cmd_sample(sample); }; });

    TrainArgs tr;
    auto* c_train = app.add_subcommand("train", "fit a neural UDF to a training set");
    c_train->add_option("--data", tr.data, "training.bin written by `sample`")->required();
    add_train_flags(c_train, tr.arch, tr.train);
    c_train->add_option("--seed", tr.train.seed, "shuffling seed");
    c_train->add_option("--init-seed", tr.init_seed, "weight initialization seed");
    c_train->add_option("--out", tr.out, "output directory");
    c_train->callback([&] { run = [&] { return cmd_train(tr); }; });

    ReconstructArgs rec;
    auto* c_rec = app.add_subcommand("reconstruct", "descend surface samples onto the zero set of a network");
    c_rec->add_option("--net", rec.net, "net.json written by `train`")->required();
    rec.shape.add(c_rec);
    add_reconstruction_flags(c_rec, rec.recon);
    c_rec->add_option("--seed", rec.recon.seed, "surface sampling seed");
    c_rec->add_option("--out", rec.out, "output directory");
    c_rec->callback([&] { run = [&] { return cmd_reconstruct(rec); }; });

    ExperimentArgs pipe;
    auto* c_pipe = app.add_subcommand("pipeline", "detect, sample, train and reconstruct every configured shape");
    pipe.add(c_pipe);
    c_pipe->callback([&] { run = [&] { return cmd_pipeline(pipe); }; });

    ExperimentArgs imp;
    auto* c_imp = app.add_subcommand("improve", "paired-seed comparison of xi against xi = 0");
    imp.add(c_imp);
    c_imp->callback([&] { run = [&] { return cmd_improve(imp); }; });

    ToyCompareArgs tc;
    auto* c_tc = app.add_subcommand("toy-compare", "descriptor sweeps on cones, folds, plates and 2D contours");
    c_tc->add_option("--kind", tc.kind, "cone, fold, plate or contour2d");
    c_tc->add_option("--count", tc.count, "points per toy");
    c_tc->add_option("--k", tc.k, "neighborhood size");
    c_tc->add_option("--steps", tc.steps, "grid size");
    c_tc->add_option("--d-max", tc.d_max, "largest plate thickness (exclusive)");
    c_tc->add_option("--seeds", tc.seeds, "seeds per grid value (median reported)");
    c_tc->add_option("--seed", tc.seed, "root seed");
    c_tc->add_option("--out", tc.out, "output directory");
    c_tc->callback([&] { run = [&] { return cmd_toy_compare(tc); }; });

    GenToyArgs gt;
    auto* c_gt = app.add_subcommand("gen-toy", "write a toy mesh or point cloud");
    c_gt->add_option("--kind", gt.kind, "toy kind");
    c_gt->add_option("--psi", gt.spec.psi, "rotation angle in radians");
    c_gt->add_option("--d", gt.spec.d, "plate thickness");
    c_gt->add_option("--count", gt.spec.count, "point count");
    c_gt->add_option("--seed", gt.spec.seed, "seed");
    c_gt->add_option("--subdivisions", gt.spec.subdivisions, "icosphere subdivision level");
    c_gt->add_option("--format", gt.format, "obj, ply or csv");
    c_gt->add_option("--out", gt.out, "output directory");
    c_gt->callback([&] { run = [&] { return cmd_gen_toy(gt); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        return run();
    } catch (const InvalidArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidInputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
