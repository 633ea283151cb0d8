#include "ksudf/eval/improvement.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "ksudf/common/error.hpp"
#include "ksudf/common/rng.hpp"

namespace ksudf {

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidInputError("median of an empty list");
    const std::size_t mid = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    return values[mid];
}

double relative_improvement(double improved_median, double baseline_median) {
    if (baseline_median == 0.0) throw UndefinedMetricError("relative improvement over a zero baseline error");
    return 1.0 - improved_median / baseline_median;
}

void PipelineConfig::validate() const {
    detector.validate();
    sampling.validate();
    architecture.validate();
    train.validate();
    reconstruction.validate();
}

RunSeeds RunSeeds::from(std::uint64_t s) {
    return {Rng::derive(s, 1), Rng::derive(s, 2), Rng::derive(s, 3), Rng::derive(s, 4), Rng::derive(s, 5)};
}

PipelineConfig seeded(const PipelineConfig& cfg, std::uint64_t run_seed) {
    const auto s = RunSeeds::from(run_seed);
    PipelineConfig out = cfg;
    out.detector.seed = s.detect;
    out.sampling.seed = s.sample;
    out.init_seed = s.init;
    out.train.seed = s.train;
    out.reconstruction.seed = s.reconstruct;
    return out;
}

RunResult run_from_detection(const TriangleMesh& mesh, const UdfOracle& oracle,
                             const EdgeLabeledCloud& cloud, const PipelineConfig& cfg,
                             NeuralUdf* trained, ReconstructionReport* report) {
    RunResult r;
    r.xi = cfg.sampling.xi;
    r.tau = surface_complexity(cloud);
    const TrainingSet data = sample_training_set(cloud, oracle, cfg.sampling);
    r.fallback_draws = data.fallback_draws;
    NeuralUdf net = train(NeuralUdf::init(cfg.architecture, cfg.init_seed), data, cfg.train);
    r.final_loss = net.metadata().final_loss;
    ReconstructionReport rep = reconstruct_zero_set(net, mesh, cfg.reconstruction);
    r.delta = rep.delta;
    r.diverged = rep.diverged.size();
    if (!cloud.edge.empty()) r.edge_error = edge_error(net, cloud);
    if (trained) *trained = std::move(net);
    if (report) *report = std::move(rep);
    return r;
}

std::size_t default_worker_count() {
    if (const char* env = std::getenv("KSUDF_WORKERS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job) {
    workers = std::max<std::size_t>(1, std::min(workers, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

ImprovementReport improvement_experiment(const std::string& shape, const TriangleMesh& mesh,
                                         const PipelineConfig& cfg, const std::vector<std::uint64_t>& seeds,
                                         std::size_t workers) {
    ImprovementReport rep;
    rep.shape = shape;
    rep.xi = cfg.sampling.xi;
    rep.seeds = seeds;
    try {
        cfg.validate();
        if (seeds.empty()) throw InvalidArgumentError("improvement experiment needs at least one seed");
        const UdfOracle oracle(mesh);
        const std::size_t n = seeds.size();

        std::vector<EdgeLabeledCloud> clouds(n);
        parallel_for(n, workers, [&](std::size_t i) {
            clouds[i] = detect_edges(mesh, seeded(cfg, seeds[i]).detector);
        });

        rep.with_xi.resize(n);
        rep.baseline.resize(n);
        parallel_for(2 * n, workers, [&](std::size_t job) {
            const std::size_t i = job / 2;
            PipelineConfig run = seeded(cfg, seeds[i]);
            if (job % 2 == 1) run.sampling.xi = 0.0;
            RunResult r = run_from_detection(mesh, oracle, clouds[i], run);
            r.seed = seeds[i];
            (job % 2 == 0 ? rep.with_xi : rep.baseline)[i] = r;
        });

        std::vector<double> a, b;
        for (const auto& r : rep.with_xi) a.push_back(r.delta);
        for (const auto& r : rep.baseline) b.push_back(r.delta);
        rep.median_xi = median(a);
        rep.median_baseline = median(b);
        rep.improvement = relative_improvement(rep.median_xi, rep.median_baseline);
    } catch (const std::exception& e) {
        rep.error = e.what();
    }
    return rep;
}

}  // namespace ksudf
