#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "ksudf/common/error.hpp"
#include "ksudf/common/rng.hpp"
#include "ksudf/geometry/surface_sampling.hpp"
#include "ksudf/sampler/training_sampler.hpp"
#include "ksudf/toy/toygen.hpp"
#include "ksudf/udf/udf_oracle.hpp"

using namespace ksudf;

namespace {

const TriangleMesh& cube() {
    static const TriangleMesh m = normalize_to_unit_ball(gen_cube());
    return m;
}

const UdfOracle& oracle() {
    static const UdfOracle o(cube());
    return o;
}

// 2000 surface points, the first `edges` of them labeled as edges.
EdgeLabeledCloud labeled(std::size_t edges, std::size_t total = 2000) {
    EdgeLabeledCloud c;
    c.points = sample_surface_uniform(cube(), total, 1);
    for (std::size_t i = 0; i < total; ++i) {
        const bool e = i < edges;
        c.pauly.push_back(0.0);
        c.p_value.push_back(e ? 0.0 : 1.0);
        c.ks_label.push_back(e);
        (e ? c.edge : c.flat).push_back(i);
    }
    return c;
}

std::size_t count_tag(const TrainingSet& s, Provenance p) {
    return static_cast<std::size_t>(std::count(s.provenance.begin(), s.provenance.end(), p));
}

bool within_sigma(std::size_t hits, std::size_t n, double p, double sigmas) {
    return std::abs(static_cast<double>(hits) - n * p) <= sigmas * std::sqrt(n * p * (1 - p)) + 1e-9;
}

}  // namespace

TEST_CASE("complexity and mixture weight") {
    CHECK(surface_complexity(labeled(0)) == 0.0);
    CHECK(surface_complexity(labeled(2000)) == 1.0);
    CHECK(surface_complexity(labeled(500)) == 0.25);
    CHECK(edge_mixture_weight(0.3, 0.0) == 0.3);
    CHECK(edge_mixture_weight(0.3, 1.0) == 1.0);
    CHECK(edge_mixture_weight(0.2, 0.6) == doctest::Approx(0.68));
    CHECK_THROWS_AS(surface_complexity(EdgeLabeledCloud{}), InvalidInputError);
}

TEST_CASE("ball only") {
    SamplingConfig cfg;
    cfg.nu = 0.0;
    cfg.n = 20000;
    cfg.seed = 4;
    const TrainingSet s = sample_training_set(labeled(500), oracle(), cfg);
    CHECK(count_tag(s, Provenance::Ball) == cfg.n);
    std::size_t inner = 0;
    for (const auto& p : s.clean_inputs) {
        CHECK(p.norm() <= 1.0);
        inner += p.norm() < 0.5;
    }
    CHECK(std::abs(static_cast<double>(inner) / cfg.n - 0.125) < 0.02);
}

TEST_CASE("surface edge only") {
    SamplingConfig cfg;
    cfg.nu = 1.0;
    cfg.xi = 1.0;
    cfg.seed = 5;
    const auto cloud = labeled(500);
    const TrainingSet s = sample_training_set(cloud, oracle(), cfg);
    CHECK(count_tag(s, Provenance::SurfaceEdge) == cfg.n);
    std::set<std::tuple<double, double, double>> edge_pts;
    for (auto i : cloud.edge) {
        const auto& p = cloud.points.points[i];
        edge_pts.emplace(p.x(), p.y(), p.z());
    }
    for (const auto& p : s.clean_inputs) CHECK(edge_pts.count({p.x(), p.y(), p.z()}) == 1);
}

TEST_CASE("tag fractions follow the mixture") {
    SamplingConfig cfg;
    cfg.n = 10000;
    cfg.seed = 6;
    const auto cloud = labeled(500);
    const TrainingSet s = sample_training_set(cloud, oracle(), cfg);
    CHECK(std::abs(static_cast<double>(count_tag(s, Provenance::SurfaceEdge)) / cfg.n - 0.63) < 0.015);

    cfg.n = 100000;
    cfg.xi = 0.3;
    const TrainingSet big = sample_training_set(cloud, oracle(), cfg);
    const double nu1 = edge_mixture_weight(0.25, 0.3);
    CHECK(within_sigma(count_tag(big, Provenance::Ball), cfg.n, 0.1, 4));
    CHECK(within_sigma(count_tag(big, Provenance::SurfaceFlat), cfg.n, 0.9 * (1 - nu1), 4));
    CHECK(within_sigma(count_tag(big, Provenance::SurfaceEdge), cfg.n, 0.9 * nu1, 4));

    cfg.xi = 0.0;
    const TrainingSet base = sample_training_set(cloud, oracle(), cfg);
    const std::size_t surface = cfg.n - count_tag(base, Provenance::Ball);
    CHECK(within_sigma(count_tag(base, Provenance::SurfaceEdge), surface, 0.25, 4));
}

TEST_CASE("targets, noise and determinism") {
    SamplingConfig cfg;
    cfg.seed = 7;
    const auto cloud = labeled(300);
    const TrainingSet s = sample_training_set(cloud, oracle(), cfg);
    REQUIRE(s.size() == cfg.n);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(std::abs(s.targets[i] - oracle().udf(s.inputs[i])) <= 1e-9);

    const TrainingSet again = sample_training_set(cloud, oracle(), cfg);
    CHECK(again.inputs == s.inputs);
    CHECK(again.targets == s.targets);
    CHECK(again.provenance == s.provenance);

    cfg.noise_sigma = 0.0;
    const TrainingSet clean = sample_training_set(cloud, oracle(), cfg);
    for (std::size_t i = 0; i < clean.size(); ++i)
        if (clean.provenance[i] != Provenance::Ball) CHECK(clean.targets[i] <= 1e-9);
}

TEST_CASE("empty edge subset falls back with a warning") {
    SamplingConfig cfg;
    cfg.seed = 8;
    const TrainingSet s = sample_training_set(labeled(0), oracle(), cfg);
    CHECK(count_tag(s, Provenance::SurfaceEdge) == 0);
    CHECK(s.fallback_draws > 0);
    CHECK_FALSE(s.warnings.empty());
}

TEST_CASE("config validation and cache round trip") {
    SamplingConfig cfg;
    cfg.xi = 1.5;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgumentError);
    cfg.xi = 0.6;
    cfg.noise_sigma = -1;
    CHECK_THROWS_AS(cfg.validate(), InvalidArgumentError);

    SamplingConfig ok;
    ok.n = 50;
    const TrainingSet s = sample_training_set(labeled(100), oracle(), ok);
    const auto path = std::filesystem::temp_directory_path() / "ksudf_train.bin";
    save_training_set(s, path);
    const TrainingSet r = load_training_set(path);
    CHECK(r.inputs == s.inputs);
    CHECK(r.clean_inputs == s.clean_inputs);
    CHECK(r.targets == s.targets);
    CHECK(r.provenance == s.provenance);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_training_set(path), InvalidInputError);
    CHECK(std::string(to_string(Provenance::SurfaceFlat)) == "surface_flat");
}
