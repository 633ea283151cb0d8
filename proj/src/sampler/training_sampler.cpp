#include "ksudf/sampler/training_sampler.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>

#include "ksudf/common/error.hpp"
#include "ksudf/common/rng.hpp"

namespace ksudf {

void SamplingConfig::validate() const {
    if (n < 1) throw InvalidArgumentError("training point count must be at least 1");
    if (!(nu >= 0.0 && nu <= 1.0)) throw InvalidArgumentError("nu must lie in [0, 1]");
    if (!(xi >= 0.0 && xi <= 1.0)) throw InvalidArgumentError("xi must lie in [0, 1]");
    if (!(noise_sigma >= 0.0)) throw InvalidArgumentError("noise_sigma must be nonnegative");
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::Ball: return "ball";
        case Provenance::SurfaceFlat: return "surface_flat";
        case Provenance::SurfaceEdge: return "surface_edge";
    }
    return "unknown";
}

double surface_complexity(const EdgeLabeledCloud& cloud) {
    if (cloud.size() == 0) throw InvalidInputError("complexity of an empty cloud");
    return static_cast<double>(cloud.edge.size()) / static_cast<double>(cloud.size());
}

double edge_mixture_weight(double tau, double xi) { return xi + (1.0 - xi) * tau; }

Vec3 sample_unit_ball(Rng& rng) {
    for (;;) {
        const Vec3 p(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        if (p.squaredNorm() <= 1.0) return p;
    }
}

TrainingSet sample_training_set(const EdgeLabeledCloud& cloud, const UdfOracle& oracle,
                                const SamplingConfig& cfg) {
    cfg.validate();
    if (cloud.size() == 0) throw InvalidInputError("training set needs a labeled surface cloud");
    const double nu1 = edge_mixture_weight(surface_complexity(cloud), cfg.xi);

    Rng rng(cfg.seed);
    TrainingSet set;
    set.inputs.reserve(cfg.n);
    set.clean_inputs.reserve(cfg.n);
    set.provenance.reserve(cfg.n);
    const auto& pts = cloud.points.points;
    for (std::size_t i = 0; i < cfg.n; ++i) {
        // Three uniforms per point keep the stream aligned across configs.
        const double u_ambient = rng.uniform();
        const double u_edge = rng.uniform();
        const double u_pick = rng.uniform();
        if (u_ambient >= cfg.nu) {
            set.clean_inputs.push_back(sample_unit_ball(rng));
            set.provenance.push_back(Provenance::Ball);
            continue;
        }
        bool want_edge = u_edge < nu1;
        if (want_edge && cloud.edge.empty()) {
            want_edge = false;
            ++set.fallback_draws;
        } else if (!want_edge && cloud.flat.empty()) {
            want_edge = true;
            ++set.fallback_draws;
        }
        const auto& pool = want_edge ? cloud.edge : cloud.flat;
        auto slot = static_cast<std::size_t>(u_pick * static_cast<double>(pool.size()));
        if (slot >= pool.size()) slot = pool.size() - 1;
        set.clean_inputs.push_back(pts[pool[slot]]);
        set.provenance.push_back(want_edge ? Provenance::SurfaceEdge : Provenance::SurfaceFlat);
    }
    if (set.fallback_draws > 0) {
        set.warnings.push_back(std::to_string(set.fallback_draws) +
                               " surface draws fell back to the other subset because one was empty");
    }

    for (const auto& p : set.clean_inputs) {
        const Vec3 noise(rng.normal(), rng.normal(), rng.normal());
        set.inputs.push_back(p + cfg.noise_sigma * noise);
    }
    set.targets = oracle.udf_batch(set.inputs);
    return set;
}

void write_training_csv(const TrainingSet& set, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out << std::setprecision(17) << "x,y,z,udf,tag\n";
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& p = set.inputs[i];
        out << p.x() << ',' << p.y() << ',' << p.z() << ',' << set.targets[i] << ','
            << to_string(set.provenance[i]) << '\n';
    }
}

namespace {

constexpr char kMagic[4] = {'K', 'S', 'T', 'S'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& path) {
    T v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
        throw FormatError("truncated training cache " + path.string(), static_cast<std::size_t>(in.gcount()));
    }
    return v;
}

}  // namespace

void save_training_set(const TrainingSet& set, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot write " + path.string());
    out.write(kMagic, 4);
    put(out, kVersion);
    put(out, static_cast<std::uint64_t>(set.size()));
    for (std::size_t i = 0; i < set.size(); ++i) {
        for (int d = 0; d < 3; ++d) put(out, set.inputs[i][d]);
        for (int d = 0; d < 3; ++d) put(out, set.clean_inputs[i][d]);
        put(out, set.targets[i]);
        put(out, static_cast<std::uint8_t>(set.provenance[i]));
    }
    put(out, static_cast<std::uint64_t>(set.fallback_draws));
}

TrainingSet load_training_set(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInputError("file not found: " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("not a training cache: " + path.string(), 0);
    }
    if (get<std::uint32_t>(in, path) != kVersion) throw FormatError("unsupported training cache version", 4);
    const auto n = get<std::uint64_t>(in, path);
    TrainingSet set;
    for (std::uint64_t i = 0; i < n; ++i) {
        Vec3 x, c;
        for (int d = 0; d < 3; ++d) x[d] = get<double>(in, path);
        for (int d = 0; d < 3; ++d) c[d] = get<double>(in, path);
        set.inputs.push_back(x);
        set.clean_inputs.push_back(c);
        set.targets.push_back(get<double>(in, path));
        const auto tag = get<std::uint8_t>(in, path);
        if (tag > 2) throw FormatError("bad provenance tag", static_cast<std::size_t>(in.tellg()));
        set.provenance.push_back(static_cast<Provenance>(tag));
    }
    set.fallback_draws = static_cast<std::size_t>(get<std::uint64_t>(in, path));
    return set;
}

}  // namespace ksudf
