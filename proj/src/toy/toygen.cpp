#include "ksudf/toy/toygen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

#include "ksudf/circular/circular_stats.hpp"
#include "ksudf/common/error.hpp"
#include "ksudf/common/rng.hpp"
#include "ksudf/edge/edge_detect.hpp"
#include "ksudf/geometry/kdtree.hpp"

namespace ksudf {

namespace {

const std::pair<ToyKind, const char*> kKindNames[] = {
    {ToyKind::Cone, "cone"},           {ToyKind::Fold, "fold"},
    {ToyKind::Plate, "plate"},         {ToyKind::Contour2d, "contour2d"},
    {ToyKind::Cube, "cube"},           {ToyKind::Wedge, "wedge"},
    {ToyKind::Icosphere, "icosphere"}, {ToyKind::SpikedIcosphere, "spiked_icosphere"},
    {ToyKind::FoldPrism, "fold_prism"},
};

void check_psi(double psi) {
    if (!(psi >= 0.0 && psi < kPi / 2)) throw InvalidArgumentError("psi must lie in [0, pi/2)");
}

void check_count(std::size_t count) {
    if (count < 1) throw InvalidArgumentError("sample count must be at least 1");
}

// Prism over a counter-clockwise polygon, extruded over z in [-h, h].
// `cap` triangulates the polygon by vertex index.
TriangleMesh extrude(const std::vector<Vec2>& poly, const std::vector<Triangle>& cap, double h) {
    const int n = static_cast<int>(poly.size());
    Points3 v;
    for (const auto& p : poly) v.emplace_back(p.x(), p.y(), -h);
    for (const auto& p : poly) v.emplace_back(p.x(), p.y(), h);
    std::vector<Triangle> t;
    for (const auto& c : cap) {
        t.push_back({c[0], c[2], c[1]});          // bottom faces -z
        t.push_back({c[0] + n, c[1] + n, c[2] + n});
    }
    for (int i = 0; i < n; ++i) {
        const int j = (i + 1) % n;
        t.push_back({i, j, j + n});
        t.push_back({i, j + n, i + n});
    }
    return TriangleMesh(std::move(v), t);
}

}  // namespace

const char* to_string(ToyKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "unknown";
}

ToyKind parse_toy_kind(const std::string& name) {
    for (const auto& [k, n] : kKindNames)
        if (name == n) return k;
    throw InvalidArgumentError("unknown toy kind: " + name);
}

bool is_watertight_kind(ToyKind kind) {
    switch (kind) {
        case ToyKind::Cube:
        case ToyKind::Wedge:
        case ToyKind::Icosphere:
        case ToyKind::SpikedIcosphere:
        case ToyKind::FoldPrism: return true;
        default: return false;
    }
}

void ToySpec::validate() const {
    if (kind == ToyKind::Cone || kind == ToyKind::Fold || kind == ToyKind::Contour2d) check_psi(psi);
    if (!(d >= 0.0)) throw InvalidArgumentError("plate thickness must be nonnegative");
    check_count(count);
    if (subdivisions < 0 || subdivisions > 5) throw InvalidArgumentError("subdivision level must lie in [0, 5]");
}

Points3 sample_unit_disk(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    Points3 pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double r = std::sqrt(rng.uniform());
        const double theta = kTwoPi * rng.uniform();
        pts.emplace_back(r * std::cos(theta), r * std::sin(theta), 0.0);
    }
    return pts;
}

PointCloud gen_cone(double psi, std::size_t count, std::uint64_t seed) {
    check_psi(psi);
    check_count(count);
    Points3 pts = sample_unit_disk(count, seed);
    if (psi == 0.0) return {std::move(pts), std::nullopt};
    const double c = std::cos(psi), s = std::sin(psi);
    // Rotating x about the axis orthogonal to its radial plane keeps it in
    // that plane: the radial part shrinks by cos(psi), the rest goes to z.
    for (auto& p : pts) {
        const double r = std::hypot(p.x(), p.y());
        p = Vec3(c * p.x(), c * p.y(), s * r);
    }
    return {std::move(pts), std::nullopt};
}

PointCloud gen_fold(double psi, std::size_t count, std::uint64_t seed) {
    check_psi(psi);
    check_count(count);
    Points3 pts = sample_unit_disk(count, seed);
    if (psi == 0.0) return {std::move(pts), std::nullopt};
    const double c = std::cos(psi), s = std::sin(psi);
    for (auto& p : pts) {
        const double a = p.x() >= 0.0 ? 1.0 : -1.0;
        // rotation about y by a*psi applied to (x, y, 0)
        p = Vec3(c * p.x(), p.y(), -a * s * p.x());
    }
    return {std::move(pts), std::nullopt};
}

PointCloud gen_plate(double d, std::size_t count, std::uint64_t seed) {
    if (!(d >= 0.0)) throw InvalidArgumentError("plate thickness must be nonnegative");
    check_count(count);
    const std::size_t lower = (count + 1) / 2;
    Points3 pts = sample_unit_disk(lower, Rng::derive(seed, 0));
    for (auto p : sample_unit_disk(count - lower, Rng::derive(seed, 1))) {
        p.z() = d;
        pts.push_back(p);
    }
    return {std::move(pts), std::nullopt};
}

Points2 gen_contour2d(double psi, std::size_t count, std::uint64_t seed) {
    check_psi(psi);
    check_count(count);
    Rng rng(seed);
    const double width = 2.0 / static_cast<double>(count);
    const double c = std::cos(psi), s = std::sin(psi);
    Points2 pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double x = -1.0 + width * (static_cast<double>(i) + rng.uniform());
        if (psi == 0.0) {
            pts.emplace_back(x, 0.0);
        } else {
            const double a = x > 0.0 ? s : (x < 0.0 ? -s : 0.0);
            pts.emplace_back(c * x, a * x);
        }
    }
    return pts;
}

TriangleMesh gen_cube() {
    Points3 v;
    for (int i = 0; i < 8; ++i) v.emplace_back(i & 1 ? 0.5 : -0.5, i & 2 ? 0.5 : -0.5, i & 4 ? 0.5 : -0.5);
    const std::vector<Triangle> t = {
        {0, 2, 3}, {0, 3, 1},  // z-
        {4, 5, 7}, {4, 7, 6},  // z+
        {0, 1, 5}, {0, 5, 4},  // y-
        {2, 6, 7}, {2, 7, 3},  // y+
        {0, 4, 6}, {0, 6, 2},  // x-
        {1, 3, 7}, {1, 7, 5},  // x+
    };
    return TriangleMesh(std::move(v), t);
}

TriangleMesh gen_wedge() {
    return extrude({{-0.4, -1.0}, {0.4, -1.0}, {0.0, 1.0}}, {{0, 1, 2}}, 0.5);
}

TriangleMesh gen_fold_prism() {
    // T, R, R', N, L', L
    const std::vector<Vec2> poly = {{0.0, -1.0}, {0.6, 1.0},   {0.36, 1.0},
                                    {0.0, -0.2}, {-0.36, 1.0}, {-0.6, 1.0}};
    return extrude(poly, {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}}, 0.5);
}

TriangleMesh gen_icosphere(int subdivisions) {
    if (subdivisions < 0 || subdivisions > 5) throw InvalidArgumentError("subdivision level must lie in [0, 5]");
    const double g = (1.0 + std::sqrt(5.0)) / 2.0;
    Points3 v = {{-1, g, 0}, {1, g, 0}, {-1, -g, 0}, {1, -g, 0}, {0, -1, g}, {0, 1, g},
                 {0, -1, -g}, {0, 1, -g}, {g, 0, -1}, {g, 0, 1}, {-g, 0, -1}, {-g, 0, 1}};
    for (auto& p : v) p.normalize();
    std::vector<Triangle> t = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            const int id = static_cast<int>(v.size()) - 1;
            mid.emplace(key, id);
            return id;
        };
        std::vector<Triangle> next;
        next.reserve(t.size() * 4);
        for (const auto& f : t) {
            const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]), ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        t = std::move(next);
    }
    return TriangleMesh(std::move(v), t);
}

TriangleMesh gen_spiked_icosphere(int subdivisions, double spike_radius) {
    if (!(spike_radius > 0.0)) throw InvalidArgumentError("spike radius must be positive");
    const TriangleMesh base = gen_icosphere(subdivisions);
    Points3 v = base.vertices();
    v[0] *= spike_radius;
    return TriangleMesh(std::move(v), base.triangles());
}

TriangleMesh gen_watertight(const ToySpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case ToyKind::Cube: return gen_cube();
        case ToyKind::Wedge: return gen_wedge();
        case ToyKind::Icosphere: return gen_icosphere(spec.subdivisions);
        case ToyKind::SpikedIcosphere: return gen_spiked_icosphere(spec.subdivisions);
        case ToyKind::FoldPrism: return gen_fold_prism();
        default: throw InvalidArgumentError(std::string("not a watertight toy kind: ") + to_string(spec.kind));
    }
}

PointCloud gen_toy_cloud(const ToySpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case ToyKind::Cone: return gen_cone(spec.psi, spec.count, spec.seed);
        case ToyKind::Fold: return gen_fold(spec.psi, spec.count, spec.seed);
        case ToyKind::Plate: return gen_plate(spec.d, spec.count, spec.seed);
        case ToyKind::Contour2d: {
            PointCloud out;
            for (const auto& p : gen_contour2d(spec.psi, spec.count, spec.seed)) out.points.emplace_back(p.x(), p.y(), 0.0);
            return out;
        }
        default: throw InvalidArgumentError(std::string("not a point-cloud toy kind: ") + to_string(spec.kind));
    }
}

ToyDescriptors toy_descriptors(const Points3& cloud, std::size_t k) {
    const KdTree tree(cloud);
    const Neighborhood nb = tree.knn(Vec3::Zero(), k);
    ToyDescriptors out;
    out.pauly = pauly_descriptor(nb);
    out.ks_p_value = ks_descriptor(nb, 0.0).p_value;
    return out;
}

ToyDescriptors toy_descriptors_2d(const Points2& contour, std::size_t k) {
    if (contour.size() < k) throw InvalidArgumentError("contour has fewer than k points");
    std::vector<std::size_t> idx(contour.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return contour[a].squaredNorm() < contour[b].squaredNorm(); });
    Points2 nb;
    for (std::size_t i = 0; i < k; ++i) nb.push_back(contour[idx[i]]);
    ToyDescriptors out;
    out.pauly = pauly_descriptor_2d(Vec2::Zero(), nb);
    out.odds_p_value = odds_ratio_descriptor_2d(Vec2::Zero(), nb).p_value;
    return out;
}

}  // namespace ksudf
