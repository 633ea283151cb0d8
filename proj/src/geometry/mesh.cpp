#include "ksudf/geometry/mesh.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <utility>

#include "ksudf/common/error.hpp"

namespace ksudf {

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

TriangleMesh::TriangleMesh(Points3 vertices, const std::vector<Triangle>& triangles,
                           std::size_t* dropped)
    : vertices_(std::move(vertices)) {
    const auto n = static_cast<long long>(vertices_.size());
    std::size_t discarded = 0;
    triangles_.reserve(triangles.size());
    areas_.reserve(triangles.size());
    for (const auto& tri : triangles) {
        for (int idx : tri) {
            if (idx < 0 || idx >= n) {
                throw InvalidInputError("triangle references vertex " + std::to_string(idx) +
                                        " of " + std::to_string(n));
            }
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
            ++discarded;
            continue;
        }
        const double area = triangle_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
        if (!(area > 0.0)) {
            ++discarded;
            continue;
        }
        triangles_.push_back(tri);
        areas_.push_back(area);
    }
    if (dropped) *dropped = discarded;
    if (triangles_.empty()) throw InvalidInputError("mesh has no non-degenerate triangle");
}

double TriangleMesh::total_area() const {
    double sum = 0.0;
    for (double a : areas_) sum += a;
    return sum;
}

std::array<Vec3, 3> TriangleMesh::corners(std::size_t t) const {
    const auto& tri = triangles_[t];
    return {vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]};
}

namespace {

std::vector<std::pair<int, int>> directed_edges(const std::vector<Triangle>& tris) {
    std::vector<std::pair<int, int>> edges;
    edges.reserve(tris.size() * 3);
    for (const auto& t : tris) {
        for (int i = 0; i < 3; ++i) {
            const int a = t[i], b = t[(i + 1) % 3];
            edges.emplace_back(std::min(a, b), std::max(a, b));
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

}  // namespace

std::size_t TriangleMesh::edge_count() const {
    auto edges = directed_edges(triangles_);
    return static_cast<std::size_t>(std::unique(edges.begin(), edges.end()) - edges.begin());
}

long TriangleMesh::euler_characteristic() const {
    std::set<int> used;
    for (const auto& t : triangles_) used.insert(t.begin(), t.end());
    return static_cast<long>(used.size()) - static_cast<long>(edge_count()) +
           static_cast<long>(triangles_.size());
}

bool TriangleMesh::is_closed_manifold() const {
    const auto edges = directed_edges(triangles_);
    for (std::size_t i = 0; i < edges.size();) {
        std::size_t j = i;
        while (j < edges.size() && edges[j] == edges[i]) ++j;
        if (j - i != 2) return false;
        i = j;
    }
    return true;
}

TriangleMesh normalize_to_unit_ball(const TriangleMesh& mesh) {
    if (mesh.vertices().empty()) throw InvalidInputError("cannot normalize an empty mesh");
    Vec3 centroid = Vec3::Zero();
    for (const auto& v : mesh.vertices()) centroid += v;
    centroid /= static_cast<double>(mesh.vertex_count());

    Points3 shifted;
    shifted.reserve(mesh.vertex_count());
    double max_norm = 0.0;
    for (const auto& v : mesh.vertices()) {
        shifted.push_back(v - centroid);
        max_norm = std::max(max_norm, shifted.back().norm());
    }
    if (!(max_norm > 0.0)) throw InvalidInputError("all mesh vertices coincide");
    for (auto& v : shifted) v /= max_norm;
    return TriangleMesh(std::move(shifted), mesh.triangles());
}

}  // namespace ksudf
