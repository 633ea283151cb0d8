#include "ksudf/udf/udf_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "ksudf/common/error.hpp"

namespace ksudf {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    // Voronoi-region classification, after Ericson's Real-Time Collision Detection.
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
    }

    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

UdfOracle::UdfOracle(TriangleMesh mesh) : mesh_(std::move(mesh)) {
    if (mesh_.empty()) throw InvalidInputError("UDF oracle needs a nonempty mesh");
    const std::size_t n = mesh_.triangle_count();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    centers_.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const auto [a, b, c] = mesh_.corners(t);
        centers_[t] = (a + b + c) / 3.0;
    }
    nodes_.reserve(2 * n / kLeafSize + 2);
    build(0, n);
}

int UdfOracle::build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Eigen::AlignedBox3d box;
    Eigen::AlignedBox3d center_box;
    for (std::size_t i = begin; i < end; ++i) {
        for (const auto& v : mesh_.corners(order_[i])) box.extend(v);
        center_box.extend(centers_[order_[i]]);
    }
    nodes_[id].box = box;
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    if (end - begin <= kLeafSize) return id;

    int axis;
    center_box.sizes().maxCoeff(&axis);
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::size_t a, std::size_t b) { return centers_[a][axis] < centers_[b][axis]; });
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

ClosestPoint UdfOracle::query(const Vec3& x) const {
    ClosestPoint best{std::numeric_limits<double>::infinity(), Vec3::Zero(), 0};
    double best_d2 = std::numeric_limits<double>::infinity();

    std::vector<std::pair<double, int>> stack;
    stack.reserve(64);
    stack.emplace_back(nodes_[0].box.squaredExteriorDistance(x), 0);
    while (!stack.empty()) {
        const auto [box_d2, id] = stack.back();
        stack.pop_back();
        if (box_d2 > best_d2) continue;
        const Node& node = nodes_[id];
        if (node.left < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const std::size_t t = order_[i];
                const auto [a, b, c] = mesh_.corners(t);
                const Vec3 q = closest_point_on_triangle(x, a, b, c);
                const double d2 = (q - x).squaredNorm();
                if (d2 < best_d2 || (d2 == best_d2 && t < best.triangle)) {
                    best_d2 = d2;
                    best.point = q;
                    best.triangle = t;
                }
            }
            continue;
        }
        const double dl = nodes_[node.left].box.squaredExteriorDistance(x);
        const double dr = nodes_[node.right].box.squaredExteriorDistance(x);
        // Push the farther child first so the nearer one is visited next.
        if (dl <= dr) {
            stack.emplace_back(dr, node.right);
            stack.emplace_back(dl, node.left);
        } else {
            stack.emplace_back(dl, node.left);
            stack.emplace_back(dr, node.right);
        }
    }
    best.distance = std::sqrt(best_d2);
    return best;
}

ClosestPoint UdfOracle::brute_force(const Vec3& x) const {
    ClosestPoint best{std::numeric_limits<double>::infinity(), Vec3::Zero(), 0};
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < mesh_.triangle_count(); ++t) {
        const auto [a, b, c] = mesh_.corners(t);
        const Vec3 q = closest_point_on_triangle(x, a, b, c);
        const double d2 = (q - x).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best.point = q;
            best.triangle = t;
        }
    }
    best.distance = std::sqrt(best_d2);
    return best;
}

std::vector<double> UdfOracle::udf_batch(std::span<const Vec3> xs) const {
    std::vector<double> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(udf(x));
    return out;
}

}  // namespace ksudf
