#include "ksudf/eval/point_cloud_metrics.hpp"

#include <algorithm>
#include <limits>

#include "ksudf/common/error.hpp"
#include "ksudf/geometry/kdtree.hpp"

namespace ksudf {

namespace {

void require_nonempty(const Points3& a, const Points3& b) {
    if (a.empty() || b.empty()) throw InvalidInputError("point cloud distance needs nonempty clouds");
}

std::vector<double> nearest_distances(const Points3& from, const Points3& to) {
    const KdTree tree(to);
    std::vector<double> d(from.size());
    for (std::size_t i = 0; i < from.size(); ++i) d[i] = tree.nearest(from[i]).distance;
    return d;
}

}  // namespace

double directed_hausdorff(const Points3& a, const Points3& b) {
    require_nonempty(a, b);
    const auto d = nearest_distances(a, b);
    return *std::max_element(d.begin(), d.end());
}

double hausdorff(const Points3& a, const Points3& b) {
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double chamfer(const Points3& a, const Points3& b) {
    require_nonempty(a, b);
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    return mean(nearest_distances(a, b)) + mean(nearest_distances(b, a));
}

std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n) {
    if (cost.size() != n * n) throw InvalidInputError("assignment cost matrix must be n x n");
    if (n == 0) return {};
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials formulation; p[j] is the row matched to column j.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> match(n);
    for (std::size_t j = 1; j <= n; ++j) match[p[j] - 1] = j - 1;
    return match;
}

double wasserstein(const Points3& a, const Points3& b) {
    require_nonempty(a, b);
    if (a.size() != b.size()) throw InvalidInputError("wasserstein distance needs clouds of equal size");
    if (a.size() > kMaxAssignmentSize) {
        throw CapacityError("wasserstein distance supports at most " + std::to_string(kMaxAssignmentSize) +
                            " points per cloud");
    }
    const std::size_t n = a.size();
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = (a[i] - b[j]).norm();
    const auto match = solve_assignment(cost, n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += cost[i * n + match[i]];
    return total;
}

}  // namespace ksudf
