#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "ksudf/geometry/types.hpp"

namespace ksudf {

/// A centroid and its k nearest neighbors, sorted by nondecreasing distance.
struct Neighborhood {
    Vec3 centroid;
    Points3 neighbors;
    std::vector<std::size_t> indices;
    std::vector<double> distances;

    std::size_t k() const { return neighbors.size(); }
};

// Static k-d tree over a 3D point set. Immutable after construction, so
// concurrent queries are safe.
class KdTree {
public:
    explicit KdTree(Points3 points, std::size_t leaf_size = 10);

    const Points3& points() const { return points_; }
    std::size_t size() const { return points_.size(); }

    /// k nearest indexed points to `query`. Indexed points coinciding
    /// exactly with `query` are skipped. Ties are broken by smaller index.
    /// Throws InvalidArgumentError when fewer than k candidates exist.
    Neighborhood knn(const Vec3& query, std::size_t k) const;

    /// k nearest neighbors of the indexed point `member`, excluding itself.
    Neighborhood knn_member(std::size_t member, std::size_t k) const;

    struct Nearest {
        std::size_t index;
        double distance;
    };
    /// Single closest indexed point (no exclusion).
    Nearest nearest(const Vec3& query) const;

private:
    struct Node {
        std::size_t begin, end;  // range into order_
        int left = -1, right = -1;
        int dim = 0;
        double split = 0.0;
    };

    struct Candidate {
        double d2;
        std::size_t index;
        bool operator<(const Candidate& o) const { return d2 < o.d2 || (d2 == o.d2 && index < o.index); }
    };

    int build(std::size_t begin, std::size_t end);
    void search(int node, const Vec3& q, std::size_t k, std::optional<std::size_t> exclude_index,
                bool exclude_coincident, std::vector<Candidate>& heap) const;
    Neighborhood collect(const Vec3& q, std::vector<Candidate>& heap) const;

    Points3 points_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    std::size_t leaf_size_;
};

}  // namespace ksudf
