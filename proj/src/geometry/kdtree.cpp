#include "ksudf/geometry/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ksudf/common/error.hpp"

namespace ksudf {

KdTree::KdTree(Points3 points, std::size_t leaf_size)
    : points_(std::move(points)), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
    if (points_.empty()) throw InvalidInputError("cannot index an empty point set");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
    build(0, points_.size());
}

int KdTree::build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_size_) return id;

    Vec3 lo = points_[order_[begin]], hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    int dim;
    (hi - lo).maxCoeff(&dim);
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::size_t a, std::size_t b) { return points_[a][dim] < points_[b][dim]; });
    const double split = points_[order_[mid]][dim];

    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    nodes_[id].dim = dim;
    nodes_[id].split = split;
    return id;
}

void KdTree::search(int node_id, const Vec3& q, std::size_t k, std::optional<std::size_t> exclude_index,
                    bool exclude_coincident, std::vector<Candidate>& heap) const {
    const Node& node = nodes_[node_id];
    if (node.left < 0) {
        for (std::size_t i = node.begin; i < node.end; ++i) {
            const std::size_t idx = order_[i];
            if (exclude_index && idx == *exclude_index) continue;
            const double d2 = (points_[idx] - q).squaredNorm();
            if (exclude_coincident && d2 == 0.0) continue;
            const Candidate c{d2, idx};
            if (heap.size() < k) {
                heap.push_back(c);
                std::push_heap(heap.begin(), heap.end());
            } else if (c < heap.front()) {
                std::pop_heap(heap.begin(), heap.end());
                heap.back() = c;
                std::push_heap(heap.begin(), heap.end());
            }
        }
        return;
    }
    const double diff = q[node.dim] - node.split;
    const int near = diff < 0 ? node.left : node.right;
    const int far = diff < 0 ? node.right : node.left;
    search(near, q, k, exclude_index, exclude_coincident, heap);
    // Equal-distance candidates can still win on index, hence the non-strict test.
    if (heap.size() < k || diff * diff <= heap.front().d2) {
        search(far, q, k, exclude_index, exclude_coincident, heap);
    }
}

Neighborhood KdTree::collect(const Vec3& q, std::vector<Candidate>& heap) const {
    std::sort_heap(heap.begin(), heap.end());
    Neighborhood n;
    n.centroid = q;
    n.neighbors.reserve(heap.size());
    for (const auto& c : heap) {
        n.neighbors.push_back(points_[c.index]);
        n.indices.push_back(c.index);
        n.distances.push_back(std::sqrt(c.d2));
    }
    return n;
}

Neighborhood KdTree::knn(const Vec3& query, std::size_t k) const {
    std::vector<Candidate> heap;
    heap.reserve(k + 1);
    if (k > 0) search(0, query, k, std::nullopt, true, heap);
    if (heap.size() < k) {
        throw InvalidArgumentError("requested " + std::to_string(k) + " neighbors but only " +
                                   std::to_string(heap.size()) + " are available");
    }
    return collect(query, heap);
}

Neighborhood KdTree::knn_member(std::size_t member, std::size_t k) const {
    if (member >= points_.size()) throw InvalidArgumentError("member index out of range");
    if (k + 1 > points_.size()) {
        throw InvalidArgumentError("requested " + std::to_string(k) + " neighbors of a member in a set of " +
                                   std::to_string(points_.size()));
    }
    std::vector<Candidate> heap;
    heap.reserve(k + 1);
    if (k > 0) search(0, points_[member], k, member, false, heap);
    return collect(points_[member], heap);
}

KdTree::Nearest KdTree::nearest(const Vec3& query) const {
    std::vector<Candidate> heap;
    search(0, query, 1, std::nullopt, false, heap);
    return {heap.front().index, std::sqrt(heap.front().d2)};
}

}  // namespace ksudf
