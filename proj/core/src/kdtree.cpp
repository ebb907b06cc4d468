#include "n2nsdf/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "n2nsdf/errors.hpp"

namespace n2nsdf {

namespace {

constexpr std::uint32_t kLeafSize = 12;

bool ranks_before(const KdTree::Neighbor& a, const KdTree::Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.index < b.index);
}

double box_distance2(const Vec3& q, const Vec3& lo, const Vec3& hi) {
    double d2 = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
        double d = 0.0;
        if (q[axis] < lo[axis]) {
            d = lo[axis] - q[axis];
        } else if (q[axis] > hi[axis]) {
            d = q[axis] - hi[axis];
        }
        d2 += d * d;
    }
    return d2;
}

}  // namespace

double squared_distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x() - b.x();
    const double dy = a.y() - b.y();
    const double dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
}

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
    if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
        throw std::length_error("KdTree: too many points");
    }
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    if (!points_.empty()) {
        nodes_.reserve(2 * points_.size() / kLeafSize + 2);
        build(0, static_cast<std::uint32_t>(points_.size()));
    }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    node.lo = points_[order_[begin]];
    node.hi = node.lo;
    for (std::uint32_t i = begin; i < end; ++i) {
        node.lo = node.lo.cwiseMin(points_[order_[i]]);
        node.hi = node.hi.cwiseMax(points_[order_[i]]);
    }
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);

    if (end - begin <= kLeafSize) return id;
    int axis = 0;
    (node.hi - node.lo).maxCoeff(&axis);
    if (node.hi[axis] == node.lo[axis]) return id;  // all points coincide

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double pa = points_[a][axis];
                         const double pb = points_[b][axis];
                         return pa < pb || (pa == pb && a < b);
                     });
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    nodes_[id].left = left;
    nodes_[id].right = right;
    return id;
}

void KdTree::search(std::int32_t id, const Vec3& q, std::size_t k, std::vector<Neighbor>& heap) const {
    const Node& node = nodes_[id];
    if (node.left < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            const std::uint32_t idx = order_[i];
            const Neighbor cand{idx, squared_distance(q, points_[idx])};
            if (heap.size() < k) {
                heap.push_back(cand);
                std::push_heap(heap.begin(), heap.end(), ranks_before);
            } else if (ranks_before(cand, heap.front())) {
                std::pop_heap(heap.begin(), heap.end(), ranks_before);
                heap.back() = cand;
                std::push_heap(heap.begin(), heap.end(), ranks_before);
            }
        }
        return;
    }
    std::int32_t children[2] = {node.left, node.right};
    double dist[2] = {box_distance2(q, nodes_[node.left].lo, nodes_[node.left].hi),
                      box_distance2(q, nodes_[node.right].lo, nodes_[node.right].hi)};
    if (dist[1] < dist[0]) {
        std::swap(children[0], children[1]);
        std::swap(dist[0], dist[1]);
    }
    for (int c = 0; c < 2; ++c) {
        // Equal distances are still visited so index tie-breaks stay exact.
        if (heap.size() == k && dist[c] > heap.front().dist2) continue;
        search(children[c], q, k, heap);
    }
}

KdTree::Neighbor KdTree::nearest(const Vec3& q) const {
    if (points_.empty()) throw EmptySet("nearest-neighbor query on an empty tree");
    std::vector<Neighbor> heap;
    heap.reserve(1);
    search(0, q, 1, heap);
    return heap.front();
}

void KdTree::knn(const Vec3& q, std::size_t k, std::vector<Neighbor>& out) const {
    out.clear();
    if (points_.empty() || k == 0) return;
    k = std::min(k, points_.size());
    out.reserve(k);
    search(0, q, k, out);
    std::sort_heap(out.begin(), out.end(), ranks_before);
}

}  // namespace n2nsdf
