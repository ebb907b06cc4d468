#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "n2nsdf/geometry.hpp"

namespace n2nsdf {

/// Static 3-d tree over a copy of the input points.
///
/// Neighbors are ranked by (squared distance, point index), so duplicate
/// points and equidistant candidates resolve to the lowest index. Queries are
/// const and may run concurrently.
class KdTree {
public:
    struct Neighbor {
        std::uint32_t index;
        double dist2;
    };

    KdTree() = default;
    explicit KdTree(std::span<const Vec3> points);

    std::size_t size() const noexcept { return points_.size(); }
    const Vec3& point(std::size_t i) const { return points_[i]; }

    Neighbor nearest(const Vec3& q) const;
    /// Fills out with the min(k, size()) nearest points in ranking order.
    void knn(const Vec3& q, std::size_t k, std::vector<Neighbor>& out) const;

private:
    struct Node {
        std::uint32_t begin;
        std::uint32_t end;
        std::int32_t left = -1;
        std::int32_t right = -1;
        Vec3 lo;
        Vec3 hi;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);
    void search(std::int32_t node, const Vec3& q, std::size_t k, std::vector<Neighbor>& heap) const;

    std::vector<Vec3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
};

/// Squared Euclidean distance in a fixed evaluation order, compiled without
/// FMA contraction so every caller and the tree's box bounds round alike.
double squared_distance(const Vec3& a, const Vec3& b);

}  // namespace n2nsdf
