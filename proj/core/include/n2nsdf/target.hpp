#pragma once

#include <cstddef>

#include "n2nsdf/geometry.hpp"
#include "n2nsdf/kdtree.hpp"

namespace n2nsdf {

/// Frozen point-to-SDF estimator: signed distance to the PCA plane of the k
/// nearest cloud points, with the normal oriented away from the cloud centroid.
///
/// Neighborhoods of PCA rank < 2 fall back to the unsigned nearest-point
/// distance, positive when q is farther from the anchor than that point.
/// |value| is clamped to the cube diagonal.
class NearestPlaneSdf final : public ScalarField {
public:
    /// Throws TooFewPoints unless 3 <= k <= cloud size.
    NearestPlaneSdf(PointCloud cloud, std::size_t k, const BoundingCube& cube = BoundingCube{});

    double eval(const Vec3& q) const override;
    void eval_batch(std::span<const Vec3> queries, std::span<double> out) const override;

    std::size_t k() const noexcept { return k_; }
    const Vec3& anchor() const noexcept { return anchor_; }
    const PointCloud& cloud() const noexcept { return cloud_; }

private:
    double eval_with(const Vec3& q, std::vector<KdTree::Neighbor>& scratch) const;

    PointCloud cloud_;
    std::size_t k_;
    KdTree tree_;
    Vec3 anchor_;
    double clamp_;
};

NearestPlaneSdf build_target(const PointCloud& cloud, std::size_t k = 16, const BoundingCube& cube = BoundingCube{});

}  // namespace n2nsdf
