#include "n2nsdf/target.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "n2nsdf/errors.hpp"

namespace n2nsdf {

namespace {

// Relative eigenvalue threshold below which a direction counts as absent.
constexpr double kRankTolerance = 1e-10;

}  // namespace

NearestPlaneSdf::NearestPlaneSdf(PointCloud cloud, std::size_t k, const BoundingCube& cube)
    : cloud_(std::move(cloud)), k_(k), clamp_(cube.diagonal()) {
    if (k_ < 3) throw TooFewPoints("k must be at least 3");
    if (cloud_.size() < k_) {
        throw TooFewPoints("cloud has " + std::to_string(cloud_.size()) + " points, k = " + std::to_string(k_));
    }
    tree_ = KdTree(cloud_.points);
    Vec3 sum = Vec3::Zero();
    for (const auto& p : cloud_.points) sum += p;
    anchor_ = sum / static_cast<double>(cloud_.size());
}

double NearestPlaneSdf::eval_with(const Vec3& q, std::vector<KdTree::Neighbor>& nbrs) const {
    tree_.knn(q, k_, nbrs);

    Vec3 centroid = Vec3::Zero();
    for (const auto& n : nbrs) centroid += cloud_.points[n.index];
    centroid /= static_cast<double>(nbrs.size());

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& n : nbrs) {
        const Vec3 d = cloud_.points[n.index] - centroid;
        cov.noalias() += d * d.transpose();
    }
    cov /= static_cast<double>(nbrs.size());

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    const Vec3 ev = solver.eigenvalues();  // ascending
    const double scale = std::max(ev(2), 0.0);

    double value;
    if (!(scale > 0.0) || ev(1) <= kRankTolerance * scale) {
        const Vec3& nn = cloud_.points[nbrs.front().index];
        const double dist = std::sqrt(nbrs.front().dist2);
        const bool outside = (q - anchor_).norm() > (nn - anchor_).norm();
        value = outside ? dist : -dist;
    } else {
        Vec3 normal = solver.eigenvectors().col(0);
        if (normal.dot(centroid - anchor_) < 0.0) normal = -normal;
        value = (q - centroid).dot(normal);
    }
    return std::clamp(value, -clamp_, clamp_);
}

double NearestPlaneSdf::eval(const Vec3& q) const {
    std::vector<KdTree::Neighbor> scratch;
    return eval_with(q, scratch);
}

void NearestPlaneSdf::eval_batch(std::span<const Vec3> queries, std::span<double> out) const {
    std::vector<KdTree::Neighbor> scratch;
    scratch.reserve(k_);
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = eval_with(queries[i], scratch);
}

NearestPlaneSdf build_target(const PointCloud& cloud, std::size_t k, const BoundingCube& cube) {
    return NearestPlaneSdf(cloud, k, cube);
}

}  // namespace n2nsdf
