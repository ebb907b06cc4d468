#include "n2nsdf/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "n2nsdf/errors.hpp"
#include "n2nsdf/kdtree.hpp"
#include "n2nsdf/rng.hpp"

namespace n2nsdf {

namespace {

bool project_to_level_set(const ScalarField& shape, Vec3& p, const SurfaceSamplingOptions& opt) {
    for (std::size_t it = 0; it <= opt.max_iterations; ++it) {
        const double f = shape.eval(p);
        if (std::abs(f) <= opt.tolerance) return true;
        if (it == opt.max_iterations) break;
        const Vec3 g = central_gradient(shape, p, opt.gradient_step);
        const double g2 = g.squaredNorm();
        if (!(g2 > 1e-12)) return false;
        p -= (f / g2) * g;
        if (!p.allFinite()) return false;
    }
    return false;
}

// Greedy farthest-point selection starting from candidate 0.
std::vector<std::size_t> farthest_point_subset(const std::vector<Vec3>& pts, std::size_t n) {
    std::vector<std::size_t> chosen;
    chosen.reserve(n);
    std::vector<double> d2(pts.size(), std::numeric_limits<double>::infinity());
    std::size_t next = 0;
    for (std::size_t k = 0; k < n; ++k) {
        chosen.push_back(next);
        const Vec3 c = pts[next];
        std::size_t best = 0;
        double best_d2 = -1.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double d = squared_distance(pts[i], c);
            if (d < d2[i]) d2[i] = d;
            if (d2[i] > best_d2) {
                best_d2 = d2[i];
                best = i;
            }
        }
        next = best;
    }
    return chosen;
}

}  // namespace

PointCloud sample_surface(const ScalarField& shape, std::size_t n, std::uint64_t seed, const BoundingCube& cube,
                          const SurfaceSamplingOptions& options) {
    if (n == 0) throw std::invalid_argument("sample_surface: n must be >= 1");
    const std::size_t n_candidates = std::max<std::size_t>(n * std::max<std::size_t>(options.oversampling, 1), n);
    const double h = cube.half_extent();

    CounterRng rng(seed);
    std::vector<Vec3> candidates;
    candidates.reserve(n_candidates);
    std::size_t failures = 0;
    std::size_t attempts = 0;
    // Rounds of draws until enough candidates landed on the level set inside
    // the cube; the failure ratio is checked after every round.
    while (candidates.size() < n_candidates) {
        const std::size_t round = n_candidates - candidates.size();
        for (std::size_t i = 0; i < round; ++i) {
            ++attempts;
            Vec3 p(rng.uniform(-h, h), rng.uniform(-h, h), rng.uniform(-h, h));
            if (!project_to_level_set(shape, p, options)) {
                ++failures;
            } else if (cube.contains(p)) {
                candidates.push_back(p);
            }
        }
        if (static_cast<double>(failures) > options.max_failure_fraction * static_cast<double>(attempts)) {
            throw ConvergenceFailure("surface projection failed for " + std::to_string(failures) + " of " +
                                     std::to_string(attempts) + " candidates");
        }
        if (attempts > 16 * n_candidates) throw ConvergenceFailure("level set does not lie inside the cube");
    }

    PointCloud cloud;
    cloud.points.reserve(n);
    cloud.normals.reserve(n);
    for (std::size_t idx : farthest_point_subset(candidates, n)) {
        const Vec3& p = candidates[idx];
        Vec3 g = central_gradient(shape, p, options.gradient_step);
        const double len = g.norm();
        cloud.points.push_back(p);
        cloud.normals.push_back(len > 0.0 ? Vec3(g / len) : Vec3::UnitZ());
    }
    return cloud;
}

std::size_t QueryBatch::near_surface_count() const {
    return static_cast<std::size_t>(std::count(origin.begin(), origin.end(), QueryOrigin::NearSurface));
}

QueryBatch build_query_batch(const PointCloud& p1, const PointCloud& p2, std::size_t n_uniform,
                             const BoundingCube& cube, std::uint64_t seed) {
    if (p1.empty() || p2.empty()) throw EmptySet("build_query_batch: both clouds must be non-empty");
    QueryBatch batch;
    const std::size_t total = p1.size() + p2.size() + n_uniform;
    batch.points.reserve(total);
    batch.origin.reserve(total);
    for (const auto* cloud : {&p1, &p2}) {
        for (const auto& p : cloud->points) {
            batch.points.push_back(p);
            batch.origin.push_back(QueryOrigin::NearSurface);
        }
    }
    CounterRng rng(seed);
    const double h = cube.half_extent();
    for (std::size_t i = 0; i < n_uniform; ++i) {
        batch.points.emplace_back(rng.uniform(-h, h), rng.uniform(-h, h), rng.uniform(-h, h));
        batch.origin.push_back(QueryOrigin::UniformVolume);
    }
    return batch;
}

}  // namespace n2nsdf
