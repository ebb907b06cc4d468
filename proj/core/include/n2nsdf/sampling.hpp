#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "n2nsdf/geometry.hpp"

namespace n2nsdf {

struct SurfaceSamplingOptions {
    /// Candidates drawn per requested point before farthest-point thinning.
    std::size_t oversampling = 4;
    std::size_t max_iterations = 50;
    double tolerance = 1e-6;
    double gradient_step = 1e-5;
    /// Fraction of candidates allowed to miss the tolerance.
    double max_failure_fraction = 0.01;
};

/// Points on the zero level set of shape, with unit normals from the field
/// gradient.
///
/// Uniform candidates in the cube are Newton-projected onto the level set
/// (p <- p - f(p) grad f / |grad f|^2) and then thinned to n points by
/// farthest-point sampling, which evens out the density the projection
/// introduces. Throws ConvergenceFailure when too many candidates fail.
PointCloud sample_surface(const ScalarField& shape, std::size_t n, std::uint64_t seed,
                          const BoundingCube& cube = BoundingCube{},
                          const SurfaceSamplingOptions& options = {});

enum class QueryOrigin : std::uint8_t { NearSurface, UniformVolume };

struct QueryBatch {
    std::vector<Vec3> points;
    std::vector<QueryOrigin> origin;

    std::size_t size() const noexcept { return points.size(); }
    std::size_t near_surface_count() const;
};

/// p1 followed by p2 (tagged NearSurface), then n_uniform i.i.d. uniform draws
/// in the cube (tagged UniformVolume).
QueryBatch build_query_batch(const PointCloud& p1, const PointCloud& p2, std::size_t n_uniform,
                             const BoundingCube& cube, std::uint64_t seed);

/// One "x y z" line per point, 9 significant digits.
void save_xyz(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud load_xyz(const std::filesystem::path& path);

}  // namespace n2nsdf
