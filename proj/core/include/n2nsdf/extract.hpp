#pragma once

#include "n2nsdf/geometry.hpp"

namespace n2nsdf {

struct GridSpec {
    /// Cells per axis.
    int resolution = 64;
    BoundingCube cube;
    double iso_value = 0.0;

    double cell_size() const noexcept { return 2.0 * cube.half_extent() / resolution; }
};

struct Extraction {
    TriangleMesh mesh;
    /// No sign change anywhere on the grid; mesh is empty.
    bool empty_surface = false;
};

/// Marching Cubes over the (resolution + 1)^3 corner lattice of the cube.
///
/// Vertices are linearly interpolated along sign-changing edges (midpoint when
/// the corner values differ by less than 1e-12) and shared between cells by
/// exact edge key. Faces wind so that normals point toward increasing field
/// values. Output order is deterministic (cells in z, y, x order).
Extraction marching_cubes(const ScalarField& field, const GridSpec& grid);

}  // namespace n2nsdf
