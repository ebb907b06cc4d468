#include "n2nsdf/extract.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mc_tables.hpp"

namespace n2nsdf {

Extraction marching_cubes(const ScalarField& field, const GridSpec& grid) {
    if (grid.resolution < 2) throw std::invalid_argument("marching_cubes: resolution must be >= 2");
    const std::size_t n = static_cast<std::size_t>(grid.resolution);
    const std::size_t np = n + 1;
    const double h = grid.cube.half_extent();
    const double step = grid.cell_size();
    auto coord = [&](std::size_t i) { return -h + static_cast<double>(i) * step; };
    auto corner_id = [&](std::size_t i, std::size_t j, std::size_t k) { return (k * np + j) * np + i; };

    // Sample the lattice one z-slab at a time.
    std::vector<double> values(np * np * np);
    {
        std::vector<Vec3> slab(np * np);
        for (std::size_t k = 0; k < np; ++k) {
            for (std::size_t j = 0; j < np; ++j) {
                for (std::size_t i = 0; i < np; ++i) slab[j * np + i] = Vec3(coord(i), coord(j), coord(k));
            }
            field.eval_batch(slab, std::span<double>(values.data() + k * np * np, np * np));
        }
    }

    std::vector<std::int32_t> edge_vertex(np * np * np * 3, -1);
    std::vector<Vec3> vertices;
    std::vector<Face> faces;

    auto vertex_on_edge = [&](std::size_t ca, std::size_t cb, std::size_t axis,
                              const std::array<std::size_t, 3>& lo) -> std::uint32_t {
        const std::size_t key = ca * 3 + axis;
        if (edge_vertex[key] >= 0) return static_cast<std::uint32_t>(edge_vertex[key]);
        const double fa = values[ca];
        const double fb = values[cb];
        const double diff = fb - fa;
        const double t = std::abs(diff) < 1e-12 ? 0.5 : (grid.iso_value - fa) / diff;
        Vec3 p(coord(lo[0]), coord(lo[1]), coord(lo[2]));
        p[static_cast<Eigen::Index>(axis)] += t * step;
        edge_vertex[key] = static_cast<std::int32_t>(vertices.size());
        vertices.push_back(p);
        return static_cast<std::uint32_t>(vertices.size() - 1);
    };

    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                int case_index = 0;
                std::array<std::size_t, 8> corner{};
                for (int c = 0; c < 8; ++c) {
                    const auto& o = detail::kCornerOffset[c];
                    corner[c] = corner_id(i + o[0], j + o[1], k + o[2]);
                    if (values[corner[c]] < grid.iso_value) case_index |= 1 << c;
                }
                const auto& row = detail::kTriTable[case_index];
                if (row[0] < 0) continue;

                auto edge_to_vertex = [&](int e) {
                    const int a = detail::kEdgeCorners[e][0];
                    const int b = detail::kEdgeCorners[e][1];
                    const auto& oa = detail::kCornerOffset[a];
                    const auto& ob = detail::kCornerOffset[b];
                    std::size_t axis = 0;
                    while (oa[axis] == ob[axis]) ++axis;
                    // Key by the lower endpoint so neighboring cells agree.
                    const bool a_low = oa[axis] < ob[axis];
                    const auto& ol = a_low ? oa : ob;
                    const std::array<std::size_t, 3> lo{i + ol[0], j + ol[1], k + ol[2]};
                    return vertex_on_edge(a_low ? corner[a] : corner[b], a_low ? corner[b] : corner[a], axis, lo);
                };

                for (int t = 0; row[t] >= 0; t += 3) {
                    faces.push_back({edge_to_vertex(row[t]), edge_to_vertex(row[t + 1]), edge_to_vertex(row[t + 2])});
                }
            }
        }
    }

    Extraction out;
    out.empty_surface = faces.empty();
    out.mesh = TriangleMesh(std::move(vertices), std::move(faces));
    return out;
}

}  // namespace n2nsdf
