#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "n2nsdf/geometry.hpp"

namespace n2nsdf {

/// Two-sided mean Euclidean nearest-neighbor distance. Throws EmptySet.
double chamfer(std::span<const Vec3> p, std::span<const Vec3> q);

struct FScore {
    double precision;
    double recall;
    double f1;
};

/// precision: fraction of p closer than tau to q; recall: fraction of q closer
/// than tau to p; f1 is their harmonic mean (0 when both are 0).
FScore f_score_detail(std::span<const Vec3> p, std::span<const Vec3> q, double tau = 0.02);
double f_score(std::span<const Vec3> p, std::span<const Vec3> q, double tau = 0.02);

/// Mean |<n_p, n_q>| over nearest-neighbor matches, averaged over both
/// directions. Throws MissingNormals / EmptySet.
double normal_consistency(const PointCloud& p, const PointCloud& q);

struct MeshNormalConsistency {
    double value;
    std::size_t scored_edges;
    std::size_t boundary_edges;
    /// Interior edges skipped because an adjacent face has zero area.
    std::size_t degenerate_edges;
};

/// Per interior edge (v0, v1) with opposite vertices a, b: 1 - cos between
/// (v1 - v0) x (a - v0) and (b - v0) x (v1 - v0), averaged over interior edges.
/// Throws NoInteriorEdges.
MeshNormalConsistency mesh_normal_consistency(const TriangleMesh& mesh);

/// Volumetric IoU of the regions {a < 0} and {b < 0} from n uniform samples
/// in the cube; 1 when both regions are empty.
double iou(const ScalarField& a, const ScalarField& b, std::size_t n, const BoundingCube& cube, std::uint64_t seed);

/// Area-weighted triangle choice, uniform barycentric placement, face normals.
/// Throws ZeroArea.
PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

/// Inside/outside of a closed mesh by +x ray parity: -1 inside, +1 outside.
class MeshOccupancy final : public ScalarField {
public:
    explicit MeshOccupancy(const TriangleMesh& mesh, int buckets_per_axis = 64);

    double eval(const Vec3& q) const override;

private:
    const TriangleMesh& mesh_;
    int buckets_;
    double y0_, z0_, dy_, dz_;
    std::vector<std::vector<std::uint32_t>> grid_;
};

struct MetricsReport {
    double chamfer = 0.0;
    double f_score = 0.0;
    double tau = 0.02;
    double nc = 0.0;
    double mnc = 0.0;
    std::optional<double> iou;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    std::size_t mnc_boundary_edges = 0;
    std::string config_hash;
};

/// Flat JSON object: chamfer, f_score, tau, nc, mnc, iou (null when absent),
/// n_samples, seed, mnc_boundary_edges, config_hash.
std::string to_json(const MetricsReport& report);
MetricsReport metrics_from_json(const std::string& text);

struct EvaluationOptions {
    std::size_t n_samples = 10000;
    double tau = 0.02;
    std::size_t iou_samples = 100000;
    std::uint64_t seed = 0;
    BoundingCube cube;
};

/// Compares a reconstructed mesh against an analytic ground truth: surface
/// samples for CD / F1 / NC, the mesh itself for MNC, and volumetric IoU using
/// `occupancy` when given, else the mesh's own ray-parity occupancy when the
/// mesh is watertight (absent otherwise).
MetricsReport evaluate_mesh(const TriangleMesh& mesh, const ScalarField& ground_truth, const EvaluationOptions& options,
                            const ScalarField* occupancy = nullptr);

/// Ground-truth surface samples used by evaluate_mesh for a given seed.
PointCloud ground_truth_samples(const ScalarField& ground_truth, const EvaluationOptions& options);

/// Same as above with ground-truth samples precomputed by
/// ground_truth_samples(ground_truth, options).
MetricsReport evaluate_mesh(const TriangleMesh& mesh, const ScalarField& ground_truth, const PointCloud& gt_samples,
                            const EvaluationOptions& options, const ScalarField* occupancy = nullptr);

}  // namespace n2nsdf
