#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace n2nsdf {

using Vec3 = Eigen::Vector3d;

/// Axis-aligned cube [-h, h]^3 centered at the origin.
class BoundingCube {
public:
    constexpr BoundingCube() = default;
    explicit BoundingCube(double half_extent);

    double half_extent() const noexcept { return half_extent_; }
    double diagonal() const noexcept;
    bool contains(const Vec3& p) const noexcept;

private:
    double half_extent_ = 0.5;
};

/// Evaluation contract shared by analytic, neural and point-based fields.
/// Implementations must be safe for concurrent const evaluation.
class ScalarField {
public:
    virtual ~ScalarField() = default;

    virtual double eval(const Vec3& q) const = 0;

    /// Evaluates every query; the default loops over eval().
    virtual void eval_batch(std::span<const Vec3> queries, std::span<double> out) const;
};

/// Central-difference gradient of any field.
Vec3 central_gradient(const ScalarField& field, const Vec3& q, double step = 1e-5);

/// Closed-form signed distance of a small CSG tree of primitives.
class AnalyticSdf final : public ScalarField {
public:
    struct Sphere {
        Vec3 center;
        double radius;
    };
    struct Box {
        Vec3 center;
        Vec3 half_extents;
    };
    /// Torus around the z axis through center. minor_radius > major_radius
    /// gives the self-intersecting spindle torus, which is star-shaped.
    struct Torus {
        Vec3 center;
        double major_radius;
        double minor_radius;
    };
    struct Union {
        std::shared_ptr<const AnalyticSdf> left;
        std::shared_ptr<const AnalyticSdf> right;
    };
    struct SmoothUnion {
        std::shared_ptr<const AnalyticSdf> left;
        std::shared_ptr<const AnalyticSdf> right;
        double blend;
    };
    using Kind = std::variant<Sphere, Box, Torus, Union, SmoothUnion>;

    explicit AnalyticSdf(Kind kind);

    static AnalyticSdf sphere(const Vec3& center, double radius);
    static AnalyticSdf box(const Vec3& center, const Vec3& half_extents);
    static AnalyticSdf torus(const Vec3& center, double major_radius, double minor_radius);
    static AnalyticSdf unite(AnalyticSdf left, AnalyticSdf right);
    static AnalyticSdf smooth_unite(AnalyticSdf left, AnalyticSdf right, double blend);

    double eval(const Vec3& q) const override;
    const Kind& kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

/// Named desk shapes: "sphere", "box", "torus" (spindle), "ring_torus", "blob".
AnalyticSdf shape_by_id(std::string_view id);
std::vector<std::string> known_shape_ids();

struct Aabb {
    Vec3 min;
    Vec3 max;

    Vec3 center() const { return 0.5 * (min + max); }
    Vec3 half_size() const { return 0.5 * (max - min); }
};

struct PointCloud {
    std::vector<Vec3> points;
    /// Either empty or one unit normal per point.
    std::vector<Vec3> normals;

    std::size_t size() const noexcept { return points.size(); }
    bool empty() const noexcept { return points.empty(); }
    bool has_normals() const noexcept { return !normals.empty() && normals.size() == points.size(); }
    Aabb bounds() const;
};

using Face = std::array<std::uint32_t, 3>;

/// Undirected edge with its incident faces. v0 -> v1 follows the winding of
/// faces[0]; opposite[i] is the vertex of faces[i] not on the edge.
struct EdgeRecord {
    std::uint32_t v0;
    std::uint32_t v1;
    std::uint32_t face_count;
    std::array<std::uint32_t, 2> faces;
    std::array<std::uint32_t, 2> opposite;
};

/// Indexed triangle mesh. Immutable; the edge table is built on construction.
class TriangleMesh {
public:
    TriangleMesh() = default;
    /// Throws DegenerateInput on out-of-range indices or repeated vertices in a face.
    TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

    const std::vector<Vec3>& vertices() const noexcept { return vertices_; }
    const std::vector<Face>& faces() const noexcept { return faces_; }
    const std::vector<EdgeRecord>& edges() const noexcept { return edges_; }

    bool empty() const noexcept { return faces_.empty(); }
    /// Every edge has exactly two incident faces.
    bool is_watertight() const noexcept;
    double area() const;
    Vec3 face_normal(std::size_t face) const;

private:
    std::vector<Vec3> vertices_;
    std::vector<Face> faces_;
    std::vector<EdgeRecord> edges_;
};

/// Uniform scale followed by translation: p' = scale * p + shift.
struct CubeTransform {
    double scale = 1.0;
    Vec3 shift = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return scale * p + shift; }
    bool is_identity() const { return scale == 1.0 && shift.isZero(0.0); }
};

template <typename T>
struct Normalized {
    T value;
    CubeTransform transform;
};

/// Centers the bounding box at the origin and scales its largest half-size to
/// the cube's half extent. Throws DegenerateInput when all points coincide.
CubeTransform cube_transform_for(std::span<const Vec3> points, const BoundingCube& target);
Normalized<PointCloud> normalize_to_cube(const PointCloud& cloud, const BoundingCube& target);
Normalized<TriangleMesh> normalize_to_cube(const TriangleMesh& mesh, const BoundingCube& target);

TriangleMesh load_mesh(const std::filesystem::path& path);
/// ASCII OBJ with 9 significant digits; header lines are written as comments.
void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path,
               const std::vector<std::string>& header_comments = {});

}  // namespace n2nsdf
