#include "n2nsdf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>


#include "n2nsdf/errors.hpp"

namespace n2nsdf {

BoundingCube::BoundingCube(double half_extent) : half_extent_(half_extent) {
    if (!(half_extent > 0.0) || !std::isfinite(half_extent)) {
        throw std::invalid_argument("BoundingCube half extent must be positive");
    }
}

double BoundingCube::diagonal() const noexcept { return 2.0 * half_extent_ * std::sqrt(3.0); }

bool BoundingCube::contains(const Vec3& p) const noexcept {
    return p.cwiseAbs().maxCoeff() <= half_extent_;
}

void ScalarField::eval_batch(std::span<const Vec3> queries, std::span<double> out) const {
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = eval(queries[i]);
}

Vec3 central_gradient(const ScalarField& field, const Vec3& q, double step) {
    Vec3 g;
    for (int axis = 0; axis < 3; ++axis) {
        Vec3 lo = q;
        Vec3 hi = q;
        lo[axis] -= step;
        hi[axis] += step;
        g[axis] = (field.eval(hi) - field.eval(lo)) / (2.0 * step);
    }
    return g;
}

// ---------------------------------------------------------------------------
// AnalyticSdf

AnalyticSdf::AnalyticSdf(Kind kind) : kind_(std::move(kind)) {}

AnalyticSdf AnalyticSdf::sphere(const Vec3& center, double radius) {
    return AnalyticSdf(Sphere{center, radius});
}

AnalyticSdf AnalyticSdf::box(const Vec3& center, const Vec3& half_extents) {
    return AnalyticSdf(Box{center, half_extents});
}

AnalyticSdf AnalyticSdf::torus(const Vec3& center, double major_radius, double minor_radius) {
    return AnalyticSdf(Torus{center, major_radius, minor_radius});
}

AnalyticSdf AnalyticSdf::unite(AnalyticSdf left, AnalyticSdf right) {
    return AnalyticSdf(Union{std::make_shared<const AnalyticSdf>(std::move(left)),
                             std::make_shared<const AnalyticSdf>(std::move(right))});
}

AnalyticSdf AnalyticSdf::smooth_unite(AnalyticSdf left, AnalyticSdf right, double blend) {
    return AnalyticSdf(SmoothUnion{std::make_shared<const AnalyticSdf>(std::move(left)),
                                   std::make_shared<const AnalyticSdf>(std::move(right)), blend});
}

namespace {

struct EvalVisitor {
    const Vec3& q;

    double operator()(const AnalyticSdf::Sphere& s) const { return (q - s.center).norm() - s.radius; }

    double operator()(const AnalyticSdf::Box& b) const {
        const Vec3 d = (q - b.center).cwiseAbs() - b.half_extents;
        const double outside = d.cwiseMax(0.0).norm();
        const double inside = std::min(d.maxCoeff(), 0.0);
        return outside + inside;
    }

    double operator()(const AnalyticSdf::Torus& t) const {
        const Vec3 p = q - t.center;
        const double rho = std::hypot(p.x(), p.y());
        return std::hypot(rho - t.major_radius, p.z()) - t.minor_radius;
    }

    double operator()(const AnalyticSdf::Union& u) const {
        return std::min(u.left->eval(q), u.right->eval(q));
    }

    // Polynomial smooth minimum.
    double operator()(const AnalyticSdf::SmoothUnion& u) const {
        const double a = u.left->eval(q);
        const double b = u.right->eval(q);
        if (u.blend <= 0.0) return std::min(a, b);
        const double h = std::clamp(0.5 + 0.5 * (b - a) / u.blend, 0.0, 1.0);
        return b + (a - b) * h - u.blend * h * (1.0 - h);
    }
};

}  // namespace

double AnalyticSdf::eval(const Vec3& q) const { return std::visit(EvalVisitor{q}, kind_); }

AnalyticSdf shape_by_id(std::string_view id) {
    if (id == "sphere") return AnalyticSdf::sphere(Vec3::Zero(), 0.4);
    if (id == "box") return AnalyticSdf::box(Vec3::Zero(), Vec3::Constant(0.3));
    if (id == "torus") return AnalyticSdf::torus(Vec3::Zero(), 0.15, 0.25);
    if (id == "ring_torus") return AnalyticSdf::torus(Vec3::Zero(), 0.3, 0.1);
    if (id == "blob") {
        return AnalyticSdf::smooth_unite(AnalyticSdf::sphere(Vec3(-0.15, 0.0, 0.0), 0.25),
                                         AnalyticSdf::sphere(Vec3(0.15, 0.0, 0.0), 0.25), 0.1);
    }
    throw std::invalid_argument("unknown shape id '" + std::string(id) + "'");
}

std::vector<std::string> known_shape_ids() { return {"sphere", "box", "torus", "ring_torus", "blob"}; }

// ---------------------------------------------------------------------------
// PointCloud / TriangleMesh

Aabb PointCloud::bounds() const {
    if (points.empty()) throw DegenerateInput("bounds of an empty point cloud");
    Aabb box{points.front(), points.front()};
    for (const auto& p : points) {
        box.min = box.min.cwiseMin(p);
        box.max = box.max.cwiseMax(p);
    }
    return box;
}

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
    const auto n = static_cast<std::uint32_t>(vertices_.size());
    for (std::size_t f = 0; f < faces_.size(); ++f) {
        const Face& face = faces_[f];
        for (auto v : face) {
            if (v >= n) {
                throw DegenerateInput("face " + std::to_string(f) + " references vertex " +
                                      std::to_string(v) + " of " + std::to_string(n));
            }
        }
        if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
            throw DegenerateInput("face " + std::to_string(f) + " repeats a vertex");
        }
    }

    // (lo, hi, face, local edge slot) sorted so that incident faces of an edge are adjacent.
    struct HalfEdge {
        std::uint32_t lo, hi, face, slot;
    };
    std::vector<HalfEdge> half;
    half.reserve(3 * faces_.size());
    for (std::uint32_t f = 0; f < faces_.size(); ++f) {
        for (std::uint32_t s = 0; s < 3; ++s) {
            const auto a = faces_[f][s];
            const auto b = faces_[f][(s + 1) % 3];
            half.push_back({std::min(a, b), std::max(a, b), f, s});
        }
    }
    std::sort(half.begin(), half.end(), [](const HalfEdge& x, const HalfEdge& y) {
        return std::tie(x.lo, x.hi, x.face, x.slot) < std::tie(y.lo, y.hi, y.face, y.slot);
    });

    for (std::size_t i = 0; i < half.size();) {
        std::size_t j = i;
        while (j < half.size() && half[j].lo == half[i].lo && half[j].hi == half[i].hi) ++j;
        const HalfEdge& first = half[i];
        EdgeRecord e{};
        e.v0 = faces_[first.face][first.slot];
        e.v1 = faces_[first.face][(first.slot + 1) % 3];
        e.face_count = static_cast<std::uint32_t>(j - i);
        for (std::size_t k = 0; k < std::min<std::size_t>(2, j - i); ++k) {
            const HalfEdge& h = half[i + k];
            e.faces[k] = h.face;
            e.opposite[k] = faces_[h.face][(h.slot + 2) % 3];
        }
        if (e.face_count == 1) {
            e.faces[1] = e.faces[0];
            e.opposite[1] = e.opposite[0];
        }
        edges_.push_back(e);
        i = j;
    }
}

bool TriangleMesh::is_watertight() const noexcept {
    if (faces_.empty()) return false;
    return std::all_of(edges_.begin(), edges_.end(), [](const EdgeRecord& e) { return e.face_count == 2; });
}

double TriangleMesh::area() const {
    double total = 0.0;
    for (const auto& f : faces_) {
        total += 0.5 * (vertices_[f[1]] - vertices_[f[0]]).cross(vertices_[f[2]] - vertices_[f[0]]).norm();
    }
    return total;
}

Vec3 TriangleMesh::face_normal(std::size_t face) const {
    const Face& f = faces_.at(face);
    const Vec3 n = (vertices_[f[1]] - vertices_[f[0]]).cross(vertices_[f[2]] - vertices_[f[0]]);
    const double len = n.norm();
    return len > 0.0 ? Vec3(n / len) : Vec3::Zero();
}

// ---------------------------------------------------------------------------
// Normalization

CubeTransform cube_transform_for(std::span<const Vec3> points, const BoundingCube& target) {
    if (points.empty()) throw DegenerateInput("cannot normalize an empty point set");
    Vec3 lo = points.front();
    Vec3 hi = points.front();
    for (const auto& p : points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double largest_half = 0.5 * (hi - lo).maxCoeff();
    if (!(largest_half > 0.0)) throw DegenerateInput("all points coincide");

    CubeTransform t;
    t.scale = target.half_extent() / largest_half;
    t.shift = -t.scale * (0.5 * (lo + hi));
    // Inputs already normalized up to rounding map to the exact identity.
    if (std::abs(t.scale - 1.0) <= 1e-12 && t.shift.cwiseAbs().maxCoeff() <= 1e-12) {
        t = CubeTransform{};
    }
    return t;
}

Normalized<PointCloud> normalize_to_cube(const PointCloud& cloud, const BoundingCube& target) {
    const CubeTransform t = cube_transform_for(cloud.points, target);
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) out.points.push_back(t.apply(p));
    out.normals = cloud.normals;
    return {std::move(out), t};
}

Normalized<TriangleMesh> normalize_to_cube(const TriangleMesh& mesh, const BoundingCube& target) {
    const CubeTransform t = cube_transform_for(mesh.vertices(), target);
    std::vector<Vec3> vertices;
    vertices.reserve(mesh.vertices().size());
    for (const auto& v : mesh.vertices()) vertices.push_back(t.apply(v));
    return {TriangleMesh(std::move(vertices), mesh.faces()), t};
}

}  // namespace n2nsdf
