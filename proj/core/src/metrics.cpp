#include "n2nsdf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "n2nsdf/errors.hpp"
#include "n2nsdf/kdtree.hpp"
#include "n2nsdf/rng.hpp"
#include "n2nsdf/sampling.hpp"

namespace n2nsdf {

namespace {

void require_non_empty(std::span<const Vec3> p, std::span<const Vec3> q) {
    if (p.empty() || q.empty()) throw EmptySet("metric requires two non-empty point sets");
}

double mean_nn_distance(std::span<const Vec3> from, const KdTree& to) {
    double sum = 0.0;
    for (const auto& p : from) sum += std::sqrt(to.nearest(p).dist2);
    return sum / static_cast<double>(from.size());
}

double fraction_within(std::span<const Vec3> from, const KdTree& to, double tau) {
    std::size_t hits = 0;
    for (const auto& p : from) {
        if (std::sqrt(to.nearest(p).dist2) < tau) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(from.size());
}

double mean_abs_normal_dot(const PointCloud& from, const PointCloud& to, const KdTree& to_tree) {
    double sum = 0.0;
    for (std::size_t i = 0; i < from.size(); ++i) {
        const auto nn = to_tree.nearest(from.points[i]);
        sum += std::abs(from.normals[i].dot(to.normals[nn.index]));
    }
    return sum / static_cast<double>(from.size());
}

}  // namespace

double chamfer(std::span<const Vec3> p, std::span<const Vec3> q) {
    require_non_empty(p, q);
    const KdTree tp(p);
    const KdTree tq(q);
    return mean_nn_distance(p, tq) + mean_nn_distance(q, tp);
}

FScore f_score_detail(std::span<const Vec3> p, std::span<const Vec3> q, double tau) {
    require_non_empty(p, q);
    if (!(tau > 0.0)) throw std::invalid_argument("f_score: tau must be > 0");
    const KdTree tp(p);
    const KdTree tq(q);
    FScore s{};
    s.precision = fraction_within(p, tq, tau);
    s.recall = fraction_within(q, tp, tau);
    s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    return s;
}

double f_score(std::span<const Vec3> p, std::span<const Vec3> q, double tau) { return f_score_detail(p, q, tau).f1; }

double normal_consistency(const PointCloud& p, const PointCloud& q) {
    require_non_empty(p.points, q.points);
    if (!p.has_normals() || !q.has_normals()) throw MissingNormals("normal consistency needs normals on both sets");
    const KdTree tp(p.points);
    const KdTree tq(q.points);
    return 0.5 * (mean_abs_normal_dot(p, q, tq) + mean_abs_normal_dot(q, p, tp));
}

MeshNormalConsistency mesh_normal_consistency(const TriangleMesh& mesh) {
    const auto& v = mesh.vertices();
    MeshNormalConsistency out{0.0, 0, 0, 0};
    double sum = 0.0;
    for (const auto& e : mesh.edges()) {
        if (e.face_count != 2) {
            ++out.boundary_edges;
            continue;
        }
        const Vec3 d = v[e.v1] - v[e.v0];
        const Vec3 n1 = d.cross(v[e.opposite[0]] - v[e.v0]);
        const Vec3 n2 = (v[e.opposite[1]] - v[e.v0]).cross(d);
        const double denom = n1.norm() * n2.norm();
        if (!(denom > 0.0)) {
            ++out.degenerate_edges;
            continue;
        }
        const double cosine = std::clamp(n1.dot(n2) / denom, -1.0, 1.0);
        sum += 1.0 - cosine;
        ++out.scored_edges;
    }
    if (out.scored_edges == 0) throw NoInteriorEdges("mesh has no interior edge with two non-degenerate faces");
    out.value = sum / static_cast<double>(out.scored_edges);
    return out;
}

double iou(const ScalarField& a, const ScalarField& b, std::size_t n, const BoundingCube& cube, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("iou: n must be >= 1");
    CounterRng rng(seed);
    const double h = cube.half_extent();
    std::vector<Vec3> pts(n);
    for (auto& p : pts) p = Vec3(rng.uniform(-h, h), rng.uniform(-h, h), rng.uniform(-h, h));
    std::vector<double> fa(n), fb(n);
    a.eval_batch(pts, fa);
    b.eval_batch(pts, fb);
    std::size_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool ia = fa[i] < 0.0;
        const bool ib = fb[i] < 0.0;
        inter += ia && ib;
        uni += ia || ib;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

PointCloud sample_mesh_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed) {
    const auto& v = mesh.vertices();
    const auto& faces = mesh.faces();
    std::vector<double> cumulative;
    cumulative.reserve(faces.size());
    double total = 0.0;
    for (const auto& f : faces) {
        total += 0.5 * (v[f[1]] - v[f[0]]).cross(v[f[2]] - v[f[0]]).norm();
        cumulative.push_back(total);
    }
    if (!(total > 0.0)) throw ZeroArea("cannot sample a mesh with zero surface area");

    CounterRng rng(seed);
    PointCloud out;
    out.points.reserve(n);
    out.normals.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double target = rng.uniform01() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
        std::size_t fi = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), faces.size() - 1);
        // Skip zero-area faces that share a cumulative value with their successor.
        while (fi > 0 && cumulative[fi] == cumulative[fi - 1]) --fi;
        const Face& f = faces[fi];
        const double r1 = std::sqrt(rng.uniform01());
        const double r2 = rng.uniform01();
        const double wa = 1.0 - r1;
        const double wb = r1 * (1.0 - r2);
        const double wc = r1 * r2;
        out.points.push_back(wa * v[f[0]] + wb * v[f[1]] + wc * v[f[2]]);
        out.normals.push_back(mesh.face_normal(fi));
    }
    return out;
}

// ---------------------------------------------------------------------------

MeshOccupancy::MeshOccupancy(const TriangleMesh& mesh, int buckets_per_axis)
    : mesh_(mesh), buckets_(std::max(buckets_per_axis, 1)) {
    const auto& v = mesh_.vertices();
    double ylo = 0, yhi = 0, zlo = 0, zhi = 0;
    if (!v.empty()) {
        ylo = yhi = v.front().y();
        zlo = zhi = v.front().z();
        for (const auto& p : v) {
            ylo = std::min(ylo, p.y());
            yhi = std::max(yhi, p.y());
            zlo = std::min(zlo, p.z());
            zhi = std::max(zhi, p.z());
        }
    }
    y0_ = ylo;
    z0_ = zlo;
    dy_ = std::max(yhi - ylo, 1e-12) / buckets_;
    dz_ = std::max(zhi - zlo, 1e-12) / buckets_;
    grid_.resize(static_cast<std::size_t>(buckets_) * static_cast<std::size_t>(buckets_));
    auto clamp_bucket = [&](double t) { return std::clamp(static_cast<int>(std::floor(t)), 0, buckets_ - 1); };
    const auto& faces = mesh_.faces();
    for (std::uint32_t f = 0; f < faces.size(); ++f) {
        double fy0 = v[faces[f][0]].y(), fy1 = fy0, fz0 = v[faces[f][0]].z(), fz1 = fz0;
        for (int c = 1; c < 3; ++c) {
            fy0 = std::min(fy0, v[faces[f][c]].y());
            fy1 = std::max(fy1, v[faces[f][c]].y());
            fz0 = std::min(fz0, v[faces[f][c]].z());
            fz1 = std::max(fz1, v[faces[f][c]].z());
        }
        const int by0 = clamp_bucket((fy0 - y0_) / dy_), by1 = clamp_bucket((fy1 - y0_) / dy_);
        const int bz0 = clamp_bucket((fz0 - z0_) / dz_), bz1 = clamp_bucket((fz1 - z0_) / dz_);
        for (int by = by0; by <= by1; ++by) {
            for (int bz = bz0; bz <= bz1; ++bz) grid_[static_cast<std::size_t>(by * buckets_ + bz)].push_back(f);
        }
    }
}

double MeshOccupancy::eval(const Vec3& q_in) const {
    // A tiny irrational offset keeps rays off shared edges and vertices.
    const Vec3 q(q_in.x(), q_in.y() + 1.4142135623730951e-9, q_in.z() + 1.7320508075688772e-9);
    const auto by = static_cast<int>(std::floor((q.y() - y0_) / dy_));
    const auto bz = static_cast<int>(std::floor((q.z() - z0_) / dz_));
    if (by < 0 || bz < 0 || by >= buckets_ || bz >= buckets_ || mesh_.empty()) return 1.0;
    const auto& v = mesh_.vertices();
    int crossings = 0;
    for (std::uint32_t f : grid_[static_cast<std::size_t>(by * buckets_ + bz)]) {
        const Vec3& a = v[mesh_.faces()[f][0]];
        const Vec3& b = v[mesh_.faces()[f][1]];
        const Vec3& c = v[mesh_.faces()[f][2]];
        // Barycentric coordinates of (q.y, q.z) in the projected triangle.
        const double det = (b.y() - a.y()) * (c.z() - a.z()) - (c.y() - a.y()) * (b.z() - a.z());
        if (det == 0.0) continue;
        const double u = ((q.y() - a.y()) * (c.z() - a.z()) - (c.y() - a.y()) * (q.z() - a.z())) / det;
        const double w = ((b.y() - a.y()) * (q.z() - a.z()) - (q.y() - a.y()) * (b.z() - a.z())) / det;
        if (u < 0.0 || w < 0.0 || u + w > 1.0) continue;
        const double x = a.x() + u * (b.x() - a.x()) + w * (c.x() - a.x());
        if (x > q.x()) ++crossings;
    }
    return (crossings % 2 == 1) ? -1.0 : 1.0;
}

// ---------------------------------------------------------------------------

std::string to_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["chamfer"] = r.chamfer;
    j["f_score"] = r.f_score;
    j["tau"] = r.tau;
    j["nc"] = r.nc;
    j["mnc"] = r.mnc;
    j["iou"] = r.iou ? nlohmann::ordered_json(*r.iou) : nlohmann::ordered_json(nullptr);
    j["n_samples"] = r.n_samples;
    j["seed"] = r.seed;
    j["mnc_boundary_edges"] = r.mnc_boundary_edges;
    j["config_hash"] = r.config_hash;
    return j.dump(2) + "\n";
}

MetricsReport metrics_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    MetricsReport r;
    r.chamfer = j.at("chamfer").get<double>();
    r.f_score = j.at("f_score").get<double>();
    r.tau = j.at("tau").get<double>();
    r.nc = j.at("nc").get<double>();
    r.mnc = j.at("mnc").get<double>();
    if (!j.at("iou").is_null()) r.iou = j.at("iou").get<double>();
    r.n_samples = j.at("n_samples").get<std::size_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.mnc_boundary_edges = j.value("mnc_boundary_edges", std::size_t{0});
    r.config_hash = j.value("config_hash", std::string{});
    return r;
}

PointCloud ground_truth_samples(const ScalarField& ground_truth, const EvaluationOptions& options) {
    return sample_surface(ground_truth, options.n_samples, derive_seed(options.seed, {0x67}), options.cube);
}

MetricsReport evaluate_mesh(const TriangleMesh& mesh, const ScalarField& ground_truth, const EvaluationOptions& options,
                            const ScalarField* occupancy) {
    return evaluate_mesh(mesh, ground_truth, ground_truth_samples(ground_truth, options), options, occupancy);
}

MetricsReport evaluate_mesh(const TriangleMesh& mesh, const ScalarField& ground_truth, const PointCloud& gt,
                            const EvaluationOptions& options, const ScalarField* occupancy) {
    const PointCloud pred = sample_mesh_surface(mesh, options.n_samples, derive_seed(options.seed, {0x70}));

    MetricsReport r;
    r.tau = options.tau;
    r.n_samples = options.n_samples;
    r.seed = options.seed;
    r.chamfer = chamfer(pred.points, gt.points);
    r.f_score = f_score(pred.points, gt.points, options.tau);
    r.nc = normal_consistency(pred, gt);
    const auto mnc = mesh_normal_consistency(mesh);
    r.mnc = mnc.value;
    r.mnc_boundary_edges = mnc.boundary_edges;
    const std::uint64_t iou_seed = derive_seed(options.seed, {0x10});
    if (occupancy != nullptr) {
        r.iou = iou(*occupancy, ground_truth, options.iou_samples, options.cube, iou_seed);
    } else if (mesh.is_watertight()) {
        const MeshOccupancy inside(mesh);
        r.iou = iou(inside, ground_truth, options.iou_samples, options.cube, iou_seed);
    }
    return r;
}

}  // namespace n2nsdf
