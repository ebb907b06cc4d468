#include <algorithm>
#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "n2nsdf/errors.hpp"
#include "n2nsdf/extract.hpp"
#include "n2nsdf/kdtree.hpp"
#include "n2nsdf/metrics.hpp"
#include "n2nsdf/rng.hpp"

using namespace n2nsdf;

namespace {

std::vector<Vec3> random_points(std::size_t n, CounterRng& rng) {
    std::vector<Vec3> pts(n);
    for (auto& p : pts) p = Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    return pts;
}

TriangleMesh unit_cube() {
    std::vector<Vec3> v;
    for (int i = 0; i < 8; ++i) v.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
    // Outward winding, two triangles per face.
    std::vector<Face> f = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
                           {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
    return TriangleMesh(v, f);
}

}  // namespace

TEST(KdTree, KnnMatchesBruteForceWithTies) {
    CounterRng rng(1);
    auto pts = random_points(300, rng);
    // Exact duplicates and a lattice produce equal distances.
    pts.push_back(pts[5]);
    pts.push_back(pts[5]);
    for (int i = 0; i < 27; ++i) pts.emplace_back(0.1 * (i % 3), 0.1 * (i / 3 % 3), 0.1 * (i / 9));
    const KdTree tree(pts);
    std::vector<KdTree::Neighbor> got;
    for (int t = 0; t < 200; ++t) {
        const Vec3 q = t % 2 ? random_points(1, rng)[0] : pts[t % pts.size()];
        std::vector<KdTree::Neighbor> all;
        for (std::uint32_t i = 0; i < pts.size(); ++i) all.push_back({i, squared_distance(q, pts[i])});
        std::sort(all.begin(), all.end(),
                  [](auto a, auto b) { return a.dist2 != b.dist2 ? a.dist2 < b.dist2 : a.index < b.index; });
        tree.knn(q, 16, got);
        ASSERT_EQ(got.size(), 16u);
        for (int k = 0; k < 16; ++k) {
            EXPECT_EQ(got[k].index, all[k].index);
            EXPECT_EQ(got[k].dist2, all[k].dist2);
        }
        EXPECT_EQ(tree.nearest(q).index, all[0].index);
    }
    EXPECT_THROW(KdTree().nearest(Vec3::Zero()), EmptySet);
}

TEST(Chamfer, IdentityAndTwoPoints) {
    CounterRng rng(2);
    const auto p = random_points(100, rng);
    EXPECT_EQ(chamfer(p, p), 0.0);
    const std::vector<Vec3> a{Vec3(0, 0, 0)}, b{Vec3(1, 0, 0)};
    EXPECT_EQ(chamfer(a, b), 2.0);
    EXPECT_THROW(chamfer(a, std::vector<Vec3>{}), EmptySet);
}

TEST(Chamfer, SymmetricAndScaleCovariant) {
    CounterRng rng(3);
    const auto p = random_points(200, rng);
    const auto q = random_points(150, rng);
    EXPECT_EQ(chamfer(p, q), chamfer(q, p));
    EXPECT_EQ(f_score(p, q), f_score(q, p));
    std::vector<Vec3> sp, sq;
    for (const auto& x : p) sp.push_back(2.0 * x);
    for (const auto& x : q) sq.push_back(2.0 * x);
    // Scaling by two is exact in binary floating point.
    EXPECT_EQ(chamfer(sp, sq), 2.0 * chamfer(p, q));
}

TEST(FScore, FixedPointsAndMonotoneInTau) {
    CounterRng rng(4);
    const auto p = random_points(100, rng);
    const auto q = random_points(120, rng);
    EXPECT_EQ(f_score(p, p, 0.02), 1.0);
    EXPECT_EQ(f_score(std::vector<Vec3>{Vec3::Zero()}, std::vector<Vec3>{Vec3(1, 0, 0)}, 0.02), 0.0);
    double prev = 0.0;
    for (double tau : {0.01, 0.02, 0.04}) {
        const double f = f_score(p, q, tau);
        EXPECT_GE(f, prev);
        EXPECT_LE(f, 1.0);
        prev = f;
    }
}

TEST(NormalConsistency, IdenticalAndFlipped) {
    CounterRng rng(5);
    PointCloud p{random_points(100, rng), {}};
    for (std::size_t i = 0; i < p.size(); ++i) p.normals.push_back(p.points[i].normalized());
    EXPECT_DOUBLE_EQ(normal_consistency(p, p), 1.0);
    PointCloud flipped = p;
    for (auto& n : flipped.normals) n = -n;
    EXPECT_DOUBLE_EQ(normal_consistency(p, flipped), 1.0);
    EXPECT_THROW(normal_consistency(p, PointCloud{p.points, {}}), MissingNormals);
}

TEST(NormalConsistency, PatchesTiltedBySixtyDegrees) {
    PointCloud a, b;
    const double c = std::cos(M_PI / 3), s = std::sin(M_PI / 3);
    for (int i = 0; i < 60; ++i)
        for (int j = 0; j < 60; ++j) {
            const double x = -0.15 + 0.005 * i, y = -0.15 + 0.005 * j;
            a.points.emplace_back(x, y, 0.0);
            a.normals.emplace_back(0, 0, 1);
            // Rotated about the x axis through the origin.
            b.points.emplace_back(x, c * y, s * y);
            b.normals.emplace_back(0, -s, c);
        }
    EXPECT_NEAR(normal_consistency(a, b), 0.5, 0.01);
}

TEST(MeshNormalConsistency, CoplanarPairIsZero) {
    const TriangleMesh quad({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 2, 3}});
    const auto m = mesh_normal_consistency(quad);
    EXPECT_NEAR(m.value, 0.0, 1e-9);
    EXPECT_EQ(m.scored_edges, 1u);
    EXPECT_EQ(m.boundary_edges, 4u);
}

TEST(MeshNormalConsistency, CubeMatchesPerEdgeRecomputation) {
    const TriangleMesh cube = unit_cube();
    ASSERT_TRUE(cube.is_watertight());
    // Brute force: for every pair of faces sharing two vertices, 1 - cos of face normals.
    double sum = 0.0;
    int edges = 0;
    const auto& f = cube.faces();
    for (std::size_t a = 0; a < f.size(); ++a)
        for (std::size_t b = a + 1; b < f.size(); ++b) {
            int shared = 0;
            for (auto x : f[a])
                for (auto y : f[b]) shared += x == y;
            if (shared != 2) continue;
            sum += 1.0 - cube.face_normal(a).dot(cube.face_normal(b));
            ++edges;
        }
    ASSERT_EQ(edges, 18);
    const auto m = mesh_normal_consistency(cube);
    EXPECT_EQ(m.scored_edges, 18u);
    EXPECT_NEAR(m.value, sum / edges, 1e-15);
    EXPECT_NEAR(m.value, 2.0 / 3.0, 1e-15);
}

TEST(MeshNormalConsistency, SmoothSphereAndNoInteriorEdges) {
    const Extraction e = marching_cubes(AnalyticSdf::sphere(Vec3::Zero(), 0.4), GridSpec{});
    EXPECT_LT(mesh_normal_consistency(e.mesh).value, 0.01);
    const TriangleMesh single({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
    EXPECT_THROW(mesh_normal_consistency(single), NoInteriorEdges);
    // Scale invariance.
    const TriangleMesh cube = unit_cube();
    std::vector<Vec3> v;
    for (const auto& x : cube.vertices()) v.push_back(3.0 * x);
    EXPECT_NEAR(mesh_normal_consistency(TriangleMesh(v, cube.faces())).value, 2.0 / 3.0, 1e-15);
}

TEST(Iou, SelfDisjointAndConcentric) {
    const auto a = AnalyticSdf::sphere(Vec3::Zero(), 0.4);
    EXPECT_EQ(iou(a, a, 10000, BoundingCube(), 1), 1.0);
    const auto l = AnalyticSdf::sphere(Vec3(-0.25, 0, 0), 0.2);
    const auto r = AnalyticSdf::sphere(Vec3(0.25, 0, 0), 0.2);
    EXPECT_EQ(iou(l, r, 10000, BoundingCube(), 2), 0.0);
    const auto small = AnalyticSdf::sphere(Vec3::Zero(), 0.3);
    EXPECT_NEAR(iou(a, small, 100000, BoundingCube(), 3), 0.421875, 0.01);
}

TEST(SampleMeshSurface, SingleTriangleBarycentric) {
    const TriangleMesh tri({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}, {{0, 1, 2}});
    const PointCloud s = sample_mesh_surface(tri, 2000, 4);
    ASSERT_TRUE(s.has_normals());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& p = s.points[i];
        EXPECT_GE(p.x(), 0.0);
        EXPECT_GE(p.y(), 0.0);
        EXPECT_LE(p.x() + p.y(), 1.0 + 1e-12);
        EXPECT_EQ(p.z(), 0.0);
        EXPECT_EQ(s.normals[i], Vec3(0, 0, 1));
    }
}

TEST(SampleMeshSurface, AreaWeighting) {
    // Areas 1 and 3, far apart so the choice is visible from x.
    const TriangleMesh two({{0, 0, 0}, {2, 0, 0}, {0, 1, 0}, {10, 0, 0}, {12, 0, 0}, {10, 3, 0}},
                           {{0, 1, 2}, {3, 4, 5}});
    const std::size_t n = 100000;
    const PointCloud s = sample_mesh_surface(two, n, 5);
    std::size_t first = 0;
    for (const auto& p : s.points) first += p.x() < 5;
    EXPECT_NEAR(double(first) / n, 0.25, 0.01);
}

TEST(SampleMeshSurface, QuadCentroidAndZeroArea) {
    const TriangleMesh quad({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 2, 3}});
    const PointCloud s = sample_mesh_surface(quad, 10000, 6);
    Vec3 mean = Vec3::Zero();
    for (const auto& p : s.points) mean += p / 10000.0;
    EXPECT_LT((mean - Vec3(0.5, 0.5, 0)).norm(), 0.02);
    const TriangleMesh flat({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}, {{0, 1, 2}});
    EXPECT_THROW(sample_mesh_surface(flat, 10, 1), ZeroArea);
}

TEST(MeshOccupancy, InsideCube) {
    const TriangleMesh cube = unit_cube();
    const MeshOccupancy occ(cube);
    EXPECT_LT(occ.eval(Vec3(0.5, 0.5, 0.5)), 0.0);
    EXPECT_LT(occ.eval(Vec3(0.01, 0.99, 0.5)), 0.0);
    EXPECT_GT(occ.eval(Vec3(1.5, 0.5, 0.5)), 0.0);
    EXPECT_GT(occ.eval(Vec3(-0.5, 0.5, 0.5)), 0.0);
}

TEST(EvaluateMesh, AnalyticMeshAgainstItself) {
    const auto sphere = AnalyticSdf::sphere(Vec3::Zero(), 0.4);
    GridSpec g;
    g.resolution = 96;
    const Extraction e = marching_cubes(sphere, g);
    EvaluationOptions opts;
    const MetricsReport r = evaluate_mesh(e.mesh, sphere, opts);
    const double mc_tol = 2.0 / std::sqrt(double(opts.n_samples));
    EXPECT_GE(r.f_score, 1.0 - mc_tol);
    // Chamfer of two independent 10^4-sample sets of the same surface is
    // dominated by sample spacing; it must stay well under tau.
    EXPECT_LT(r.chamfer, opts.tau);
    ASSERT_TRUE(r.iou.has_value());
    EXPECT_GT(*r.iou, 0.97);
    EXPECT_GT(r.nc, 0.99);

    const MetricsReport back = metrics_from_json(to_json(r));
    EXPECT_EQ(back.chamfer, r.chamfer);
    EXPECT_EQ(back.iou, r.iou);
    EXPECT_EQ(to_json(back), to_json(r));
}
