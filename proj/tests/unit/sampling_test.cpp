#include <cmath>

#include <gtest/gtest.h>

#include "n2nsdf/errors.hpp"
#include "n2nsdf/noise.hpp"
#include "n2nsdf/sampling.hpp"
#include "temp_dir.hpp"

using namespace n2nsdf;

TEST(SampleSurface, SpherePointsLieOnSurface) {
    const auto sphere = AnalyticSdf::sphere(Vec3::Zero(), 0.4);
    const PointCloud c = sample_surface(sphere, 2048, 1);
    ASSERT_EQ(c.size(), 2048u);
    ASSERT_TRUE(c.has_normals());
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_LE(std::abs(c.points[i].norm() - 0.4), 1e-6);
        EXPECT_NEAR(c.normals[i].norm(), 1.0, 1e-9);
        EXPECT_GT(c.normals[i].dot(c.points[i]), 0.0);
    }
}

TEST(SampleSurface, SphereSamplesAreBalanced) {
    const auto sphere = AnalyticSdf::sphere(Vec3::Zero(), 0.4);
    const PointCloud c = sample_surface(sphere, 10000, 2);
    Vec3 mean = Vec3::Zero();
    for (const auto& p : c.points) mean += p / double(c.size());
    EXPECT_LT(mean.norm(), 0.02);
}

TEST(SampleSurface, BoxFacesShareSamplesEvenly) {
    const auto box = AnalyticSdf::box(Vec3::Zero(), Vec3(0.3, 0.3, 0.3));
    const PointCloud c = sample_surface(box, 10000, 3);
    int counts[6] = {};
    for (const auto& p : c.points) {
        int axis = 0;
        p.cwiseAbs().maxCoeff(&axis);
        ++counts[2 * axis + (p[axis] > 0 ? 1 : 0)];
        EXPECT_NEAR(p.cwiseAbs().maxCoeff(), 0.3, 1e-6);
    }
    for (int f = 0; f < 6; ++f) EXPECT_NEAR(counts[f] / 10000.0, 1.0 / 6.0, 0.02) << "face " << f;
}

TEST(SampleSurface, DeterministicPerSeed) {
    const auto shape = shape_by_id("torus");
    const PointCloud a = sample_surface(shape, 500, 77);
    const PointCloud b = sample_surface(shape, 500, 77);
    EXPECT_EQ(a.points, b.points);
    EXPECT_EQ(a.normals, b.normals);
    EXPECT_NE(sample_surface(shape, 500, 78).points, a.points);
}

TEST(SampleSurface, FieldWithoutSurfaceFailsToConverge) {
    struct Constant final : ScalarField {
        double eval(const Vec3&) const override { return 1.0; }
    } constant;
    EXPECT_THROW(sample_surface(constant, 10, 1), ConvergenceFailure);
}

TEST(QueryBatch, DefaultBudgetSplitsEvenly) {
    const auto sphere = AnalyticSdf::sphere(Vec3::Zero(), 0.4);
    const PointCloud clean = sample_surface(sphere, 2048, 4);
    const auto [p1, p2] = make_pair(clean, GaussianNoise{0.01, 0.0}, 4);
    const QueryBatch batch = build_query_batch(p1, p2, 4096, BoundingCube(), 9);
    ASSERT_EQ(batch.size(), 8192u);
    EXPECT_EQ(batch.near_surface_count(), 4096u);
    for (std::size_t i = 0; i < 2048; ++i) {
        EXPECT_EQ(batch.points[i], p1.points[i]);
        EXPECT_EQ(batch.points[2048 + i], p2.points[i]);
    }
    for (std::size_t i = 4096; i < 8192; ++i) {
        EXPECT_EQ(batch.origin[i], QueryOrigin::UniformVolume);
        EXPECT_TRUE(BoundingCube().contains(batch.points[i]));
    }
    for (const auto& q : batch.points) EXPECT_TRUE(q.allFinite());
}

TEST(QueryBatch, NoUniformMeansConcatenation) {
    PointCloud p1{{Vec3(0.1, 0, 0), Vec3(0.2, 0, 0)}, {}};
    PointCloud p2{{Vec3(0.3, 0, 0)}, {}};
    const QueryBatch batch = build_query_batch(p1, p2, 0, BoundingCube(), 1);
    EXPECT_EQ(batch.points, (std::vector<Vec3>{p1.points[0], p1.points[1], p2.points[0]}));
    EXPECT_THROW(build_query_batch(PointCloud{}, p2, 4, BoundingCube(), 1), EmptySet);
}

TEST(QueryBatch, UniformPortionIsCentered) {
    PointCloud p{{Vec3::Zero()}, {}};
    const std::size_t n = 200000;
    const QueryBatch batch = build_query_batch(p, p, n, BoundingCube(0.5), 21);
    Vec3 mean = Vec3::Zero();
    for (std::size_t i = 2; i < batch.size(); ++i) mean += batch.points[i] / double(n);
    const double bound = 5 * (0.5 / std::sqrt(3.0)) / std::sqrt(double(n));
    for (int a = 0; a < 3; ++a) EXPECT_LT(std::abs(mean[a]), bound);
}

TEST(Xyz, RoundTripKeepsNineDigits) {
    TempDir dir;
    PointCloud c{{Vec3(0.123456789, -0.5, 1e-3), Vec3(0, 0, 0)}, {}};
    save_xyz(c, dir / "c.xyz");
    const PointCloud back = load_xyz(dir / "c.xyz");
    ASSERT_EQ(back.size(), 2u);
    EXPECT_DOUBLE_EQ(back.points[0].x(), 0.123456789);
    EXPECT_THROW(load_xyz(dir / "missing.xyz"), IoError);
}
