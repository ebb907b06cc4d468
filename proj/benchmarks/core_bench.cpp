#include <vector>

#include <benchmark/benchmark.h>

#include "n2nsdf/extract.hpp"
#include "n2nsdf/field.hpp"
#include "n2nsdf/kdtree.hpp"
#include "n2nsdf/metrics.hpp"
#include "n2nsdf/noise.hpp"
#include "n2nsdf/rng.hpp"
#include "n2nsdf/sampling.hpp"
#include "n2nsdf/target.hpp"

using namespace n2nsdf;

namespace {

std::vector<Vec3> cube_points(std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed);
    std::vector<Vec3> q(n);
    for (auto& p : q) p = Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    return q;
}

const PointCloud& sphere_cloud() {
    static const PointCloud cloud = sample_surface(AnalyticSdf::sphere(Vec3::Zero(), 0.4), 2048, 1);
    return cloud;
}

void BM_TrainStep(benchmark::State& state) {
    FieldArchitecture arch;
    arch.hidden.assign(4, static_cast<int>(state.range(0)));
    NeuralSdf field(arch, 1);
    AdamW opt(field.parameter_count(), AdamWConfig{});
    const auto q = cube_points(512, 2);
    std::vector<double> t(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) t[i] = q[i].norm() - 0.4;
    std::vector<double> grad(field.parameter_count());
    for (auto _ : state) {
        benchmark::DoNotOptimize(mse_loss_and_gradient(field, q, t, grad));
        opt.step(field.parameters(), grad);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(q.size()));
}
BENCHMARK(BM_TrainStep)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_FieldEvalBatch(benchmark::State& state) {
    const NeuralSdf field(FieldArchitecture{}, 1);
    const auto q = cube_points(8192, 3);
    std::vector<double> out(q.size());
    for (auto _ : state) {
        field.eval_batch(q, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(q.size()));
}
BENCHMARK(BM_FieldEvalBatch)->Unit(benchmark::kMillisecond);

void BM_KdTreeKnn(benchmark::State& state) {
    const KdTree tree(sphere_cloud().points);
    const auto q = cube_points(1024, 4);
    std::vector<KdTree::Neighbor> out;
    for (auto _ : state)
        for (const auto& p : q) {
            tree.knn(p, static_cast<std::size_t>(state.range(0)), out);
            benchmark::DoNotOptimize(out.data());
        }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(q.size()));
}
BENCHMARK(BM_KdTreeKnn)->Arg(1)->Arg(16);

void BM_TargetBuildAndEval(benchmark::State& state) {
    const auto [p1, p2] = make_pair(sphere_cloud(), GaussianNoise{0.01, 0.0}, 5);
    const QueryBatch batch = build_query_batch(p1, p2, 4096, BoundingCube(), 6);
    std::vector<double> out(batch.size());
    for (auto _ : state) {
        const NearestPlaneSdf target(p2, 16);
        target.eval_batch(batch.points, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch.size()));
}
BENCHMARK(BM_TargetBuildAndEval)->Unit(benchmark::kMillisecond);

void BM_MarchingCubesAnalytic(benchmark::State& state) {
    const auto sphere = AnalyticSdf::sphere(Vec3::Zero(), 0.4);
    GridSpec grid;
    grid.resolution = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(marching_cubes(sphere, grid).mesh.faces().size());
}
BENCHMARK(BM_MarchingCubesAnalytic)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Chamfer(benchmark::State& state) {
    const auto p = cube_points(static_cast<std::size_t>(state.range(0)), 7);
    const auto q = cube_points(static_cast<std::size_t>(state.range(0)), 8);
    for (auto _ : state) benchmark::DoNotOptimize(chamfer(p, q));
}
BENCHMARK(BM_Chamfer)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
