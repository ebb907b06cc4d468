#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "n2nsdf/checkpoint.hpp"
#include "n2nsdf/errors.hpp"
#include "n2nsdf/field.hpp"
#include "n2nsdf/rng.hpp"
#include "temp_dir.hpp"

using namespace n2nsdf;

namespace {

std::vector<Vec3> random_queries(std::size_t n, std::uint64_t seed) {
    CounterRng rng(seed);
    std::vector<Vec3> q(n);
    for (auto& p : q) p = Vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    return q;
}

FieldArchitecture small_arch(Activation act = Activation::Tanh) {
    FieldArchitecture a;
    a.encoding_levels = 3;
    a.hidden = {16, 16};
    a.activation = act;
    return a;
}

}  // namespace

TEST(Encode, ZeroLevelsIsIdentity) {
    const auto f = encode(Vec3(0.1, -0.2, 0.3), 0);
    EXPECT_EQ(f, (std::vector<double>{0.1, -0.2, 0.3}));
}

TEST(Encode, OriginGivesZeroSinesAndUnitCosines) {
    const int L = 6;
    const auto f = encode(Vec3::Zero(), L);
    ASSERT_EQ(f.size(), 3u + 6u * L);
    for (int l = 0; l < L; ++l)
        for (int a = 0; a < 3; ++a) {
            EXPECT_EQ(f[3 + 6 * l + a], 0.0);
            EXPECT_EQ(f[3 + 6 * l + 3 + a], 1.0);
        }
}

TEST(Encode, MatchesDirectRecomputation) {
    const Vec3 q(0.25, 0.0, 0.0);
    const auto f = encode(q, 6);
    for (int l = 0; l < 6; ++l) {
        const double w = std::ldexp(std::numbers::pi, l);
        for (int a = 0; a < 3; ++a) {
            EXPECT_DOUBLE_EQ(f[3 + 6 * l + a], std::sin(w * q[a]));
            EXPECT_DOUBLE_EQ(f[3 + 6 * l + 3 + a], std::cos(w * q[a]));
        }
    }
    EXPECT_NEAR(f[3], std::sin(2 * std::numbers::pi * 0.25 * 0.5), 1e-15);
}

TEST(NeuralSdf, LayoutMatchesArchitecture) {
    const NeuralSdf field(FieldArchitecture{}, 1);
    ASSERT_EQ(field.layers().size(), 5u);
    EXPECT_EQ(field.layers().front().cols, 39);
    EXPECT_EQ(field.layers().back().rows, 1);
    EXPECT_EQ(field.parameter_count(), 39u * 128 + 128 + 3 * (128 * 128 + 128) + 128 + 1);
    EXPECT_EQ(field.bias(4)(0), 0.1);
    const double bound = 1.0 / std::sqrt(39.0);
    for (int c = 0; c < 39; ++c) EXPECT_LE(std::abs(field.weight(0)(0, c)), bound);
}

TEST(NeuralSdf, ZeroHeadGivesZeroOutput) {
    NeuralSdf field(small_arch(), 3);
    field.zero_output_layer();
    for (const auto& q : random_queries(50, 1)) EXPECT_EQ(field.eval(q), 0.0);
}

TEST(NeuralSdf, DeterministicInitAndPureEvaluation) {
    const NeuralSdf a(FieldArchitecture{}, 42);
    const NeuralSdf b(FieldArchitecture{}, 42);
    EXPECT_TRUE(std::equal(a.parameters().begin(), a.parameters().end(), b.parameters().begin()));
    const Vec3 q(0.1, 0.2, -0.3);
    const double first = a.eval(q);
    EXPECT_EQ(a.eval(q), first);
    EXPECT_EQ(b.eval(q), first);
    // Batch and single evaluation agree exactly.
    const auto qs = random_queries(700, 2);
    std::vector<double> out(qs.size());
    a.eval_batch(qs, out);
    for (std::size_t i = 0; i < qs.size(); i += 97) EXPECT_EQ(out[i], a.eval(qs[i]));
}

class GradientCheck : public ::testing::TestWithParam<Activation> {};

TEST_P(GradientCheck, MatchesCentralDifferences) {
    NeuralSdf field(small_arch(GetParam()), 8);
    const auto queries = random_queries(64, 4);
    std::vector<double> targets(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) targets[i] = queries[i].norm() - 0.3;
    std::vector<double> grad(field.parameter_count());
    mse_loss_and_gradient(field, queries, targets, grad);

    auto params = field.parameters();
    const double h = 1e-5;
    int compared = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + h;
        const double up = mse_loss(field, queries, targets);
        params[i] = saved - h;
        const double down = mse_loss(field, queries, targets);
        params[i] = saved;
        const double fd = (up - down) / (2 * h);
        const double scale = std::max(std::abs(fd), std::abs(grad[i]));
        if (scale < 1e-7) continue;
        EXPECT_LT(std::abs(fd - grad[i]) / scale, 1e-4) << "parameter " << i;
        ++compared;
    }
    EXPECT_GT(compared, 300);
}

INSTANTIATE_TEST_SUITE_P(Activations, GradientCheck, ::testing::Values(Activation::Tanh, Activation::Softplus));

TEST(Backward, ExactTargetsGiveZeroGradient) {
    const NeuralSdf field(small_arch(), 5);
    const auto queries = random_queries(32, 6);
    std::vector<double> targets(queries.size());
    field.eval_batch(queries, targets);
    std::vector<double> grad(field.parameter_count(), 1.0);
    EXPECT_EQ(mse_loss_and_gradient(field, queries, targets, grad), 0.0);
    for (double g : grad) EXPECT_EQ(g, 0.0);
}

TEST(Backward, GradientIsLinearInResidual) {
    const NeuralSdf field(small_arch(), 5);
    const auto queries = random_queries(32, 7);
    std::vector<double> pred(queries.size()), t1(queries.size()), t2(queries.size());
    field.eval_batch(queries, pred);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const double r = 0.01 * std::sin(double(i));
        t1[i] = pred[i] - r;
        t2[i] = pred[i] - 2 * r;
    }
    std::vector<double> g1(field.parameter_count()), g2(field.parameter_count());
    mse_loss_and_gradient(field, queries, t1, g1);
    mse_loss_and_gradient(field, queries, t2, g2);
    for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_NEAR(g2[i], 2 * g1[i], 1e-12 + 1e-9 * std::abs(g1[i]));
}

TEST(Backward, NonFiniteTargetDiverges) {
    const NeuralSdf field(small_arch(), 5);
    const auto queries = random_queries(4, 8);
    std::vector<double> targets(4, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> grad(field.parameter_count());
    EXPECT_THROW(mse_loss_and_gradient(field, queries, targets, grad), TrainingDiverged);
}

TEST(AdamW, ZeroGradientWithoutDecayLeavesParameters) {
    AdamWConfig cfg;
    cfg.weight_decay = 0.0;
    AdamW opt(3, cfg);
    std::vector<double> p{1.0, -2.0, 0.5}, g(3, 0.0);
    const auto before = p;
    for (int i = 0; i < 10; ++i) opt.step(p, g);
    EXPECT_EQ(p, before);
    EXPECT_EQ(opt.step_count(), 10u);
}

TEST(AdamW, ConvergesOnScalarQuadratic) {
    AdamWConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.weight_decay = 0.0;
    AdamW opt(1, cfg);
    std::vector<double> theta{0.0}, g(1);
    for (int i = 0; i < 500; ++i) {
        g[0] = 2 * (theta[0] - 3);
        opt.step(theta, g);
    }
    EXPECT_NEAR(theta[0], 3.0, 1e-3);
}

TEST(AdamW, DecoupledDecayShrinksParameters) {
    AdamWConfig cfg;
    cfg.weight_decay = 0.5;
    AdamW opt(2, cfg);
    std::vector<double> p{1.0, -1.0}, g(2, 0.0);
    opt.step(p, g);
    EXPECT_DOUBLE_EQ(p[0], 1.0 * (1 - cfg.learning_rate * 0.5));
    EXPECT_LT(std::abs(p[1]), 1.0);
}

TEST(Checkpoint, RoundTripIsBitExact) {
    TempDir dir;
    NeuralSdf field(small_arch(Activation::Softplus), 12);
    field.parameters()[3] = 0.1 + 1e-17;
    save_checkpoint(field, dir / "f.ckpt", {{"config_hash", "0123"}, {"seed", "7"}});
    ASSERT_TRUE(is_checkpoint_file(dir / "f.ckpt"));
    const Checkpoint back = load_checkpoint(dir / "f.ckpt");
    EXPECT_EQ(back.meta.at("config_hash"), "0123");
    EXPECT_EQ(back.field.architecture().activation, Activation::Softplus);
    ASSERT_EQ(back.field.parameter_count(), field.parameter_count());
    EXPECT_TRUE(std::equal(field.parameters().begin(), field.parameters().end(), back.field.parameters().begin()));
}

TEST(Checkpoint, RejectsGarbage) {
    TempDir dir;
    {
        std::ofstream out(dir / "x.ckpt");
        out << "n2nsdf-checkpoint 1\nencoding_levels two\n";
    }
    EXPECT_THROW(load_checkpoint(dir / "x.ckpt"), ParseError);
    EXPECT_THROW(load_checkpoint(dir / "none.ckpt"), IoError);
    EXPECT_FALSE(is_checkpoint_file(dir / "none.ckpt"));
}
