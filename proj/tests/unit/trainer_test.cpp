#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "n2nsdf/checkpoint.hpp"
#include "n2nsdf/errors.hpp"
#include "n2nsdf/trainer.hpp"
#include "temp_dir.hpp"

using namespace n2nsdf;

namespace {

// Small enough for sub-second epochs; the properties checked here do not
// depend on network size.
TrainConfig small_config(SupervisionMode mode = SupervisionMode::PairedNoisy) {
    TrainConfig c;
    c.n_points = 512;
    c.n_uniform_queries = 1024;
    c.epochs = 2;
    c.pairs_per_epoch = 2;
    c.architecture.encoding_levels = 2;
    c.architecture.hidden = {16, 16};
    c.mode = mode;
    c.seed = 3;
    return c;
}

bool same_parameters(const NeuralSdf& a, const NeuralSdf& b) {
    return std::equal(a.parameters().begin(), a.parameters().end(), b.parameters().begin(), b.parameters().end());
}

}  // namespace

TEST(TrainConfig, ValidationNamesTheKey) {
    auto expect_key = [](TrainConfig c, const char* key) {
        try {
            c.validate();
            FAIL() << "expected ConfigError for " << key;
        } catch (const ConfigError& e) {
            EXPECT_EQ(e.key(), key);
        }
    };
    TrainConfig c = small_config();
    c.batch_size = 0;
    expect_key(c, "batch_size");
    c = small_config();
    c.optimizer.learning_rate = 0.0;
    expect_key(c, "learning_rate");
    c = small_config();
    c.shape = "teapot";
    expect_key(c, "shape");
    c = small_config();
    c.k_neighbors = 2;
    expect_key(c, "k_neighbors");
    c = small_config();
    c.pairs_per_epoch = 0;
    expect_key(c, "pairs_per_epoch");
    EXPECT_NO_THROW(small_config().validate());
}

TEST(Trainer, ModeNamesRoundTrip) {
    for (auto m : {SupervisionMode::PairedNoisy, SupervisionMode::CleanOracle, SupervisionMode::SingleNoisy})
        EXPECT_EQ(parse_mode(mode_name(m)), m);
    EXPECT_EQ(parse_mode("n2n"), SupervisionMode::PairedNoisy);
    EXPECT_THROW(parse_mode("both"), std::invalid_argument);
}

TEST(Trainer, BudgetAccountingIsExact) {
    TrainConfig c = small_config();
    c.batch_size = 300;  // 2048 queries -> 7 minibatches, the last one partial
    const TrainResult r = run_training(c);
    ASSERT_EQ(r.record.epochs.size(), c.epochs);
    EXPECT_EQ(c.steps_per_iteration(), 7u);
    EXPECT_EQ(r.record.epochs.back().steps, c.epochs * c.pairs_per_epoch * 7);
    for (const auto& e : r.record.epochs) {
        EXPECT_GE(e.train_loss, 0.0);
        EXPECT_GE(e.heldout_mse, 0.0);
    }
}

TEST(Trainer, ZeroEpochsReturnsInitialField) {
    TrainConfig c = small_config();
    c.epochs = 0;
    const TrainResult r = run_training(c);
    EXPECT_TRUE(r.record.epochs.empty());
    const Trainer fresh(c);
    EXPECT_TRUE(same_parameters(r.field, fresh.field()));
}

TEST(Trainer, RunsAreBitIdentical) {
    for (auto mode : {SupervisionMode::PairedNoisy, SupervisionMode::CleanOracle, SupervisionMode::SingleNoisy}) {
        const TrainConfig c = small_config(mode);
        const TrainResult a = run_training(c);
        const TrainResult b = run_training(c);
        EXPECT_EQ(to_jsonl(a.record, "h"), to_jsonl(b.record, "h"));
        EXPECT_TRUE(same_parameters(a.field, b.field));
    }
}

TEST(Trainer, ZeroNoisePairedMatchesSingle) {
    TrainConfig paired = small_config(SupervisionMode::PairedNoisy);
    paired.noise = GaussianNoise{0.0, 0.0};
    TrainConfig single = paired;
    single.mode = SupervisionMode::SingleNoisy;
    const TrainResult a = run_training(paired);
    const TrainResult b = run_training(single);
    ASSERT_EQ(a.record.epochs.size(), b.record.epochs.size());
    for (std::size_t e = 0; e < a.record.epochs.size(); ++e) {
        EXPECT_EQ(a.record.epochs[e].train_loss, b.record.epochs[e].train_loss);
        EXPECT_EQ(a.record.epochs[e].heldout_mse, b.record.epochs[e].heldout_mse);
    }
    EXPECT_TRUE(same_parameters(a.field, b.field));
}

TEST(Trainer, SeedChangesTrajectory) {
    TrainConfig c = small_config();
    const TrainResult a = run_training(c);
    c.seed += 1;
    const TrainResult b = run_training(c);
    EXPECT_NE(a.record.epochs.back().train_loss, b.record.epochs.back().train_loss);
}

TEST(Trainer, HeldOutSetIsFixedAndSized) {
    const auto shape = shape_by_id("sphere");
    const HeldOutSet a = make_heldout_set(shape, BoundingCube());
    const HeldOutSet b = make_heldout_set(shape, BoundingCube());
    ASSERT_EQ(a.points.size(), 8192u + 2048u);
    EXPECT_EQ(a.points, b.points);
    for (std::size_t i = 8192; i < a.points.size(); ++i) EXPECT_LE(std::abs(a.sdf[i]), 1e-6);
}

TEST(Trainer, CheckpointCarriesMeta) {
    TempDir dir;
    const TrainConfig c = small_config();
    const TrainResult r = run_training(c, dir / "f.ckpt", {{"config_hash", "feed"}});
    const Checkpoint ck = load_checkpoint(dir / "f.ckpt");
    EXPECT_EQ(ck.meta.at("config_hash"), "feed");
    EXPECT_TRUE(same_parameters(ck.field, r.field));
}

TEST(Trainer, DivergenceKeepsLastFiniteCheckpoint) {
    TempDir dir;
    TrainConfig c = small_config(SupervisionMode::CleanOracle);
    c.epochs = 3;
    c.optimizer.learning_rate = 1e300;
    try {
        run_training(c, dir / "f.ckpt");
        FAIL() << "expected divergence";
    } catch (const TrainingDiverged& e) {
        EXPECT_EQ(e.epoch(), 0u);
    }
    const Checkpoint ck = load_checkpoint(dir / "f.ckpt");
    EXPECT_TRUE(ck.field.parameters_finite());
    EXPECT_TRUE(same_parameters(ck.field, Trainer(c).field()));
}

TEST(Trainer, JsonlHasOneLinePerEpoch) {
    const TrainConfig c = small_config(SupervisionMode::CleanOracle);
    const TrainResult r = run_training(c);
    const std::string lines = to_jsonl(r.record, "abc");
    EXPECT_EQ(std::count(lines.begin(), lines.end(), '\n'), static_cast<long>(c.epochs));
    EXPECT_NE(lines.find("\"mode\":\"clean_oracle\""), std::string::npos);
    EXPECT_NE(lines.find("\"config_hash\":\"abc\""), std::string::npos);
    EXPECT_EQ(lines.find("wall_seconds"), std::string::npos);
    EXPECT_NE(to_jsonl(r.record, "abc", true).find("wall_seconds"), std::string::npos);
}
