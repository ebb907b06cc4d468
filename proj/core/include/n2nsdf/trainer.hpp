#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "n2nsdf/field.hpp"
#include "n2nsdf/geometry.hpp"
#include "n2nsdf/noise.hpp"
#include "n2nsdf/target.hpp"

namespace n2nsdf {

/// What the field regresses onto at each query.
///  - PairedNoisy: fresh noisy pair (p1, p2) per iteration; targets from the
///    frozen estimator built on p2.
///  - CleanOracle: same queries, targets are the analytic signed distance.
///  - SingleNoisy: one noisy observation p1 drawn once and reused; queries and
///    targets both come from it.
enum class SupervisionMode { PairedNoisy, CleanOracle, SingleNoisy };

std::string_view mode_name(SupervisionMode mode);
/// Accepts "paired_noisy" / "n2n", "clean_oracle" / "clean", "single_noisy" / "single".
SupervisionMode parse_mode(std::string_view name);

struct TrainConfig {
    std::string shape = "sphere";
    NoiseSpec noise = GaussianNoise{0.01, 0.0};
    std::size_t n_points = 2048;
    std::size_t n_uniform_queries = 4096;
    // Smallest budget at which the supervision modes separate reliably at the
    // default learning rate; at 30 epochs the fits are still optimizer-limited.
    std::size_t epochs = 60;
    std::size_t pairs_per_epoch = 4;
    std::size_t batch_size = 512;
    AdamWConfig optimizer;
    std::uint64_t seed = 0;
    SupervisionMode mode = SupervisionMode::PairedNoisy;
    FieldArchitecture architecture;
    std::size_t k_neighbors = 16;
    BoundingCube cube;
    /// PairedNoisy only: build targets from p1 instead of p2.
    bool swap_roles = false;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;

    std::size_t queries_per_iteration() const noexcept { return 2 * n_points + n_uniform_queries; }
    std::size_t steps_per_iteration() const noexcept {
        return (queries_per_iteration() + batch_size - 1) / batch_size;
    }
};

struct EpochStats {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double heldout_mse = 0.0;
    std::uint64_t steps = 0;
    double wall_seconds = 0.0;
};

struct TrainRecord {
    SupervisionMode mode = SupervisionMode::PairedNoisy;
    std::uint64_t seed = 0;
    std::vector<EpochStats> epochs;
    std::string checkpoint;
};

/// One JSON object per epoch. Wall time is written only when include_timing
/// is set, so the default form is reproducible byte for byte.
std::string to_jsonl(const TrainRecord& record, std::string_view config_hash, bool include_timing = false);

/// Seeds of the clean cloud and of the noise stream a run with this seed uses,
/// so other tools can reproduce the exact clouds it trained on.
std::uint64_t clean_cloud_seed(std::uint64_t run_seed);
std::uint64_t noise_stream_seed(std::uint64_t run_seed);

/// Fixed evaluation set: 8192 uniform cube points plus 2048 clean surface
/// points, drawn from a reserved seed and never used for training.
struct HeldOutSet {
    std::vector<Vec3> points;
    std::vector<double> sdf;
};

HeldOutSet make_heldout_set(const ScalarField& shape, const BoundingCube& cube);
double heldout_mse(const NeuralSdf& field, const HeldOutSet& set);

/// Stateful NoiseSDF2NoiseSDF loop for one shape. Single writer: the field
/// must not be evaluated concurrently with train_epoch.
class Trainer {
public:
    explicit Trainer(TrainConfig config);

    /// Runs pairs_per_epoch iterations, each a full shuffled pass of
    /// minibatch AdamW steps over one query batch.
    EpochStats train_epoch(std::size_t epoch);

    const TrainConfig& config() const noexcept { return config_; }
    const NeuralSdf& field() const noexcept { return field_; }
    NeuralSdf& field() noexcept { return field_; }
    const AdamW& optimizer() const noexcept { return optimizer_; }
    const AnalyticSdf& shape() const noexcept { return shape_; }
    const PointCloud& clean_cloud() const noexcept { return clean_; }
    const HeldOutSet& heldout() const noexcept { return heldout_; }

private:
    struct Supervision {
        std::vector<Vec3> queries;
        std::vector<double> targets;
    };
    Supervision make_supervision(std::size_t epoch, std::size_t iteration) const;

    TrainConfig config_;
    AnalyticSdf shape_;
    PointCloud clean_;
    HeldOutSet heldout_;
    NeuralSdf field_;
    AdamW optimizer_;
    std::optional<PointCloud> single_cloud_;
    std::optional<NearestPlaneSdf> single_target_;
    std::vector<double> grad_;
};

struct TrainResult {
    TrainRecord record;
    NeuralSdf field;
};

/// Trains for config.epochs epochs. When checkpoint is given the final field
/// is saved there with meta attached; on divergence the last finite field is
/// saved instead and TrainingDiverged is rethrown.
TrainResult run_training(const TrainConfig& config, const std::optional<std::filesystem::path>& checkpoint = {},
                         const std::map<std::string, std::string>& meta = {});

}  // namespace n2nsdf
