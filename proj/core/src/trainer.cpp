#include "n2nsdf/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "n2nsdf/checkpoint.hpp"
#include "n2nsdf/errors.hpp"
#include "n2nsdf/rng.hpp"
#include "n2nsdf/sampling.hpp"

namespace n2nsdf {

namespace {

// Stream ids for derive_seed; the held-out seed is shared by every run.
constexpr std::uint64_t kCloudStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kQueryStream = 3;
constexpr std::uint64_t kShuffleStream = 4;
constexpr std::uint64_t kInitStream = 5;
constexpr std::uint64_t kHeldOutSeed = 0x4E32'4E48'454C'444FULL;

}  // namespace

std::string_view mode_name(SupervisionMode mode) {
    switch (mode) {
        case SupervisionMode::PairedNoisy:
            return "paired_noisy";
        case SupervisionMode::CleanOracle:
            return "clean_oracle";
        case SupervisionMode::SingleNoisy:
            return "single_noisy";
    }
    return "unknown";
}

SupervisionMode parse_mode(std::string_view name) {
    if (name == "paired_noisy" || name == "n2n") return SupervisionMode::PairedNoisy;
    if (name == "clean_oracle" || name == "clean") return SupervisionMode::CleanOracle;
    if (name == "single_noisy" || name == "single") return SupervisionMode::SingleNoisy;
    throw std::invalid_argument("unknown supervision mode '" + std::string(name) + "'");
}

std::uint64_t clean_cloud_seed(std::uint64_t run_seed) { return derive_seed(run_seed, {kCloudStream}); }
std::uint64_t noise_stream_seed(std::uint64_t run_seed) { return derive_seed(run_seed, {kNoiseStream}); }

void TrainConfig::validate() const {
    auto positive = [](std::size_t v, const char* key) {
        if (v < 1) throw ConfigError(key, "must be >= 1");
    };
    try {
        (void)shape_by_id(shape);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("shape", e.what());
    }
    positive(n_points, "n_points");
    positive(epochs == 0 ? 1 : epochs, "epochs");
    positive(pairs_per_epoch, "pairs_per_epoch");
    positive(batch_size, "batch_size");
    if (!(optimizer.learning_rate > 0.0)) throw ConfigError("learning_rate", "must be > 0");
    if (!(optimizer.weight_decay >= 0.0)) throw ConfigError("weight_decay", "must be >= 0");
    if (k_neighbors < 3) throw ConfigError("k_neighbors", "must be >= 3");
    if (k_neighbors > n_points) throw ConfigError("k_neighbors", "must not exceed n_points");
    if (architecture.encoding_levels < 0) throw ConfigError("encoding_levels", "must be >= 0");
    if (!(noise_sigma(noise) >= 0.0)) throw ConfigError("sigma", "must be >= 0");
}

// ---------------------------------------------------------------------------

HeldOutSet make_heldout_set(const ScalarField& shape, const BoundingCube& cube) {
    HeldOutSet set;
    CounterRng rng(kHeldOutSeed);
    const double h = cube.half_extent();
    for (int i = 0; i < 8192; ++i) set.points.emplace_back(rng.uniform(-h, h), rng.uniform(-h, h), rng.uniform(-h, h));
    const PointCloud surface = sample_surface(shape, 2048, derive_seed(kHeldOutSeed, {1}), cube);
    set.points.insert(set.points.end(), surface.points.begin(), surface.points.end());
    set.sdf.resize(set.points.size());
    shape.eval_batch(set.points, set.sdf);
    return set;
}

double heldout_mse(const NeuralSdf& field, const HeldOutSet& set) { return mse_loss(field, set.points, set.sdf); }

Trainer::Trainer(TrainConfig config)
    : config_(std::move(config)),
      shape_((config_.validate(), shape_by_id(config_.shape))),
      clean_(sample_surface(shape_, config_.n_points, clean_cloud_seed(config_.seed), config_.cube)),
      heldout_(make_heldout_set(shape_, config_.cube)),
      field_(config_.architecture, derive_seed(config_.seed, {kInitStream})),
      optimizer_(field_.parameter_count(), config_.optimizer),
      grad_(field_.parameter_count(), 0.0) {
    if (config_.mode == SupervisionMode::SingleNoisy) {
        // The one observation this baseline ever sees is pair 0's first member.
        single_cloud_ = make_pair(clean_, config_.noise, noise_stream_seed(config_.seed), 0).first;
        single_target_.emplace(*single_cloud_, config_.k_neighbors, config_.cube);
    }
}

Trainer::Supervision Trainer::make_supervision(std::size_t epoch, std::size_t iteration) const {
    const std::uint64_t pair_index = epoch * config_.pairs_per_epoch + iteration;
    const std::uint64_t query_seed = derive_seed(config_.seed, {kQueryStream, epoch, iteration});
    Supervision sup;
    if (config_.mode == SupervisionMode::SingleNoisy) {
        QueryBatch batch =
            build_query_batch(*single_cloud_, *single_cloud_, config_.n_uniform_queries, config_.cube, query_seed);
        sup.queries = std::move(batch.points);
        sup.targets.resize(sup.queries.size());
        single_target_->eval_batch(sup.queries, sup.targets);
        return sup;
    }

    auto [p1, p2] = make_pair(clean_, config_.noise, noise_stream_seed(config_.seed), pair_index);
    QueryBatch batch = build_query_batch(p1, p2, config_.n_uniform_queries, config_.cube, query_seed);
    sup.queries = std::move(batch.points);
    sup.targets.resize(sup.queries.size());
    if (config_.mode == SupervisionMode::CleanOracle) {
        shape_.eval_batch(sup.queries, sup.targets);
    } else {
        const NearestPlaneSdf target(config_.swap_roles ? std::move(p1) : std::move(p2), config_.k_neighbors,
                                     config_.cube);
        target.eval_batch(sup.queries, sup.targets);
    }
    return sup;
}

EpochStats Trainer::train_epoch(std::size_t epoch) {
    const auto start = std::chrono::steady_clock::now();
    EpochStats stats;
    stats.epoch = epoch;
    double loss_sum = 0.0;
    std::size_t loss_count = 0;

    std::vector<Vec3> q_mb;
    std::vector<double> t_mb;
    for (std::size_t it = 0; it < config_.pairs_per_epoch; ++it) {
        const Supervision sup = make_supervision(epoch, it);
        std::vector<std::uint32_t> order(sup.queries.size());
        std::iota(order.begin(), order.end(), 0u);
        CounterRng shuffle(derive_seed(config_.seed, {kShuffleStream, epoch, it}));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

        for (std::size_t begin = 0; begin < order.size(); begin += config_.batch_size) {
            const std::size_t end = std::min(order.size(), begin + config_.batch_size);
            q_mb.clear();
            t_mb.clear();
            for (std::size_t i = begin; i < end; ++i) {
                q_mb.push_back(sup.queries[order[i]]);
                t_mb.push_back(sup.targets[order[i]]);
            }
            double loss = 0.0;
            try {
                loss = mse_loss_and_gradient(field_, q_mb, t_mb, grad_);
            } catch (const TrainingDiverged& e) {
                throw TrainingDiverged(e.what(), epoch);
            }
            optimizer_.step(field_.parameters(), grad_);
            if (!field_.parameters_finite()) throw TrainingDiverged("non-finite parameters after step", epoch);
            loss_sum += loss * static_cast<double>(end - begin);
            loss_count += end - begin;
        }
    }
    stats.train_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    stats.heldout_mse = heldout_mse(field_, heldout_);
    stats.steps = optimizer_.step_count();
    stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return stats;
}

// ---------------------------------------------------------------------------

std::string to_jsonl(const TrainRecord& record, std::string_view config_hash, bool include_timing) {
    std::ostringstream out;
    for (const auto& e : record.epochs) {
        nlohmann::ordered_json j;
        j["epoch"] = e.epoch;
        j["mode"] = mode_name(record.mode);
        j["seed"] = record.seed;
        j["train_loss"] = e.train_loss;
        j["heldout_mse"] = e.heldout_mse;
        j["steps"] = e.steps;
        if (include_timing) j["wall_seconds"] = e.wall_seconds;
        j["config_hash"] = config_hash;
        out << j.dump() << '\n';
    }
    return out.str();
}

TrainResult run_training(const TrainConfig& config, const std::optional<std::filesystem::path>& checkpoint,
                         const std::map<std::string, std::string>& meta) {
    Trainer trainer(config);
    TrainRecord record;
    record.mode = config.mode;
    record.seed = config.seed;
    if (checkpoint) record.checkpoint = checkpoint->string();

    std::vector<double> last_good(trainer.field().parameters().begin(), trainer.field().parameters().end());
    for (std::size_t e = 0; e < config.epochs; ++e) {
        try {
            record.epochs.push_back(trainer.train_epoch(e));
        } catch (const TrainingDiverged&) {
            if (checkpoint) {
                NeuralSdf snapshot = trainer.field();
                std::copy(last_good.begin(), last_good.end(), snapshot.parameters().begin());
                save_checkpoint(snapshot, *checkpoint, meta);
            }
            throw;
        }
        const auto params = trainer.field().parameters();
        std::copy(params.begin(), params.end(), last_good.begin());
    }
    if (checkpoint) save_checkpoint(trainer.field(), *checkpoint, meta);
    return {std::move(record), trainer.field()};
}

}  // namespace n2nsdf
