#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "n2nsdf/config.hpp"
#include "n2nsdf/metrics.hpp"

namespace n2nsdf {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfigOrIo = 1,
    kExitDiverged = 2,
    kExitEmptySurface = 3,
};

struct CommandOutcome {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> outputs;
    std::string message;
};

/// clean.xyz, noisy_1.xyz, noisy_2.xyz: the clean cloud and the first noisy
/// pair a training run with the same config draws.
CommandOutcome cmd_sample(const ExperimentConfig& config);

/// field.ckpt and train_record.jsonl (reproducible), plus train_timing.jsonl
/// holding wall times. Throws TrainingDiverged after saving the last finite
/// field.
CommandOutcome cmd_train(const ExperimentConfig& config);

/// mesh.obj from a checkpoint. Exit code 3 and no mesh when the field has no
/// zero crossing on the grid.
CommandOutcome cmd_reconstruct(const ExperimentConfig& config, const std::filesystem::path& checkpoint);

/// metrics.json comparing a mesh (OBJ) or a checkpoint against the analytic
/// shape named by config.train.shape. Throws IoError when input is missing.
CommandOutcome cmd_eval(const ExperimentConfig& config, const std::filesystem::path& input);

struct SweepCell {
    std::string shape;
    std::string noise_law;
    double sigma = 0.0;
    double mu = 0.0;
    SupervisionMode mode = SupervisionMode::PairedNoisy;
    std::uint64_t seed = 0;
};

/// Cartesian product in the order shapes, noise laws, mus, sigmas, modes,
/// seeds; unswept axes take the base config's value. Mus apply to gaussian
/// only; other laws get mu 0. Throws ConfigError when nothing is swept.
std::vector<SweepCell> expand_sweep(const ExperimentConfig& config);

ExperimentConfig cell_config(const ExperimentConfig& base, const SweepCell& cell);

struct ExperimentRow {
    SweepCell cell;
    std::size_t epochs = 0;
    /// Absent when the extracted surface was empty.
    std::optional<MetricsReport> metrics;
};

/// Trains, extracts and evaluates one cell. gt_samples, when given, must be
/// ground_truth_samples for the cell's shape and evaluation options.
ExperimentRow run_cell(const ExperimentConfig& base, const SweepCell& cell, const PointCloud* gt_samples = nullptr);

std::string csv_header();
/// Metrics of an empty-surface row print as nan; a missing IoU is left blank.
std::string csv_row(const ExperimentRow& row);

/// results.csv with one row per cell, in sweep order. Progress lines go to
/// `log` when given.
CommandOutcome cmd_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Runs a command, mapping library errors to exit codes and reporting them on
/// `err`: config/IO/parse errors 1, divergence 2.
int run_guarded(const std::function<CommandOutcome()>& command, std::ostream& err);

}  // namespace n2nsdf
