#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "n2nsdf/extract.hpp"
#include "n2nsdf/metrics.hpp"
#include "n2nsdf/trainer.hpp"

namespace n2nsdf {

/// Environment variable naming the root that relative output_dir values
/// resolve against.
inline constexpr const char* kOutputRootEnv = "N2NSDF_OUTPUT_ROOT";

/// Everything a command needs. Text form is one `key = value` per line;
/// `#` starts a comment; sweep keys take comma-separated lists.
struct ExperimentConfig {
    TrainConfig train;
    std::string noise_law = "gaussian";
    double sigma = 0.01;
    double mu = 0.0;

    int resolution = 64;
    double iso_value = 0.0;

    std::size_t metric_samples = 10000;
    std::size_t iou_samples = 100000;
    double tau = 0.02;

    std::filesystem::path output_dir = "out";

    // Absent means "not swept"; present lists are never empty.
    std::optional<std::vector<std::string>> sweep_shapes;
    std::optional<std::vector<std::string>> sweep_noise_laws;
    std::optional<std::vector<double>> sweep_sigmas;
    std::optional<std::vector<double>> sweep_mus;
    std::optional<std::vector<std::string>> sweep_modes;
    std::optional<std::vector<std::uint64_t>> sweep_seeds;

    /// TrainConfig with the noise spec assembled from noise_law / sigma / mu.
    /// Throws ConfigError.
    TrainConfig train_config() const;
    GridSpec grid() const;
    EvaluationOptions evaluation() const;
    /// output_dir, resolved against $N2NSDF_OUTPUT_ROOT when relative.
    std::filesystem::path output_path() const;
};

/// Sets one key from its text form. Throws ConfigError naming the key.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

ExperimentConfig parse_config(std::string_view text);
/// Throws IoError when unreadable, ConfigError on bad content.
ExperimentConfig load_config(const std::filesystem::path& path);

/// All known keys in sorted order.
std::vector<std::string> config_keys();

/// Sorted `key=value` lines for every key except output_dir; doubles are
/// printed round-trip exact.
std::string canonical_config(const ExperimentConfig& config);

/// 16 lowercase hex digits of FNV-1a 64 over canonical_config.
std::string config_hash(const ExperimentConfig& config);

}  // namespace n2nsdf
