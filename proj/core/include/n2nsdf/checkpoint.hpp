#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "n2nsdf/field.hpp"

namespace n2nsdf {

/// Text checkpoint:
///
///     n2nsdf-checkpoint 1
///     meta <key> <value>            (zero or more, e.g. config_hash, seed)
///     encoding_levels <L>
///     activation <tanh|softplus>
///     output_bias <hexfloat>
///     layers <count>
///     layer <rows> <cols>
///     <rows lines of cols hexfloats: weight, row-major>
///     <one line of rows hexfloats: bias>
///     ...
///
/// Values are written as C99 hexfloats so the round trip is bit-exact.
struct Checkpoint {
    NeuralSdf field;
    std::map<std::string, std::string> meta;
};

void save_checkpoint(const NeuralSdf& field, const std::filesystem::path& path,
                     const std::map<std::string, std::string>& meta = {});
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// True when the file starts with the checkpoint magic line.
bool is_checkpoint_file(const std::filesystem::path& path);

}  // namespace n2nsdf
