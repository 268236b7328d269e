#pragma once

#include <string>
#include <string_view>

#include "strla/train/experiment.hpp"

namespace strla::io {

// Experiment configuration file (JSON object). Recognised fields:
//   kind, ablation, mapping (file path or inline object), epochs,
//   batch_size, hidden, layers, set_layers, folds, threads, seed,
//   learning_rate, beta1, beta2, epsilon, ordinal, unseen_path_rate,
//   fold_overrides: [{epochs, batch_size, hidden, layers}, ...]
// Fields absent from the file keep the values already in `config`. Every
// problem found is reported in one Config error, and on error `config` is
// left unchanged. A relative mapping path is
// resolved against `base_dir`. With `validate` the merged configuration is
// also checked for consistency.
void apply_config_json(std::string_view text, train::ExperimentConfig& config, const std::string& base_dir = ".",
                       bool validate = true);
void apply_config_file(const std::string& path, train::ExperimentConfig& config, bool validate = true);

// The full configuration as a JSON object accepted by apply_config_json.
std::string config_to_json(const train::ExperimentConfig& config);

// Reads a mapping dictionary file.
engine::MappingDictionary load_mapping(const std::string& path);

}  // namespace strla::io
