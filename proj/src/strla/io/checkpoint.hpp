#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "strla/train/experiment.hpp"

namespace strla::io {

inline constexpr const char* kCheckpointFormat = "STRLA/1";

// A trained learner plus the experiment configuration that produced it.
struct Checkpoint {
  train::ExperimentConfig experiment;
  std::unique_ptr<train::Learner> learner;
};

// Self-describing JSON container headed by {"format": "STRLA/1"}. Tree
// models store their configuration, label order, path dictionary,
// normalisation statistics, vocabularies and every parameter tensor in
// creation order; the MLP baseline stores its featurizer and weights.
// Optimizer moments are included on request. Doubles round-trip exactly.
std::string checkpoint_to_json(const train::Learner& learner, const train::ExperimentConfig& experiment,
                               bool with_optimizer = false);
// Throws VersionMismatch for another format tag, Config for malformed
// content.
Checkpoint checkpoint_from_json(std::string_view text);

void save_checkpoint(const std::string& path, const train::Learner& learner, const train::ExperimentConfig& experiment,
                     bool with_optimizer = false);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace strla::io
