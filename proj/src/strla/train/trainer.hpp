#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "strla/ad/tape.hpp"
#include "strla/train/adam.hpp"

namespace strla::train {

struct TrainConfig {
  int epochs = 10;
  int batch_size = 4;   // examples whose gradients are summed per Adam step
  int hidden = 32;      // m for tree models, layer width for the MLP
  int layers = 1;       // MLP hidden layers
  int folds = 5;
  int threads = 1;
  std::uint64_t seed = 1;
  AdamConfig adam;

  std::vector<std::string> problems() const;  // empty when valid
  void validate() const;                      // throws Config
};

// Deterministic 64-bit seed derived from a base seed and a list of salts.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> salts);

// Permutation of [0, n) for one epoch, seeded by (seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, int epoch);

// Builds the logits node of example `index` on `tape`. `rng` is a per-example
// generator for training-time randomness (null at evaluation).
using ForwardFn = std::function<ad::NodeId(ad::Tape& tape, std::size_t index, std::mt19937_64* rng)>;

struct BatchRecord {
  int epoch = 0;
  int batch = 0;
  double mean_loss = 0.0;
};

struct TrainResult {
  std::vector<BatchRecord> batches;
  std::int64_t steps = 0;
};

// Loss of one example and its parameter gradients (added into `grads`).
double example_gradient(const ad::ParameterStore& store, const ForwardFn& forward, std::size_t index, int label,
                        std::mt19937_64* rng, ad::Gradients& grads);

// Softmax cross-entropy training with pseudo-minibatching: each epoch visits
// the examples in a seeded order, sums gradients over `batch_size` examples
// and applies one Adam step per batch. Per-example gradients inside a batch
// may be computed on several threads; they are always summed in example
// order, so results do not depend on the thread count.
TrainResult train_loop(ad::ParameterStore& store, const std::vector<int>& labels, const TrainConfig& config,
                       const ForwardFn& forward, Adam& optimizer);

struct Evaluation {
  double accuracy = 0.0;
  std::vector<std::vector<std::int64_t>> confusion;  // [true][predicted]
  std::vector<int> predictions;
};

// `labels[i]` may be -1 for classes the model does not know; such examples
// count as errors and are left out of the confusion matrix.
Evaluation evaluate(const std::function<int(std::size_t)>& predict, const std::vector<int>& labels, int classes,
                    int threads = 1);

// Runs fn(i) for i in [0, n) on up to `threads` threads.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace strla::train
