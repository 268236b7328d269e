#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "strla/ad/parameters.hpp"
#include "strla/ad/tape.hpp"
#include "strla/nn/layers.hpp"

namespace strla::train {

// Fully-connected baseline: `layers` ReLU layers of width `width`, then a
// linear output layer.
class Mlp {
 public:
  Mlp(int inputs, int width, int layers, int classes, std::uint64_t seed);

  ad::NodeId logits(ad::Tape& tape, std::span<const double> x) const;
  int predict(std::span<const double> x) const;

  ad::ParameterStore& store() { return store_; }
  const ad::ParameterStore& store() const { return store_; }
  int inputs() const { return inputs_; }
  int width() const { return width_; }
  int layers() const { return static_cast<int>(hidden_.size()); }
  int classes() const { return output_.out; }

 private:
  int inputs_;
  int width_;
  ad::ParameterStore store_;
  std::vector<nn::LinearParams> hidden_;
  nn::LinearParams output_;
};

}  // namespace strla::train
