#include "strla/train/mlp.hpp"

#include "strla/error.hpp"

namespace strla::train {

Mlp::Mlp(int inputs, int width, int layers, int classes, std::uint64_t seed) : inputs_(inputs), width_(width) {
  if (inputs < 1) throw Error(ErrorCode::Config, "MLP needs at least one input feature");
  nn::Initializer init(seed);
  int in = inputs;
  for (int l = 0; l < layers; ++l) {
    hidden_.push_back(nn::make_linear(store_, init, "mlp" + std::to_string(l), in, width));
    in = width;
  }
  output_ = nn::make_linear(store_, init, "output", in, classes);
}

ad::NodeId Mlp::logits(ad::Tape& tape, std::span<const double> x) const {
  if (static_cast<int>(x.size()) != inputs_)
    throw Error(ErrorCode::ShapeMismatch, "MLP input has " + std::to_string(x.size()) + " features, expected " +
                                              std::to_string(inputs_));
  ad::NodeId z = tape.constant(x, inputs_, 1);
  for (const auto& layer : hidden_) z = tape.relu(nn::apply_linear(tape, layer, z));
  return nn::apply_linear(tape, output_, z);
}

int Mlp::predict(std::span<const double> x) const {
  ad::Tape tape(store_);
  auto v = tape.value(logits(tape, x));
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[static_cast<std::size_t>(i)] > v[static_cast<std::size_t>(best)]) best = i;
  return best;
}

}  // namespace strla::train
