#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "strla/nn/layers.hpp"
#include "strla/stree/element.hpp"

namespace strla::nn {

// Per-path statistics for number normalisation. Values are recentred on the
// first observed value before averaging, so scaling the training values by a
// power of two and shifting them by an exactly representable amount leaves
// every normalised value bit-identical.
class NormStats {
 public:
  struct Entry {
    std::size_t count = 0;
    double ref = 0.0;    // first training value
    double shift = 0.0;  // mean of (x - ref)
    double scale = 0.0;  // population std of x
  };

  void observe(const std::string& path, double x);
  // Computes mean/std from the observed values and drops the raw samples.
  void finalize();

  // (x - mean) / std with >1 observation (x - mean when std is 0);
  // x itself for paths seen at most once.
  double normalize(const std::string& path, double x) const;

  const std::map<std::string, Entry>& entries() const { return entries_; }
  void set_entry(const std::string& path, Entry e) { entries_[path] = e; }
  double mean(const std::string& path) const;
  double stddev(const std::string& path) const;

 private:
  std::map<std::string, Entry> entries_;
  std::map<std::string, std::vector<double>> pending_;
};

// Character rows of a string embedder, keyed by Unicode scalar value.
struct CharTable {
  std::map<char32_t, ParamId> rows;
  ParamId unk = -1;

  ParamId lookup(char32_t ch) const {
    auto it = rows.find(ch);
    return it == rows.end() ? unk : it->second;
  }
};

// Decodes UTF-8; invalid bytes decode to U+FFFD.
std::vector<char32_t> utf8_decode(std::string_view s);

// Numeric input code of a boolean leaf: true 1, false 0, null -1.
double boolean_code(stree::Tribool v);

// h = w * x_hat + b, c = 0. `x_hat` is already normalised.
LatentState embed_scalar(Tape& tape, const LinearParams& p, double x_hat);

// Mean of LSTM hidden states over the character sequence; zero vector for
// the empty string.
LatentState embed_string(Tape& tape, const LstmParams& p, const CharTable& chars, std::string_view s);

// Deep-set container: shared element MLP (ReLU layers), mean pooling,
// shared ReLU pooling layer, then the path-specific linear map.
struct DeepSetShared {
  std::vector<LinearParams> mlp;
  LinearParams pool;
};
LatentState embed_container_set(Tape& tape, const DeepSetShared& shared, const LinearParams& path_linear,
                                std::span<const NodeId> children_h);

// Array LSTM over c_k || h_k, document order. Returns the final (c, h);
// an empty array gives (0, 0).
LatentState embed_array_lstm(Tape& tape, const LstmParams& p, std::span<const LatentState> children);

// Shared Child-Sum Tree-LSTM, then the path-specific linear map on h.
LatentState embed_object_sumlstm(Tape& tape, const SumLstmParams& shared, const LinearParams& path_linear,
                                 std::span<const LatentState> children);

// Materialises the -1 "zero" placeholder of a state component.
NodeId dense(Tape& tape, NodeId maybe_zero, int m);

}  // namespace strla::nn
