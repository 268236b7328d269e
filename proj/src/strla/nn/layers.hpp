#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "strla/ad/parameters.hpp"
#include "strla/ad/tape.hpp"

namespace strla::nn {

using ad::NodeId;
using ad::ParamId;
using ad::ParameterStore;
using ad::Tape;

// Memory cell and hidden state of an embedded element. Primitives carry c = 0.
struct LatentState {
  NodeId c = -1;
  NodeId h = -1;
};

// Seeded Glorot-uniform initializer: matrices draw from
// U(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))), biases start at 0.
class Initializer {
 public:
  explicit Initializer(std::uint64_t seed) : rng_(seed) {}
  void glorot(ad::Parameter& p, int fan_in, int fan_out);
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// W z + b with W out x in.
struct LinearParams {
  ParamId w = -1;
  ParamId b = -1;
  int in = 0;
  int out = 0;
};

// Vanilla LSTM with the four gate blocks stacked row-wise in the order
// input, forget, output, candidate: W is 4m x in, V is 4m x m, b is 4m.
struct LstmParams {
  ParamId w = -1;
  ParamId v = -1;
  ParamId b = -1;
  int in = 0;
  int m = 0;
};

// Child-Sum Tree-LSTM without external input. The i, o, u blocks are stacked
// in V_iou (3m x m) and b_iou; the per-child forget gate has V_f (m x m), b_f.
struct SumLstmParams {
  ParamId v_iou = -1;
  ParamId b_iou = -1;
  ParamId v_f = -1;
  ParamId b_f = -1;
  int m = 0;
};

LinearParams make_linear(ParameterStore& store, Initializer& init, const std::string& prefix, int in, int out);
LstmParams make_lstm(ParameterStore& store, Initializer& init, const std::string& prefix, int in, int m);
SumLstmParams make_sumlstm(ParameterStore& store, Initializer& init, const std::string& prefix, int m);
// A learned m-vector initialised like an m x 1 matrix (embedding rows).
ParamId make_embedding_row(ParameterStore& store, Initializer& init, const std::string& name, int m);

NodeId apply_linear(Tape& tape, const LinearParams& p, NodeId x);

// One LSTM transition. h_prev / c_prev of -1 stand for the zero vector.
// Returns (h_t, c_t).
std::pair<NodeId, NodeId> lstm_cell(Tape& tape, const LstmParams& p, NodeId x, NodeId h_prev, NodeId c_prev);

struct SequenceOutput {
  std::vector<NodeId> hs;  // hidden state after each input
  NodeId h = -1;           // final hidden state (-1 for an empty sequence)
  NodeId c = -1;           // final memory cell (-1 for an empty sequence)
};

SequenceOutput run_lstm(Tape& tape, const LstmParams& p, std::span<const NodeId> inputs);

// Child-Sum Tree-LSTM node over (c_n, h_n) children; c_n may be -1 (zero).
// Returns (c_j, h_j) as a LatentState.
LatentState sumlstm_cell(Tape& tape, const SumLstmParams& p, std::span<const LatentState> children);

}  // namespace strla::nn
