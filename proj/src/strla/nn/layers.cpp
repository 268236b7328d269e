#include "strla/nn/layers.hpp"

#include <cmath>

#include "strla/error.hpp"

namespace strla::nn {

void Initializer::glorot(ad::Parameter& p, int fan_in, int fan_out) {
  double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : p.value) v = dist(rng_);
}

LinearParams make_linear(ParameterStore& store, Initializer& init, const std::string& prefix, int in, int out) {
  LinearParams p;
  p.in = in;
  p.out = out;
  p.w = store.create(prefix + ".W", out, in);
  p.b = store.create(prefix + ".b", out, 1);
  init.glorot(store[p.w], in, out);
  return p;
}

LstmParams make_lstm(ParameterStore& store, Initializer& init, const std::string& prefix, int in, int m) {
  LstmParams p;
  p.in = in;
  p.m = m;
  p.w = store.create(prefix + ".W", 4 * m, in);
  p.v = store.create(prefix + ".V", 4 * m, m);
  p.b = store.create(prefix + ".b", 4 * m, 1);
  // Each gate block is its own m x in (or m x m) matrix.
  init.glorot(store[p.w], in, m);
  init.glorot(store[p.v], m, m);
  return p;
}

SumLstmParams make_sumlstm(ParameterStore& store, Initializer& init, const std::string& prefix, int m) {
  SumLstmParams p;
  p.m = m;
  p.v_iou = store.create(prefix + ".V_iou", 3 * m, m);
  p.b_iou = store.create(prefix + ".b_iou", 3 * m, 1);
  p.v_f = store.create(prefix + ".V_f", m, m);
  p.b_f = store.create(prefix + ".b_f", m, 1);
  init.glorot(store[p.v_iou], m, m);
  init.glorot(store[p.v_f], m, m);
  return p;
}

ParamId make_embedding_row(ParameterStore& store, Initializer& init, const std::string& name, int m) {
  ParamId id = store.create(name, m, 1);
  init.glorot(store[id], 1, m);
  return id;
}

NodeId apply_linear(Tape& tape, const LinearParams& p, NodeId x) {
  return tape.linear(tape.param(p.w), x, tape.param(p.b));
}

std::pair<NodeId, NodeId> lstm_cell(Tape& tape, const LstmParams& p, NodeId x, NodeId h_prev, NodeId c_prev) {
  const int m = p.m;
  if (tape.rows(x) != p.in)
    throw Error(ErrorCode::ShapeMismatch, "lstm_cell: input width " + std::to_string(tape.rows(x)) +
                                              ", expected " + std::to_string(p.in));
  NodeId pre = tape.linear(tape.param(p.w), x, tape.param(p.b));
  if (h_prev >= 0) pre = tape.add(pre, tape.matvec(tape.param(p.v), h_prev));
  NodeId gates = tape.sigmoid(tape.slice(pre, 0, 3 * m));
  NodeId u = tape.tanh(tape.slice(pre, 3 * m, m));
  NodeId i = tape.slice(gates, 0, m);
  NodeId o = tape.slice(gates, 2 * m, m);
  NodeId c = tape.mul(i, u);
  if (c_prev >= 0) {
    NodeId f = tape.slice(gates, m, m);
    c = tape.add(c, tape.mul(f, c_prev));
  }
  NodeId h = tape.mul(o, tape.tanh(c));
  return {h, c};
}

SequenceOutput run_lstm(Tape& tape, const LstmParams& p, std::span<const NodeId> inputs) {
  SequenceOutput out;
  out.hs.reserve(inputs.size());
  for (NodeId x : inputs) {
    auto [h, c] = lstm_cell(tape, p, x, out.h, out.c);
    out.h = h;
    out.c = c;
    out.hs.push_back(h);
  }
  return out;
}

LatentState sumlstm_cell(Tape& tape, const SumLstmParams& p, std::span<const LatentState> children) {
  const int m = p.m;
  NodeId pre;
  if (children.empty()) {
    pre = tape.param(p.b_iou);
  } else {
    std::vector<NodeId> hs;
    hs.reserve(children.size());
    for (const auto& ch : children) hs.push_back(ch.h);
    NodeId h_sum = hs.size() == 1 ? hs[0] : tape.sum(hs);
    pre = tape.linear(tape.param(p.v_iou), h_sum, tape.param(p.b_iou));
  }
  NodeId io = tape.sigmoid(tape.slice(pre, 0, 2 * m));
  NodeId i = tape.slice(io, 0, m);
  NodeId o = tape.slice(io, m, m);
  NodeId u = tape.tanh(tape.slice(pre, 2 * m, m));
  NodeId c = tape.mul(i, u);
  std::vector<NodeId> terms{c};
  for (const auto& ch : children) {
    if (ch.c < 0) continue;
    NodeId f = tape.sigmoid(tape.linear(tape.param(p.v_f), ch.h, tape.param(p.b_f)));
    terms.push_back(tape.mul(f, ch.c));
  }
  if (terms.size() > 1) c = tape.sum(terms);
  NodeId h = tape.mul(o, tape.tanh(c));
  return {c, h};
}

}  // namespace strla::nn
