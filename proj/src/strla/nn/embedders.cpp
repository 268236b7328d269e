#include "strla/nn/embedders.hpp"

#include <cmath>

#include "strla/error.hpp"

namespace strla::nn {

void NormStats::observe(const std::string& path, double x) { pending_[path].push_back(x); }

void NormStats::finalize() {
  for (auto& [path, xs] : pending_) {
    Entry e;
    e.count = xs.size();
    e.ref = xs.front();
    double sum = 0.0;
    for (double x : xs) sum += x - e.ref;
    e.shift = sum / static_cast<double>(xs.size());
    double sq = 0.0;
    for (double x : xs) {
      double d = (x - e.ref) - e.shift;
      sq += d * d;
    }
    e.scale = std::sqrt(sq / static_cast<double>(xs.size()));
    entries_[path] = e;
  }
  pending_.clear();
}

double NormStats::normalize(const std::string& path, double x) const {
  auto it = entries_.find(path);
  if (it == entries_.end() || it->second.count <= 1) return x;
  const Entry& e = it->second;
  double centred = (x - e.ref) - e.shift;
  return e.scale > 0.0 ? centred / e.scale : centred;
}

double NormStats::mean(const std::string& path) const {
  auto it = entries_.find(path);
  return it == entries_.end() ? 0.0 : it->second.ref + it->second.shift;
}

double NormStats::stddev(const std::string& path) const {
  auto it = entries_.find(path);
  return it == entries_.end() ? 0.0 : it->second.scale;
}

std::vector<char32_t> utf8_decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    }
    bool ok = len > 0 && i + static_cast<std::size_t>(len) <= s.size();
    for (int k = 1; ok && k < len; ++k) {
      auto b = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
      if ((b & 0xC0) != 0x80) ok = false;
      else cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

double boolean_code(stree::Tribool v) {
  switch (v) {
    case stree::Tribool::True: return 1.0;
    case stree::Tribool::False: return 0.0;
    case stree::Tribool::Null: return -1.0;
  }
  return -1.0;
}

LatentState embed_scalar(Tape& tape, const LinearParams& p, double x_hat) {
  NodeId h = tape.add(tape.scale(tape.param(p.w), x_hat), tape.param(p.b));
  return {-1, h};
}

LatentState embed_string(Tape& tape, const LstmParams& p, const CharTable& chars, std::string_view s) {
  std::vector<char32_t> cps = utf8_decode(s);
  if (cps.empty()) return {-1, tape.zeros(p.m)};
  std::vector<NodeId> xs;
  xs.reserve(cps.size());
  for (char32_t ch : cps) xs.push_back(tape.param(chars.lookup(ch)));
  SequenceOutput seq = run_lstm(tape, p, xs);
  NodeId h = seq.hs.size() == 1 ? seq.hs[0] : tape.mean(seq.hs);
  return {-1, h};
}

LatentState embed_container_set(Tape& tape, const DeepSetShared& shared, const LinearParams& path_linear,
                                std::span<const NodeId> children_h) {
  NodeId avg;
  if (children_h.empty()) {
    avg = tape.zeros(shared.pool.in);
  } else {
    std::vector<NodeId> embedded;
    embedded.reserve(children_h.size());
    for (NodeId h : children_h) {
      NodeId z = h;
      for (const auto& layer : shared.mlp) z = tape.relu(apply_linear(tape, layer, z));
      embedded.push_back(z);
    }
    avg = embedded.size() == 1 ? embedded[0] : tape.mean(embedded);
  }
  NodeId pooled = tape.relu(apply_linear(tape, shared.pool, avg));
  return {-1, apply_linear(tape, path_linear, pooled)};
}

NodeId dense(Tape& tape, NodeId maybe_zero, int m) { return maybe_zero >= 0 ? maybe_zero : tape.zeros(m); }

LatentState embed_array_lstm(Tape& tape, const LstmParams& p, std::span<const LatentState> children) {
  if (children.empty()) {
    NodeId z = tape.zeros(p.m);
    return {z, tape.zeros(p.m)};
  }
  if (p.in != 2 * p.m) throw Error(ErrorCode::ShapeMismatch, "array LSTM expects input width 2m");
  std::vector<NodeId> xs;
  xs.reserve(children.size());
  for (const auto& ch : children) xs.push_back(tape.concat(dense(tape, ch.c, p.m), ch.h));
  SequenceOutput seq = run_lstm(tape, p, xs);
  return {seq.c, seq.h};
}

LatentState embed_object_sumlstm(Tape& tape, const SumLstmParams& shared, const LinearParams& path_linear,
                                 std::span<const LatentState> children) {
  LatentState s = sumlstm_cell(tape, shared, children);
  return {s.c, apply_linear(tape, path_linear, s.h)};
}

}  // namespace strla::nn
