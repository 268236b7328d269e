#pragma once

// Plain-double reference implementations used as independent oracles, and a
// few fixtures shared by the unit tests.

#include <cmath>
#include <cstring>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "strla/ad/parameters.hpp"
#include "strla/nn/layers.hpp"
#include "strla/stree/element.hpp"
#include "strla/stree/json.hpp"

namespace support {

using Vec = std::vector<double>;

inline constexpr const char* kTrainJourney =
    R"({"time": "12:43", "stops": ["Manchester", "Preston", "Glasgow"], "train": {"carriages": 6, "shop": false}})";

inline strla::stree::Element json(const std::string& text) { return strla::stree::parse_json(text); }

inline Vec param(const strla::ad::ParameterStore& s, strla::ad::ParamId id) { return s[id].value; }

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

inline Vec matvec(const strla::ad::Parameter& w, const Vec& x) {
  Vec y(static_cast<std::size_t>(w.rows), 0.0);
  for (int r = 0; r < w.rows; ++r)
    for (int c = 0; c < w.cols; ++c)
      y[static_cast<std::size_t>(r)] += w.value[static_cast<std::size_t>(r * w.cols + c)] * x[static_cast<std::size_t>(c)];
  return y;
}

inline Vec add(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

inline Vec mul(Vec a, const Vec& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
  return a;
}

inline Vec scale(Vec a, double s) {
  for (double& v : a) v *= s;
  return a;
}

inline Vec slice(const Vec& a, int begin, int len) { return Vec(a.begin() + begin, a.begin() + begin + len); }

inline Vec sigmoid(Vec a) {
  for (double& v : a) v = 1.0 / (1.0 + std::exp(-v));
  return a;
}

inline Vec tanh(Vec a) {
  for (double& v : a) v = std::tanh(v);
  return a;
}

inline Vec relu(Vec a) {
  for (double& v : a) v = v > 0.0 ? v : 0.0;
  return a;
}

inline Vec concat(Vec a, const Vec& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

inline Vec linear(const strla::ad::ParameterStore& s, const strla::nn::LinearParams& p, const Vec& x) {
  return add(matvec(s[p.w], x), s[p.b].value);
}

struct Cell {
  Vec h, c;
};

inline Cell lstm_step(const strla::ad::ParameterStore& s, const strla::nn::LstmParams& p, const Vec& x, const Cell& prev) {
  const int m = p.m;
  Vec pre = add(add(matvec(s[p.w], x), matvec(s[p.v], prev.h)), s[p.b].value);
  Vec i = sigmoid(slice(pre, 0, m));
  Vec f = sigmoid(slice(pre, m, m));
  Vec o = sigmoid(slice(pre, 2 * m, m));
  Vec u = tanh(slice(pre, 3 * m, m));
  Vec c = add(mul(i, u), mul(f, prev.c));
  return {mul(o, tanh(c)), c};
}

// Final state and every hidden state of an LSTM over `xs`.
inline std::pair<Cell, std::vector<Vec>> lstm_run(const strla::ad::ParameterStore& s, const strla::nn::LstmParams& p,
                                                  const std::vector<Vec>& xs) {
  Cell st{zeros(static_cast<std::size_t>(p.m)), zeros(static_cast<std::size_t>(p.m))};
  std::vector<Vec> hs;
  for (const auto& x : xs) {
    st = lstm_step(s, p, x, st);
    hs.push_back(st.h);
  }
  return {st, hs};
}

inline Vec mean(const std::vector<Vec>& xs) {
  Vec out = zeros(xs.front().size());
  for (const auto& x : xs) out = add(out, x);
  return scale(out, 1.0 / static_cast<double>(xs.size()));
}

inline Cell sumlstm(const strla::ad::ParameterStore& s, const strla::nn::SumLstmParams& p, const std::vector<Cell>& kids) {
  const int m = p.m;
  Vec hsum = zeros(static_cast<std::size_t>(m));
  for (const auto& k : kids) hsum = add(hsum, k.h);
  Vec pre = add(matvec(s[p.v_iou], hsum), s[p.b_iou].value);
  Vec i = sigmoid(slice(pre, 0, m));
  Vec o = sigmoid(slice(pre, m, m));
  Vec u = tanh(slice(pre, 2 * m, m));
  Vec c = mul(i, u);
  for (const auto& k : kids) c = add(c, mul(sigmoid(add(matvec(s[p.v_f], k.h), s[p.b_f].value)), k.c));
  return {mul(o, tanh(c)), c};
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return a.size() == b.size() ? d : INFINITY;
}

inline bool bit_equal(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) return false;
  return true;
}

// Overwrites every parameter with U(-r, r) draws.
inline void randomize(strla::ad::ParameterStore& s, std::uint64_t seed, double r = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-r, r);
  for (std::size_t i = 0; i < s.size(); ++i)
    for (double& v : s[static_cast<strla::ad::ParamId>(i)].value) v = u(rng);
}

inline void zero_all(strla::ad::ParameterStore& s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    for (double& v : s[static_cast<strla::ad::ParamId>(i)].value) v = 0.0;
}

}  // namespace support
