#include "strla/ad/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "strla/error.hpp"

namespace strla::ad {
namespace {

inline double sigmoid_fn(double x) {
  if (x >= 0) {
    double z = std::exp(-x);
    return 1.0 / (1.0 + z);
  }
  double z = std::exp(x);
  return z / (1.0 + z);
}

std::string shape_str(int r, int c) { return std::to_string(r) + "x" + std::to_string(c); }

}  // namespace

Tape::Tape(const ParameterStore& store) : store_(store), param_leaf_(store.size(), -1) {
  nodes_.reserve(256);
  values_.reserve(4096);
}

NodeId Tape::push(Node n) {
  auto count = static_cast<std::uint32_t>(n.rows * n.cols);
  if (n.op != Op::Param) {
    n.voff = static_cast<std::uint32_t>(values_.size());
    values_.resize(values_.size() + count);
  } else {
    n.voff = 0;
  }
  n.goff = grad_size_;
  grad_size_ += count;
  nodes_.push_back(n);
  has_grads_ = false;
  return static_cast<NodeId>(nodes_.size() - 1);
}

const double* Tape::val(NodeId id) const {
  const Node& n = nodes_[id];
  if (n.op == Op::Param) return store_[n.aux].value.data();
  return values_.data() + n.voff;
}

std::span<const double> Tape::value(NodeId id) const {
  return {val(id), static_cast<std::size_t>(size(id))};
}

double Tape::scalar(NodeId id) const {
  if (size(id) != 1) throw Error(ErrorCode::ShapeMismatch, "scalar() on " + shape_str(rows(id), cols(id)) + " node");
  return val(id)[0];
}

void Tape::check_finite(NodeId id) const {
  const double* v = val(id);
  int n = size(id);
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(v[i]))
      throw Error(ErrorCode::NonFinite, "non-finite value produced by tape node " + std::to_string(id));
  }
}

void Tape::require_vector(NodeId id, const char* op) const {
  if (nodes_[id].cols != 1)
    throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": expected a column vector, got " +
                                              shape_str(nodes_[id].rows, nodes_[id].cols));
}

void Tape::require_same(NodeId a, NodeId b, const char* op) const {
  if (nodes_[a].rows != nodes_[b].rows || nodes_[a].cols != nodes_[b].cols)
    throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": " + shape_str(nodes_[a].rows, nodes_[a].cols) +
                                              " vs " + shape_str(nodes_[b].rows, nodes_[b].cols));
}

NodeId Tape::constant(std::span<const double> values, int rows, int cols) {
  if (static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) != values.size())
    throw Error(ErrorCode::ShapeMismatch, "constant: data length does not match shape");
  NodeId id = push({Op::Constant, false, -1, -1, -1, rows, cols, 0, 0, 0, 0, 0.0});
  std::copy(values.begin(), values.end(), out_ptr(id));
  check_finite(id);
  return id;
}

NodeId Tape::constant(std::initializer_list<double> values) {
  return constant(std::span<const double>(values.begin(), values.size()), static_cast<int>(values.size()), 1);
}

NodeId Tape::zeros(int n) { return push({Op::Constant, false, -1, -1, -1, n, 1, 0, 0, 0, 0, 0.0}); }

NodeId Tape::param(ParamId pid) {
  if (pid < 0 || static_cast<std::size_t>(pid) >= store_.size())
    throw Error(ErrorCode::Internal, "tape: unknown parameter id " + std::to_string(pid));
  if (static_cast<std::size_t>(pid) >= param_leaf_.size()) param_leaf_.resize(store_.size(), -1);
  NodeId& slot = param_leaf_[static_cast<std::size_t>(pid)];
  if (slot >= 0) return slot;
  const Parameter& p = store_[pid];
  slot = push({Op::Param, true, -1, -1, -1, p.rows, p.cols, pid, 0, 0, 0, 0.0});
  param_nodes_.push_back(slot);
  return slot;
}

NodeId Tape::matvec(NodeId w, NodeId x) {
  require_vector(x, "matvec");
  int r = nodes_[w].rows, c = nodes_[w].cols;
  if (nodes_[x].rows != c)
    throw Error(ErrorCode::ShapeMismatch, "matvec: " + shape_str(r, c) + " times " + shape_str(nodes_[x].rows, 1));
  NodeId id = push({Op::MatVec, nodes_[w].needs_grad || nodes_[x].needs_grad, w, x, -1, r, 1, 0, 0, 0, 0, 0.0});
  const double* W = val(w);
  const double* xv = val(x);
  double* out = out_ptr(id);
  for (int i = 0; i < r; ++i) {
    const double* row = W + static_cast<std::size_t>(i) * c;
    double acc = 0.0;
    for (int j = 0; j < c; ++j) acc += row[j] * xv[j];
    out[i] = acc;
  }
  check_finite(id);
  return id;
}

NodeId Tape::linear(NodeId w, NodeId x, NodeId b) {
  require_vector(x, "linear");
  require_vector(b, "linear");
  int r = nodes_[w].rows, c = nodes_[w].cols;
  if (nodes_[x].rows != c || nodes_[b].rows != r)
    throw Error(ErrorCode::ShapeMismatch, "linear: W " + shape_str(r, c) + ", x " + shape_str(nodes_[x].rows, 1) +
                                              ", b " + shape_str(nodes_[b].rows, 1));
  bool ng = nodes_[w].needs_grad || nodes_[x].needs_grad || nodes_[b].needs_grad;
  NodeId id = push({Op::Linear, ng, w, x, b, r, 1, 0, 0, 0, 0, 0.0});
  const double* W = val(w);
  const double* xv = val(x);
  const double* bv = val(b);
  double* out = out_ptr(id);
  for (int i = 0; i < r; ++i) {
    const double* row = W + static_cast<std::size_t>(i) * c;
    double acc = 0.0;
    for (int j = 0; j < c; ++j) acc += row[j] * xv[j];
    out[i] = acc + bv[i];
  }
  check_finite(id);
  return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
  require_same(a, b, "add");
  NodeId id = push({Op::Add, nodes_[a].needs_grad || nodes_[b].needs_grad, a, b, -1, nodes_[a].rows,
                    nodes_[a].cols, 0, 0, 0, 0, 0.0});
  const double* x = val(a);
  const double* y = val(b);
  double* out = out_ptr(id);
  for (int i = 0, n = size(id); i < n; ++i) out[i] = x[i] + y[i];
  check_finite(id);
  return id;
}

NodeId Tape::sub(NodeId a, NodeId b) {
  require_same(a, b, "sub");
  NodeId id = push({Op::Sub, nodes_[a].needs_grad || nodes_[b].needs_grad, a, b, -1, nodes_[a].rows,
                    nodes_[a].cols, 0, 0, 0, 0, 0.0});
  const double* x = val(a);
  const double* y = val(b);
  double* out = out_ptr(id);
  for (int i = 0, n = size(id); i < n; ++i) out[i] = x[i] - y[i];
  check_finite(id);
  return id;
}

NodeId Tape::mul(NodeId a, NodeId b) {
  require_same(a, b, "mul");
  NodeId id = push({Op::Mul, nodes_[a].needs_grad || nodes_[b].needs_grad, a, b, -1, nodes_[a].rows,
                    nodes_[a].cols, 0, 0, 0, 0, 0.0});
  const double* x = val(a);
  const double* y = val(b);
  double* out = out_ptr(id);
  for (int i = 0, n = size(id); i < n; ++i) out[i] = x[i] * y[i];
  check_finite(id);
  return id;
}

NodeId Tape::scale(NodeId a, double s) {
  NodeId id = push({Op::Scale, nodes_[a].needs_grad, a, -1, -1, nodes_[a].rows, nodes_[a].cols, 0, 0, 0, 0, s});
  const double* x = val(a);
  double* out = out_ptr(id);
  for (int i = 0, n = size(id); i < n; ++i) out[i] = x[i] * s;
  check_finite(id);
  return id;
}

NodeId Tape::concat(NodeId a, NodeId b) {
  require_vector(a, "concat");
  require_vector(b, "concat");
  int na = nodes_[a].rows, nb = nodes_[b].rows;
  NodeId id = push({Op::Concat, nodes_[a].needs_grad || nodes_[b].needs_grad, a, b, -1, na + nb, 1, 0, 0, 0, 0, 0.0});
  const double* x = val(a);
  const double* y = val(b);
  double* out = out_ptr(id);
  std::copy(x, x + na, out);
  std::copy(y, y + nb, out + na);
  return id;
}

NodeId Tape::slice(NodeId a, int begin, int len) {
  require_vector(a, "slice");
  if (begin < 0 || len <= 0 || begin + len > nodes_[a].rows)
    throw Error(ErrorCode::ShapeMismatch, "slice [" + std::to_string(begin) + ", +" + std::to_string(len) +
                                              ") out of range for length " + std::to_string(nodes_[a].rows));
  NodeId id = push({Op::Slice, nodes_[a].needs_grad, a, -1, -1, len, 1, begin, 0, 0, 0, 0.0});
  const double* x = val(a) + begin;
  std::copy(x, x + len, out_ptr(id));
  return id;
}

NodeId Tape::sum(std::span<const NodeId> xs) {
  if (xs.empty()) throw Error(ErrorCode::ShapeMismatch, "sum of an empty list");
  bool ng = false;
  for (NodeId x : xs) {
    require_same(xs[0], x, "sum");
    ng = ng || nodes_[x].needs_grad;
  }
  auto begin = static_cast<std::int32_t>(lists_.size());
  lists_.insert(lists_.end(), xs.begin(), xs.end());
  NodeId id = push({Op::Sum, ng, -1, -1, -1, nodes_[xs[0]].rows, nodes_[xs[0]].cols, begin,
                    static_cast<std::int32_t>(xs.size()), 0, 0, 0.0});
  double* out = out_ptr(id);
  int n = size(id);
  for (NodeId x : xs) {
    const double* v = val(x);
    for (int i = 0; i < n; ++i) out[i] += v[i];
  }
  check_finite(id);
  return id;
}

NodeId Tape::mean(std::span<const NodeId> xs) {
  if (xs.empty()) throw Error(ErrorCode::ShapeMismatch, "mean of an empty list");
  bool ng = false;
  for (NodeId x : xs) {
    require_same(xs[0], x, "mean");
    ng = ng || nodes_[x].needs_grad;
  }
  auto begin = static_cast<std::int32_t>(lists_.size());
  lists_.insert(lists_.end(), xs.begin(), xs.end());
  NodeId id = push({Op::Mean, ng, -1, -1, -1, nodes_[xs[0]].rows, nodes_[xs[0]].cols, begin,
                    static_cast<std::int32_t>(xs.size()), 0, 0, 0.0});
  double* out = out_ptr(id);
  int n = size(id);
  for (NodeId x : xs) {
    const double* v = val(x);
    for (int i = 0; i < n; ++i) out[i] += v[i];
  }
  double k = static_cast<double>(xs.size());
  for (int i = 0; i < n; ++i) out[i] /= k;
  check_finite(id);
  return id;
}

NodeId Tape::sigmoid(NodeId a) {
  NodeId id = push({Op::Sigmoid, nodes_[a].needs_grad, a, -1, -1, nodes_[a].rows, nodes_[a].cols, 0, 0, 0, 0, 0.0});
  const double* x = val(a);
  double* out = out_ptr(id);
  for (int i = 0, n = size(id); i < n; ++i) out[i] = sigmoid_fn(x[i]);
  return id;
}

NodeId Tape::tanh(NodeId a) {
  NodeId id = push({Op::Tanh, nodes_[a].needs_grad, a, -1, -1, nodes_[a].rows, nodes_[a].cols, 0, 0, 0, 0, 0.0});
  const double* x = val(a);
  double* out = out_ptr(id);
  for (int i = 0, n = size(id); i < n; ++i) out[i] = std::tanh(x[i]);
  return id;
}

NodeId Tape::relu(NodeId a) {
  NodeId id = push({Op::Relu, nodes_[a].needs_grad, a, -1, -1, nodes_[a].rows, nodes_[a].cols, 0, 0, 0, 0, 0.0});
  const double* x = val(a);
  double* out = out_ptr(id);
  for (int i = 0, n = size(id); i < n; ++i) out[i] = x[i] > 0.0 ? x[i] : 0.0;
  return id;
}

NodeId Tape::softmax_cross_entropy(NodeId logits, int label) {
  require_vector(logits, "softmax_cross_entropy");
  int k = nodes_[logits].rows;
  if (k < 2) throw Error(ErrorCode::ShapeMismatch, "softmax_cross_entropy needs at least 2 classes");
  if (label < 0 || label >= k)
    throw Error(ErrorCode::LabelOutOfRange,
                "label " + std::to_string(label) + " out of range for " + std::to_string(k) + " classes");
  NodeId id = push({Op::SoftmaxCrossEntropy, nodes_[logits].needs_grad, logits, -1, -1, 1, 1, label, 0, 0, 0, 0.0});
  const double* z = val(logits);
  double mx = *std::max_element(z, z + k);
  double se = 0.0;
  for (int i = 0; i < k; ++i) se += std::exp(z[i] - mx);
  out_ptr(id)[0] = std::log(se) - (z[label] - mx);
  check_finite(id);
  return id;
}

std::span<const double> Tape::grad(NodeId id) const {
  if (!has_grads_) throw Error(ErrorCode::Internal, "grad() called before backward()");
  return {grads_.data() + nodes_[id].goff, static_cast<std::size_t>(size(id))};
}

void Tape::backward(NodeId loss) {
  if (size(loss) != 1)
    throw Error(ErrorCode::NonScalarLoss,
                "backward needs a 1x1 loss node, got " + shape_str(nodes_[loss].rows, nodes_[loss].cols));
  grads_.assign(grad_size_, 0.0);
  grads_[nodes_[loss].goff] = 1.0;
  has_grads_ = true;

  for (NodeId id = loss; id >= 0; --id) {
    const Node& n = nodes_[id];
    if (!n.needs_grad) continue;
    const double* g = grads_.data() + n.goff;
    const int len = n.rows * n.cols;
    auto gof = [&](NodeId x) { return grads_.data() + nodes_[x].goff; };
    auto wants = [&](NodeId x) { return nodes_[x].needs_grad; };

    switch (n.op) {
      case Op::Constant:
      case Op::Param:
        break;
      case Op::MatVec:
      case Op::Linear: {
        NodeId w = n.a, x = n.b;
        int r = nodes_[w].rows, c = nodes_[w].cols;
        const double* W = val(w);
        const double* xv = val(x);
        if (wants(w)) {
          double* gw = gof(w);
          for (int i = 0; i < r; ++i) {
            double gi = g[i];
            if (gi == 0.0) continue;
            double* row = gw + static_cast<std::size_t>(i) * c;
            for (int j = 0; j < c; ++j) row[j] += gi * xv[j];
          }
        }
        if (wants(x)) {
          double* gx = gof(x);
          for (int i = 0; i < r; ++i) {
            double gi = g[i];
            if (gi == 0.0) continue;
            const double* row = W + static_cast<std::size_t>(i) * c;
            for (int j = 0; j < c; ++j) gx[j] += row[j] * gi;
          }
        }
        if (n.op == Op::Linear && wants(n.c)) {
          double* gb = gof(n.c);
          for (int i = 0; i < r; ++i) gb[i] += g[i];
        }
        break;
      }
      case Op::Add:
        if (wants(n.a)) { double* d = gof(n.a); for (int i = 0; i < len; ++i) d[i] += g[i]; }
        if (wants(n.b)) { double* d = gof(n.b); for (int i = 0; i < len; ++i) d[i] += g[i]; }
        break;
      case Op::Sub:
        if (wants(n.a)) { double* d = gof(n.a); for (int i = 0; i < len; ++i) d[i] += g[i]; }
        if (wants(n.b)) { double* d = gof(n.b); for (int i = 0; i < len; ++i) d[i] -= g[i]; }
        break;
      case Op::Mul: {
        const double* x = val(n.a);
        const double* y = val(n.b);
        if (wants(n.a)) { double* d = gof(n.a); for (int i = 0; i < len; ++i) d[i] += g[i] * y[i]; }
        if (wants(n.b)) { double* d = gof(n.b); for (int i = 0; i < len; ++i) d[i] += g[i] * x[i]; }
        break;
      }
      case Op::Scale: {
        double* d = gof(n.a);
        for (int i = 0; i < len; ++i) d[i] += g[i] * n.s;
        break;
      }
      case Op::Concat: {
        int na = nodes_[n.a].rows;
        if (wants(n.a)) { double* d = gof(n.a); for (int i = 0; i < na; ++i) d[i] += g[i]; }
        if (wants(n.b)) { double* d = gof(n.b); for (int i = na; i < len; ++i) d[i - na] += g[i]; }
        break;
      }
      case Op::Slice: {
        double* d = gof(n.a) + n.aux;
        for (int i = 0; i < len; ++i) d[i] += g[i];
        break;
      }
      case Op::Sum:
      case Op::Mean: {
        double f = n.op == Op::Mean ? 1.0 / static_cast<double>(n.aux2) : 1.0;
        for (int k = 0; k < n.aux2; ++k) {
          NodeId x = lists_[static_cast<std::size_t>(n.aux + k)];
          if (!wants(x)) continue;
          double* d = gof(x);
          for (int i = 0; i < len; ++i) d[i] += g[i] * f;
        }
        break;
      }
      case Op::Sigmoid: {
        const double* y = val(id);
        double* d = gof(n.a);
        if (corrupt_sigmoid_) {
          for (int i = 0; i < len; ++i) d[i] += g[i];
        } else {
          for (int i = 0; i < len; ++i) d[i] += g[i] * y[i] * (1.0 - y[i]);
        }
        break;
      }
      case Op::Tanh: {
        const double* y = val(id);
        double* d = gof(n.a);
        for (int i = 0; i < len; ++i) d[i] += g[i] * (1.0 - y[i] * y[i]);
        break;
      }
      case Op::Relu: {
        const double* x = val(n.a);
        double* d = gof(n.a);
        for (int i = 0; i < len; ++i)
          if (x[i] > 0.0) d[i] += g[i];
        break;
      }
      case Op::SoftmaxCrossEntropy: {
        const double* z = val(n.a);
        int k = nodes_[n.a].rows;
        double mx = *std::max_element(z, z + k);
        double se = 0.0;
        for (int i = 0; i < k; ++i) se += std::exp(z[i] - mx);
        double* d = gof(n.a);
        for (int i = 0; i < k; ++i) {
          double p = std::exp(z[i] - mx) / se;
          d[i] += g[0] * (p - (i == n.aux ? 1.0 : 0.0));
        }
        break;
      }
    }
  }
}

void Tape::accumulate_into(Gradients& out) const {
  if (!has_grads_) throw Error(ErrorCode::Internal, "accumulate_into() called before backward()");
  for (NodeId id : param_nodes_) {
    const Node& n = nodes_[id];
    out.add(n.aux, grads_.data() + n.goff, static_cast<std::size_t>(n.rows * n.cols));
  }
}

}  // namespace strla::ad
