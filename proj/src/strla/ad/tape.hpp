#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "strla/ad/parameters.hpp"

namespace strla::ad {

using NodeId = std::int32_t;

enum class Op : std::uint8_t {
  Constant,
  Param,
  MatVec,
  Linear,  // W x + b
  Add,
  Sub,
  Mul,
  Scale,
  Concat,
  Slice,
  Sum,
  Mean,
  Sigmoid,
  Tanh,
  Relu,
  SoftmaxCrossEntropy,
};

// Dynamic computation graph for one example. Values live in one contiguous
// arena; parameter leaves read straight from the ParameterStore, which must
// not change while the tape is alive. A parameter referenced many times is a
// single leaf, so its gradient accumulates across uses.
class Tape {
 public:
  explicit Tape(const ParameterStore& store);

  NodeId constant(std::span<const double> values, int rows, int cols = 1);
  NodeId constant(std::initializer_list<double> values);
  NodeId zeros(int n);
  NodeId param(ParamId id);

  NodeId matvec(NodeId w, NodeId x);
  NodeId linear(NodeId w, NodeId x, NodeId b);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double s);
  NodeId concat(NodeId a, NodeId b);
  NodeId slice(NodeId a, int begin, int len);
  NodeId sum(std::span<const NodeId> xs);
  NodeId mean(std::span<const NodeId> xs);
  NodeId sigmoid(NodeId a);
  NodeId tanh(NodeId a);
  NodeId relu(NodeId a);
  // -log softmax(logits)[label], max-subtracted. Scalar output.
  NodeId softmax_cross_entropy(NodeId logits, int label);

  std::span<const double> value(NodeId id) const;
  double scalar(NodeId id) const;
  int rows(NodeId id) const { return nodes_[id].rows; }
  int cols(NodeId id) const { return nodes_[id].cols; }
  int size(NodeId id) const { return nodes_[id].rows * nodes_[id].cols; }
  Op op(NodeId id) const { return nodes_[id].op; }
  std::size_t node_count() const { return nodes_.size(); }

  // Reverse sweep from a 1x1 node. Each node is visited once, in reverse
  // creation order.
  void backward(NodeId loss);
  // Gradient of the last backward's loss with respect to `id` (zeros when the
  // node does not influence the loss).
  std::span<const double> grad(NodeId id) const;
  // Adds every parameter leaf's gradient into `out`.
  void accumulate_into(Gradients& out) const;

  // Test fixture: makes the sigmoid backward rule wrong (drops the σ(1−σ)
  // factor) so gradient checks have a negative control.
  void corrupt_sigmoid_backward(bool on) { corrupt_sigmoid_ = on; }

 private:
  struct Node {
    Op op;
    bool needs_grad;
    std::int32_t a, b, c;  // operands (-1 unused)
    std::int32_t rows, cols;
    std::int32_t aux;       // param id / slice begin / list begin / label
    std::int32_t aux2;      // list length
    std::uint32_t voff;     // value offset (unused for params)
    std::uint32_t goff;     // gradient offset
    double s;               // scale factor
  };

  NodeId push(Node n);
  double* out_ptr(NodeId id) { return values_.data() + nodes_[id].voff; }
  const double* val(NodeId id) const;
  void check_finite(NodeId id) const;
  void require_vector(NodeId id, const char* op) const;
  void require_same(NodeId a, NodeId b, const char* op) const;

  const ParameterStore& store_;
  std::vector<Node> nodes_;
  std::vector<double> values_;
  std::vector<double> grads_;
  std::vector<NodeId> lists_;
  std::vector<NodeId> param_leaf_;  // param id -> node id, -1 if absent
  std::vector<NodeId> param_nodes_;
  std::uint32_t grad_size_ = 0;
  bool has_grads_ = false;
  bool corrupt_sigmoid_ = false;
};

}  // namespace strla::ad
