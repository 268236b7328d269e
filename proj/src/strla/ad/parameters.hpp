#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace strla::ad {

using ParamId = std::int32_t;

struct Parameter {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<double> value;  // row-major

  std::size_t size() const { return value.size(); }
};

// Named real tensors. Ids are dense and follow creation order, which makes
// creation order part of a model's identity (checkpoints replay it).
class ParameterStore {
 public:
  ParamId create(std::string name, int rows, int cols);
  // -1 when absent.
  ParamId find(const std::string& name) const;

  Parameter& operator[](ParamId id) { return params_[static_cast<std::size_t>(id)]; }
  const Parameter& operator[](ParamId id) const { return params_[static_cast<std::size_t>(id)]; }

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, ParamId> index_;
};

// Sparse per-parameter gradient accumulator. Parameters that never receive a
// contribution stay untouched, which the optimizer uses to skip them.
class Gradients {
 public:
  void add(ParamId id, const double* g, std::size_t n);
  bool touched(ParamId id) const;
  const std::vector<double>& get(ParamId id) const { return grads_[static_cast<std::size_t>(id)]; }
  // Touched ids in increasing order.
  std::vector<ParamId> touched_ids() const;
  void merge(const Gradients& other);
  void clear();

 private:
  std::vector<std::vector<double>> grads_;
  std::vector<char> touched_;
};

}  // namespace strla::ad
