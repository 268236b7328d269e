#include "strla/ad/parameters.hpp"

#include "strla/error.hpp"

namespace strla::ad {

ParamId ParameterStore::create(std::string name, int rows, int cols) {
  if (rows <= 0 || cols <= 0) throw Error(ErrorCode::ShapeMismatch, "parameter '" + name + "' has empty shape");
  if (index_.count(name)) throw Error(ErrorCode::Internal, "duplicate parameter '" + name + "'");
  ParamId id = static_cast<ParamId>(params_.size());
  index_.emplace(name, id);
  Parameter p;
  p.name = std::move(name);
  p.rows = rows;
  p.cols = cols;
  p.value.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
  params_.push_back(std::move(p));
  return id;
}

ParamId ParameterStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

void Gradients::add(ParamId id, const double* g, std::size_t n) {
  auto i = static_cast<std::size_t>(id);
  if (i >= grads_.size()) {
    grads_.resize(i + 1);
    touched_.resize(i + 1, 0);
  }
  auto& dst = grads_[i];
  if (!touched_[i]) {
    dst.assign(g, g + n);
    touched_[i] = 1;
    return;
  }
  if (dst.size() != n) throw Error(ErrorCode::ShapeMismatch, "gradient size changed for parameter");
  for (std::size_t k = 0; k < n; ++k) dst[k] += g[k];
}

bool Gradients::touched(ParamId id) const {
  auto i = static_cast<std::size_t>(id);
  return i < touched_.size() && touched_[i];
}

std::vector<ParamId> Gradients::touched_ids() const {
  std::vector<ParamId> ids;
  for (std::size_t i = 0; i < touched_.size(); ++i)
    if (touched_[i]) ids.push_back(static_cast<ParamId>(i));
  return ids;
}

void Gradients::merge(const Gradients& other) {
  for (std::size_t i = 0; i < other.touched_.size(); ++i)
    if (other.touched_[i]) add(static_cast<ParamId>(i), other.grads_[i].data(), other.grads_[i].size());
}

void Gradients::clear() {
  for (std::size_t i = 0; i < touched_.size(); ++i) {
    if (touched_[i]) {
      touched_[i] = 0;
      grads_[i].clear();
    }
  }
}

}  // namespace strla::ad
