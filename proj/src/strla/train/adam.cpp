#include "strla/train/adam.hpp"

#include <cmath>

#include "strla/error.hpp"

namespace strla::train {

void Adam::step(ad::ParameterStore& store, const ad::Gradients& grads) {
  ++t_;
  if (m_.size() < store.size()) {
    m_.resize(store.size());
    v_.resize(store.size());
  }
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double lr = config_.learning_rate;
  for (ad::ParamId id : grads.touched_ids()) {
    auto i = static_cast<std::size_t>(id);
    auto& p = store[id].value;
    const auto& g = grads.get(id);
    if (g.size() != p.size()) throw Error(ErrorCode::ShapeMismatch, "gradient shape mismatch in Adam step");
    auto& m = m_[i];
    auto& v = v_[i];
    if (m.empty()) {
      m.assign(p.size(), 0.0);
      v.assign(p.size(), 0.0);
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      double mhat = m[k] / c1;
      double vhat = v[k] / c2;
      p[k] -= lr * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
  }
}

void Adam::restore(std::int64_t t, std::vector<std::vector<double>> m, std::vector<std::vector<double>> v) {
  t_ = t;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace strla::train
