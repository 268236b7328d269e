#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "doctest.h"
#include "strla/ad/tape.hpp"
#include "strla/error.hpp"
#include "support.hpp"

using namespace strla;
using namespace strla::ad;

namespace {

// Central-difference gradient of f with respect to every entry of store.
std::vector<std::vector<double>> numeric_grad(ParameterStore& store, const std::function<double()>& f, double h = 1e-5) {
  std::vector<std::vector<double>> out(store.size());
  for (std::size_t p = 0; p < store.size(); ++p) {
    auto& v = store[static_cast<ParamId>(p)].value;
    out[p].resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double x = v[i];
      v[i] = x + h;
      double up = f();
      v[i] = x - h;
      double down = f();
      v[i] = x;
      out[p][i] = (up - down) / (2 * h);
    }
  }
  return out;
}

double rel_err(double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-4}); }

}  // namespace

TEST_CASE("sigmoid at zero") {
  ParameterStore s;
  ParamId x = s.create("x", 1, 1);
  Tape t(s);
  NodeId y = t.sigmoid(t.param(x));
  CHECK(t.scalar(y) == 0.5);
  t.backward(y);
  Gradients g;
  t.accumulate_into(g);
  CHECK(g.get(x)[0] == 0.25);
}

TEST_CASE("relu subgradient at zero is zero") {
  ParameterStore s;
  ParamId x = s.create("x", 3, 1);
  s[x].value = {-1.0, 0.0, 2.0};
  Tape t(s);
  NodeId y = t.sum(std::vector<NodeId>{t.relu(t.param(x))});
  NodeId l = t.mean(std::vector<NodeId>{t.slice(y, 0, 1), t.slice(y, 1, 1), t.slice(y, 2, 1)});
  t.backward(l);
  auto g = t.grad(t.param(x));
  CHECK(g[0] == 0.0);
  CHECK(g[1] == 0.0);
  CHECK(g[2] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("random composite expression matches finite differences") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    ParameterStore s;
    ParamId w = s.create("w", 8, 8);
    ParamId x = s.create("x", 8, 1);
    ParamId b = s.create("b", 8, 1);
    ParamId v = s.create("v", 8, 1);
    support::randomize(s, seed, 2.0);
    auto build = [&](Tape& t) {
      NodeId a = t.tanh(t.linear(t.param(w), t.param(x), t.param(b)));
      NodeId c = t.sigmoid(t.mul(a, t.param(v)));
      NodeId d = t.relu(t.sub(t.param(v), t.scale(a, 0.5)));
      NodeId e = t.concat(t.slice(c, 0, 4), t.slice(d, 4, 4));
      NodeId f = t.add(e, t.matvec(t.param(w), c));
      NodeId m = t.mean(std::vector<NodeId>{f, c, t.param(x)});
      NodeId sum = t.sum(std::vector<NodeId>{t.slice(m, 0, 4), t.slice(m, 4, 4)});
      return t.softmax_cross_entropy(sum, 2);
    };
    Tape t(s);
    NodeId loss = build(t);
    t.backward(loss);
    Gradients g;
    t.accumulate_into(g);
    auto num = numeric_grad(s, [&] {
      Tape u(s);
      return u.scalar(build(u));
    });
    double worst = 0.0;
    for (ParamId p : {w, x, b, v})
      for (std::size_t i = 0; i < num[p].size(); ++i) worst = std::max(worst, rel_err(g.get(p)[i], num[p][i]));
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("identity loss and shared leaves") {
  ParameterStore s;
  ParamId x = s.create("x", 1, 1);
  s[x].value = {3.0};
  {
    Tape t(s);
    NodeId l = t.param(x);
    t.backward(l);
    CHECK(t.grad(l)[0] == 1.0);
  }
  Tape once(s);
  NodeId p = once.param(x);
  NodeId l1 = once.mul(p, p);
  once.backward(l1);
  Gradients g1;
  once.accumulate_into(g1);

  Tape twice(s);
  NodeId l2 = twice.add(twice.mul(twice.param(x), twice.param(x)), twice.mul(twice.param(x), twice.param(x)));
  CHECK(twice.param(x) == twice.param(x));
  twice.backward(l2);
  Gradients g2;
  twice.accumulate_into(g2);
  CHECK(g2.get(x)[0] == 2.0 * g1.get(x)[0]);
}

TEST_CASE("tape error conditions") {
  ParameterStore s;
  ParamId w = s.create("w", 2, 3);
  ParamId x = s.create("x", 2, 1);
  Tape t(s);
  try {
    t.matvec(t.param(w), t.param(x));
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
  try {
    t.backward(t.param(x));
    FAIL("expected NonScalarLoss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonScalarLoss);
  }
  try {
    t.constant({std::numeric_limits<double>::infinity()});
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
  try {
    t.scale(t.constant({1e300}), 1e300);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFinite);
  }
  try {
    t.softmax_cross_entropy(t.constant({1.0, 2.0}), 2);
    FAIL("expected LabelOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LabelOutOfRange);
  }
}

TEST_CASE("softmax cross-entropy") {
  ParameterStore s;
  ParamId z = s.create("z", 5, 1);
  {
    Tape t(s);
    CHECK(t.scalar(t.softmax_cross_entropy(t.param(z), 3)) == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  }
  s[z].value = {0.0, 50.0, 0.0, 0.0, 0.0};
  {
    Tape t(s);
    CHECK(t.scalar(t.softmax_cross_entropy(t.param(z), 1)) <= 1e-20);
  }
  s[z].value = {0.3, -1.2, 2.0, 0.7, -0.1};
  Tape t(s);
  NodeId l = t.softmax_cross_entropy(t.param(z), 2);
  t.backward(l);
  Gradients g;
  t.accumulate_into(g);
  double denom = 0.0;
  for (double v : s[z].value) denom += std::exp(v);
  auto num = numeric_grad(s, [&] {
    Tape u(s);
    return u.scalar(u.softmax_cross_entropy(u.param(z), 2));
  });
  for (int i = 0; i < 5; ++i) {
    double expected = std::exp(s[z].value[i]) / denom - (i == 2 ? 1.0 : 0.0);
    CHECK(std::abs(g.get(z)[i] - expected) <= 1e-12);
    CHECK(std::abs(g.get(z)[i] - num[z][i]) <= 1e-8);
  }
}

TEST_CASE("forward values are deterministic") {
  ParameterStore s;
  ParamId w = s.create("w", 6, 6);
  ParamId x = s.create("x", 6, 1);
  support::randomize(s, 99);
  auto run = [&] {
    Tape t(s);
    NodeId h = t.tanh(t.matvec(t.param(w), t.sigmoid(t.param(x))));
    auto v = t.value(h);
    return std::vector<double>(v.begin(), v.end());
  };
  CHECK(support::bit_equal(run(), run()));
}

TEST_CASE("gradients merge in a fixed order") {
  Gradients a, b;
  double g1[2] = {1.0, 2.0};
  double g2[2] = {0.5, -1.0};
  a.add(1, g1, 2);
  b.add(1, g2, 2);
  b.add(3, g2, 2);
  a.merge(b);
  CHECK(a.touched(1));
  CHECK(a.touched(3));
  CHECK_FALSE(a.touched(0));
  CHECK(a.get(1) == std::vector<double>{1.5, 1.0});
  CHECK(a.touched_ids() == std::vector<ParamId>{1, 3});
}
