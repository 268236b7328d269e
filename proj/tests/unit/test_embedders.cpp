#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "strla/engine/model.hpp"
#include "strla/nn/embedders.hpp"
#include "support.hpp"

using namespace strla;
using namespace strla::nn;
using support::Vec;

namespace {

constexpr int kM = 5;

Vec values(const Tape& t, NodeId id) {
  auto v = t.value(id);
  return {v.begin(), v.end()};
}

Vec random_vec(std::mt19937_64& rng, int n, double r = 1.0) {
  std::uniform_real_distribution<double> u(-r, r);
  Vec v(static_cast<std::size_t>(n));
  for (double& x : v) x = u(rng);
  return v;
}

bool close_rel(const Vec& a, const Vec& b, double tol) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol * std::max(1.0, std::abs(b[i]))) return false;
  return a.size() == b.size();
}

}  // namespace

TEST_CASE("number normalisation statistics") {
  NormStats s;
  for (double x : {1.0, 3.0, 5.0}) s.observe("p", x);
  s.observe("once", 10.0);
  for (double x : {4.0, 4.0}) s.observe("flat", x);
  s.finalize();
  CHECK(s.mean("p") == 3.0);
  CHECK(s.stddev("p") == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(1e-15));
  CHECK(s.normalize("p", 3.0) == 0.0);
  CHECK(s.normalize("p", 5.0) == doctest::Approx(2.0 / std::sqrt(8.0 / 3.0)).epsilon(1e-15));
  CHECK(s.normalize("once", 7.0) == 7.0);
  CHECK(s.normalize("unseen", 7.0) == 7.0);
  CHECK(s.normalize("flat", 6.0) == 2.0);
}

TEST_CASE("scalar embedders") {
  ParameterStore store;
  Initializer init(3);
  LinearParams p = make_linear(store, init, "num", 1, kM);
  std::mt19937_64 rng(1);
  store[p.b].value = random_vec(rng, kM);
  Vec w = store[p.w].value;
  Vec b = store[p.b].value;

  Tape t(store);
  CHECK(values(t, embed_scalar(t, p, 0.0).h) == b);
  CHECK(values(t, embed_scalar(t, p, 7.0).h) == support::add(support::scale(w, 7.0), b));
  CHECK(embed_scalar(t, p, 1.0).c == -1);
  CHECK(values(t, embed_scalar(t, p, boolean_code(stree::Tribool::False)).h) == b);
  CHECK(values(t, embed_scalar(t, p, boolean_code(stree::Tribool::True)).h) == support::add(w, b));
  CHECK(values(t, embed_scalar(t, p, boolean_code(stree::Tribool::Null)).h) == support::add(support::scale(w, -1.0), b));

  support::zero_all(store);
  Tape z(store);
  CHECK(values(z, embed_scalar(z, p, 123.0).h) == Vec(kM, 0.0));
}

TEST_CASE("string embedder") {
  ParameterStore store;
  Initializer init(4);
  LstmParams p = make_lstm(store, init, "s", kM, kM);
  CharTable chars;
  chars.unk = make_embedding_row(store, init, "unk", kM);
  for (char32_t ch : std::u32string(U"abcé"))
    chars.rows[ch] = make_embedding_row(store, init, "c" + std::to_string(ch), kM);
  support::randomize(store, 8);

  Tape t(store);
  CHECK(values(t, embed_string(t, p, chars, "").h) == Vec(kM, 0.0));
  auto [one, hs1] = support::lstm_run(store, p, {support::param(store, chars.lookup(U'b'))});
  CHECK(support::max_abs_diff(values(t, embed_string(t, p, chars, "b").h), one.h) < 1e-15);

  std::vector<Vec> xs;
  for (char32_t ch : std::u32string(U"caéz")) xs.push_back(support::param(store, chars.lookup(ch)));
  auto [fin, hs] = support::lstm_run(store, p, xs);
  CHECK(support::max_abs_diff(values(t, embed_string(t, p, chars, "ca\xc3\xa9z").h), support::mean(hs)) < 1e-14);
  CHECK(embed_string(t, p, chars, "abc").c == -1);

  support::zero_all(store);
  Tape z(store);
  CHECK(values(z, embed_string(z, p, chars, "abcabc").h) == Vec(kM, 0.0));
}

TEST_CASE("lstm cell at zero parameters") {
  ParameterStore store;
  Initializer init(5);
  LstmParams p = make_lstm(store, init, "l", 3, kM);
  support::zero_all(store);
  Tape t(store);
  NodeId x = t.constant(Vec{0.4, -0.7, 2.0}, 3);
  auto [h0, c0] = lstm_cell(t, p, x, -1, -1);
  CHECK(values(t, h0) == Vec(kM, 0.0));
  CHECK(values(t, c0) == Vec(kM, 0.0));

  Vec cprev{1.0, -2.0, 0.5, 3.0, -0.25};
  NodeId hp = t.zeros(kM);
  auto [h1, c1] = lstm_cell(t, p, x, hp, t.constant(cprev, kM));
  Vec c = values(t, c1);
  Vec h = values(t, h1);
  for (int i = 0; i < kM; ++i) {
    CHECK(c[i] == 0.5 * cprev[i]);
    CHECK(h[i] == doctest::Approx(0.5 * std::tanh(0.5 * cprev[i])).epsilon(1e-15));
  }
}

TEST_CASE("lstm cell gradients match finite differences") {
  ParameterStore store;
  Initializer init(6);
  LstmParams p = make_lstm(store, init, "l", 3, kM);
  ParamId x = store.create("x", 3, 1);
  ParamId h0 = store.create("h0", kM, 1);
  ParamId c0 = store.create("c0", kM, 1);
  ParamId proj = store.create("proj", 1, 2 * kM);
  support::randomize(store, 12, 1.0);
  auto loss = [&](Tape& t) {
    auto [h, c] = lstm_cell(t, p, t.param(x), t.param(h0), t.param(c0));
    return t.matvec(t.param(proj), t.concat(h, c));
  };
  Tape t(store);
  NodeId l = loss(t);
  t.backward(l);
  ad::Gradients g;
  t.accumulate_into(g);
  double worst = 0.0;
  for (std::size_t pid = 0; pid < store.size(); ++pid) {
    auto& v = store[static_cast<ParamId>(pid)].value;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double keep = v[i];
      v[i] = keep + 1e-5;
      Tape a(store);
      double up = a.scalar(loss(a));
      v[i] = keep - 1e-5;
      Tape b(store);
      double down = b.scalar(loss(b));
      v[i] = keep;
      double n = (up - down) / 2e-5;
      double an = g.get(static_cast<ParamId>(pid))[i];
      worst = std::max(worst, std::abs(an - n) / std::max({std::abs(an), std::abs(n), 1e-4}));
    }
  }
  CHECK(worst <= 1e-5);
}

TEST_CASE("child-sum cell") {
  ParameterStore store;
  Initializer init(7);
  SumLstmParams p = make_sumlstm(store, init, "sum", kM);
  support::zero_all(store);
  Tape t(store);
  LatentState none = sumlstm_cell(t, p, {});
  CHECK(values(t, none.c) == Vec(kM, 0.0));
  CHECK(values(t, none.h) == Vec(kM, 0.0));

  std::mt19937_64 rng(2);
  Vec c1 = random_vec(rng, kM), c2 = random_vec(rng, kM);
  std::vector<LatentState> kids{{t.constant(c1, kM), t.constant(random_vec(rng, kM), kM)},
                                {t.constant(c2, kM), t.constant(random_vec(rng, kM), kM)}};
  LatentState two = sumlstm_cell(t, p, kids);
  Vec c = values(t, two.c), h = values(t, two.h);
  for (int i = 0; i < kM; ++i) {
    CHECK(c[i] == doctest::Approx(0.5 * (c1[i] + c2[i])).epsilon(1e-15));
    CHECK(h[i] == doctest::Approx(0.5 * std::tanh(c[i])).epsilon(1e-15));
  }
}

TEST_CASE("object embedders are invariant under child permutation") {
  ParameterStore store;
  Initializer init(8);
  SumLstmParams sum = make_sumlstm(store, init, "sum", kM);
  LinearParams path = make_linear(store, init, "obj", kM, kM);
  DeepSetShared set;
  set.mlp.push_back(make_linear(store, init, "mlp0", kM, kM));
  set.mlp.push_back(make_linear(store, init, "mlp1", kM, kM));
  set.pool = make_linear(store, init, "pool", kM, kM);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    support::randomize(store, 1000 + static_cast<std::uint64_t>(trial), 1.0);
    int n = 2 + trial % 5;
    std::vector<Vec> cs, hs;
    for (int k = 0; k < n; ++k) {
      cs.push_back(random_vec(rng, kM, 2.0));
      hs.push_back(random_vec(rng, kM, 2.0));
    }
    auto run = [&](const std::vector<int>& order) {
      Tape t(store);
      std::vector<LatentState> kids;
      std::vector<NodeId> kid_h;
      for (int k : order) {
        kids.push_back({t.constant(cs[k], kM), t.constant(hs[k], kM)});
        kid_h.push_back(kids.back().h);
      }
      LatentState a = embed_object_sumlstm(t, sum, path, kids);
      LatentState b = embed_container_set(t, set, path, kid_h);
      return std::make_tuple(values(t, a.c), values(t, a.h), values(t, b.h));
    };
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    auto [c0, h0, s0] = run(order);
    std::shuffle(order.begin(), order.end(), rng);
    auto [c1, h1, s1] = run(order);
    CHECK(close_rel(c1, c0, 1e-9));
    CHECK(close_rel(h1, h0, 1e-9));
    CHECK(close_rel(s1, s0, 1e-9));
  }
}

TEST_CASE("deep-set degenerate and identity cases") {
  ParameterStore store;
  Initializer init(10);
  DeepSetShared set;
  set.mlp.push_back(make_linear(store, init, "mlp0", kM, kM));
  set.pool = make_linear(store, init, "pool", kM, kM);
  LinearParams path = make_linear(store, init, "path", kM, kM);
  support::randomize(store, 77);
  auto identity = [&](const LinearParams& l) {
    auto& w = store[l.w].value;
    std::fill(w.begin(), w.end(), 0.0);
    for (int i = 0; i < kM; ++i) w[static_cast<std::size_t>(i * kM + i)] = 1.0;
    std::fill(store[l.b].value.begin(), store[l.b].value.end(), 0.0);
  };
  identity(set.mlp[0]);
  identity(set.pool);
  Vec child{0.5, -1.0, 2.0, 0.0, -0.3};
  Tape t(store);
  NodeId out = embed_container_set(t, set, path, std::vector<NodeId>{t.constant(child, kM)}).h;
  CHECK(support::max_abs_diff(values(t, out), support::linear(store, path, support::relu(child))) < 1e-15);

  support::randomize(store, 78);
  Tape e(store);
  NodeId empty = embed_container_set(e, set, path, {}).h;
  Vec expected = support::linear(store, path, support::relu(support::param(store, set.pool.b)));
  CHECK(support::max_abs_diff(values(e, empty), expected) < 1e-15);
}

TEST_CASE("array lstm embedder") {
  ParameterStore store;
  Initializer init(11);
  LstmParams p = make_lstm(store, init, "arr", 2 * kM, kM);
  Tape t(store);
  LatentState empty = embed_array_lstm(t, p, {});
  CHECK(values(t, empty.c) == Vec(kM, 0.0));
  CHECK(values(t, empty.h) == Vec(kM, 0.0));

  support::zero_all(store);
  Tape z(store);
  std::vector<LatentState> one{{-1, z.constant(Vec{1, 2, 3, 4, 5}, kM)}};
  CHECK(values(z, embed_array_lstm(z, p, one).h) == Vec(kM, 0.0));

  std::mt19937_64 rng(13);
  bool witness = false;
  for (int trial = 0; trial < 100 && !witness; ++trial) {
    support::randomize(store, 500 + static_cast<std::uint64_t>(trial));
    Vec a = random_vec(rng, kM), b = random_vec(rng, kM);
    Tape r(store);
    NodeId na = r.constant(a, kM), nb = r.constant(b, kM);
    std::vector<LatentState> ab{{-1, na}, {-1, nb}}, ba{{-1, nb}, {-1, na}};
    witness = support::max_abs_diff(values(r, embed_array_lstm(r, p, ab).h), values(r, embed_array_lstm(r, p, ba).h)) >
              1e-9;
  }
  CHECK(witness);
}

TEST_CASE("object sum-lstm with an empty object at zero parameters") {
  ParameterStore store;
  Initializer init(12);
  SumLstmParams sum = make_sumlstm(store, init, "sum", kM);
  LinearParams path = make_linear(store, init, "obj", kM, kM);
  support::zero_all(store);
  std::mt19937_64 rng(1);
  store[path.b].value = random_vec(rng, kM);
  Tape t(store);
  LatentState s = embed_object_sumlstm(t, sum, path, {});
  CHECK(values(t, s.c) == Vec(kM, 0.0));
  CHECK(values(t, s.h) == store[path.b].value);
}

TEST_CASE("train journey object embedding equals the hand-chained cell and linear map") {
  engine::ModelConfig cfg;
  cfg.kind = engine::ModelKind::Lstm;
  cfg.hidden = kM;
  cfg.seed = 21;
  engine::Model model(cfg);
  stree::Element doc = support::json(support::kTrainJourney);
  stree::Element other = support::json(
      R"({"time": "09:10", "stops": ["Leeds"], "train": {"carriages": 4, "shop": true}})");
  std::vector<const stree::Element*> docs{&doc, &other};
  model.build(docs, {"a", "b"});
  const auto& store = model.store();

  const stree::Element& train = doc.members[2].value;
  auto group = [&](stree::Kind k, const std::string& path, engine::Template tmpl) {
    return model.group(model.resolve_parameters(k, path), tmpl);
  };
  double mean = 5.0, sd = 1.0;
  Vec carriages = support::linear(store, group(stree::Kind::Number, "train/carriages", engine::Template::EmbedNumber)->lin,
                                  Vec{(6.0 - mean) / sd});
  Vec shop = support::linear(store, group(stree::Kind::Boolean, "train/shop", engine::Template::EmbedBoolean)->lin, Vec{0.0});
  support::Cell cell = support::sumlstm(store, model.sumlstm(), {{carriages, Vec(kM, 0.0)}, {shop, Vec(kM, 0.0)}});
  Vec expected_h = support::linear(store, group(stree::Kind::Object, "train", engine::Template::SumTreeLstm)->lin, cell.h);

  Tape t(store);
  LatentState got = model.embed(t, train, "train");
  CHECK(support::max_abs_diff(values(t, got.h), expected_h) <= 1e-12);
  CHECK(support::max_abs_diff(values(t, got.c), cell.c) <= 1e-12);
}

TEST_CASE("normalisation is invariant under affine transforms of training values") {
  // Exactly representable rescaling (powers of two) and integer shifts leave
  // every normalised value bit-identical; other factors agree to rounding.
  std::vector<double> xs{3.0, 7.0, 1.0, 12.0, 5.0, 8.0};
  NormStats base;
  for (double x : xs) base.observe("p", x);
  base.finalize();
  for (auto [a, b] : std::vector<std::pair<double, double>>{{2.0, 0.0}, {0.5, 3.0}, {4.0, -1024.0}, {1.0, 17.0}, {0.25, -6.0}}) {
    NormStats moved;
    for (double x : xs) moved.observe("p", a * x + b);
    moved.finalize();
    for (double x : {0.0, 3.0, 4.5, 12.0, -9.0})
      CHECK(moved.normalize("p", a * x + b) == base.normalize("p", x));
  }
  for (auto [a, b] : std::vector<std::pair<double, double>>{{3.0, 0.1}, {0.7, -2.5}, {1e3, 1e4}}) {
    NormStats moved;
    for (double x : xs) moved.observe("p", a * x + b);
    moved.finalize();
    for (double x : {0.0, 3.0, 4.5, 12.0})
      CHECK(std::abs(moved.normalize("p", a * x + b) - base.normalize("p", x)) <= 1e-12);
  }
}

TEST_CASE("primitive embedders emit a zero memory cell") {
  engine::ModelConfig cfg;
  cfg.kind = engine::ModelKind::Set;
  cfg.hidden = kM;
  engine::Model model(cfg);
  stree::Element doc = support::json(R"({"n": 1.5, "b": null, "s": "xy"})");
  std::vector<const stree::Element*> docs{&doc};
  model.build(docs, {"a", "b"});
  Tape t(model.store());
  for (const auto& m : doc.members) CHECK(model.embed(t, m.value, m.name).c == -1);
}
