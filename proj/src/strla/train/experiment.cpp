#include "strla/train/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"
#include "strla/error.hpp"

namespace strla::train {

TrainConfig ExperimentConfig::for_fold(int fold) const {
  TrainConfig t = train;
  if (fold >= 0 && static_cast<std::size_t>(fold) < fold_overrides.size()) {
    const FoldOverride& o = fold_overrides[static_cast<std::size_t>(fold)];
    if (o.epochs) t.epochs = *o.epochs;
    if (o.batch_size) t.batch_size = *o.batch_size;
    if (o.hidden) t.hidden = *o.hidden;
    if (o.layers) t.layers = *o.layers;
  }
  return t;
}

std::vector<std::string> ExperimentConfig::problems() const {
  std::vector<std::string> out;
  auto check = [&out](const auto& fn) {
    try {
      fn();
    } catch (const Error& e) {
      out.push_back(e.what());
    }
  };
  if (!is_mlp()) {
    check([&] {
      engine::ModelConfig m = model;
      m.kind = engine::parse_model_kind(kind);
      m.validate();
    });
  }
  for (auto& p : train.problems()) out.push_back(std::move(p));
  for (std::size_t f = 0; f < fold_overrides.size(); ++f)
    check([&] {
      try {
        for_fold(static_cast<int>(f)).validate();
      } catch (const Error& e) {
        throw Error(ErrorCode::Config, "fold " + std::to_string(f + 1) + ": " + e.what());
      }
    });
  return out;
}

void ExperimentConfig::validate() const {
  auto p = problems();
  if (p.empty()) return;
  std::string msg = p.front();
  for (std::size_t i = 1; i < p.size(); ++i) msg += "; " + p[i];
  throw Error(ErrorCode::Config, msg);
}

void TreeLearner::fit(std::span<const data::Example* const> train, std::vector<std::string> label_vocab,
                      const TrainConfig& config) {
  config_ = config;
  engine::ModelConfig mc = base_;
  mc.hidden = config.hidden;
  mc.seed = config.seed;
  model_ = std::make_unique<engine::Model>(mc);
  std::vector<const stree::Element*> docs;
  docs.reserve(train.size());
  for (const auto* ex : train) docs.push_back(&ex->input);
  model_->build(docs, std::move(label_vocab));
  labels_ = model_->labels();

  std::vector<int> y;
  y.reserve(train.size());
  for (const auto* ex : train) y.push_back(model_->label_index(ex->label));
  const engine::Model& model = *model_;
  ForwardFn forward = [&](ad::Tape& tape, std::size_t i, std::mt19937_64* rng) {
    engine::EmbedOptions opts{rng};
    return model.logits(tape, train[i]->input, &opts);
  };
  adam_ = Adam(config.adam);
  history_ = train_loop(model_->store(), y, config, forward, adam_);
}

void MlpLearner::fit(std::span<const data::Example* const> train, std::vector<std::string> label_vocab,
                     const TrainConfig& config) {
  config_ = config;
  labels_ = std::move(label_vocab);
  std::vector<const stree::Element*> docs;
  docs.reserve(train.size());
  for (const auto* ex : train) docs.push_back(&ex->input);
  featurizer_.fit(docs);
  std::vector<std::vector<double>> xs;
  xs.reserve(train.size());
  for (const auto* d : docs) xs.push_back(featurizer_.transform(*d));
  mlp_ = std::make_unique<Mlp>(featurizer_.width(), config.hidden, config.layers, static_cast<int>(labels_.size()),
                               config.seed);
  std::vector<int> y;
  for (const auto* ex : train) {
    auto it = std::find(labels_.begin(), labels_.end(), ex->label);
    y.push_back(static_cast<int>(it - labels_.begin()));
  }
  const Mlp& mlp = *mlp_;
  ForwardFn forward = [&](ad::Tape& tape, std::size_t i, std::mt19937_64*) { return mlp.logits(tape, xs[i]); };
  adam_ = Adam(config.adam);
  history_ = train_loop(mlp_->store(), y, config, forward, adam_);
}

void TreeLearner::adopt(std::unique_ptr<engine::Model> model, Adam adam, const TrainConfig& config) {
  model_ = std::move(model);
  labels_ = model_->labels();
  adam_ = std::move(adam);
  config_ = config;
  history_ = {};
}

void MlpLearner::adopt(data::Featurizer featurizer, std::unique_ptr<Mlp> mlp, std::vector<std::string> labels,
                       Adam adam, const TrainConfig& config) {
  featurizer_ = std::move(featurizer);
  mlp_ = std::move(mlp);
  labels_ = std::move(labels);
  adam_ = std::move(adam);
  config_ = config;
  history_ = {};
}

int MlpLearner::predict(const stree::Element& doc) const { return mlp_->predict(featurizer_.transform(doc)); }

std::unique_ptr<Learner> make_learner(const ExperimentConfig& config) {
  if (config.is_mlp()) return std::make_unique<MlpLearner>();
  engine::ModelConfig mc = engine::apply_ablation(config.model, config.ablation);
  mc.kind = engine::parse_model_kind(config.kind);
  return std::make_unique<TreeLearner>(mc);
}

void Metrics::finalize() {
  if (folds.empty()) {
    mean_accuracy = std_accuracy = 0.0;
    return;
  }
  double sum = 0.0;
  for (const auto& f : folds) sum += f.accuracy;
  mean_accuracy = sum / static_cast<double>(folds.size());
  double sq = 0.0;
  for (const auto& f : folds) sq += (f.accuracy - mean_accuracy) * (f.accuracy - mean_accuracy);
  std_accuracy = std::sqrt(sq / static_cast<double>(folds.size()));
}

namespace {

nlohmann::ordered_json fold_json(const FoldResult& f, bool with_curve) {
  nlohmann::ordered_json o;
  o["fold"] = f.fold;
  o["accuracy"] = f.accuracy;
  o["train_size"] = f.train_size;
  o["test_size"] = f.test_size;
  o["epochs"] = f.config.epochs;
  o["batch_size"] = f.config.batch_size;
  o["hidden"] = f.config.hidden;
  o["layers"] = f.config.layers;
  o["confusion"] = f.confusion;
  if (with_curve) {
    nlohmann::ordered_json curve = nlohmann::ordered_json::array();
    for (const auto& b : f.batches) curve.push_back({{"epoch", b.epoch}, {"batch", b.batch}, {"loss", b.mean_loss}});
    o["loss_curve"] = std::move(curve);
  }
  return o;
}

}  // namespace

std::string FoldResult::to_json(bool with_curve) const { return fold_json(*this, with_curve).dump(); }

std::string Metrics::to_json() const {
  nlohmann::ordered_json j;
  j["dataset"] = dataset;
  j["model_kind"] = model_kind;
  j["labels"] = labels;
  nlohmann::ordered_json fs = nlohmann::ordered_json::array();
  for (const auto& f : folds) fs.push_back(fold_json(f, false));
  j["folds"] = std::move(fs);
  j["mean_accuracy"] = mean_accuracy;
  j["std_accuracy"] = std_accuracy;
  return j.dump(2);
}

std::vector<int> stratified_folds(const std::vector<std::string>& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorCode::Config, "need at least 2 folds");
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  std::vector<int> assignment(labels.size(), -1);
  std::mt19937_64 rng(derive_seed(seed, {0x464fu}));
  std::size_t dealt = 0;
  for (auto& [label, idx] : by_class) {
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng() % i)]);
    for (std::size_t k : idx) assignment[k] = static_cast<int>(dealt++ % static_cast<std::size_t>(folds));
  }
  return assignment;
}

namespace {

FoldResult run_split(const ExperimentConfig& config, int fold, std::span<const data::Example* const> train,
                     std::span<const data::Example* const> test, std::vector<std::string> vocab,
                     std::unique_ptr<Learner>& learner_out) {
  TrainConfig tc = config.for_fold(fold);
  tc.seed = derive_seed(config.train.seed, {static_cast<std::uint64_t>(fold)});
  auto learner = make_learner(config);
  learner->fit(train, std::move(vocab), tc);
  const auto& labels = learner->labels();
  std::vector<int> y;
  y.reserve(test.size());
  for (const auto* ex : test) {
    auto it = std::find(labels.begin(), labels.end(), ex->label);
    y.push_back(it == labels.end() ? -1 : static_cast<int>(it - labels.begin()));
  }
  Evaluation ev = evaluate([&](std::size_t i) { return learner->predict(test[i]->input); }, y,
                           static_cast<int>(labels.size()), tc.threads);
  FoldResult r;
  r.fold = fold + 1;
  r.train_size = train.size();
  r.test_size = test.size();
  r.accuracy = ev.accuracy;
  r.confusion = std::move(ev.confusion);
  r.config = tc;
  r.batches = learner->history().batches;
  learner_out = std::move(learner);
  return r;
}

}  // namespace

Metrics cross_validate(const data::Dataset& dataset, const ExperimentConfig& config, const FoldHook& hook) {
  config.validate();
  const int k = config.train.folds;
  std::vector<std::string> labels;
  labels.reserve(dataset.size());
  for (const auto& ex : dataset) labels.push_back(ex.label);
  std::vector<int> assignment = stratified_folds(labels, k, config.train.seed);
  std::set<std::string> all_classes(labels.begin(), labels.end());

  Metrics metrics;
  metrics.model_kind = config.kind;
  for (int fold = 0; fold < k; ++fold) {
    std::vector<const data::Example*> train, test;
    std::set<std::string> train_classes;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      if (assignment[i] == fold) {
        test.push_back(&dataset[i]);
      } else {
        train.push_back(&dataset[i]);
        train_classes.insert(dataset[i].label);
      }
    }
    if (train_classes != all_classes)
      throw Error(ErrorCode::FoldTooSmall, "fold " + std::to_string(fold + 1) +
                                               ": a class is missing from the training split");
    std::vector<std::string> vocab(train_classes.begin(), train_classes.end());
    std::unique_ptr<Learner> learner;
    FoldResult r = run_split(config, fold, train, test, vocab, learner);
    if (metrics.labels.empty()) metrics.labels = learner->labels();
    if (hook) hook(fold + 1, *learner, r);
    metrics.folds.push_back(std::move(r));
  }
  metrics.finalize();
  return metrics;
}

Metrics fraction_runs(const data::Dataset& train, const data::Dataset& test, const ExperimentConfig& config,
                      double fraction, int runs, const FoldHook& hook) {
  config.validate();
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorCode::Config, "fraction must lie in (0, 1]");
  if (runs < 1) throw Error(ErrorCode::Config, "runs must be >= 1");
  std::vector<std::string> vocab = data::label_vocabulary(train);
  auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train.size())));
  take = std::max<std::size_t>(take, 1);
  std::vector<const data::Example*> test_ptrs;
  for (const auto& ex : test) test_ptrs.push_back(&ex);

  Metrics metrics;
  metrics.model_kind = config.kind;
  metrics.labels = vocab;
  for (int run = 0; run < runs; ++run) {
    std::vector<std::size_t> order = epoch_order(train.size(), derive_seed(config.train.seed, {0x4652u}), run);
    order.resize(take);
    std::sort(order.begin(), order.end());
    std::vector<const data::Example*> subset;
    subset.reserve(take);
    for (std::size_t i : order) subset.push_back(&train[i]);
    std::unique_ptr<Learner> learner;
    FoldResult r = run_split(config, run, subset, test_ptrs, vocab, learner);
    if (hook) hook(run + 1, *learner, r);
    metrics.folds.push_back(std::move(r));
  }
  metrics.finalize();
  return metrics;
}

std::unique_ptr<Learner> train_full(const data::Dataset& dataset, const ExperimentConfig& config, FoldResult* result) {
  config.validate();
  std::vector<const data::Example*> all;
  all.reserve(dataset.size());
  for (const auto& ex : dataset) all.push_back(&ex);
  TrainConfig tc = config.for_fold(0);
  tc.seed = derive_seed(config.train.seed, {0u});
  auto learner = make_learner(config);
  learner->fit(all, data::label_vocabulary(dataset), tc);
  if (result) {
    result->fold = 1;
    result->train_size = dataset.size();
    result->test_size = 0;
    result->config = tc;
    result->batches = learner->history().batches;
  }
  return learner;
}

Metrics evaluate_learner(const Learner& learner, const data::Dataset& dataset, const std::string& model_kind,
                         int threads) {
  const auto& labels = learner.labels();
  std::vector<int> y;
  y.reserve(dataset.size());
  for (const auto& ex : dataset) {
    auto it = std::find(labels.begin(), labels.end(), ex.label);
    if (it == labels.end())
      throw Error(ErrorCode::LabelMismatch, "dataset label '" + ex.label + "' is not among the model's labels");
    y.push_back(static_cast<int>(it - labels.begin()));
  }
  Evaluation ev = evaluate([&](std::size_t i) { return learner.predict(dataset[i].input); }, y,
                           static_cast<int>(labels.size()), threads);
  FoldResult r;
  r.fold = 1;
  r.train_size = 0;
  r.test_size = dataset.size();
  r.accuracy = ev.accuracy;
  r.confusion = std::move(ev.confusion);
  r.config = learner.train_config();
  Metrics m;
  m.model_kind = model_kind;
  m.labels = labels;
  m.folds.push_back(std::move(r));
  m.finalize();
  return m;
}

}  // namespace strla::train
