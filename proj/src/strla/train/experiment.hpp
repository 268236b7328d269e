#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strla/data/dataset.hpp"
#include "strla/data/features.hpp"
#include "strla/engine/model.hpp"
#include "strla/train/adam.hpp"
#include "strla/train/mlp.hpp"
#include "strla/train/trainer.hpp"

namespace strla::train {

// Hyperparameters that may differ per fold (the E / BS / W / L columns of a
// per-fold hyperparameter table). Unset fields fall back to TrainConfig.
struct FoldOverride {
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<int> hidden;
  std::optional<int> layers;
};

struct ExperimentConfig {
  std::string kind = "lstm";  // set | lstm | tailored | xml | mlp
  engine::ModelConfig model;  // kind, hidden width and seed are filled in per fold
  engine::Ablation ablation = engine::Ablation::None;
  TrainConfig train;
  std::vector<FoldOverride> fold_overrides;

  bool is_mlp() const { return kind == "mlp"; }
  TrainConfig for_fold(int fold) const;
  std::vector<std::string> problems() const;  // empty when valid
  void validate() const;                      // throws Config listing every problem
};

class Learner {
 public:
  virtual ~Learner() = default;
  virtual void fit(std::span<const data::Example* const> train, std::vector<std::string> label_vocab,
                   const TrainConfig& config) = 0;
  virtual int predict(const stree::Element& doc) const = 0;

  const std::vector<std::string>& labels() const { return labels_; }
  const TrainResult& history() const { return history_; }
  const TrainConfig& train_config() const { return config_; }

 protected:
  std::vector<std::string> labels_;
  TrainResult history_;
  TrainConfig config_;
};

class TreeLearner : public Learner {
 public:
  explicit TreeLearner(engine::ModelConfig base) : base_(std::move(base)) {}
  void fit(std::span<const data::Example* const> train, std::vector<std::string> label_vocab,
           const TrainConfig& config) override;
  int predict(const stree::Element& doc) const override { return model_->predict(doc); }

  const engine::Model& model() const { return *model_; }
  engine::Model& model() { return *model_; }
  const Adam& optimizer() const { return adam_; }
  const engine::ModelConfig& base_config() const { return base_; }

  // Installs a restored model (checkpoint loading).
  void adopt(std::unique_ptr<engine::Model> model, Adam adam, const TrainConfig& config);

 private:
  engine::ModelConfig base_;
  std::unique_ptr<engine::Model> model_;
  Adam adam_;
};

class MlpLearner : public Learner {
 public:
  void fit(std::span<const data::Example* const> train, std::vector<std::string> label_vocab,
           const TrainConfig& config) override;
  int predict(const stree::Element& doc) const override;

  const data::Featurizer& featurizer() const { return featurizer_; }
  const Mlp& mlp() const { return *mlp_; }
  Mlp& mlp() { return *mlp_; }
  const Adam& optimizer() const { return adam_; }

  void adopt(data::Featurizer featurizer, std::unique_ptr<Mlp> mlp, std::vector<std::string> labels, Adam adam,
             const TrainConfig& config);

 private:
  data::Featurizer featurizer_;
  std::unique_ptr<Mlp> mlp_;
  Adam adam_;
};

std::unique_ptr<Learner> make_learner(const ExperimentConfig& config);

struct FoldResult {
  int fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  double accuracy = 0.0;
  std::vector<std::vector<std::int64_t>> confusion;
  TrainConfig config;
  std::vector<BatchRecord> batches;

  // One-line JSON; `with_curve` adds the per-batch loss curve.
  std::string to_json(bool with_curve = false) const;
};

struct Metrics {
  std::string dataset;
  std::string model_kind;
  std::vector<std::string> labels;
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population std over folds

  void finalize();
  std::string to_json() const;
};

// Fold index per example: each class is shuffled (seeded) and dealt
// round-robin, continuing across classes, so folds are stratified and their
// sizes differ by at most one.
std::vector<int> stratified_folds(const std::vector<std::string>& labels, int folds, std::uint64_t seed);

// Called after each fold/run with the trained learner.
using FoldHook = std::function<void(int fold, const Learner& learner, const FoldResult& result)>;

// k-fold cross-validation. Every fold builds its learner (dictionary,
// normalisation statistics, vocabularies, label order) from its training
// split only. Throws FoldTooSmall when a class is missing from a training
// split.
Metrics cross_validate(const data::Dataset& dataset, const ExperimentConfig& config, const FoldHook& hook = {});

// Data-efficiency protocol: `runs` times, train on a seeded random
// `fraction` of `train` and score on `test`. The label order is taken from
// the full training set so every run shares it.
Metrics fraction_runs(const data::Dataset& train, const data::Dataset& test, const ExperimentConfig& config,
                      double fraction, int runs, const FoldHook& hook = {});

// Trains one learner on the whole dataset (fold-0 overrides apply, seed as
// for fold 0 of cross-validation).
std::unique_ptr<Learner> train_full(const data::Dataset& dataset, const ExperimentConfig& config,
                                    FoldResult* result = nullptr);

// Scores a trained learner on `dataset`. Throws LabelMismatch when the
// dataset holds a label the learner does not know.
Metrics evaluate_learner(const Learner& learner, const data::Dataset& dataset, const std::string& model_kind,
                         int threads = 1);

}  // namespace strla::train
