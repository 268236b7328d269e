#include <filesystem>

#include "doctest.h"
#include "json.hpp"
#include "strla/error.hpp"
#include "strla/io/checkpoint.hpp"
#include "strla/io/config.hpp"
#include "strla/xml/xml.hpp"
#include "support.hpp"

using namespace strla;
using namespace strla::train;

namespace {

const std::string kData = STRLA_DATA_DIR;

data::Dataset toy(bool xml_input) {
  data::Dataset ds;
  const char* colours[] = {"red", "blue", "green"};
  for (int i = 0; i < 24; ++i) {
    std::string c = colours[i % 3];
    if (xml_input) {
      ds.push_back({xml::parse_xml_reduced("<car colour=\"" + c + "\"><doors>" + std::to_string(2 + i % 4) +
                                           "</doors><name>n" + std::to_string(i) + "</name></car>"),
                    c == "red" ? "hot" : "cool"});
    } else {
      ds.push_back({support::json(R"({"colour": ")" + c + R"(", "doors": )" + std::to_string(2 + i % 4) +
                                  R"(, "flags": [true, null], "w": )" + std::to_string(i * 0.37) + "}"),
                    c == "red" ? "hot" : "cool"});
    }
  }
  return ds;
}

ExperimentConfig experiment(const std::string& kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.train.epochs = 2;
  cfg.train.hidden = 4;
  cfg.train.layers = 2;
  cfg.train.batch_size = 3;
  if (kind == "tailored")
    cfg.model.mapping = engine::MappingDictionary::from_json(
        R"({"string~colour": "catEmbedding", "array~..": "deepSets", "object~..": "sumTreeLSTM", "string~..": "embedString",
            "number~..": "embedNumber", "boolean~..": "embedBoolean"})");
  return cfg;
}

}  // namespace

TEST_CASE("configuration files merge over defaults and report every problem") {
  ExperimentConfig cfg;
  io::apply_config_json(R"({"kind": "set", "epochs": 7, "learning_rate": 0.01, "ablation": "pathless",
                            "fold_overrides": [{"epochs": 3}, {"hidden": 64, "batch_size": 2}]})",
                        cfg);
  CHECK(cfg.kind == "set");
  CHECK(cfg.train.epochs == 7);
  CHECK(cfg.train.adam.learning_rate == 0.01);
  CHECK(cfg.ablation == engine::Ablation::Pathless);
  CHECK(cfg.for_fold(0).epochs == 3);
  CHECK(cfg.for_fold(1).hidden == 64);
  CHECK(cfg.for_fold(1).epochs == 7);
  CHECK(cfg.for_fold(4).epochs == 7);

  try {
    io::apply_config_json(R"({"kind": "forest", "epochs": "ten", "bogus": 1, "learning_rate": -1})", cfg);
    FAIL("expected Config");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    CHECK(cfg.kind == "set");
    CHECK(cfg.train.epochs == 7);
    std::string msg = e.what();
    CHECK(msg.find("kind") != std::string::npos);
    CHECK(msg.find("epochs") != std::string::npos);
    CHECK(msg.find("bogus") != std::string::npos);
  }
  ExperimentConfig neg;
  try {
    io::apply_config_json(R"({"learning_rate": -1, "batch_size": 0})", neg);
    FAIL("expected Config");
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find("learning_rate") != std::string::npos);
    CHECK(msg.find("batch_size") != std::string::npos);
  }
  CHECK_THROWS_AS(io::apply_config_json("[1]", cfg), Error);
  CHECK_THROWS_AS(io::apply_config_json("{", cfg), Error);

  ExperimentConfig tailored;
  CHECK_THROWS_AS(io::apply_config_json(R"({"kind": "tailored"})", tailored), Error);
  ExperimentConfig with_map;
  io::apply_config_json(R"({"kind": "tailored", "mapping": "mappings/poker.json"})", with_map, kData);
  CHECK(with_map.model.mapping.items().size() == 5);

  ExperimentConfig round;
  io::apply_config_json(io::config_to_json(cfg), round);
  CHECK(io::config_to_json(round) == io::config_to_json(cfg));
}

TEST_CASE("checkpoints round-trip bit-exactly for every learner") {
  for (const char* kind : {"lstm", "set", "tailored", "xml", "mlp"}) {
    CAPTURE(kind);
    bool xml_input = std::string(kind) == "xml";
    data::Dataset ds = toy(xml_input);
    ExperimentConfig cfg = experiment(kind);
    if (std::string(kind) == "lstm") {
      cfg.ablation = engine::Ablation::Both;
      cfg.model.ordinal = true;
    }
    auto learner = train_full(ds, cfg);
    std::string text = io::checkpoint_to_json(*learner, cfg, true);
    io::Checkpoint back = io::checkpoint_from_json(text);
    CHECK(io::checkpoint_to_json(*back.learner, back.experiment, true) == text);
    data::Dataset probe = toy(xml_input);
    probe.push_back({xml_input ? xml::parse_xml_reduced("<car paint=\"x\"><extra>q</extra></car>")
                               : support::json(R"({"colour": "purple", "unseen": [1, true]})"),
                     "cool"});
    for (const auto& ex : probe) {
      CHECK(back.learner->predict(ex.input) == learner->predict(ex.input));
      if (auto* tree = dynamic_cast<const TreeLearner*>(learner.get())) {
        auto a = tree->model().predict_logits(ex.input);
        auto b = static_cast<const TreeLearner&>(*back.learner).model().predict_logits(ex.input);
        CHECK(support::bit_equal(a, b));
      }
    }
    if (std::string(kind) == "tailored") {
      try {
        learner->predict(support::json(R"({"unseen": "text"})"));
        FAIL("expected Config");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Config);
      }
    }
    Metrics m1 = evaluate_learner(*learner, ds, kind);
    Metrics m2 = evaluate_learner(*back.learner, ds, kind);
    CHECK(m1.to_json() == m2.to_json());
  }
}

TEST_CASE("optimizer moments survive a checkpoint so training can resume identically") {
  data::Dataset ds = toy(false);
  ExperimentConfig cfg = experiment("lstm");
  auto learner = train_full(ds, cfg);
  io::Checkpoint back = io::checkpoint_from_json(io::checkpoint_to_json(*learner, cfg, true));
  const auto& a = static_cast<const TreeLearner&>(*learner).optimizer();
  const auto& b = static_cast<const TreeLearner&>(*back.learner).optimizer();
  CHECK(a.steps() == b.steps());
  CHECK(a.first_moments() == b.first_moments());
  CHECK(a.second_moments() == b.second_moments());

  io::Checkpoint lean = io::checkpoint_from_json(io::checkpoint_to_json(*learner, cfg, false));
  CHECK(static_cast<const TreeLearner&>(*lean.learner).optimizer().steps() == 0);
}

TEST_CASE("checkpoint format errors") {
  data::Dataset ds = toy(false);
  ExperimentConfig cfg = experiment("set");
  auto learner = train_full(ds, cfg);
  auto j = nlohmann::json::parse(io::checkpoint_to_json(*learner, cfg));
  CHECK(j["format"] == "STRLA/1");
  j["format"] = "STRLA/2";
  try {
    io::checkpoint_from_json(j.dump());
    FAIL("expected VersionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::VersionMismatch);
  }
  j.erase("format");
  CHECK_THROWS_AS(io::checkpoint_from_json(j.dump()), Error);
  CHECK_THROWS_AS(io::checkpoint_from_json("not json"), Error);
  CHECK_THROWS_AS(io::load_checkpoint("/nonexistent/ckpt.json"), Error);
}

TEST_CASE("checkpoint files and label mismatches") {
  data::Dataset ds = toy(false);
  ExperimentConfig cfg = experiment("lstm");
  auto learner = train_full(ds, cfg);
  auto path = (std::filesystem::temp_directory_path() / "strla_io_test.ckpt.json").string();
  io::save_checkpoint(path, *learner, cfg);
  io::Checkpoint back = io::load_checkpoint(path);
  std::filesystem::remove(path);
  CHECK(back.experiment.kind == "lstm");
  data::Dataset other = toy(false);
  other[0].label = "lukewarm";
  try {
    evaluate_learner(*back.learner, other, "lstm");
    FAIL("expected LabelMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LabelMismatch);
  }
}
