#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "strla/strla.h"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

int exit_code_for(strla_status s) {
  switch (s) {
    case STRLA_OK:
      return kExitOk;
    case STRLA_ERR_NON_FINITE:
    case STRLA_ERR_NON_SCALAR_LOSS:
    case STRLA_ERR_SHAPE_MISMATCH:
    case STRLA_ERR_LABEL_OUT_OF_RANGE:
    case STRLA_ERR_INTERNAL:
      return kExitCheckFailed;
    default:
      return kExitUsage;
  }
}

struct Failure {
  int code;
};

void check(strla_status s, const std::string& context) {
  if (s == STRLA_OK) return;
  std::cerr << "strla: " << context << ": " << strla_status_name(s) << ": " << strla_last_error() << "\n";
  throw Failure{exit_code_for(s)};
}

std::string take(char* s) {
  std::string out = s ? s : "";
  strla_string_free(s);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) {
    std::cerr << "strla: cannot write " << path.string() << "\n";
    throw Failure{kExitUsage};
  }
}

struct Dataset {
  strla_dataset* ptr = nullptr;
  ~Dataset() { strla_dataset_free(ptr); }
};
struct Config {
  strla_config* ptr = nullptr;
  ~Config() { strla_config_free(ptr); }
};
struct Model {
  strla_model* ptr = nullptr;
  ~Model() { strla_model_free(ptr); }
};

// Convert

struct ConvertArgs {
  std::string table, schema, out;
  bool rebalance = false;
  std::uint64_t seed = 1;
};

int run_convert(const ConvertArgs& a) {
  Dataset ds;
  check(strla_dataset_convert(a.table.c_str(), a.schema.c_str(), a.rebalance ? 1 : 0, a.seed, &ds.ptr), "convert");
  check(strla_dataset_write(ds.ptr, a.out.c_str()), "write " + a.out);
  std::cerr << "wrote " << strla_dataset_size(ds.ptr) << " examples to " << a.out << "\n";
  return kExitOk;
}

// Train

struct TrainArgs {
  std::string data, test, config_file, kind, ablate, mapping, out = "strla-out", name;
  std::optional<int> folds, epochs, batch_size, hidden, layers, set_layers, threads;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
  double fraction = 1.0;
  int runs = 1;
  bool full = false;
  bool save_optimizer = false;
  bool no_checkpoints = false;
};

struct TrainSink {
  fs::path out_dir;
  std::ofstream curve;
  bool checkpoints = true;
  bool with_optimizer = false;
  std::string prefix = "fold";
};

void on_fold(const char* fold_json, const strla_model* model, void* user) {
  auto* sink = static_cast<TrainSink*>(user);
  Json j = Json::parse(fold_json);
  int fold = j.at("fold").get<int>();
  for (const auto& b : j.at("loss_curve")) {
    Json line;
    line[sink->prefix] = fold;
    line["epoch"] = b.at("epoch");
    line["batch"] = b.at("batch");
    line["loss"] = b.at("loss");
    sink->curve << line.dump() << "\n";
  }
  sink->curve.flush();
  std::fprintf(stderr, "%s %d: accuracy %.4f (train %zu, test %zu)\n", sink->prefix.c_str(), fold,
               j.at("accuracy").get<double>(), j.at("train_size").get<std::size_t>(),
               j.at("test_size").get<std::size_t>());
  if (sink->checkpoints) {
    fs::path p = sink->out_dir / (sink->prefix + "-" + std::to_string(fold) + ".ckpt.json");
    check(strla_model_save(model, p.string().c_str(), sink->with_optimizer ? 1 : 0), "save " + p.string());
  }
}

int run_train(const TrainArgs& a) {
  Config cfg;
  check(strla_config_new(&cfg.ptr), "config");
  if (!a.config_file.empty()) check(strla_config_apply_file(cfg.ptr, a.config_file.c_str()), a.config_file);

  Json overrides = Json::object();
  if (!a.kind.empty()) overrides["kind"] = a.kind;
  if (!a.ablate.empty()) overrides["ablation"] = a.ablate;
  if (!a.mapping.empty()) overrides["mapping"] = fs::absolute(a.mapping).string();
  if (a.folds) overrides["folds"] = *a.folds;
  if (a.epochs) overrides["epochs"] = *a.epochs;
  if (a.batch_size) overrides["batch_size"] = *a.batch_size;
  if (a.hidden) overrides["hidden"] = *a.hidden;
  if (a.layers) overrides["layers"] = *a.layers;
  if (a.set_layers) overrides["set_layers"] = *a.set_layers;
  if (a.threads) overrides["threads"] = *a.threads;
  if (a.seed) overrides["seed"] = *a.seed;
  if (a.lr) overrides["learning_rate"] = *a.lr;
  // Flags that set per-run hyperparameters replace per-fold overrides.
  if (a.epochs || a.batch_size || a.hidden || a.layers) overrides["fold_overrides"] = Json::array();
  check(strla_config_apply_json(cfg.ptr, overrides.dump().c_str()), "flags");
  check(strla_config_validate(cfg.ptr), "configuration");

  Json effective = Json::parse(take([&] {
    char* s = nullptr;
    check(strla_config_to_json(cfg.ptr, &s), "config");
    return s;
  }()));
  const bool xml = effective.at("kind").get<std::string>() == "xml";
  if (a.fraction <= 0.0 || a.fraction > 1.0) {
    std::cerr << "strla: --fraction must lie in (0, 1]\n";
    return kExitUsage;
  }

  Dataset train;
  check(strla_dataset_read(a.data.c_str(), xml ? 1 : 0, &train.ptr), a.data);
  Dataset test;
  if (!a.test.empty()) check(strla_dataset_read(a.test.c_str(), xml ? 1 : 0, &test.ptr), a.test);

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) {
    std::cerr << "strla: cannot create " << a.out << ": " << ec.message() << "\n";
    return kExitUsage;
  }
  write_text(fs::path(a.out) / "config.json", effective.dump(2) + "\n");

  TrainSink sink;
  sink.out_dir = a.out;
  sink.curve.open(fs::path(a.out) / "loss_curve.jsonl");
  sink.checkpoints = !a.no_checkpoints;
  sink.with_optimizer = a.save_optimizer;
  std::string name = a.name.empty() ? fs::path(a.data).stem().string() : a.name;

  std::string metrics;
  if (a.full) {
    Model model;
    char* fold = nullptr;
    check(strla_train(train.ptr, cfg.ptr, &model.ptr, &fold), "train");
    Json fj = Json::parse(take(fold));
    for (const auto& b : fj.at("loss_curve")) sink.curve << Json{{"epoch", b.at("epoch")}, {"batch", b.at("batch")}, {"loss", b.at("loss")}}.dump() << "\n";
    fs::path ckpt = fs::path(a.out) / "model.ckpt.json";
    check(strla_model_save(model.ptr, ckpt.string().c_str(), a.save_optimizer ? 1 : 0), "save " + ckpt.string());
    std::cerr << "wrote " << ckpt.string() << "\n";
    if (test.ptr) {
      char* m = nullptr;
      check(strla_evaluate(model.ptr, test.ptr, effective.at("threads").get<int>(), name.c_str(), &m), "evaluate");
      metrics = take(m);
    }
  } else if (test.ptr) {
    sink.prefix = "run";
    char* m = nullptr;
    check(strla_fraction_runs(train.ptr, test.ptr, cfg.ptr, a.fraction, a.runs, name.c_str(), on_fold, &sink, &m),
          "fraction runs");
    metrics = take(m);
  } else {
    char* m = nullptr;
    check(strla_cross_validate(train.ptr, cfg.ptr, name.c_str(), on_fold, &sink, &m), "cross-validation");
    metrics = take(m);
  }
  if (!metrics.empty()) {
    write_text(fs::path(a.out) / "metrics.json", metrics + "\n");
    std::cout << metrics << "\n";
  }
  return kExitOk;
}

// Eval

struct EvalArgs {
  std::string model, data, out, name;
  int threads = 1;
  bool xml = false;
};

int run_eval(const EvalArgs& a) {
  Model model;
  check(strla_model_load(a.model.c_str(), &model.ptr), a.model);
  Dataset ds;
  check(strla_dataset_read(a.data.c_str(), a.xml ? 1 : 0, &ds.ptr), a.data);
  std::string name = a.name.empty() ? fs::path(a.data).stem().string() : a.name;
  char* m = nullptr;
  check(strla_evaluate(model.ptr, ds.ptr, a.threads, name.c_str(), &m), "evaluate");
  std::string metrics = take(m);
  if (!a.out.empty()) write_text(a.out, metrics + "\n");
  std::cout << metrics << "\n";
  return kExitOk;
}

// Gradcheck

struct GradcheckArgs {
  std::string kind = "lstm";
  std::uint64_t seed = 1;
  double tolerance = 1e-4;
  bool corrupt = false;
};

int run_gradcheck(const GradcheckArgs& a) {
  double err = 0.0;
  char* report = nullptr;
  check(strla_gradcheck(a.kind.c_str(), a.seed, a.corrupt ? 1 : 0, &err, &report), "gradcheck");
  std::cout << take(report) << "\n";
  const bool ok = err <= a.tolerance;
  std::cout << "max relative error " << err << (ok ? " <= " : " > ") << a.tolerance << (ok ? ": PASS" : ": FAIL")
            << "\n";
  return ok ? kExitOk : kExitCheckFailed;
}

// Poker tables

struct PokerArgs {
  std::string train_out = "poker-train.csv", test_out = "poker-test.csv";
  std::size_t test_size = 100000;
  std::uint64_t seed = 1;
};

int run_poker(const PokerArgs& a) {
  check(strla_poker_generate(a.train_out.c_str(), a.test_out.c_str(), a.test_size, a.seed), "generate-poker");
  std::cerr << "wrote " << a.train_out << " and " << a.test_out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive neural networks over JSON and XML documents"};
  app.require_subcommand(1);

  ConvertArgs conv;
  auto* c = app.add_subcommand("convert", "Convert a CSV table to a JSON-lines dataset with a schema template");
  c->add_option("--table", conv.table, "CSV table with a header row")->required();
  c->add_option("--schema", conv.schema, "schema template (JSON)")->required();
  c->add_option("--out", conv.out, "output JSON-lines file")->required();
  c->add_flag("--rebalance", conv.rebalance, "undersample a class holding more than 80% of rows to 2:1");
  c->add_option("--seed", conv.seed, "seed for rebalancing");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Cross-validate, run data-efficiency fractions, or train on a whole dataset");
  t->add_option("--data", tr.data, "training dataset (JSON-lines)")->required();
  t->add_option("--config", tr.config_file, "experiment configuration (JSON); flags override it");
  t->add_option("--kind", tr.kind, "set | lstm | tailored | xml | mlp");
  t->add_option("--ablate", tr.ablate, "none | pathless | homogeneous | both");
  t->add_option("--mapping", tr.mapping, "mapping dictionary for --kind tailored");
  t->add_option("--folds", tr.folds, "cross-validation folds");
  t->add_option("--epochs", tr.epochs, "epochs (replaces per-fold values)");
  t->add_option("--batch-size", tr.batch_size, "examples per optimizer step (replaces per-fold values)");
  t->add_option("--hidden", tr.hidden, "hidden width m (replaces per-fold values)");
  t->add_option("--layers", tr.layers, "MLP hidden layers (replaces per-fold values)");
  t->add_option("--set-layers", tr.set_layers, "hidden layers of the deep-set element network");
  t->add_option("--lr", tr.lr, "Adam learning rate");
  t->add_option("--seed", tr.seed, "seed for initialisation, shuffling and fold assignment");
  t->add_option("--threads", tr.threads, "worker threads for gradient computation and evaluation");
  t->add_option("--test", tr.test, "held-out test set: switches to fraction runs");
  t->add_option("--fraction", tr.fraction, "fraction of the training set per run (with --test)");
  t->add_option("--runs", tr.runs, "number of fraction runs (with --test)");
  t->add_flag("--full", tr.full, "train one model on the whole dataset (scored on --test if given)");
  t->add_option("--out", tr.out, "output directory for metrics, loss curves and checkpoints");
  t->add_option("--name", tr.name, "dataset name recorded in the metrics");
  t->add_flag("--save-optimizer", tr.save_optimizer, "store Adam moments in checkpoints");
  t->add_flag("--no-checkpoints", tr.no_checkpoints, "skip per-fold checkpoints");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a checkpoint on a dataset");
  e->add_option("--model", ev.model, "checkpoint file")->required();
  e->add_option("--data", ev.data, "dataset (JSON-lines)")->required();
  e->add_option("--threads", ev.threads, "worker threads");
  e->add_option("--out", ev.out, "also write the metrics JSON here");
  e->add_option("--name", ev.name, "dataset name recorded in the metrics");
  e->add_flag("--xml", ev.xml, "inputs are XML document strings");

  GradcheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  g->add_option("--kind", gc.kind, "set | lstm | tailored | xml | mlp");
  g->add_option("--seed", gc.seed, "seed for the random document and parameters");
  g->add_option("--tolerance", gc.tolerance, "maximum accepted relative error");
  g->add_flag("--corrupt-backward", gc.corrupt)->group("");

  PokerArgs pk;
  auto* p = app.add_subcommand("generate-poker", "Write poker-hand training and test tables (CSV)");
  p->add_option("--train-out", pk.train_out, "training table path");
  p->add_option("--test-out", pk.test_out, "test table path");
  p->add_option("--test-size", pk.test_size, "number of test hands");
  p->add_option("--seed", pk.seed, "generator seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return kExitUsage;
  }

  try {
    if (*c) return run_convert(conv);
    if (*t) return run_train(tr);
    if (*e) return run_eval(ev);
    if (*g) return run_gradcheck(gc);
    if (*p) return run_poker(pk);
  } catch (const Failure& f) {
    return f.code;
  } catch (const std::exception& ex) {
    std::cerr << "strla: " << ex.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitUsage;
}
