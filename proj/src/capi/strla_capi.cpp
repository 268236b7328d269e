#include "strla/strla.h"

#include <cstring>
#include <filesystem>
#include <memory>
#include <new>
#include <string>

#include "json.hpp"
#include "strla/data/dataset.hpp"
#include "strla/data/poker.hpp"
#include "strla/data/schema.hpp"
#include "strla/error.hpp"
#include "strla/io/checkpoint.hpp"
#include "strla/io/config.hpp"
#include "strla/stree/json.hpp"
#include "strla/train/experiment.hpp"
#include "strla/train/gradcheck.hpp"
#include "strla/xml/xml.hpp"

struct strla_dataset {
  strla::data::Dataset examples;
};

struct strla_config {
  strla::train::ExperimentConfig experiment;
};

struct strla_model {
  strla::train::ExperimentConfig experiment;
  std::unique_ptr<strla::train::Learner> owned;
  const strla::train::Learner* learner = nullptr;
};

namespace {

thread_local std::string last_error;

strla_status status_of(strla::ErrorCode code) {
  using strla::ErrorCode;
  switch (code) {
    case ErrorCode::Syntax: return STRLA_ERR_SYNTAX;
    case ErrorCode::Unsupported: return STRLA_ERR_UNSUPPORTED;
    case ErrorCode::ShapeMismatch: return STRLA_ERR_SHAPE_MISMATCH;
    case ErrorCode::NonFinite: return STRLA_ERR_NON_FINITE;
    case ErrorCode::NonScalarLoss: return STRLA_ERR_NON_SCALAR_LOSS;
    case ErrorCode::LabelOutOfRange: return STRLA_ERR_LABEL_OUT_OF_RANGE;
    case ErrorCode::UnknownTemplate: return STRLA_ERR_UNKNOWN_TEMPLATE;
    case ErrorCode::Config: return STRLA_ERR_CONFIG;
    case ErrorCode::Io: return STRLA_ERR_IO;
    case ErrorCode::VersionMismatch: return STRLA_ERR_VERSION_MISMATCH;
    case ErrorCode::FoldTooSmall: return STRLA_ERR_FOLD_TOO_SMALL;
    case ErrorCode::MissingColumn: return STRLA_ERR_MISSING_COLUMN;
    case ErrorCode::TypeCoercion: return STRLA_ERR_TYPE_COERCION;
    case ErrorCode::LabelMismatch: return STRLA_ERR_LABEL_MISMATCH;
    case ErrorCode::Internal: return STRLA_ERR_INTERNAL;
  }
  return STRLA_ERR_INTERNAL;
}

template <typename F>
strla_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return STRLA_OK;
  } catch (const strla::Error& e) {
    last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return STRLA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return STRLA_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return STRLA_ERR_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

strla_status invalid(const char* what) {
  last_error = what;
  return STRLA_ERR_INVALID_ARGUMENT;
}

std::string dataset_label(const char* name) { return name ? name : ""; }

strla::train::FoldHook hook_for(const strla::train::ExperimentConfig& experiment, strla_fold_callback callback,
                                void* user) {
  if (!callback) return {};
  return [&experiment, callback, user](int, const strla::train::Learner& learner, const strla::train::FoldResult& r) {
    strla_model view;
    view.experiment = experiment;
    view.learner = &learner;
    callback(r.to_json(true).c_str(), &view, user);
  };
}

}  // namespace

extern "C" {

const char* strla_version(void) { return strla::io::kCheckpointFormat; }

const char* strla_status_name(strla_status status) {
  switch (status) {
    case STRLA_OK: return "ok";
    case STRLA_ERR_SYNTAX: return "syntax error";
    case STRLA_ERR_UNSUPPORTED: return "unsupported";
    case STRLA_ERR_SHAPE_MISMATCH: return "shape mismatch";
    case STRLA_ERR_NON_FINITE: return "non-finite value";
    case STRLA_ERR_NON_SCALAR_LOSS: return "non-scalar loss";
    case STRLA_ERR_LABEL_OUT_OF_RANGE: return "label out of range";
    case STRLA_ERR_UNKNOWN_TEMPLATE: return "unknown template";
    case STRLA_ERR_CONFIG: return "configuration error";
    case STRLA_ERR_IO: return "I/O error";
    case STRLA_ERR_VERSION_MISMATCH: return "version mismatch";
    case STRLA_ERR_FOLD_TOO_SMALL: return "fold too small";
    case STRLA_ERR_MISSING_COLUMN: return "missing column";
    case STRLA_ERR_TYPE_COERCION: return "type coercion error";
    case STRLA_ERR_LABEL_MISMATCH: return "label mismatch";
    case STRLA_ERR_INTERNAL: return "internal error";
    case STRLA_ERR_INVALID_ARGUMENT: return "invalid argument";
  }
  return "unknown status";
}

const char* strla_last_error(void) { return last_error.c_str(); }

void strla_string_free(char* s) { std::free(s); }

strla_status strla_dataset_read(const char* path, int xml, strla_dataset** out) {
  if (!path || !out) return invalid("strla_dataset_read: null argument");
  return guarded([&] {
    auto ds = std::make_unique<strla_dataset>();
    ds->examples = strla::data::read_jsonl(path, xml ? strla::data::InputFormat::Xml : strla::data::InputFormat::Json);
    *out = ds.release();
  });
}

strla_status strla_dataset_convert(const char* table_path, const char* schema_path, int rebalance, uint64_t seed,
                                   strla_dataset** out) {
  if (!table_path || !schema_path || !out) return invalid("strla_dataset_convert: null argument");
  return guarded([&] {
    auto schema = strla::data::Schema::load(schema_path);
    auto table = strla::data::read_csv(table_path);
    auto ds = std::make_unique<strla_dataset>();
    ds->examples = strla::data::convert_table(table, schema);
    if (rebalance) ds->examples = strla::data::rebalance(ds->examples, seed);
    *out = ds.release();
  });
}

strla_status strla_dataset_write(const strla_dataset* ds, const char* path) {
  if (!ds || !path) return invalid("strla_dataset_write: null argument");
  return guarded([&] { strla::data::write_jsonl(path, ds->examples); });
}

size_t strla_dataset_size(const strla_dataset* ds) { return ds ? ds->examples.size() : 0; }

void strla_dataset_free(strla_dataset* ds) { delete ds; }

strla_status strla_poker_generate(const char* train_csv, const char* test_csv, size_t test_size, uint64_t seed) {
  if (!train_csv || !test_csv) return invalid("strla_poker_generate: null argument");
  return guarded([&] {
    strla::data::write_file(train_csv, strla::data::table_to_csv(strla::data::generate_poker_train(seed)));
    strla::data::write_file(test_csv,
                            strla::data::table_to_csv(strla::data::generate_poker_test(test_size, seed + 1)));
  });
}

strla_status strla_config_new(strla_config** out) {
  if (!out) return invalid("strla_config_new: null argument");
  return guarded([&] { *out = new strla_config(); });
}

strla_status strla_config_apply_file(strla_config* config, const char* path) {
  if (!config || !path) return invalid("strla_config_apply_file: null argument");
  return guarded([&] { strla::io::apply_config_file(path, config->experiment, false); });
}

strla_status strla_config_apply_json(strla_config* config, const char* json) {
  if (!config || !json) return invalid("strla_config_apply_json: null argument");
  return guarded([&] {
    std::string cwd = std::filesystem::current_path().string();
    strla::io::apply_config_json(json, config->experiment, cwd, false);
  });
}

strla_status strla_config_to_json(const strla_config* config, char** out) {
  if (!config || !out) return invalid("strla_config_to_json: null argument");
  return guarded([&] { *out = dup(strla::io::config_to_json(config->experiment)); });
}

strla_status strla_config_validate(const strla_config* config) {
  if (!config) return invalid("strla_config_validate: null argument");
  return guarded([&] {
    auto problems = config->experiment.problems();
    if (problems.empty()) return;
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw strla::Error(strla::ErrorCode::Config, msg);
  });
}

void strla_config_free(strla_config* config) { delete config; }

strla_status strla_cross_validate(const strla_dataset* ds, const strla_config* config, const char* dataset_name,
                                  strla_fold_callback callback, void* user, char** metrics_json) {
  if (!ds || !config || !metrics_json) return invalid("strla_cross_validate: null argument");
  return guarded([&] {
    auto metrics = strla::train::cross_validate(ds->examples, config->experiment,
                                                hook_for(config->experiment, callback, user));
    metrics.dataset = dataset_label(dataset_name);
    *metrics_json = dup(metrics.to_json());
  });
}

strla_status strla_fraction_runs(const strla_dataset* train, const strla_dataset* test, const strla_config* config,
                                 double fraction, int runs, const char* dataset_name, strla_fold_callback callback,
                                 void* user, char** metrics_json) {
  if (!train || !test || !config || !metrics_json) return invalid("strla_fraction_runs: null argument");
  return guarded([&] {
    auto metrics = strla::train::fraction_runs(train->examples, test->examples, config->experiment, fraction, runs,
                                               hook_for(config->experiment, callback, user));
    metrics.dataset = dataset_label(dataset_name);
    *metrics_json = dup(metrics.to_json());
  });
}

strla_status strla_train(const strla_dataset* ds, const strla_config* config, strla_model** out, char** fold_json) {
  if (!ds || !config || !out) return invalid("strla_train: null argument");
  return guarded([&] {
    auto model = std::make_unique<strla_model>();
    model->experiment = config->experiment;
    strla::train::FoldResult r;
    model->owned = strla::train::train_full(ds->examples, config->experiment, &r);
    model->learner = model->owned.get();
    if (fold_json) *fold_json = dup(r.to_json(true));
    *out = model.release();
  });
}

strla_status strla_model_save(const strla_model* model, const char* path, int with_optimizer) {
  if (!model || !model->learner || !path) return invalid("strla_model_save: null argument");
  return guarded([&] { strla::io::save_checkpoint(path, *model->learner, model->experiment, with_optimizer != 0); });
}

strla_status strla_model_load(const char* path, strla_model** out) {
  if (!path || !out) return invalid("strla_model_load: null argument");
  return guarded([&] {
    auto cp = strla::io::load_checkpoint(path);
    auto model = std::make_unique<strla_model>();
    model->experiment = std::move(cp.experiment);
    model->owned = std::move(cp.learner);
    model->learner = model->owned.get();
    *out = model.release();
  });
}

void strla_model_free(strla_model* model) { delete model; }

strla_status strla_evaluate(const strla_model* model, const strla_dataset* ds, int threads, const char* dataset_name,
                            char** metrics_json) {
  if (!model || !model->learner || !ds || !metrics_json) return invalid("strla_evaluate: null argument");
  if (threads < 1) return invalid("strla_evaluate: threads must be >= 1");
  return guarded([&] {
    auto metrics = strla::train::evaluate_learner(*model->learner, ds->examples, model->experiment.kind, threads);
    metrics.dataset = dataset_label(dataset_name);
    *metrics_json = dup(metrics.to_json());
  });
}

strla_status strla_predict(const strla_model* model, const char* document, char** label) {
  if (!model || !model->learner || !document || !label) return invalid("strla_predict: null argument");
  return guarded([&] {
    strla::stree::Element doc = model->experiment.kind == "xml" ? strla::xml::parse_xml_reduced(document)
                                                                : strla::stree::parse_json(document);
    int k = model->learner->predict(doc);
    *label = dup(model->learner->labels().at(static_cast<std::size_t>(k)));
  });
}

strla_status strla_gradcheck(const char* kind, uint64_t seed, int corrupt_backward, double* max_rel_error,
                             char** report_json) {
  if (!kind) return invalid("strla_gradcheck: null argument");
  return guarded([&] {
    auto r = strla::train::gradcheck_model(kind, seed, corrupt_backward != 0);
    if (max_rel_error) *max_rel_error = r.max_rel_error;
    if (report_json) {
      nlohmann::ordered_json j;
      j["kind"] = kind;
      j["seed"] = seed;
      j["checked"] = r.checked;
      j["max_rel_error"] = r.max_rel_error;
      j["worst_parameter"] = r.worst_parameter;
      j["analytic"] = r.analytic;
      j["numeric"] = r.numeric;
      *report_json = dup(j.dump());
    }
  });
}

}  // extern "C"
