#include "strla/io/config.hpp"

#include <filesystem>
#include <set>
#include <vector>

#include "json.hpp"
#include "strla/data/dataset.hpp"
#include "strla/error.hpp"

namespace strla::io {

namespace {

using Json = nlohmann::ordered_json;

class Reader {
 public:
  explicit Reader(std::vector<std::string>& problems) : problems_(problems) {}

  template <typename T>
  void integer(const Json& j, const char* key, T& out, const std::string& where = {}) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if (!v.is_number_integer()) {
      problems_.push_back(where + key + ": expected an integer");
      return;
    }
    out = v.get<T>();
  }

  template <typename T>
  void integer(const Json& j, const char* key, std::optional<T>& out, const std::string& where) {
    T tmp{};
    if (!j.contains(key)) return;
    std::size_t before = problems_.size();
    integer(j, key, tmp, where);
    if (problems_.size() == before) out = tmp;
  }

  void real(const Json& j, const char* key, double& out) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if (!v.is_number()) {
      problems_.push_back(std::string(key) + ": expected a number");
      return;
    }
    out = v.get<double>();
  }

  void boolean(const Json& j, const char* key, bool& out) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if (!v.is_boolean()) {
      problems_.push_back(std::string(key) + ": expected true or false");
      return;
    }
    out = v.get<bool>();
  }

  bool string(const Json& j, const char* key, std::string& out) {
    if (!j.contains(key)) return false;
    const Json& v = j.at(key);
    if (!v.is_string()) {
      problems_.push_back(std::string(key) + ": expected a string");
      return false;
    }
    out = v.get<std::string>();
    return true;
  }

 private:
  std::vector<std::string>& problems_;
};

const std::set<std::string> kKnownKeys{
    "kind", "ablation", "mapping", "epochs", "batch_size", "hidden", "layers", "set_layers", "folds", "threads", "seed",
    "learning_rate", "beta1", "beta2", "epsilon", "ordinal", "unseen_path_rate", "fold_overrides"};

}  // namespace

engine::MappingDictionary load_mapping(const std::string& path) {
  return engine::MappingDictionary::from_json(data::read_file(path));
}

void apply_config_json(std::string_view text, train::ExperimentConfig& target, const std::string& base_dir,
                       bool validate) {
  train::ExperimentConfig config = target;
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");

  std::vector<std::string> problems;
  Reader r(problems);
  for (const auto& [key, value] : j.items())
    if (!kKnownKeys.count(key)) problems.push_back("unknown field '" + key + "'");

  std::string s;
  if (r.string(j, "kind", s)) {
    if (s == "mlp") {
      config.kind = s;
    } else {
      try {
        config.kind = engine::model_kind_name(engine::parse_model_kind(s));
      } catch (const Error& e) {
        problems.push_back(std::string("kind: ") + e.what());
      }
    }
  }
  if (r.string(j, "ablation", s)) {
    try {
      config.ablation = engine::parse_ablation(s);
    } catch (const Error& e) {
      problems.push_back(std::string("ablation: ") + e.what());
    }
  }
  if (j.contains("mapping")) {
    const Json& m = j.at("mapping");
    try {
      if (m.is_string()) {
        std::filesystem::path p(m.get<std::string>());
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        config.model.mapping = load_mapping(p.string());
      } else if (m.is_object()) {
        config.model.mapping = engine::MappingDictionary::from_json(m.dump());
      } else {
        problems.push_back("mapping: expected a file path or an object");
      }
    } catch (const Error& e) {
      problems.push_back(std::string("mapping: ") + e.what());
    }
  }

  r.integer(j, "epochs", config.train.epochs);
  r.integer(j, "batch_size", config.train.batch_size);
  r.integer(j, "hidden", config.train.hidden);
  r.integer(j, "layers", config.train.layers);
  r.integer(j, "set_layers", config.model.set_layers);
  r.integer(j, "folds", config.train.folds);
  r.integer(j, "threads", config.train.threads);
  r.integer(j, "seed", config.train.seed);
  r.real(j, "learning_rate", config.train.adam.learning_rate);
  r.real(j, "beta1", config.train.adam.beta1);
  r.real(j, "beta2", config.train.adam.beta2);
  r.real(j, "epsilon", config.train.adam.epsilon);
  r.boolean(j, "ordinal", config.model.ordinal);
  r.real(j, "unseen_path_rate", config.model.unseen_path_rate);

  if (j.contains("fold_overrides")) {
    const Json& fo = j.at("fold_overrides");
    if (!fo.is_array()) {
      problems.push_back("fold_overrides: expected an array");
    } else {
      config.fold_overrides.clear();
      for (std::size_t i = 0; i < fo.size(); ++i) {
        const Json& o = fo[i];
        std::string where = "fold_overrides[" + std::to_string(i) + "].";
        train::FoldOverride f;
        if (!o.is_object()) {
          problems.push_back(where + ": expected an object");
        } else {
          for (const auto& [key, value] : o.items())
            if (key != "epochs" && key != "batch_size" && key != "hidden" && key != "layers")
              problems.push_back(where + key + ": unknown field");
          r.integer(o, "epochs", f.epochs, where);
          r.integer(o, "batch_size", f.batch_size, where);
          r.integer(o, "hidden", f.hidden, where);
          r.integer(o, "layers", f.layers, where);
        }
        config.fold_overrides.push_back(f);
      }
    }
  }

  if (validate && problems.empty())
    for (auto& p : config.problems()) problems.push_back(std::move(p));
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw Error(ErrorCode::Config, msg);
  }
  target = std::move(config);
}

void apply_config_file(const std::string& path, train::ExperimentConfig& config, bool validate) {
  std::string base = std::filesystem::path(path).parent_path().string();
  apply_config_json(data::read_file(path), config, base.empty() ? "." : base, validate);
}

std::string config_to_json(const train::ExperimentConfig& config) {
  Json j;
  j["kind"] = config.kind;
  j["ablation"] = engine::ablation_name(config.ablation);
  if (!config.model.mapping.items().empty()) j["mapping"] = Json::parse(config.model.mapping.to_json());
  j["epochs"] = config.train.epochs;
  j["batch_size"] = config.train.batch_size;
  j["hidden"] = config.train.hidden;
  j["layers"] = config.train.layers;
  j["set_layers"] = config.model.set_layers;
  j["folds"] = config.train.folds;
  j["threads"] = config.train.threads;
  j["seed"] = config.train.seed;
  j["learning_rate"] = config.train.adam.learning_rate;
  j["beta1"] = config.train.adam.beta1;
  j["beta2"] = config.train.adam.beta2;
  j["epsilon"] = config.train.adam.epsilon;
  j["ordinal"] = config.model.ordinal;
  j["unseen_path_rate"] = config.model.unseen_path_rate;
  Json fo = Json::array();
  for (const auto& f : config.fold_overrides) {
    Json o = Json::object();
    if (f.epochs) o["epochs"] = *f.epochs;
    if (f.batch_size) o["batch_size"] = *f.batch_size;
    if (f.hidden) o["hidden"] = *f.hidden;
    if (f.layers) o["layers"] = *f.layers;
    fo.push_back(std::move(o));
  }
  j["fold_overrides"] = std::move(fo);
  return j.dump(2);
}

}  // namespace strla::io
