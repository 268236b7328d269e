#include "strla/io/checkpoint.hpp"

#include "json.hpp"
#include "strla/data/dataset.hpp"
#include "strla/error.hpp"
#include "strla/io/config.hpp"

namespace strla {

namespace {

using Json = nlohmann::ordered_json;

stree::Kind parse_kind(const std::string& s) {
  for (auto k : {stree::Kind::Number, stree::Kind::Text, stree::Kind::Boolean, stree::Kind::Array, stree::Kind::Object})
    if (s == stree::kind_name(k)) return k;
  throw Error(ErrorCode::Config, "checkpoint: unknown element kind '" + s + "'");
}

Json linear_to_json(const nn::LinearParams& p) { return Json::array({p.w, p.b, p.in, p.out}); }
nn::LinearParams linear_from_json(const Json& j) {
  return {j.at(0).get<ad::ParamId>(), j.at(1).get<ad::ParamId>(), j.at(2).get<int>(), j.at(3).get<int>()};
}

Json lstm_to_json(const nn::LstmParams& p) { return Json::array({p.w, p.v, p.b, p.in, p.m}); }
nn::LstmParams lstm_from_json(const Json& j) {
  return {j.at(0).get<ad::ParamId>(), j.at(1).get<ad::ParamId>(), j.at(2).get<ad::ParamId>(), j.at(3).get<int>(),
          j.at(4).get<int>()};
}

Json chars_to_json(const nn::CharTable& t) {
  Json rows = Json::array();
  for (const auto& [cp, id] : t.rows) rows.push_back(Json::array({static_cast<std::uint32_t>(cp), id}));
  return Json{{"rows", std::move(rows)}, {"unk", t.unk}};
}
nn::CharTable chars_from_json(const Json& j) {
  nn::CharTable t;
  for (const auto& r : j.at("rows")) t.rows.emplace(static_cast<char32_t>(r.at(0).get<std::uint32_t>()), r.at(1).get<ad::ParamId>());
  t.unk = j.at("unk").get<ad::ParamId>();
  return t;
}

Json store_to_json(const ad::ParameterStore& store) {
  Json out = Json::array();
  for (std::size_t i = 0; i < store.size(); ++i) {
    const ad::Parameter& p = store[static_cast<ad::ParamId>(i)];
    out.push_back(Json{{"name", p.name}, {"rows", p.rows}, {"cols", p.cols}, {"data", p.value}});
  }
  return out;
}

// Replays parameter creation in id order and overwrites the values.
void store_from_json(const Json& j, ad::ParameterStore& store, bool create) {
  if (!create && j.size() != store.size())
    throw Error(ErrorCode::Config, "checkpoint: parameter count " + std::to_string(j.size()) + " does not match model (" +
                                       std::to_string(store.size()) + ")");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& p = j[i];
    auto name = p.at("name").get<std::string>();
    int rows = p.at("rows").get<int>(), cols = p.at("cols").get<int>();
    ad::ParamId id = create ? store.create(name, rows, cols) : static_cast<ad::ParamId>(i);
    ad::Parameter& dst = store[id];
    if (dst.name != name || dst.rows != rows || dst.cols != cols)
      throw Error(ErrorCode::Config, "checkpoint: parameter " + std::to_string(i) + " ('" + name + "') does not match");
    auto data = p.at("data").get<std::vector<double>>();
    if (data.size() != dst.value.size())
      throw Error(ErrorCode::Config, "checkpoint: parameter '" + name + "' has wrong size");
    dst.value = std::move(data);
  }
}

Json adam_to_json(const train::Adam& a) {
  return Json{{"steps", a.steps()}, {"m", a.first_moments()}, {"v", a.second_moments()}};
}

train::Adam adam_from_json(const Json* j, const train::AdamConfig& config) {
  train::Adam a(config);
  if (j && !j->is_null())
    a.restore(j->at("steps").get<std::int64_t>(), j->at("m").get<std::vector<std::vector<double>>>(),
              j->at("v").get<std::vector<std::vector<double>>>());
  return a;
}

Json model_config_to_json(const engine::ModelConfig& c) {
  Json j;
  j["kind"] = engine::model_kind_name(c.kind);
  j["hidden"] = c.hidden;
  j["set_layers"] = c.set_layers;
  j["pathless"] = c.pathless;
  j["homogeneous"] = c.homogeneous;
  j["ordinal"] = c.ordinal;
  j["unseen_path_rate"] = c.unseen_path_rate;
  j["seed"] = c.seed;
  j["mapping"] = Json::parse(c.mapping.items().empty() ? std::string("{}") : c.mapping.to_json());
  return j;
}

engine::ModelConfig model_config_from_json(const Json& j) {
  engine::ModelConfig c;
  c.kind = engine::parse_model_kind(j.at("kind").get<std::string>());
  c.hidden = j.at("hidden").get<int>();
  c.set_layers = j.at("set_layers").get<int>();
  c.pathless = j.at("pathless").get<bool>();
  c.homogeneous = j.at("homogeneous").get<bool>();
  c.ordinal = j.at("ordinal").get<bool>();
  c.unseen_path_rate = j.at("unseen_path_rate").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("mapping").empty()) c.mapping = engine::MappingDictionary::from_json(j.at("mapping").dump());
  return c;
}

Json train_config_to_json(const train::TrainConfig& t) {
  return Json{{"epochs", t.epochs},   {"batch_size", t.batch_size}, {"hidden", t.hidden},
              {"layers", t.layers},   {"folds", t.folds},           {"threads", t.threads},
              {"seed", t.seed},       {"learning_rate", t.adam.learning_rate},
              {"beta1", t.adam.beta1}, {"beta2", t.adam.beta2},     {"epsilon", t.adam.epsilon}};
}

train::TrainConfig train_config_from_json(const Json& j) {
  train::TrainConfig t;
  t.epochs = j.at("epochs").get<int>();
  t.batch_size = j.at("batch_size").get<int>();
  t.hidden = j.at("hidden").get<int>();
  t.layers = j.at("layers").get<int>();
  t.folds = j.at("folds").get<int>();
  t.threads = j.at("threads").get<int>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.adam.learning_rate = j.at("learning_rate").get<double>();
  t.adam.beta1 = j.at("beta1").get<double>();
  t.adam.beta2 = j.at("beta2").get<double>();
  t.adam.epsilon = j.at("epsilon").get<double>();
  return t;
}

}  // namespace

namespace engine {

class ModelSerializer {
 public:
  static Json save(const Model& m) {
    if (!m.built_) throw Error(ErrorCode::Internal, "cannot checkpoint an unbuilt model");
    Json j;
    j["config"] = model_config_to_json(m.config_);
    j["labels"] = m.labels_;
    Json dict = Json::array();
    for (const auto& [tp, gid] : m.dict_.entries())
      dict.push_back(Json{{"kind", stree::kind_name(tp.kind)}, {"path", tp.path}, {"id", gid}});
    j["dictionary"] = std::move(dict);
    Json stats = Json::array();
    for (const auto& [path, e] : m.stats_.entries())
      stats.push_back(Json{{"path", path}, {"count", e.count}, {"ref", e.ref}, {"shift", e.shift}, {"scale", e.scale}});
    j["norm_stats"] = std::move(stats);
    Json groups = Json::array();
    for (const auto& [key, g] : m.groups_) {
      Json cat = Json::array();
      for (const auto& [value, id] : g.cat) cat.push_back(Json::array({value, id}));
      groups.push_back(Json{{"id", key.first},
                            {"template", template_name(key.second)},
                            {"lin", linear_to_json(g.lin)},
                            {"lstm", lstm_to_json(g.lstm)},
                            {"cat", std::move(cat)},
                            {"cat_unk", g.cat_unk}});
    }
    j["groups"] = std::move(groups);
    j["chars"] = chars_to_json(m.chars_);
    const auto& s = m.sumlstm_;
    j["sumlstm"] = Json::array({s.v_iou, s.b_iou, s.v_f, s.b_f, s.m});
    Json sets = Json::array();
    for (std::size_t i = 0; i < 2; ++i) {
      Json mlp = Json::array();
      for (const auto& l : m.deep_set_[i].mlp) mlp.push_back(linear_to_json(l));
      sets.push_back(Json{{"ready", m.deep_set_ready_[i]}, {"mlp", std::move(mlp)}, {"pool", linear_to_json(m.deep_set_[i].pool)}});
    }
    j["deep_set"] = std::move(sets);
    Json attrs = Json::array();
    for (const auto& [id, a] : m.attributes_)
      attrs.push_back(Json{{"id", id}, {"lstm", lstm_to_json(a.lstm)}, {"chars", chars_to_json(a.chars)}});
    j["attributes"] = std::move(attrs);
    j["attribute_unk"] = m.attribute_unk_ ? Json{{"lstm", lstm_to_json(m.attribute_unk_->lstm)},
                                                 {"chars", chars_to_json(m.attribute_unk_->chars)}}
                                          : Json();
    j["output"] = linear_to_json(m.output_);
    j["build_docs"] = m.build_docs_;
    j["parameters"] = store_to_json(m.store_);
    return j;
  }

  static std::unique_ptr<Model> load(const Json& j) {
    auto m = std::make_unique<Model>(model_config_from_json(j.at("config")));
    m->labels_ = j.at("labels").get<std::vector<std::string>>();
    for (const auto& d : j.at("dictionary")) {
      auto gid = m->dict_.intern(parse_kind(d.at("kind").get<std::string>()), d.at("path").get<std::string>());
      if (gid != d.at("id").get<Model::GroupId>()) throw Error(ErrorCode::Config, "checkpoint: path dictionary ids are not dense");
    }
    m->dict_.freeze();
    for (const auto& s : j.at("norm_stats"))
      m->stats_.set_entry(s.at("path").get<std::string>(),
                          {s.at("count").get<std::size_t>(), s.at("ref").get<double>(), s.at("shift").get<double>(),
                           s.at("scale").get<double>()});
    for (const auto& g : j.at("groups")) {
      GroupParams p;
      p.tmpl = parse_template(g.at("template").get<std::string>());
      p.lin = linear_from_json(g.at("lin"));
      p.lstm = lstm_from_json(g.at("lstm"));
      for (const auto& c : g.at("cat")) p.cat.emplace(c.at(0).get<std::string>(), c.at(1).get<ad::ParamId>());
      p.cat_unk = g.at("cat_unk").get<ad::ParamId>();
      m->groups_.emplace(std::make_pair(g.at("id").get<Model::GroupId>(), p.tmpl), std::move(p));
    }
    m->chars_ = chars_from_json(j.at("chars"));
    const Json& s = j.at("sumlstm");
    m->sumlstm_ = {s.at(0).get<ad::ParamId>(), s.at(1).get<ad::ParamId>(), s.at(2).get<ad::ParamId>(),
                   s.at(3).get<ad::ParamId>(), s.at(4).get<int>()};
    const Json& sets = j.at("deep_set");
    for (std::size_t i = 0; i < 2; ++i) {
      m->deep_set_ready_[i] = sets.at(i).at("ready").get<bool>();
      for (const auto& l : sets.at(i).at("mlp")) m->deep_set_[i].mlp.push_back(linear_from_json(l));
      m->deep_set_[i].pool = linear_from_json(sets.at(i).at("pool"));
    }
    for (const auto& a : j.at("attributes"))
      m->attributes_.emplace(a.at("id").get<std::string>(),
                             xml::AttributeParams{lstm_from_json(a.at("lstm")), chars_from_json(a.at("chars"))});
    if (!j.at("attribute_unk").is_null()) {
      const Json& a = j.at("attribute_unk");
      m->attribute_unk_ = xml::AttributeParams{lstm_from_json(a.at("lstm")), chars_from_json(a.at("chars"))};
    }
    m->output_ = linear_from_json(j.at("output"));
    m->build_docs_ = j.at("build_docs").get<std::size_t>();
    store_from_json(j.at("parameters"), m->store_, true);
    m->built_ = true;
    return m;
  }
};

}  // namespace engine

namespace io {

std::string checkpoint_to_json(const train::Learner& learner, const train::ExperimentConfig& experiment,
                               bool with_optimizer) {
  Json j;
  j["format"] = kCheckpointFormat;
  j["experiment"] = Json::parse(config_to_json(experiment));
  j["train"] = train_config_to_json(learner.train_config());
  j["labels"] = learner.labels();
  if (const auto* tree = dynamic_cast<const train::TreeLearner*>(&learner)) {
    j["learner"] = "tree";
    j["model"] = engine::ModelSerializer::save(tree->model());
    j["optimizer"] = with_optimizer ? adam_to_json(tree->optimizer()) : Json();
  } else if (const auto* mlp = dynamic_cast<const train::MlpLearner*>(&learner)) {
    j["learner"] = "mlp";
    Json cols = Json::array();
    for (const auto& c : mlp->featurizer().columns())
      cols.push_back(Json{{"path", c.path}, {"numeric", c.numeric}, {"mean", c.mean}, {"stddev", c.stddev}, {"vocab", c.vocab}});
    const train::Mlp& net = mlp->mlp();
    j["featurizer"] = std::move(cols);
    j["mlp"] = Json{{"inputs", net.inputs()}, {"width", net.width()}, {"layers", net.layers()}, {"classes", net.classes()}};
    j["parameters"] = store_to_json(net.store());
    j["optimizer"] = with_optimizer ? adam_to_json(mlp->optimizer()) : Json();
  } else {
    throw Error(ErrorCode::Internal, "unknown learner type");
  }
  return j.dump();
}

Checkpoint checkpoint_from_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::VersionMismatch, std::string("not a checkpoint file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("format") || !j.at("format").is_string())
    throw Error(ErrorCode::VersionMismatch, "not a checkpoint file (missing format header)");
  if (j.at("format").get<std::string>() != kCheckpointFormat)
    throw Error(ErrorCode::VersionMismatch, "checkpoint format '" + j.at("format").get<std::string>() +
                                                "' is not supported (expected " + kCheckpointFormat + ")");
  try {
    Checkpoint cp;
    apply_config_json(j.at("experiment").dump(), cp.experiment);
    train::TrainConfig tc = train_config_from_json(j.at("train"));
    const Json* opt = j.contains("optimizer") ? &j.at("optimizer") : nullptr;
    auto kind = j.at("learner").get<std::string>();
    if (kind == "tree") {
      auto model = engine::ModelSerializer::load(j.at("model"));
      auto learner = std::make_unique<train::TreeLearner>(model->config());
      learner->adopt(std::move(model), adam_from_json(opt, tc.adam), tc);
      cp.learner = std::move(learner);
    } else if (kind == "mlp") {
      std::vector<data::Featurizer::Column> cols;
      for (const auto& c : j.at("featurizer")) {
        data::Featurizer::Column col;
        col.path = c.at("path").get<std::string>();
        col.numeric = c.at("numeric").get<bool>();
        col.mean = c.at("mean").get<double>();
        col.stddev = c.at("stddev").get<double>();
        col.vocab = c.at("vocab").get<std::vector<std::string>>();
        cols.push_back(std::move(col));
      }
      data::Featurizer f;
      f.restore(std::move(cols));
      const Json& shape = j.at("mlp");
      auto net = std::make_unique<train::Mlp>(shape.at("inputs").get<int>(), shape.at("width").get<int>(),
                                              shape.at("layers").get<int>(), shape.at("classes").get<int>(), 0);
      store_from_json(j.at("parameters"), net->store(), false);
      auto learner = std::make_unique<train::MlpLearner>();
      learner->adopt(std::move(f), std::move(net), j.at("labels").get<std::vector<std::string>>(),
                     adam_from_json(opt, tc.adam), tc);
      cp.learner = std::move(learner);
    } else {
      throw Error(ErrorCode::Config, "checkpoint: unknown learner '" + kind + "'");
    }
    return cp;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Config, std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const train::Learner& learner, const train::ExperimentConfig& experiment,
                     bool with_optimizer) {
  data::write_file(path, checkpoint_to_json(learner, experiment, with_optimizer));
}

Checkpoint load_checkpoint(const std::string& path) { return checkpoint_from_json(data::read_file(path)); }

}  // namespace io

}  // namespace strla
