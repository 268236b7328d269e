#include "strla/engine/model.hpp"

#include <algorithm>

#include "strla/error.hpp"

namespace strla::engine {

using stree::Element;
using stree::Kind;

const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Set: return "set";
    case ModelKind::Lstm: return "lstm";
    case ModelKind::Tailored: return "tailored";
    case ModelKind::Xml: return "xml";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "set") return ModelKind::Set;
  if (s == "lstm") return ModelKind::Lstm;
  if (s == "tailored") return ModelKind::Tailored;
  if (s == "xml") return ModelKind::Xml;
  throw Error(ErrorCode::Config, "unknown model kind '" + std::string(s) + "'");
}

const char* ablation_name(Ablation a) {
  switch (a) {
    case Ablation::None: return "none";
    case Ablation::Pathless: return "pathless";
    case Ablation::Homogeneous: return "homogeneous";
    case Ablation::Both: return "both";
  }
  return "?";
}

Ablation parse_ablation(std::string_view s) {
  if (s == "none" || s.empty()) return Ablation::None;
  if (s == "pathless") return Ablation::Pathless;
  if (s == "homogeneous") return Ablation::Homogeneous;
  if (s == "both") return Ablation::Both;
  throw Error(ErrorCode::Config, "unknown ablation '" + std::string(s) + "'");
}

const MappingDictionary& ModelConfig::effective_mapping() const {
  static const MappingDictionary set_map = MappingDictionary::set_based();
  static const MappingDictionary lstm_map = MappingDictionary::lstm_based();
  static const MappingDictionary xml_map = MappingDictionary::xml_based();
  switch (kind) {
    case ModelKind::Set: return set_map;
    case ModelKind::Lstm: return lstm_map;
    case ModelKind::Xml: return xml_map;
    case ModelKind::Tailored: return mapping;
  }
  return lstm_map;
}

void ModelConfig::validate() const {
  if (hidden < 1) throw Error(ErrorCode::Config, "hidden width must be >= 1");
  if (set_layers < 0) throw Error(ErrorCode::Config, "set_layers must be >= 0");
  if (unseen_path_rate < 0.0 || unseen_path_rate > 1.0)
    throw Error(ErrorCode::Config, "unseen_path_rate must lie in [0, 1]");
  if (kind == ModelKind::Tailored && mapping.empty())
    throw Error(ErrorCode::Config, "tailored model needs a mapping dictionary");
}

ModelConfig apply_ablation(ModelConfig config, Ablation mode) {
  if (mode == Ablation::Pathless || mode == Ablation::Both) config.pathless = true;
  if (mode == Ablation::Homogeneous || mode == Ablation::Both) config.homogeneous = true;
  return config;
}

Model::Model(ModelConfig config) : config_(std::move(config)), init_(config_.seed) { config_.validate(); }

Kind Model::effective_kind(Kind k) const {
  if (!config_.homogeneous) return k;
  switch (k) {
    case Kind::Array: return Kind::Object;
    case Kind::Number:
    case Kind::Boolean: return Kind::Text;
    default: return k;
  }
}

const std::string& Model::group_path(const std::string& path) const {
  static const std::string kEmpty;
  return config_.pathless ? kEmpty : path;
}

Template Model::resolve_template(Kind kind, const std::string& path) const {
  auto it = template_cache_.find({kind, path});
  if (it != template_cache_.end()) return it->second;
  return config_.effective_mapping().resolve(kind, path);
}

Model::GroupId Model::resolve_parameters(Kind kind, const std::string& path) const {
  return dict_.lookup(kind, group_path(path));
}

const GroupParams* Model::group(GroupId gid, Template t) const {
  auto it = groups_.find({gid, t});
  return it == groups_.end() ? nullptr : &it->second;
}

int Model::label_index(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin());
}

const nn::DeepSetShared& Model::deep_set(Kind container) const {
  return deep_set_[container == Kind::Array ? 0 : 1];
}

const xml::AttributeParams* Model::attribute(const std::string& id) const {
  auto it = attributes_.find(id);
  if (it != attributes_.end()) return &it->second;
  return attribute_unk_ ? &*attribute_unk_ : nullptr;
}

std::string Model::primitive_text(const Element& e) const { return stree::primitive_to_string(e); }

void Model::register_chars(nn::CharTable& table, const std::string& prefix, std::string_view s) {
  for (char32_t ch : nn::utf8_decode(s)) {
    if (table.rows.count(ch)) continue;
    table.rows.emplace(ch, nn::make_embedding_row(store_, init_, prefix + std::to_string(static_cast<std::uint32_t>(ch)),
                                                  config_.hidden));
  }
}

void Model::ensure_shared(Template t, Kind kind) {
  const int m = config_.hidden;
  switch (t) {
    case Template::EmbedString:
      if (chars_.unk < 0) chars_.unk = nn::make_embedding_row(store_, init_, "char.unk", m);
      break;
    case Template::SumTreeLstm:
      if (sumlstm_.v_iou < 0) sumlstm_ = nn::make_sumlstm(store_, init_, "sumlstm", m);
      break;
    case Template::DeepSets: {
      int idx = kind == Kind::Array ? 0 : 1;
      if (deep_set_ready_[idx]) break;
      std::string prefix = idx == 0 ? "set.array" : "set.object";
      auto& ds = deep_set_[idx];
      for (int l = 0; l < config_.set_layers; ++l)
        ds.mlp.push_back(nn::make_linear(store_, init_, prefix + ".mlp" + std::to_string(l), m, m));
      ds.pool = nn::make_linear(store_, init_, prefix + ".pool", m, m);
      deep_set_ready_[idx] = true;
      break;
    }
    case Template::XmlTag:
      if (!attribute_unk_) {
        xml::AttributeParams p;
        p.lstm = nn::make_lstm(store_, init_, "attr?.lstm", m, m);
        p.chars.unk = nn::make_embedding_row(store_, init_, "attr?.char.unk", m);
        attribute_unk_ = std::move(p);
      }
      break;
    default:
      break;
  }
}

GroupParams& Model::ensure_group(GroupId gid, Template t, Kind kind) {
  auto it = groups_.find({gid, t});
  if (it != groups_.end()) return it->second;
  ensure_shared(t, kind);
  const int m = config_.hidden;
  std::string prefix = "g" + std::to_string(gid) + "." + template_name(t);
  GroupParams g;
  g.tmpl = t;
  switch (t) {
    case Template::EmbedNumber:
    case Template::EmbedBoolean:
      g.lin = nn::make_linear(store_, init_, prefix, 1, m);
      break;
    case Template::EmbedString:
      g.lstm = nn::make_lstm(store_, init_, prefix, m, m);
      break;
    case Template::CatEmbedding:
      g.cat_unk = nn::make_embedding_row(store_, init_, prefix + ".unk", m);
      break;
    case Template::DeepSets:
    case Template::SumTreeLstm:
      g.lin = nn::make_linear(store_, init_, prefix, m, m);
      break;
    case Template::ArrayLstm:
      g.lstm = nn::make_lstm(store_, init_, prefix, 2 * m, m);
      break;
    case Template::XmlTag:
      g.lstm = nn::make_lstm(store_, init_, prefix, m, m);
      break;
  }
  return groups_.emplace(std::make_pair(gid, t), std::move(g)).first->second;
}

xml::AttributeParams& Model::ensure_attribute(const std::string& id) {
  auto it = attributes_.find(id);
  if (it != attributes_.end()) return it->second;
  const int m = config_.hidden;
  xml::AttributeParams p;
  p.lstm = nn::make_lstm(store_, init_, "attr." + id + ".lstm", m, m);
  p.chars.unk = nn::make_embedding_row(store_, init_, "attr." + id + ".char.unk", m);
  return attributes_.emplace(id, std::move(p)).first->second;
}

void Model::register_element(const Element& e, const std::string& path) {
  Kind kind = effective_kind(e.kind);
  auto key = std::make_pair(kind, path);
  auto cached = template_cache_.find(key);
  Template t;
  if (cached != template_cache_.end()) {
    t = cached->second;
  } else {
    t = config_.effective_mapping().resolve(kind, path);
    if (!template_accepts(t, kind))
      throw Error(ErrorCode::Config, std::string("template '") + template_name(t) + "' cannot embed a " +
                                         stree::kind_name(kind) + " element (path '" + path + "')");
    template_cache_.emplace(key, t);
  }
  GroupId gid = dict_.intern(kind, group_path(path));
  GroupParams& g = ensure_group(gid, t, kind);
  ensure_group(dict_.unknown_group(kind), t, kind);

  switch (t) {
    case Template::EmbedNumber:
      stats_.observe(group_path(path), e.number);
      break;
    case Template::EmbedString:
      register_chars(chars_, "char.", e.kind == Kind::Text ? e.text : primitive_text(e));
      break;
    case Template::CatEmbedding: {
      std::string value = primitive_text(e);
      if (!g.cat.count(value)) {
        std::string name = "g" + std::to_string(gid) + ".catEmbedding.v" + std::to_string(g.cat.size());
        g.cat.emplace(value, nn::make_embedding_row(store_, init_, name, config_.hidden));
      }
      break;
    }
    case Template::XmlTag:
      for (const auto& [id, value] : e.description) {
        auto& a = ensure_attribute(id);
        register_chars(a.chars, "attr." + id + ".char.", value);
      }
      break;
    default:
      break;
  }

  if (e.kind == Kind::Object) {
    for (const auto& m : e.members) register_element(m.value, stree::append_segment(path, m.name));
  } else if (e.kind == Kind::Array) {
    for (std::size_t i = 0; i < e.items.size(); ++i)
      register_element(e.items[i], config_.ordinal ? stree::append_segment(path, std::to_string(i + 1)) : path);
  }
}

void Model::build(std::span<const Element* const> training_docs, std::vector<std::string> label_vocab) {
  if (built_) throw Error(ErrorCode::Internal, "model already built");
  if (label_vocab.size() < 2) throw Error(ErrorCode::Config, "need at least two classes");
  for (const Element* doc : training_docs) {
    register_element(*doc, std::string());
    ++build_docs_;
  }
  stats_.finalize();
  labels_ = std::move(label_vocab);
  output_ = nn::make_linear(store_, init_, "output", config_.hidden, static_cast<int>(labels_.size()));
  dict_.freeze();
  built_ = true;
}

nn::LatentState Model::embed(ad::Tape& tape, const Element& e, const std::string& path,
                             const EmbedOptions* opts) const {
  Kind kind = effective_kind(e.kind);
  Template t = resolve_template(kind, path);
  GroupId gid = resolve_parameters(kind, path);
  if (opts && opts->rng && config_.unseen_path_rate > 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(*opts->rng) < config_.unseen_path_rate) gid = dict_.unknown_group(kind);
  }
  const GroupParams* g = group(gid, t);
  if (!g) {
    g = group(dict_.unknown_group(kind), t);
    if (!g)
      throw Error(ErrorCode::Config, std::string("no trained parameters for template '") + template_name(t) +
                                         "' on " + stree::kind_name(kind) + " elements (path '" + path + "')");
  }

  switch (t) {
    case Template::EmbedNumber:
      return nn::embed_scalar(tape, g->lin, stats_.normalize(group_path(path), e.number));
    case Template::EmbedBoolean:
      return nn::embed_scalar(tape, g->lin, nn::boolean_code(e.boolean));
    case Template::EmbedString:
      if (e.kind == Kind::Text) return nn::embed_string(tape, g->lstm, chars_, e.text);
      return nn::embed_string(tape, g->lstm, chars_, primitive_text(e));
    case Template::CatEmbedding: {
      auto it = g->cat.find(primitive_text(e));
      return {-1, tape.param(it == g->cat.end() ? g->cat_unk : it->second)};
    }
    default:
      break;
  }

  std::vector<nn::LatentState> children;
  children.reserve(e.child_count());
  if (e.kind == Kind::Object) {
    for (const auto& m : e.members) children.push_back(embed(tape, m.value, stree::append_segment(path, m.name), opts));
  } else {
    for (std::size_t i = 0; i < e.items.size(); ++i) {
      if (config_.ordinal)
        children.push_back(embed(tape, e.items[i], stree::append_segment(path, std::to_string(i + 1)), opts));
      else
        children.push_back(embed(tape, e.items[i], path, opts));
    }
  }

  switch (t) {
    case Template::DeepSets: {
      std::vector<ad::NodeId> hs;
      hs.reserve(children.size());
      for (const auto& c : children) hs.push_back(c.h);
      return nn::embed_container_set(tape, deep_set(kind), g->lin, hs);
    }
    case Template::ArrayLstm:
      return nn::embed_array_lstm(tape, g->lstm, children);
    case Template::SumTreeLstm:
      return nn::embed_object_sumlstm(tape, sumlstm_, g->lin, children);
    case Template::XmlTag: {
      std::vector<ad::NodeId> hs;
      hs.reserve(children.size());
      for (const auto& c : children) hs.push_back(c.h);
      std::vector<xml::AttributeInput> attrs;
      attrs.reserve(e.description.size());
      for (const auto& [id, value] : e.description) attrs.push_back({attribute(id), value});
      return {-1, xml::embed_tag(tape, g->lstm, hs, attrs)};
    }
    default:
      throw Error(ErrorCode::Internal, "unhandled template");
  }
}

ad::NodeId Model::logits(ad::Tape& tape, const Element& root, const EmbedOptions* opts) const {
  if (!built_) throw Error(ErrorCode::Internal, "model used before build()");
  nn::LatentState s = embed(tape, root, std::string(), opts);
  return nn::apply_linear(tape, output_, s.h);
}

std::vector<double> Model::predict_logits(const Element& root) const {
  ad::Tape tape(store_);
  ad::NodeId z = logits(tape, root);
  auto v = tape.value(z);
  return {v.begin(), v.end()};
}

int Model::predict(const Element& root) const {
  std::vector<double> z = predict_logits(root);
  int best = 0;
  for (int i = 1; i < static_cast<int>(z.size()); ++i)
    if (z[static_cast<std::size_t>(i)] > z[static_cast<std::size_t>(best)]) best = i;
  return best;
}

}  // namespace strla::engine
