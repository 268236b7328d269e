#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "strla/ad/parameters.hpp"
#include "strla/ad/tape.hpp"
#include "strla/engine/mapping.hpp"
#include "strla/nn/embedders.hpp"
#include "strla/stree/element.hpp"
#include "strla/stree/path.hpp"
#include "strla/xml/embed.hpp"

namespace strla::engine {

enum class ModelKind : std::uint8_t { Set, Lstm, Tailored, Xml };

const char* model_kind_name(ModelKind k);
ModelKind parse_model_kind(std::string_view s);  // throws Config

enum class Ablation : std::uint8_t { None, Pathless, Homogeneous, Both };

const char* ablation_name(Ablation a);
Ablation parse_ablation(std::string_view s);  // throws Config

struct ModelConfig {
  ModelKind kind = ModelKind::Lstm;
  int hidden = 32;          // m
  int set_layers = 1;       // hidden layers of the deep-set element MLP
  bool pathless = false;    // one parameter group per element type
  bool homogeneous = false; // arrays as objects, numbers/booleans as strings
  bool ordinal = false;     // array items extend the path with "1", "2", ...
  double unseen_path_rate = 0.0;  // training-time remap fraction to unknown groups
  std::uint64_t seed = 1;
  MappingDictionary mapping;  // used when kind == Tailored

  const MappingDictionary& effective_mapping() const;
  void validate() const;  // throws Config
};

ModelConfig apply_ablation(ModelConfig config, Ablation mode);

struct GroupParams {
  Template tmpl;
  nn::LinearParams lin;  // scalar embedders, deep-set and object path maps
  nn::LstmParams lstm;   // string, array and tag LSTMs
  std::map<std::string, ad::ParamId> cat;
  ad::ParamId cat_unk = -1;
};

struct EmbedOptions {
  std::mt19937_64* rng = nullptr;  // enables unseen-path augmentation
};

class ModelSerializer;

// The recursive network. `build` runs a single pass over the training
// documents that fixes the path dictionary, normalisation statistics, the
// character/category vocabularies and every parameter, then freezes the
// structure; afterwards only parameter values change.
class Model {
 public:
  using GroupId = stree::PathDictionary::GroupId;

  explicit Model(ModelConfig config);

  void build(std::span<const stree::Element* const> training_docs, std::vector<std::string> label_vocab);
  bool built() const { return built_; }

  // Recursive function R. `path` is the canonical path of `e`.
  nn::LatentState embed(ad::Tape& tape, const stree::Element& e, const std::string& path,
                        const EmbedOptions* opts = nullptr) const;
  // Output linear map applied to the root's h.
  ad::NodeId logits(ad::Tape& tape, const stree::Element& root, const EmbedOptions* opts = nullptr) const;

  std::vector<double> predict_logits(const stree::Element& root) const;
  // Argmax of the logits, lowest index on ties.
  int predict(const stree::Element& root) const;

  // Kind after the homogeneous-type transform.
  stree::Kind effective_kind(stree::Kind k) const;
  // Path string used as the parameter-group key (empty when pathless).
  const std::string& group_path(const std::string& path) const;
  Template resolve_template(stree::Kind kind, const std::string& path) const;
  GroupId resolve_parameters(stree::Kind kind, const std::string& path) const;
  const GroupParams* group(GroupId gid, Template t) const;

  const ModelConfig& config() const { return config_; }
  const std::vector<std::string>& labels() const { return labels_; }
  int label_index(const std::string& label) const;  // -1 if unknown
  const stree::PathDictionary& dictionary() const { return dict_; }
  const nn::NormStats& norm_stats() const { return stats_; }
  const nn::CharTable& chars() const { return chars_; }
  const nn::SumLstmParams& sumlstm() const { return sumlstm_; }
  const nn::DeepSetShared& deep_set(stree::Kind container) const;
  const xml::AttributeParams* attribute(const std::string& id) const;
  const nn::LinearParams& output() const { return output_; }

  ad::ParameterStore& store() { return store_; }
  const ad::ParameterStore& store() const { return store_; }

  // Counts documents passed to build (stats-hygiene instrumentation).
  std::size_t documents_seen_in_build() const { return build_docs_; }

 private:
  friend class ModelSerializer;

  void register_element(const stree::Element& e, const std::string& path);
  GroupParams& ensure_group(GroupId gid, Template t, stree::Kind kind);
  void ensure_shared(Template t, stree::Kind kind);
  xml::AttributeParams& ensure_attribute(const std::string& id);
  void register_chars(nn::CharTable& table, const std::string& prefix, std::string_view s);
  std::string primitive_text(const stree::Element& e) const;

  ModelConfig config_;
  ad::ParameterStore store_;
  nn::Initializer init_;
  stree::PathDictionary dict_;
  nn::NormStats stats_;
  std::vector<std::string> labels_;
  std::map<std::pair<GroupId, Template>, GroupParams> groups_;
  std::map<std::pair<stree::Kind, std::string>, Template> template_cache_;
  nn::CharTable chars_;
  nn::SumLstmParams sumlstm_;
  std::array<nn::DeepSetShared, 2> deep_set_;  // [array, object]
  std::array<bool, 2> deep_set_ready_{false, false};
  std::map<std::string, xml::AttributeParams> attributes_;
  std::optional<xml::AttributeParams> attribute_unk_;
  nn::LinearParams output_;
  std::size_t build_docs_ = 0;
  bool built_ = false;
};

}  // namespace strla::engine
