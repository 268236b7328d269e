#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "strla/stree/element.hpp"

namespace strla::engine {

enum class Template : std::uint8_t {
  EmbedNumber,
  EmbedBoolean,
  EmbedString,
  CatEmbedding,
  DeepSets,
  ArrayLstm,
  SumTreeLstm,
  XmlTag,
};

// Accepted names: sumTreeLSTM, LSTM, deepSets, catEmbedding
// (categoricalEmbedding), embedNumber, embedBoolean, embedString, xmlTag.
// Throws UnknownTemplate.
Template parse_template(std::string_view name);
const char* template_name(Template t);
bool template_accepts(Template t, stree::Kind kind);

// Ordered (pattern -> template) list; the first matching entry wins.
//
// Pattern grammar: an optional "<type>~" prefix (object, array, string,
// number, boolean) restricts the element kind; the rest is a "/"-separated
// path pattern in which ".." matches any run of segments (including none)
// and "*" matches exactly one segment. ".*" on its own matches every element.
// An empty path pattern matches only the root.
class MappingDictionary {
 public:
  void add(const std::string& pattern, std::string_view template_name);
  void add(const std::string& pattern, Template t);

  std::optional<Template> try_resolve(stree::Kind kind, std::string_view canonical_path) const;
  // Throws UnknownTemplate when nothing matches.
  Template resolve(stree::Kind kind, std::string_view canonical_path) const;

  bool empty() const { return entries_.empty(); }
  std::vector<std::pair<std::string, std::string>> items() const;

  // JSON object {pattern: template, ...}; member order is precedence order.
  static MappingDictionary from_json(std::string_view text);
  std::string to_json() const;

  // Built-in dictionaries of the exemplar models.
  static MappingDictionary set_based();
  static MappingDictionary lstm_based();
  static MappingDictionary xml_based();

 private:
  struct Entry {
    std::string pattern;
    Template tmpl;
    bool match_all = false;
    std::optional<stree::Kind> kind;
    std::vector<std::string> segments;
  };
  std::vector<Entry> entries_;
};

}  // namespace strla::engine
