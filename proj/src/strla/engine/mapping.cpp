#include "strla/engine/mapping.hpp"

#include "strla/error.hpp"
#include "strla/stree/json.hpp"
#include "strla/stree/path.hpp"

namespace strla::engine {

using stree::Kind;

Template parse_template(std::string_view name) {
  if (name == "sumTreeLSTM") return Template::SumTreeLstm;
  if (name == "LSTM") return Template::ArrayLstm;
  if (name == "deepSets") return Template::DeepSets;
  if (name == "catEmbedding" || name == "categoricalEmbedding") return Template::CatEmbedding;
  if (name == "embedNumber") return Template::EmbedNumber;
  if (name == "embedBoolean") return Template::EmbedBoolean;
  if (name == "embedString") return Template::EmbedString;
  if (name == "xmlTag") return Template::XmlTag;
  throw Error(ErrorCode::UnknownTemplate, "unknown template name '" + std::string(name) + "'");
}

const char* template_name(Template t) {
  switch (t) {
    case Template::EmbedNumber: return "embedNumber";
    case Template::EmbedBoolean: return "embedBoolean";
    case Template::EmbedString: return "embedString";
    case Template::CatEmbedding: return "catEmbedding";
    case Template::DeepSets: return "deepSets";
    case Template::ArrayLstm: return "LSTM";
    case Template::SumTreeLstm: return "sumTreeLSTM";
    case Template::XmlTag: return "xmlTag";
  }
  return "?";
}

bool template_accepts(Template t, Kind kind) {
  switch (t) {
    case Template::EmbedNumber: return kind == Kind::Number;
    case Template::EmbedBoolean: return kind == Kind::Boolean;
    case Template::EmbedString: return kind == Kind::Text;
    case Template::CatEmbedding: return !stree::is_container(kind);
    case Template::DeepSets:
    case Template::ArrayLstm:
    case Template::SumTreeLstm:
    case Template::XmlTag: return stree::is_container(kind);
  }
  return false;
}

namespace {

std::optional<Kind> kind_from_name(std::string_view s) {
  if (s == "object") return Kind::Object;
  if (s == "array") return Kind::Array;
  if (s == "string") return Kind::Text;
  if (s == "number") return Kind::Number;
  if (s == "boolean") return Kind::Boolean;
  return std::nullopt;
}

bool match_segments(const std::vector<std::string>& pat, std::size_t pi, const std::vector<std::string>& path,
                    std::size_t si) {
  if (pi == pat.size()) return si == path.size();
  if (pat[pi] == "..") {
    for (std::size_t k = si; k <= path.size(); ++k)
      if (match_segments(pat, pi + 1, path, k)) return true;
    return false;
  }
  if (si == path.size()) return false;
  if (pat[pi] != "*" && pat[pi] != path[si]) return false;
  return match_segments(pat, pi + 1, path, si + 1);
}

}  // namespace

void MappingDictionary::add(const std::string& pattern, std::string_view name) { add(pattern, parse_template(name)); }

void MappingDictionary::add(const std::string& pattern, Template t) {
  Entry e;
  e.pattern = pattern;
  e.tmpl = t;
  if (pattern == ".*") {
    e.match_all = true;
  } else {
    std::string_view rest = pattern;
    auto tilde = rest.find('~');
    if (tilde != std::string_view::npos) {
      auto k = kind_from_name(rest.substr(0, tilde));
      if (!k)
        throw Error(ErrorCode::Config, "mapping pattern '" + pattern + "': unknown type '" +
                                           std::string(rest.substr(0, tilde)) + "'");
      e.kind = k;
      rest = rest.substr(tilde + 1);
    }
    e.segments = stree::ElementPath::parse(rest).segments;
  }
  entries_.push_back(std::move(e));
}

std::optional<Template> MappingDictionary::try_resolve(Kind kind, std::string_view canonical_path) const {
  std::vector<std::string> segs = stree::ElementPath::parse(canonical_path).segments;
  for (const Entry& e : entries_) {
    if (e.match_all) return e.tmpl;
    if (e.kind && *e.kind != kind) continue;
    if (match_segments(e.segments, 0, segs, 0)) return e.tmpl;
  }
  return std::nullopt;
}

Template MappingDictionary::resolve(Kind kind, std::string_view canonical_path) const {
  auto t = try_resolve(kind, canonical_path);
  if (!t)
    throw Error(ErrorCode::UnknownTemplate, std::string("no mapping entry matches ") + stree::kind_name(kind) +
                                                " element at path '" + std::string(canonical_path) + "'");
  return *t;
}

std::vector<std::pair<std::string, std::string>> MappingDictionary::items() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Entry& e : entries_) out.emplace_back(e.pattern, template_name(e.tmpl));
  return out;
}

MappingDictionary MappingDictionary::from_json(std::string_view text) {
  stree::Element doc = stree::parse_json(text);
  if (doc.kind != Kind::Object) throw Error(ErrorCode::Config, "mapping dictionary must be a JSON object");
  MappingDictionary d;
  for (const auto& m : doc.members) {
    if (m.value.kind != Kind::Text)
      throw Error(ErrorCode::Config, "mapping entry '" + m.name + "' must name a template");
    d.add(m.name, m.value.text);
  }
  return d;
}

std::string MappingDictionary::to_json() const {
  stree::Element obj = stree::Element::make_object();
  for (const Entry& e : entries_)
    obj.members.push_back({e.pattern, stree::Element::make_text(template_name(e.tmpl))});
  return stree::to_json(obj);
}

MappingDictionary MappingDictionary::set_based() {
  MappingDictionary d;
  d.add("object~..", Template::DeepSets);
  d.add("array~..", Template::DeepSets);
  d.add("string~..", Template::EmbedString);
  d.add("number~..", Template::EmbedNumber);
  d.add("boolean~..", Template::EmbedBoolean);
  return d;
}

MappingDictionary MappingDictionary::lstm_based() {
  MappingDictionary d;
  d.add("object~..", Template::SumTreeLstm);
  d.add("array~..", Template::ArrayLstm);
  d.add("string~..", Template::EmbedString);
  d.add("number~..", Template::EmbedNumber);
  d.add("boolean~..", Template::EmbedBoolean);
  return d;
}

MappingDictionary MappingDictionary::xml_based() {
  MappingDictionary d;
  d.add("object~..", Template::XmlTag);
  d.add("array~..", Template::XmlTag);
  d.add("string~..", Template::EmbedString);
  d.add("number~..", Template::EmbedNumber);
  d.add("boolean~..", Template::EmbedBoolean);
  return d;
}

}  // namespace strla::engine
