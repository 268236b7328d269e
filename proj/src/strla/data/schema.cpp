#include "strla/data/schema.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <random>
#include <set>

#include "strla/error.hpp"
#include "strla/stree/json.hpp"

namespace strla::data {

namespace {

struct Reference {
  std::string column;
  CellType type = CellType::Auto;
};

std::optional<Reference> parse_reference(const std::string& s) {
  if (s.size() < 4 || s.compare(0, 2, "${") != 0 || s.back() != '}') return std::nullopt;
  std::string body = s.substr(2, s.size() - 3);
  if (body.empty()) return std::nullopt;
  Reference ref{body, CellType::Auto};
  std::size_t colon = body.rfind(':');
  if (colon != std::string::npos) {
    std::string t = body.substr(colon + 1);
    std::optional<CellType> type;
    if (t == "auto") type = CellType::Auto;
    else if (t == "text" || t == "string") type = CellType::Text;
    else if (t == "number") type = CellType::Number;
    else if (t == "bool" || t == "boolean") type = CellType::Boolean;
    if (type) {
      ref.column = body.substr(0, colon);
      ref.type = *type;
    }
  }
  return ref;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (*first == '+') ++first;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "true" || s == "t" || s == "yes" || s == "y" || s == "1") return true;
  if (s == "false" || s == "f" || s == "no" || s == "n" || s == "0") return false;
  return std::nullopt;
}

void collect_references(const stree::Element& e, std::vector<std::string>& out, std::set<std::string>& seen) {
  switch (e.kind) {
    case stree::Kind::Text:
      if (auto ref = parse_reference(e.text); ref && seen.insert(ref->column).second) out.push_back(ref->column);
      break;
    case stree::Kind::Array:
      for (const auto& c : e.items) collect_references(c, out, seen);
      break;
    case stree::Kind::Object:
      for (const auto& m : e.members) collect_references(m.value, out, seen);
      break;
    default:
      break;
  }
}

class Instantiator {
 public:
  Instantiator(const Table& table, const Schema& schema) : table_(table), schema_(schema) {
    for (const auto& col : schema.referenced_columns()) index_[col] = table.column(col);
  }

  stree::Element operator()(const stree::Element& e, std::size_t row) const {
    switch (e.kind) {
      case stree::Kind::Text:
        if (auto ref = parse_reference(e.text)) return cell(*ref, row);
        return e;
      case stree::Kind::Array: {
        stree::Element out = stree::Element::make_array();
        out.items.reserve(e.items.size());
        for (const auto& c : e.items) out.items.push_back((*this)(c, row));
        return out;
      }
      case stree::Kind::Object: {
        stree::Element out = stree::Element::make_object();
        out.members.reserve(e.members.size());
        for (const auto& m : e.members) out.members.push_back({m.name, (*this)(m.value, row)});
        return out;
      }
      default:
        return e;
    }
  }

 private:
  stree::Element cell(const Reference& ref, std::size_t row) const {
    const std::string& raw = table_.rows[row][index_.at(ref.column)];
    if (auto map = schema_.value_maps.find(ref.column); map != schema_.value_maps.end()) {
      if (auto hit = map->second.find(raw); hit != map->second.end()) return hit->second;
    }
    if (std::find(schema_.missing.begin(), schema_.missing.end(), raw) != schema_.missing.end())
      return stree::Element::make_boolean(stree::Tribool::Null);
    auto fail = [&](const char* what) {
      return Error(ErrorCode::TypeCoercion, "row " + std::to_string(row + 1) + ", column '" + ref.column +
                                                "': cannot read '" + raw + "' as " + what);
    };
    switch (ref.type) {
      case CellType::Text:
        return stree::Element::make_text(raw);
      case CellType::Number:
        if (auto v = parse_number(raw)) return stree::Element::make_number(*v);
        throw fail("a number");
      case CellType::Boolean:
        if (auto b = parse_bool(raw)) return stree::Element::make_boolean(*b ? stree::Tribool::True : stree::Tribool::False);
        throw fail("a boolean");
      case CellType::Auto:
        if (auto v = parse_number(raw)) return stree::Element::make_number(*v);
        return stree::Element::make_text(raw);
    }
    return stree::Element::make_text(raw);
  }

  const Table& table_;
  const Schema& schema_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace

Schema Schema::from_json(std::string_view text) {
  stree::Element root = stree::parse_json(text);
  if (root.kind != stree::Kind::Object) throw Error(ErrorCode::Config, "schema must be a JSON object");
  Schema s;
  bool have_template = false;
  for (const auto& m : root.members) {
    if (m.name == "label") {
      if (m.value.kind != stree::Kind::Text) throw Error(ErrorCode::Config, "schema 'label' must be a string");
      s.label_column = m.value.text;
    } else if (m.name == "template") {
      s.document = m.value;
      have_template = true;
    } else if (m.name == "value_maps") {
      if (m.value.kind != stree::Kind::Object) throw Error(ErrorCode::Config, "schema 'value_maps' must be an object");
      for (const auto& col : m.value.members) {
        if (col.value.kind != stree::Kind::Object)
          throw Error(ErrorCode::Config, "value map for '" + col.name + "' must be an object");
        auto& dst = s.value_maps[col.name];
        for (const auto& entry : col.value.members) dst[entry.name] = entry.value;
      }
    } else if (m.name == "missing") {
      if (m.value.kind != stree::Kind::Array) throw Error(ErrorCode::Config, "schema 'missing' must be an array");
      s.missing.clear();
      for (const auto& v : m.value.items) {
        if (v.kind != stree::Kind::Text) throw Error(ErrorCode::Config, "missing markers must be strings");
        s.missing.push_back(v.text);
      }
    } else {
      throw Error(ErrorCode::Config, "unknown schema field '" + m.name + "'");
    }
  }
  if (s.label_column.empty()) throw Error(ErrorCode::Config, "schema lacks a 'label' column");
  if (!have_template) throw Error(ErrorCode::Config, "schema lacks a 'template' document");
  return s;
}

Schema Schema::load(const std::string& path) { return from_json(read_file(path)); }

std::vector<std::string> Schema::referenced_columns() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  collect_references(document, out, seen);
  return out;
}

stree::Element convert_row(const Table& table, std::size_t row, const Schema& schema) {
  return Instantiator(table, schema)(schema.document, row);
}

Dataset convert_table(const Table& table, const Schema& schema) {
  Instantiator inst(table, schema);
  const std::size_t label_col = table.column(schema.label_column);
  Dataset out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) out.push_back({inst(schema.document, r), table.rows[r][label_col]});
  return out;
}

Dataset rebalance(const Dataset& dataset, std::uint64_t seed) {
  std::map<std::string, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset[i].label].push_back(i);
  const std::vector<std::size_t>* dominant = nullptr;
  for (const auto& [label, idx] : by_class)
    if (!dominant || idx.size() > dominant->size()) dominant = &idx;
  if (!dominant || dominant->size() * 5 <= dataset.size() * 4) return dataset;

  const std::size_t rest = dataset.size() - dominant->size();
  const std::size_t keep = std::min(dominant->size(), 2 * rest);
  std::vector<std::size_t> pool = *dominant;
  std::mt19937_64 rng(seed);
  for (std::size_t i = pool.size(); i > 1; --i) std::swap(pool[i - 1], pool[static_cast<std::size_t>(rng() % i)]);
  pool.resize(keep);

  std::vector<char> drop(dataset.size(), 0);
  for (std::size_t i : *dominant) drop[i] = 1;
  for (std::size_t i : pool) drop[i] = 0;
  Dataset out;
  out.reserve(rest + keep);
  for (std::size_t i = 0; i < dataset.size(); ++i)
    if (!drop[i]) out.push_back(dataset[i]);
  return out;
}

}  // namespace strla::data
