#include "strla/data/table.hpp"

#include "strla/data/dataset.hpp"
#include "strla/error.hpp"

namespace strla::data {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

char detect_delimiter(std::string_view text) {
  std::string_view first = text.substr(0, text.find('\n'));
  if (first.find(',') == std::string_view::npos && first.find(';') != std::string_view::npos) return ';';
  return ',';
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorCode::MissingColumn, "column '" + std::string(name) + "' not found in table header");
}

Table parse_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const char delim = detect_delimiter(text);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;      // inside quotes
  bool was_quoted = false;  // current field started with a quote

  auto end_field = [&] {
    record.push_back(was_quoted ? field : trim(field));
    field.clear();
    was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    bool blank = record.size() == 1 && record[0].empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && trim(field).empty()) {
      field.clear();
      quoted = was_quoted = true;
    } else if (c == delim) {
      end_field();
    } else if (c == '\n') {
      end_record();
    } else if (was_quoted) {
      if (c != ' ' && c != '\t' && c != '\r')
        throw SyntaxError(i, "delimiter after closing quote", std::string("found '") + c + "'");
    } else {
      field += c;
    }
  }
  if (quoted) throw SyntaxError(text.size(), "closing quote", "end of input inside a quoted field");
  if (!field.empty() || was_quoted || !record.empty()) end_record();

  Table t;
  if (records.empty()) throw Error(ErrorCode::MissingColumn, "table has no header row");
  t.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != t.header.size())
      throw Error(ErrorCode::Syntax, "row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                                         " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(records[r]));
  }
  return t;
}

Table read_csv(const std::string& path) { return parse_csv(read_file(path)); }

}  // namespace strla::data
