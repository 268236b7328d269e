#include "strla/data/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "strla/error.hpp"
#include "strla/stree/json.hpp"
#include "strla/xml/xml.hpp"

namespace strla::data {

using stree::Element;
using stree::Kind;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorCode::Io, "write to '" + path + "' failed");
}

Dataset parse_jsonl(std::string_view text, InputFormat format) {
  Dataset ds;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    auto where = [&](const std::string& msg) { return "line " + std::to_string(line_no) + ": " + msg; };
    Element obj;
    try {
      obj = stree::parse_json(line);
    } catch (const SyntaxError& e) {
      throw Error(ErrorCode::Syntax, where(e.what()));
    }
    if (obj.kind != Kind::Object) throw Error(ErrorCode::Syntax, where("expected a JSON object"));
    const Element* input = nullptr;
    const Element* label = nullptr;
    for (const auto& m : obj.members) {
      if (m.name == "input") input = &m.value;
      else if (m.name == "label") label = &m.value;
    }
    if (!input || !label) throw Error(ErrorCode::Syntax, where("record needs \"input\" and \"label\""));
    Example ex;
    if (label->kind == Kind::Text) ex.label = label->text;
    else if (label->kind == Kind::Number) ex.label = stree::format_number(label->number);
    else throw Error(ErrorCode::Syntax, where("label must be a string or number"));
    if (format == InputFormat::Xml) {
      if (input->kind != Kind::Text) throw Error(ErrorCode::Syntax, where("XML input must be a string"));
      try {
        ex.input = xml::parse_xml_reduced(input->text);
      } catch (const Error& e) {
        throw Error(e.code(), where(e.what()));
      }
    } else {
      ex.input = *input;
    }
    ds.push_back(std::move(ex));
    if (end == text.size()) break;
  }
  return ds;
}

Dataset read_jsonl(const std::string& path, InputFormat format) { return parse_jsonl(read_file(path), format); }

std::string to_jsonl_line(const Example& ex) {
  Element rec = Element::make_object();
  rec.members.push_back({"input", ex.input});
  rec.members.push_back({"label", Element::make_text(ex.label)});
  return stree::to_json(rec);
}

void write_jsonl(const std::string& path, const Dataset& ds) {
  std::string out;
  for (const auto& ex : ds) {
    out += to_jsonl_line(ex);
    out.push_back('\n');
  }
  write_file(path, out);
}

std::vector<std::string> label_vocabulary(const Dataset& ds) {
  std::set<std::string> s;
  for (const auto& ex : ds) s.insert(ex.label);
  return {s.begin(), s.end()};
}

}  // namespace strla::data
