#include "strla/xml/xml.hpp"

#include "strla/error.hpp"

namespace strla::xml {
namespace {

using stree::Element;
using stree::Member;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

bool is_name_start(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':' || u >= 0x80;
}

bool is_name_char(char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  Element document() {
    skip_misc();
    if (peek() != '<') fail("root tag");
    std::string name;
    Element content = tag(name, 0);
    skip_misc();
    if (pos_ != s_.size()) fail("end of document");
    std::vector<Member> members;
    members.push_back(Member{std::move(name), std::move(content)});
    return Element::make_object(std::move(members));
  }

 private:
  static constexpr int kMaxDepth = 512;
  std::string_view s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const char* expected, const std::string& detail = {}) const {
    throw SyntaxError(pos_, expected, detail);
  }

  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  bool starts_with(std::string_view lit) const { return s_.substr(pos_, lit.size()) == lit; }

  void skip_ws() {
    while (!at_end() && is_space(s_[pos_])) ++pos_;
  }

  void skip_until(std::string_view terminator, const char* what) {
    std::size_t end = s_.find(terminator, pos_);
    if (end == std::string_view::npos) fail(what);
    pos_ = end + terminator.size();
  }

  // Skips a comment, processing instruction, CDATA or DOCTYPE at pos_.
  bool skip_markup() {
    if (starts_with("<!--")) {
      skip_until("-->", "'-->'");
    } else if (starts_with("<?")) {
      skip_until("?>", "'?>'");
    } else if (starts_with("<![CDATA[")) {
      skip_until("]]>", "']]>'");
    } else if (starts_with("<!")) {
      skip_doctype();
    } else {
      return false;
    }
    return true;
  }

  void skip_doctype() {
    int bracket = 0;
    pos_ += 2;
    while (!at_end()) {
      char c = s_[pos_++];
      if (c == '[') ++bracket;
      else if (c == ']') --bracket;
      else if (c == '>' && bracket <= 0) return;
    }
    fail("'>'");
  }

  void skip_misc() {
    for (;;) {
      skip_ws();
      if (!skip_markup()) return;
    }
  }

  std::string name() {
    if (!is_name_start(peek())) fail("tag or attribute name");
    std::size_t start = pos_;
    while (!at_end() && is_name_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  void reject_reference(std::string_view chunk, std::size_t chunk_pos) {
    std::size_t amp = chunk.find('&');
    if (amp != std::string_view::npos) {
      throw Error(ErrorCode::Unsupported, "entity reference at offset " + std::to_string(chunk_pos + amp) +
                                              " is not supported");
    }
  }

  std::string attribute_value() {
    char quote = peek();
    if (quote != '"' && quote != '\'') fail("quoted attribute value");
    ++pos_;
    std::size_t start = pos_;
    std::size_t end = s_.find(quote, pos_);
    if (end == std::string_view::npos) fail("closing quote");
    std::string_view raw = s_.substr(start, end - start);
    if (raw.find('<') != std::string_view::npos) {
      pos_ = start + raw.find('<');
      fail("attribute value without '<'");
    }
    reject_reference(raw, start);
    pos_ = end + 1;
    return std::string(raw);
  }

  // Parses `<name ...>...</name>` or `<name .../>` at pos_; returns the
  // content element and stores the tag name in `out_name`.
  Element tag(std::string& out_name, int depth) {
    if (depth > kMaxDepth) fail("shallower nesting", "depth limit exceeded");
    ++pos_;  // '<'
    out_name = name();
    stree::Description attrs;
    for (;;) {
      std::size_t before = pos_;
      skip_ws();
      if (peek() == '/' || peek() == '>') break;
      if (pos_ == before) fail("whitespace before attribute");
      std::string key = name();
      skip_ws();
      if (peek() != '=') fail("'='");
      ++pos_;
      skip_ws();
      attrs.emplace_back(std::move(key), attribute_value());
    }
    if (peek() == '/') {
      ++pos_;
      if (peek() != '>') fail("'>'");
      ++pos_;
      Element e = Element::make_object();
      e.description = std::move(attrs);
      return e;
    }
    ++pos_;  // '>'

    std::vector<Member> members;
    std::vector<std::string> texts;
    bool has_child_tag = false;
    for (;;) {
      if (at_end()) fail("closing tag", "</" + out_name + ">");
      if (peek() == '<') {
        if (skip_markup()) continue;
        if (starts_with("</")) {
          pos_ += 2;
          std::size_t name_pos = pos_;
          std::string closing = name();
          if (closing != out_name) {
            pos_ = name_pos;
            fail("matching closing tag", "expected </" + out_name + "> but found </" + closing + ">");
          }
          skip_ws();
          if (peek() != '>') fail("'>'");
          ++pos_;
          break;
        }
        std::string child_name;
        Element child = tag(child_name, depth + 1);
        members.push_back(Member{std::move(child_name), std::move(child)});
        has_child_tag = true;
        continue;
      }
      std::size_t start = pos_;
      std::size_t end = s_.find('<', pos_);
      if (end == std::string_view::npos) end = s_.size();
      std::string_view raw = s_.substr(start, end - start);
      reject_reference(raw, start);
      pos_ = end;
      std::string_view text = trim(raw);
      if (text.empty()) continue;
      texts.emplace_back(text);
      members.push_back(Member{std::string(kTextMember), Element::make_text(std::string(text))});
    }

    if (!has_child_tag && attrs.empty() && texts.size() == 1) return Element::make_text(std::move(texts[0]));
    Element e = Element::make_object(std::move(members));
    e.description = std::move(attrs);
    return e;
  }
};

}  // namespace

stree::Element parse_xml_reduced(std::string_view text) { return Parser(text).document(); }

}  // namespace strla::xml
