#pragma once

// Generic semantic-tree data model: every document is a tree of typed
// elements. Primitives carry data; containers carry ordered children, which
// may be wrapped with a name (object members) or unwrapped (array items).

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace strla::stree {

enum class Kind : std::uint8_t { Number, Text, Boolean, Array, Object };

// JSON `null` is the third boolean state.
enum class Tribool : std::uint8_t { False, True, Null };

const char* kind_name(Kind kind) noexcept;
bool is_container(Kind kind) noexcept;

struct Member;

using Description = std::vector<std::pair<std::string, std::string>>;

struct Element {
  Kind kind = Kind::Boolean;
  double number = 0.0;
  std::string text;
  Tribool boolean = Tribool::Null;
  std::vector<Element> items;    // Array
  std::vector<Member> members;   // Object
  Description description;       // XML attributes; empty for JSON

  static Element make_number(double v);
  static Element make_text(std::string v);
  static Element make_boolean(Tribool v);
  static Element make_array(std::vector<Element> items = {});
  static Element make_object(std::vector<Member> members = {});

  bool is_container() const noexcept { return stree::is_container(kind); }
  std::size_t child_count() const noexcept;
};

struct Member {
  std::string name;
  Element value;
};

// Structural equality; numbers compared with a relative tolerance.
bool structurally_equal(const Element& a, const Element& b, double rel_tol = 0.0);

// Compact JSON rendering. Numbers use the shortest round-trip form.
std::string to_json(const Element& e);

// Shortest decimal text that parses back to the same double ("6", "3.47").
std::string format_number(double v);

// Renders a primitive the way a JSON document would spell it; used by the
// homogeneous-type ablation to turn numbers and booleans into strings.
std::string primitive_to_string(const Element& e);

}  // namespace strla::stree
