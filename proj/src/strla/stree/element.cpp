#include "strla/stree/element.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace strla::stree {

const char* kind_name(Kind kind) noexcept {
  switch (kind) {
    case Kind::Number: return "number";
    case Kind::Text: return "string";
    case Kind::Boolean: return "boolean";
    case Kind::Array: return "array";
    case Kind::Object: return "object";
  }
  return "?";
}

bool is_container(Kind kind) noexcept { return kind == Kind::Array || kind == Kind::Object; }

Element Element::make_number(double v) {
  Element e;
  e.kind = Kind::Number;
  e.number = v;
  return e;
}

Element Element::make_text(std::string v) {
  Element e;
  e.kind = Kind::Text;
  e.text = std::move(v);
  return e;
}

Element Element::make_boolean(Tribool v) {
  Element e;
  e.kind = Kind::Boolean;
  e.boolean = v;
  return e;
}

Element Element::make_array(std::vector<Element> items) {
  Element e;
  e.kind = Kind::Array;
  e.items = std::move(items);
  return e;
}

Element Element::make_object(std::vector<Member> members) {
  Element e;
  e.kind = Kind::Object;
  e.members = std::move(members);
  return e;
}

std::size_t Element::child_count() const noexcept {
  switch (kind) {
    case Kind::Array: return items.size();
    case Kind::Object: return members.size();
    default: return 0;
  }
}

bool structurally_equal(const Element& a, const Element& b, double rel_tol) {
  if (a.kind != b.kind || a.description != b.description) return false;
  switch (a.kind) {
    case Kind::Number: {
      if (a.number == b.number) return true;
      double scale = std::max(std::abs(a.number), std::abs(b.number));
      return std::abs(a.number - b.number) <= rel_tol * scale;
    }
    case Kind::Text: return a.text == b.text;
    case Kind::Boolean: return a.boolean == b.boolean;
    case Kind::Array:
      if (a.items.size() != b.items.size()) return false;
      for (std::size_t i = 0; i < a.items.size(); ++i)
        if (!structurally_equal(a.items[i], b.items[i], rel_tol)) return false;
      return true;
    case Kind::Object:
      if (a.members.size() != b.members.size()) return false;
      for (std::size_t i = 0; i < a.members.size(); ++i) {
        if (a.members[i].name != b.members[i].name) return false;
        if (!structurally_equal(a.members[i].value, b.members[i].value, rel_tol)) return false;
      }
      return true;
  }
  return false;
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, res.ptr);
}

namespace {

void append_escaped(std::string& out, std::string_view s) {
  out.push_back('"');
  for (unsigned char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (ch < 0x20) {
          static const char* hex = "0123456789abcdef";
          out += "\\u00";
          out.push_back(hex[ch >> 4]);
          out.push_back(hex[ch & 0xF]);
        } else {
          out.push_back(static_cast<char>(ch));
        }
    }
  }
  out.push_back('"');
}

void write(std::string& out, const Element& e) {
  switch (e.kind) {
    case Kind::Number: out += format_number(e.number); break;
    case Kind::Text: append_escaped(out, e.text); break;
    case Kind::Boolean:
      out += e.boolean == Tribool::True ? "true" : e.boolean == Tribool::False ? "false" : "null";
      break;
    case Kind::Array:
      out.push_back('[');
      for (std::size_t i = 0; i < e.items.size(); ++i) {
        if (i) out.push_back(',');
        write(out, e.items[i]);
      }
      out.push_back(']');
      break;
    case Kind::Object:
      out.push_back('{');
      for (std::size_t i = 0; i < e.members.size(); ++i) {
        if (i) out.push_back(',');
        append_escaped(out, e.members[i].name);
        out.push_back(':');
        write(out, e.members[i].value);
      }
      out.push_back('}');
      break;
  }
}

}  // namespace

std::string to_json(const Element& e) {
  std::string out;
  write(out, e);
  return out;
}

std::string primitive_to_string(const Element& e) {
  switch (e.kind) {
    case Kind::Number: return format_number(e.number);
    case Kind::Text: return e.text;
    case Kind::Boolean:
      return e.boolean == Tribool::True ? "true" : e.boolean == Tribool::False ? "false" : "null";
    default: throw std::invalid_argument("primitive_to_string: container element");
  }
}

}  // namespace strla::stree
