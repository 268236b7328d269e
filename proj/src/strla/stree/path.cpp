#include "strla/stree/path.hpp"

#include <set>
#include <stdexcept>

namespace strla::stree {

std::string escape_segment(std::string_view segment) {
  std::string out;
  out.reserve(segment.size());
  for (char ch : segment) {
    if (ch == '/' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  return out;
}

std::string append_segment(std::string_view parent_canonical, std::string_view segment) {
  if (parent_canonical.empty()) return escape_segment(segment);
  std::string out;
  out.reserve(parent_canonical.size() + segment.size() + 1);
  out.append(parent_canonical);
  out.push_back('/');
  out.append(escape_segment(segment));
  return out;
}

std::string ElementPath::canonical() const {
  std::string out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (i) out.push_back('/');
    out += escape_segment(segments[i]);
  }
  return out;
}

ElementPath ElementPath::child(std::string segment) const {
  ElementPath p = *this;
  p.segments.push_back(std::move(segment));
  return p;
}

ElementPath ElementPath::parse(std::string_view canonical) {
  ElementPath p;
  if (canonical.empty()) return p;
  std::string seg;
  for (std::size_t i = 0; i < canonical.size(); ++i) {
    char ch = canonical[i];
    if (ch == '\\') {
      if (i + 1 >= canonical.size()) throw std::invalid_argument("dangling escape in path");
      seg.push_back(canonical[++i]);
    } else if (ch == '/') {
      p.segments.push_back(std::move(seg));
      seg.clear();
    } else {
      seg.push_back(ch);
    }
  }
  p.segments.push_back(std::move(seg));
  return p;
}

std::vector<ChildRef> child_paths(const Element& element, const ElementPath& path, bool ordinal_mode) {
  std::vector<ChildRef> out;
  if (element.kind == Kind::Object) {
    out.reserve(element.members.size());
    for (const Member& m : element.members) out.push_back({&m.value, path.child(m.name)});
  } else if (element.kind == Kind::Array) {
    out.reserve(element.items.size());
    for (std::size_t i = 0; i < element.items.size(); ++i) {
      out.push_back({&element.items[i], ordinal_mode ? path.child(std::to_string(i + 1)) : path});
    }
  }
  return out;
}

namespace {

void walk(const Element& e, const std::string& path, bool ordinal_mode, std::set<TypedPath>& seen,
          std::vector<TypedPath>& out) {
  TypedPath tp{e.kind, path};
  if (seen.insert(tp).second) out.push_back(std::move(tp));
  if (e.kind == Kind::Object) {
    for (const Member& m : e.members)
      walk(m.value, append_segment(path, m.name), ordinal_mode, seen, out);
  } else if (e.kind == Kind::Array) {
    for (std::size_t i = 0; i < e.items.size(); ++i) {
      if (ordinal_mode) {
        walk(e.items[i], append_segment(path, std::to_string(i + 1)), ordinal_mode, seen, out);
      } else {
        walk(e.items[i], path, ordinal_mode, seen, out);
      }
    }
  }
}

}  // namespace

std::vector<TypedPath> collect_paths(const Element& root, bool ordinal_mode) {
  std::set<TypedPath> seen;
  std::vector<TypedPath> out;
  walk(root, std::string(), ordinal_mode, seen, out);
  return out;
}

PathDictionary::PathDictionary() {
  for (int k = 0; k < 5; ++k) unknown_[k] = next_id_++;
}

PathDictionary::GroupId PathDictionary::intern(Kind kind, const std::string& path) {
  TypedPath key{kind, path};
  auto it = index_.find(key);
  if (it != index_.end()) return it->second;
  if (frozen_) return unknown_group(kind);
  GroupId id = next_id_++;
  index_.emplace(key, id);
  entries_.emplace_back(std::move(key), id);
  return id;
}

PathDictionary::GroupId PathDictionary::lookup(Kind kind, const std::string& path) const {
  auto it = index_.find(TypedPath{kind, path});
  return it == index_.end() ? unknown_group(kind) : it->second;
}

bool PathDictionary::contains(Kind kind, const std::string& path) const {
  return index_.count(TypedPath{kind, path}) != 0;
}

PathDictionary::GroupId PathDictionary::unknown_group(Kind kind) const {
  return unknown_[static_cast<int>(kind)];
}

}  // namespace strla::stree
