#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "strla/stree/element.hpp"

namespace strla::stree {

// Sequence of wrapper names from the root to an element. The canonical form
// joins segments with "/" and escapes "\" and "/" inside a segment as "\\" and
// "\/", so distinct segment lists always render to distinct strings.
struct ElementPath {
  std::vector<std::string> segments;

  std::string canonical() const;
  ElementPath child(std::string segment) const;
  static ElementPath parse(std::string_view canonical);

  bool operator==(const ElementPath&) const = default;
};

std::string escape_segment(std::string_view segment);

// Canonical string of `parent + [segment]` without materialising segments;
// an empty parent is the root.
std::string append_segment(std::string_view parent_canonical, std::string_view segment);

struct ChildRef {
  const Element* child;
  ElementPath path;
};

// Children of a container with their paths. Object members extend the path
// by their name; array items keep it, or extend it by "1", "2", ... in
// ordinal mode. Primitives have no children.
std::vector<ChildRef> child_paths(const Element& element, const ElementPath& path, bool ordinal_mode);

struct TypedPath {
  Kind kind;
  std::string path;  // canonical

  auto operator<=>(const TypedPath&) const = default;
};

// Every (kind, canonical path) in the document, deduplicated, in depth-first
// pre-order of first occurrence.
std::vector<TypedPath> collect_paths(const Element& root, bool ordinal_mode);

// Maps (kind, canonical path) to a parameter-group id. Ids are dense and
// assigned in registration order. Each kind also owns an "unknown" group used
// for pairs that were never registered before the dictionary was frozen.
class PathDictionary {
 public:
  using GroupId = std::int32_t;

  PathDictionary();

  // Registers the pair if new (only while not frozen) and returns its id.
  GroupId intern(Kind kind, const std::string& path);
  // Registered id, or the kind's unknown group.
  GroupId lookup(Kind kind, const std::string& path) const;
  bool contains(Kind kind, const std::string& path) const;
  GroupId unknown_group(Kind kind) const;

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  std::size_t size() const { return entries_.size(); }
  // Registered pairs in id order (unknown groups excluded).
  const std::vector<std::pair<TypedPath, GroupId>>& entries() const { return entries_; }
  std::size_t group_count() const { return next_id_; }

 private:
  std::map<TypedPath, GroupId> index_;
  std::vector<std::pair<TypedPath, GroupId>> entries_;
  GroupId unknown_[5];
  GroupId next_id_ = 0;
  bool frozen_ = false;
};

}  // namespace strla::stree
