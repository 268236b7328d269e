#include "strla/data/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "strla/stree/path.hpp"

namespace strla::data {

using stree::Element;
using stree::Kind;

namespace {

void walk(const Element& e, const std::string& path, std::vector<std::pair<std::string, const Element*>>& out) {
  if (e.kind == Kind::Object) {
    for (const auto& m : e.members) walk(m.value, stree::append_segment(path, m.name), out);
  } else if (e.kind == Kind::Array) {
    for (std::size_t i = 0; i < e.items.size(); ++i)
      walk(e.items[i], stree::append_segment(path, std::to_string(i + 1)), out);
  } else {
    out.emplace_back(path, &e);
  }
}

bool is_null(const Element& e) { return e.kind == Kind::Boolean && e.boolean == stree::Tribool::Null; }

}  // namespace

std::vector<std::pair<std::string, const Element*>> flatten_leaves(const Element& doc) {
  std::vector<std::pair<std::string, const Element*>> out;
  walk(doc, std::string(), out);
  return out;
}

void Featurizer::fit(std::span<const Element* const> docs) {
  struct Acc {
    bool all_numeric = true;
    std::vector<double> numbers;
    std::set<std::string> cats;
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> acc;
  for (const Element* doc : docs) {
    for (const auto& [path, leaf] : flatten_leaves(*doc)) {
      auto [it, inserted] = acc.try_emplace(path);
      if (inserted) order.push_back(path);
      Acc& a = it->second;
      if (is_null(*leaf)) continue;
      if (leaf->kind == Kind::Number) a.numbers.push_back(leaf->number);
      else a.all_numeric = false;
      a.cats.insert(stree::primitive_to_string(*leaf));
    }
  }
  columns_.clear();
  index_.clear();
  width_ = 0;
  for (const auto& path : order) {
    Acc& a = acc[path];
    Column c;
    c.path = path;
    c.offset = width_;
    c.numeric = a.all_numeric && !a.numbers.empty();
    if (c.numeric) {
      double sum = 0.0;
      for (double x : a.numbers) sum += x;
      c.mean = sum / static_cast<double>(a.numbers.size());
      double sq = 0.0;
      for (double x : a.numbers) sq += (x - c.mean) * (x - c.mean);
      c.stddev = std::sqrt(sq / static_cast<double>(a.numbers.size()));
      width_ += 1;
    } else {
      c.vocab.assign(a.cats.begin(), a.cats.end());
      width_ += static_cast<int>(c.vocab.size());
    }
    index_.emplace(path, columns_.size());
    columns_.push_back(std::move(c));
  }
}

std::vector<double> Featurizer::transform(const Element& doc) const {
  std::vector<double> x(static_cast<std::size_t>(width_), 0.0);
  for (const auto& [path, leaf] : flatten_leaves(doc)) {
    auto it = index_.find(path);
    if (it == index_.end() || is_null(*leaf)) continue;
    const Column& c = columns_[it->second];
    if (c.numeric) {
      if (leaf->kind != Kind::Number) continue;
      double centred = leaf->number - c.mean;
      x[static_cast<std::size_t>(c.offset)] = c.stddev > 0.0 ? centred / c.stddev : centred;
    } else {
      std::string v = stree::primitive_to_string(*leaf);
      auto pos = std::lower_bound(c.vocab.begin(), c.vocab.end(), v);
      if (pos != c.vocab.end() && *pos == v)
        x[static_cast<std::size_t>(c.offset + (pos - c.vocab.begin()))] = 1.0;
    }
  }
  return x;
}

void Featurizer::restore(std::vector<Column> columns) {
  columns_ = std::move(columns);
  index_.clear();
  width_ = 0;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    Column& c = columns_[i];
    c.offset = width_;
    width_ += c.numeric ? 1 : static_cast<int>(c.vocab.size());
    index_.emplace(c.path, i);
  }
}

}  // namespace strla::data
