#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "strla/stree/element.hpp"

namespace strla::data {

// Leaves of a document keyed by their ordinal path (array items numbered), in
// document order. This is the tabular view the feature-vector baseline uses.
std::vector<std::pair<std::string, const stree::Element*>> flatten_leaves(const stree::Element& doc);

// Fixed-width encoding for the feature-vector baseline: numeric columns are
// standardised with training mean and population std, categorical columns
// become one-hot blocks over the sorted training vocabulary. A column is
// numeric when all its non-null training values are numbers. Unseen
// categories and missing values encode as zeros.
class Featurizer {
 public:
  struct Column {
    std::string path;
    bool numeric = false;
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<std::string> vocab;
    int offset = 0;
  };

  void fit(std::span<const stree::Element* const> docs);
  // Reinstates fitted columns (offsets are recomputed).
  void restore(std::vector<Column> columns);
  std::vector<double> transform(const stree::Element& doc) const;
  int width() const { return width_; }
  const std::vector<Column>& columns() const { return columns_; }

 private:
  std::vector<Column> columns_;
  std::map<std::string, std::size_t> index_;
  int width_ = 0;
};

}  // namespace strla::data
