#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "strla/data/dataset.hpp"
#include "strla/data/table.hpp"
#include "strla/stree/element.hpp"

namespace strla::data {

// How a column reference turns a cell into a primitive.
enum class CellType {
  Auto,     // number if the whole cell parses as one, text otherwise
  Text,
  Number,   // TypeCoercion if the cell is not a finite number
  Boolean,  // true/t/yes/y/1 and false/f/no/n/0, case-insensitive
};

// A document template whose string leaves of the form "${column}" or
// "${column:type}" (type: auto, text, number, bool) are filled from a table
// row. Every other leaf is a literal copied into each document.
//
// File format:
//   {"label": "<column>",
//    "template": <document>,
//    "value_maps": {"<column>": {"<raw cell>": <JSON value>, ...}, ...},
//    "missing": ["?"]}
// A mapped cell is replaced by its JSON value regardless of the cell type.
// Cells equal to a missing marker become null, unless mapped.
struct Schema {
  std::string label_column;
  stree::Element document;
  std::map<std::string, std::map<std::string, stree::Element>> value_maps;
  std::vector<std::string> missing{"?"};

  static Schema from_json(std::string_view text);
  static Schema load(const std::string& path);

  // Columns referenced by the template, in first-use order.
  std::vector<std::string> referenced_columns() const;
};

// One example per table row. Throws MissingColumn when the template or label
// names a column the header lacks, TypeCoercion when a cell cannot take the
// requested type.
Dataset convert_table(const Table& table, const Schema& schema);
stree::Element convert_row(const Table& table, std::size_t row, const Schema& schema);

// When one class holds more than 80% of the examples, randomly keep at most
// twice as many of its examples as there are others. Other examples and the
// relative order of all kept examples are preserved.
Dataset rebalance(const Dataset& dataset, std::uint64_t seed);

}  // namespace strla::data
