#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace strla::data {

// A header row plus string cells. Fields are trimmed of surrounding
// whitespace; quoted fields may contain the delimiter, doubled quotes and
// line breaks.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws MissingColumn.
  std::size_t column(std::string_view name) const;
};

// The delimiter is ',' unless the header line contains ';' and no ','.
Table parse_csv(std::string_view text);
Table read_csv(const std::string& path);

}  // namespace strla::data
