#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "strla/stree/element.hpp"

namespace strla::data {

struct Example {
  stree::Element input;
  std::string label;
};

using Dataset = std::vector<Example>;

enum class InputFormat { Json, Xml };

// JSON-lines: one {"input": <value>, "label": <string>} object per line.
// With InputFormat::Xml the input field is a string holding an XML document.
// Numeric labels are accepted and rendered in shortest form. Blank lines are
// skipped. Errors carry the 1-based line number.
Dataset parse_jsonl(std::string_view text, InputFormat format = InputFormat::Json);
Dataset read_jsonl(const std::string& path, InputFormat format = InputFormat::Json);

std::string to_jsonl_line(const Example& ex);
void write_jsonl(const std::string& path, const Dataset& ds);

// Sorted distinct labels.
std::vector<std::string> label_vocabulary(const Dataset& ds);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace strla::data
