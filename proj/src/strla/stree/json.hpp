#pragma once

#include <string_view>

#include "strla/stree/element.hpp"

namespace strla::stree {

// Strict RFC 8259 reader. `null` becomes Boolean(Null). Throws
// strla::SyntaxError with the byte offset of the first offending character;
// nothing is returned on failure.
Element parse_json(std::string_view text);

}  // namespace strla::stree
