#pragma once

#include <string_view>

#include "strla/stree/element.hpp"

namespace strla::xml {

// Member name used for character data that sits next to child tags, or
// inside a tag that carries attributes.
inline constexpr std::string_view kTextMember = "#text";

// Reads the reduced XML dialect: tags, attributes and character data.
// Headers, comments, processing instructions, DOCTYPE and CDATA sections are
// skipped; entity and character references raise Unsupported.
//
// Mapping into the tree model:
//   - the document is an Object with a single member named after the root tag;
//   - a tag with no attributes whose only content is text becomes a Text
//     primitive (leading/trailing whitespace trimmed);
//   - any other tag becomes an Object whose description holds the attributes
//     and whose members are the child tags in document order, with text runs
//     as "#text" members;
//   - whitespace-only text is dropped, so `<a/>` and `<a></a>` both give an
//     empty Object.
stree::Element parse_xml_reduced(std::string_view text);

}  // namespace strla::xml
