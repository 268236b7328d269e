#include "strla/xml/embed.hpp"

#include <vector>

namespace strla::xml {

nn::NodeId embed_attribute(nn::Tape& tape, const AttributeParams& params, std::string_view value) {
  return nn::embed_string(tape, params.lstm, params.chars, value).h;
}

nn::NodeId embed_tag(nn::Tape& tape, const nn::LstmParams& tag_lstm, std::span<const nn::NodeId> children_h,
                     std::span<const AttributeInput> attributes) {
  std::vector<nn::NodeId> terms;
  terms.reserve(attributes.size() + 1);
  if (!children_h.empty()) terms.push_back(nn::run_lstm(tape, tag_lstm, children_h).h);
  for (const auto& a : attributes) terms.push_back(embed_attribute(tape, *a.params, a.value));
  if (terms.empty()) return tape.zeros(tag_lstm.m);
  return terms.size() == 1 ? terms[0] : tape.sum(terms);
}

}  // namespace strla::xml
