#pragma once

#include <span>
#include <string_view>
#include <utility>

#include "strla/nn/embedders.hpp"

namespace strla::xml {

// Parameters of one attribute id: its own character rows and LSTM.
struct AttributeParams {
  nn::LstmParams lstm;
  nn::CharTable chars;
};

// Mean LSTM hidden state over the value's characters; zero for "".
nn::NodeId embed_attribute(nn::Tape& tape, const AttributeParams& params, std::string_view value);

struct AttributeInput {
  const AttributeParams* params;
  std::string_view value;
};

// Final hidden state of the tag LSTM over the children's h (zero when there
// are no children) plus the sum of the attribute embeddings.
nn::NodeId embed_tag(nn::Tape& tape, const nn::LstmParams& tag_lstm, std::span<const nn::NodeId> children_h,
                     std::span<const AttributeInput> attributes);

}  // namespace strla::xml
