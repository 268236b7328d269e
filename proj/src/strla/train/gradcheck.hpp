#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "strla/ad/parameters.hpp"
#include "strla/ad/tape.hpp"
#include "strla/stree/element.hpp"

namespace strla::train {

struct GradcheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;  // scalar parameters compared
  std::string worst_parameter;
  double analytic = 0.0;  // at the worst entry
  double numeric = 0.0;
};

// Compares the tape gradient of `loss` with central differences for every
// scalar in `store`. Relative error is |a - n| / max(|a|, |n|, floor).
// `store` is restored before returning.
GradcheckReport gradcheck(ad::ParameterStore& store, const std::function<ad::NodeId(ad::Tape&)>& loss,
                          bool corrupt_backward = false, double step = 1e-5, double floor = 1e-4);

// Random JSON-like document: nested objects and arrays of numbers, short
// strings and booleans (including null).
stree::Element random_document(std::mt19937_64& rng, int depth = 3);
// Random reduced-XML document text with attributes, nested tags and text.
std::string random_xml(std::mt19937_64& rng, int depth = 3);

// End-to-end check for one model kind (set, lstm, tailored, xml, mlp): builds
// a small model over random documents, perturbs every parameter away from
// its initial value and runs gradcheck on one document's loss.
GradcheckReport gradcheck_model(const std::string& kind, std::uint64_t seed, bool corrupt_backward = false);

}  // namespace strla::train
