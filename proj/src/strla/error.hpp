#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace strla {

enum class ErrorCode {
  Syntax,
  Unsupported,
  ShapeMismatch,
  NonFinite,
  NonScalarLoss,
  LabelOutOfRange,
  UnknownTemplate,
  Config,
  Io,
  VersionMismatch,
  FoldTooSmall,
  MissingColumn,
  TypeCoercion,
  LabelMismatch,
  Internal,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised by the JSON and XML readers. `position` is a byte offset into the
// input text.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, std::string expected, const std::string& detail = {});
  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

}  // namespace strla
