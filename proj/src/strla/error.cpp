#include "strla/error.hpp"

namespace strla {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Syntax: return "SyntaxError";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFinite: return "NonFiniteValue";
    case ErrorCode::NonScalarLoss: return "NonScalarLoss";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::Config: return "ConfigError";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::FoldTooSmall: return "FoldTooSmall";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::TypeCoercion: return "TypeCoercionError";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::Internal: return "InternalError";
  }
  return "UnknownError";
}

SyntaxError::SyntaxError(std::size_t position, std::string expected, const std::string& detail)
    : Error(ErrorCode::Syntax,
            "syntax error at offset " + std::to_string(position) + ": expected " + expected +
                (detail.empty() ? std::string() : " (" + detail + ")")),
      position_(position),
      expected_(std::move(expected)) {}

}  // namespace strla
