#pragma once

#include <stdexcept>
#include <string>

namespace rigidpose {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidDepth,
  kInsufficientPoints,
  kDegenerateWeights,
  kDegenerateConfiguration,
  kDegenerateSvdGradient,
  kEmptyMask,
  kParseError,
  kIoError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidDepth: return "invalid-depth";
    case ErrorCode::kInsufficientPoints: return "insufficient-points";
    case ErrorCode::kDegenerateWeights: return "degenerate-weights";
    case ErrorCode::kDegenerateConfiguration: return "degenerate-configuration";
    case ErrorCode::kDegenerateSvdGradient: return "degenerate-svd-gradient";
    case ErrorCode::kEmptyMask: return "empty-mask";
    case ErrorCode::kParseError: return "parse-error";
    case ErrorCode::kIoError: return "io-error";
  }
  return "unknown-error";
}

/// Library error carrying a stable machine-readable code. The CLI prints
/// these as "error: <code>: <message>" on a single line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure with the 1-based line and, when known, the 1-based column.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column = -1)
      : Error(ErrorCode::kParseError,
              "line " + std::to_string(line) +
                  (column >= 0 ? ", column " + std::to_string(column) : "") +
                  ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace rigidpose
