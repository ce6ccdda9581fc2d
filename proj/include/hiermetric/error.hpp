#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hiermetric {

enum class ErrorKind {
  ZeroNorm,
  DimensionMismatch,
  NonFinite,
  IndexOutOfRange,
  InvalidClassCount,
  InvalidArgument,
  InvalidConfig,
  BatchTooSmall,
  DatasetTooSmall,
  NoValidTriplets,
  ParseError,
  UnknownPolarity,
  EmptyCorpus,
  MissingSubclass,
  NoTestLabels,
  DegenerateDistances,
  AsymmetricInput,
  IoError,
};

/// Coarse grouping used by the command-line tool to pick an exit code.
enum class ErrorCategory { Usage, Data, Numeric };

std::string_view to_string(ErrorKind kind);
ErrorCategory category(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);
  Error(ErrorKind kind, const std::string& message, std::size_t line);

  ErrorKind kind() const noexcept { return kind_; }
  /// 1-based input line for file parsing errors.
  std::optional<std::size_t> line() const noexcept { return line_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> line_;
};

}  // namespace hiermetric
