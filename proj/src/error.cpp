#include "hiermetric/error.hpp"

namespace hiermetric {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ZeroNorm: return "ZeroNorm";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::InvalidClassCount: return "InvalidClassCount";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::BatchTooSmall: return "BatchTooSmall";
    case ErrorKind::DatasetTooSmall: return "DatasetTooSmall";
    case ErrorKind::NoValidTriplets: return "NoValidTriplets";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownPolarity: return "UnknownPolarity";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::MissingSubclass: return "MissingSubclass";
    case ErrorKind::NoTestLabels: return "NoTestLabels";
    case ErrorKind::DegenerateDistances: return "DegenerateDistances";
    case ErrorKind::AsymmetricInput: return "AsymmetricInput";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory category(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidClassCount:
      return ErrorCategory::Usage;
    case ErrorKind::ZeroNorm:
    case ErrorKind::NonFinite:
    case ErrorKind::DegenerateDistances:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Data;
  }
}

namespace {
std::string format(ErrorKind kind, const std::string& message) {
  return std::string(to_string(kind)) + ": " + message;
}
}  // namespace

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(format(kind, message)), kind_(kind) {}

Error::Error(ErrorKind kind, const std::string& message, std::size_t line)
    : std::runtime_error(format(kind, message + " (line " + std::to_string(line) + ")")),
      kind_(kind),
      line_(line) {}

}  // namespace hiermetric
