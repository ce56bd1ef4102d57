#include "vqt/error.hpp"

namespace vqt {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositive: return "NonPositive";
    case ErrorKind::Unstable: return "Unstable";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::PoleParameter: return "PoleParameter";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::RepeatedDiagonal: return "RepeatedDiagonal";
    case ErrorKind::DivergentIntegral: return "DivergentIntegral";
    case ErrorKind::NullSpaceDimension: return "NullSpaceDimension";
    case ErrorKind::NegativeProbability: return "NegativeProbability";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

bool is_validation_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositive:
    case ErrorKind::Unstable:
    case ErrorKind::Degenerate:
    case ErrorKind::PoleParameter:
    case ErrorKind::InvalidArgument:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace vqt
