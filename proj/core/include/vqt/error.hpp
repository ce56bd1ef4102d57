#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vqt {

enum class ErrorKind {
  NonPositive,
  Unstable,
  Degenerate,
  PoleParameter,
  Singular,
  RepeatedDiagonal,
  DivergentIntegral,
  NullSpaceDimension,
  NegativeProbability,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Parameter-level failures (bad input) as opposed to numerical breakdown.
bool is_validation_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace vqt
