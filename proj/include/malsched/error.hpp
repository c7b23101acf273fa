#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace malsched {

enum class ErrorKind {
  BadSpec,
  InfeasibleLoad,
  NotAPriorityPolicy,
  DimensionMismatch,
  HyperExpUnsupported,
  NumericalHorizonTooSmall,
  TruncationInsufficient,
  StateSpaceTooLarge,
  SolverDidNotConverge,
  UnstableSystem,
  WrongClassCount,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace malsched
