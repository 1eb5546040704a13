#pragma once

#include <stdexcept>
#include <string>

namespace qnd {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotHermitian : Error {
  using Error::Error;
};
struct NotUnitTrace : Error {
  using Error::Error;
};
struct NotPositive : Error {
  using Error::Error;
};
struct DimensionMismatch : Error {
  using Error::Error;
};
struct EigenFailure : Error {
  using Error::Error;
};
struct ZeroProbabilityOutcome : Error {
  using Error::Error;
};
struct DisconnectedGraph : Error {
  using Error::Error;
};
struct SingularSolve : Error {
  using Error::Error;
};
struct UnconvergedTrajectories : Error {
  using Error::Error;
};
struct HypothesisViolation : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace qnd
