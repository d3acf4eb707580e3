#pragma once

#include <stdexcept>
#include <string>

namespace momentgmm {

/// Bad arguments: shape mismatches, out-of-range parameters, malformed files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a trustworthy answer.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double residual = -1.0)
      : std::runtime_error(what), residual_(residual) {}

  /// Relative residual at the point of failure, negative when not applicable.
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class ZeroTensorError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RankDeficiencyError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class CollinearPointsError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateScaleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class RecoveryError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace momentgmm
