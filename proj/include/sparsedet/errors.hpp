// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace sparsedet {

/// Argument outside the mathematical domain of an operation (angle at ±90°,
/// rho >= 1, pfa outside (0, 1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Factorization or inversion failed (singular covariance, non-PD matrix).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sample covariance could not be formed from the training data.
class EstimationError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A detection threshold could not be computed for the requested setting.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or incomplete experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sparsedet
