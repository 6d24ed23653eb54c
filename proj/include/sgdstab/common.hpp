#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sgdstab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Default relative tolerance for PSD checks and eigenvalue clamping.
inline constexpr double kPsdTol = 1e-9;

// Invalid input (bad dimensions, out-of-range parameters, violated file
// invariants). CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A matrix that was required to be PSD is not, beyond tolerance.
class NotPsdError : public ValidationError {
 public:
  NotPsdError(const std::string& what, double lambda_min, Index index = -1)
      : ValidationError(what), lambda_min(lambda_min), index(index) {}
  double lambda_min;
  Index index;  // offending ensemble index, -1 when not applicable
};

// A matrix that was required to be symmetric is not, beyond tolerance.
class SymmetryError : public ValidationError {
 public:
  SymmetryError(const std::string& what, Index index = -1)
      : ValidationError(what), index(index) {}
  Index index;
};

// File system / parse failures. CLI exit code 3.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// An iterative solver ran out of budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double last = 0.0,
                   double previous = 0.0)
      : std::runtime_error(what),
        iterations(iterations),
        last_estimate(last),
        previous_estimate(previous) {}
  int iterations;
  double last_estimate;
  double previous_estimate;
};

}  // namespace sgdstab
