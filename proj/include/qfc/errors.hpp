#pragma once

#include <stdexcept>
#include <string>

namespace qfc {

// A least-squares problem that could not be solved: singular design, or no
// convergence within the iteration budget of an iterative fit.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  // Residual sum of squares at the point the fit gave up (0 if not applicable).
  double residual() const { return residual_; }

 private:
  double residual_;
};

// A ratio or normalization whose denominator is zero for the given data.
class UndefinedRatio : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Input whose expected size exceeds what the generators will allocate.
class SizingError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace qfc
