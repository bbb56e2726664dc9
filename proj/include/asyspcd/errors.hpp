#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace asyspcd {

// Base for failures that are part of the solver's documented contract.
// Precondition violations (bad dimensions, negative step sizes) use the
// standard std::invalid_argument / std::out_of_range instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DelayBoundViolated : public Error {
 public:
  DelayBoundViolated(double lhs, double rhs)
      : Error("delay bound violated: 4*e*Lambda*(tau+1)^2 = " +
              std::to_string(lhs) + " > sqrt(n) = " + std::to_string(rhs)),
        lhs_(lhs),
        rhs_(rhs) {}

  double lhs() const noexcept { return lhs_; }
  double rhs() const noexcept { return rhs_; }

 private:
  double lhs_;
  double rhs_;
};

class Diverged : public Error {
 public:
  explicit Diverged(std::size_t epoch)
      : Error("objective became non-finite at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class OscUnavailable : public Error {
 public:
  using Error::Error;
};

}  // namespace asyspcd
