#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace solheat {

/// Base class for every failure raised by the numerical core.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A banded factorization hit a zero pivot.
class SingularSystem : public Error {
 public:
  SingularSystem(const std::string& what, std::size_t row)
      : Error(what + " (zero pivot at row " + std::to_string(row) + ")"), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// An iterative method (Newton, CG) ran out of iterations.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double residual, int iterations)
      : Error(what + " after " + std::to_string(iterations) +
              " iterations (residual " + std::to_string(residual) + ")"),
        residual_(residual),
        iterations_(iterations) {}
  double residual() const noexcept { return residual_; }
  int iterations() const noexcept { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

/// Explicit integration produced a non-finite or runaway state.
class BlowUp : public Error {
 public:
  BlowUp(const std::string& what, long step)
      : Error(what + " at step " + std::to_string(step)), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// The problem has no diffusion and no boundary loss, so a CFL bound is undefined.
class DegenerateProblem : public Error {
 public:
  using Error::Error;
};

}  // namespace solheat
