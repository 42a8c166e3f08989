#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace surfeig {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Point outside the tubular neighborhood where the closest point is unique.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Degenerate element geometry (singular metric).
class GeometryError : public Error {
public:
  using Error::Error;
};

/// Assembled forms violate a structural requirement (e.g. mass matrix not SPD).
class AssemblyError : public Error {
public:
  using Error::Error;
};

/// Invalid arguments: dimension mismatch, out-of-range parameters, non-SPD input.
class InputError : public Error {
public:
  using Error::Error;
};

/// Requested reference data does not exist.
class UnsupportedError : public Error {
public:
  using Error::Error;
};

/// Iterative eigensolver hit its iteration cap.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, std::vector<double> best_residuals)
      : Error(what), residuals_(std::move(best_residuals)) {}

  const std::vector<double>& residuals() const noexcept { return residuals_; }

private:
  std::vector<double> residuals_;
};

}  // namespace surfeig
