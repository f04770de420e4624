#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace sgais {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a precondition (bad sizes, empty inputs, unreachable targets).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// A numeric evaluation produced a non-finite value where a finite one was required.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::size_t coordinate)
      : Error(what), coordinate_(coordinate) {}
  std::size_t coordinate() const noexcept { return coordinate_; }

 private:
  std::size_t coordinate_;
};

/// A sampler state left the finite region (or exceeded the divergence bound).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, Eigen::VectorXd position)
      : Error(what), position_(std::move(position)) {}
  const Eigen::VectorXd& position() const noexcept { return position_; }

 private:
  Eigen::VectorXd position_;
};

/// All importance weights collapsed to zero mass.
class DegenerateEnsembleError : public Error {
 public:
  using Error::Error;
};

/// A run exceeded its wall-clock budget.
class TimeoutError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents (dataset, trace, config).
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace sgais
