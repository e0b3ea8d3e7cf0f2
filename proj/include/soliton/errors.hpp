#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace soliton {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Raised when a discrete gradient reaches the light cone.
class NotSpacelike : public Error {
 public:
  NotSpacelike(std::size_t node, double grad_norm);

  std::size_t node() const noexcept { return node_; }
  double grad_norm() const noexcept { return grad_norm_; }

 private:
  std::size_t node_;
  double grad_norm_;
};

class IntegrationFailure : public Error {
 public:
  using Error::Error;
};

class RefinementError : public Error {
 public:
  using Error::Error;
};

class BadCurvatureBound : public Error {
 public:
  using Error::Error;
};

class ConstructionFailure : public Error {
 public:
  ConstructionFailure(double level, const std::string& what);
  double level() const noexcept { return level_; }

 private:
  double level_;
};

class NotConvex : public Error {
 public:
  using Error::Error;
};

class FlowBlowup : public Error {
 public:
  using Error::Error;
};

}  // namespace soliton
