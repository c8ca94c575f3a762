#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mixlab {

// Malformed inputs: dimension mismatches, non-orthonormal bases, bad weights.
class StructuralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Parameter is valid in principle but outside what the samplers support.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace mixlab
