#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tnqsim {

/// Malformed circuit text. `line_number` is 1-based within the source text.
class ParseError : public std::runtime_error {
 public:
  ParseError(int line_number, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_number) + ": " + what),
        line_number(line_number) {}
  int line_number;
};

/// A circuit violated a structural invariant (used when diagnostics must abort).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configured resource cap (bond dimension, frontier size, qubit count) was hit.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(std::string quantity, std::size_t required, std::size_t cap,
              const std::string& detail = "")
      : std::runtime_error(quantity + " cap exceeded: required " +
                           std::to_string(required) + ", cap " + std::to_string(cap) +
                           (detail.empty() ? "" : " (" + detail + ")")),
        quantity(std::move(quantity)),
        required(required),
        cap(cap) {}
  std::string quantity;
  std::size_t required;
  std::size_t cap;
};

/// Numerical inconsistency: SVD failure, probabilities that do not sum to one,
/// a forced outcome with vanishing probability, and similar conditions.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tnqsim
