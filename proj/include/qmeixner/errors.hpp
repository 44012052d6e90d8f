#pragma once

#include <stdexcept>
#include <string>

namespace qmeixner {

/// Time arguments violate 0 <= s < t (or s < t < u for triple-time checks).
class InvalidTimeOrder : public std::invalid_argument {
 public:
  explicit InvalidTimeOrder(const std::string& what) : std::invalid_argument(what) {}
};

/// A single time argument is outside its domain (e.g. t <= 0 where t > 0 is required).
class InvalidTime : public std::invalid_argument {
 public:
  explicit InvalidTime(const std::string& what) : std::invalid_argument(what) {}
};

/// An off-diagonal recurrence coefficient b_n required to be positive is <= 0,
/// so no real symmetric Jacobi matrix (and no quadrature rule) exists.
class NonPositiveRecurrence : public std::runtime_error {
 public:
  explicit NonPositiveRecurrence(int index)
      : std::runtime_error("recurrence coefficient b_" + std::to_string(index) +
                           " is not positive"),
        index_(index) {}

  int index() const noexcept { return index_; }

 private:
  int index_;
};

/// The iterative eigensolver exceeded its sweep budget on some subdiagonal entry.
class NoConvergence : public std::runtime_error {
 public:
  explicit NoConvergence(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace qmeixner
