#pragma once

#include <stdexcept>
#include <string>

namespace qmeixner {

/**
 * q-deformed integers, factorials and binomial coefficients.
 *
 * All functions accept q in (-1, 1]; q = 1 recovers the classical values.
 * The bracket is evaluated as the explicit geometric sum 1 + q + ... + q^{n-1}
 * rather than (1 - q^n)/(1 - q), which keeps q = 1 exact and avoids the
 * 0/0 form without a special case.
 */

namespace detail {
inline void require_q(double q) {
  if (!(q > -1.0 && q <= 1.0)) {
    throw std::invalid_argument("q must lie in (-1, 1], got " + std::to_string(q));
  }
}
inline void require_nonnegative(long long n, const char* name) {
  if (n < 0) {
    throw std::invalid_argument(std::string(name) + " must be nonnegative");
  }
}
}  // namespace detail

/// [n]_q = 1 + q + ... + q^{n-1}; [0]_q = 0.
inline double q_bracket(long long n, double q) {
  detail::require_q(q);
  detail::require_nonnegative(n, "n");
  double sum = 0.0;
  double power = 1.0;
  for (long long j = 0; j < n; ++j) {
    sum += power;
    power *= q;
  }
  return sum;
}

/// [n]_q! = [1]_q [2]_q ... [n]_q; empty product for n = 0.
inline double q_factorial(long long n, double q) {
  detail::require_q(q);
  detail::require_nonnegative(n, "n");
  double prod = 1.0;
  for (long long k = 1; k <= n; ++k) {
    prod *= q_bracket(k, q);
  }
  return prod;
}

/// Gaussian binomial [n choose k]_q = [n]_q! / ([k]_q! [n-k]_q!).
///
/// Computed as the product of bracket ratios prod_{j=1}^{k} [n-k+j]_q / [j]_q,
/// which stays well scaled instead of dividing two potentially huge factorials.
inline double q_binomial(long long n, long long k, double q) {
  detail::require_q(q);
  detail::require_nonnegative(n, "n");
  detail::require_nonnegative(k, "k");
  if (k > n) {
    throw std::invalid_argument("q_binomial requires 0 <= k <= n");
  }
  if (k > n - k) k = n - k;  // symmetry, fewer factors
  double result = 1.0;
  for (long long j = 1; j <= k; ++j) {
    result *= q_bracket(n - k + j, q) / q_bracket(j, q);
  }
  return result;
}

/**
 * Parameter triple of the process: q in (-1, 1) strictly, theta real, tau >= 0.
 *
 * q = 1 is accepted by the scalar q-arithmetic above but not here: the
 * transition and orthogonality measures are only defined for |q| < 1.
 */
struct ProcessParams {
  double q;
  double theta;
  double tau;

  ProcessParams(double q_, double theta_, double tau_) : q(q_), theta(theta_), tau(tau_) {
    if (!(q > -1.0 && q < 1.0)) {
      throw std::invalid_argument("process parameter q must lie in (-1, 1), got " +
                                  std::to_string(q));
    }
    if (!(tau >= 0.0)) {
      throw std::invalid_argument("process parameter tau must be >= 0, got " +
                                  std::to_string(tau));
    }
  }
};

}  // namespace qmeixner
