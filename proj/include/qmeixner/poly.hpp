#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qmeixner {

/**
 * Dense univariate polynomial with real coefficients in the monomial basis.
 *
 * coeffs[k] is the coefficient of y^k. The representation is canonical:
 * trailing zero coefficients are trimmed, and the zero polynomial is the
 * empty vector (degree() == -1). All operations preserve canonicality.
 */
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(); }

  /// p(y) = c. Gives the zero polynomial for c == 0.
  static Poly constant(double c) { return Poly(std::vector<double>{c}); }

  /// The monomial y^k.
  static Poly monomial(int k, double coeff = 1.0) {
    if (k < 0) throw std::invalid_argument("monomial degree must be >= 0");
    std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
    c.back() = coeff;
    return Poly(std::move(c));
  }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }

  /// Coefficient of y^k; zero beyond the stored degree.
  double operator[](int k) const {
    if (k < 0 || static_cast<std::size_t>(k) >= c_.size()) return 0.0;
    return c_[static_cast<std::size_t>(k)];
  }

  const std::vector<double>& coeffs() const { return c_; }

  friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }
  std::vector<double> c_;
};

/// Horner evaluation.
inline double eval(const Poly& p, double y) {
  double acc = 0.0;
  const auto& c = p.coeffs();
  for (std::size_t i = c.size(); i-- > 0;) {
    acc = acc * y + c[i];
  }
  return acc;
}

inline Poly add(const Poly& p, const Poly& r) {
  std::vector<double> c(std::max(p.coeffs().size(), r.coeffs().size()), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = p[static_cast<int>(i)] + r[static_cast<int>(i)];
  }
  return Poly(std::move(c));
}

inline Poly scale(const Poly& p, double alpha) {
  if (alpha == 0.0) return Poly();
  std::vector<double> c = p.coeffs();
  for (double& ci : c) ci *= alpha;
  return Poly(std::move(c));
}

/// (y - c) * p(y). The shift applied at every step of a monic recurrence.
inline Poly mul_by_linear(const Poly& p, double c) {
  if (p.is_zero()) return Poly();
  std::vector<double> out(p.coeffs().size() + 1, 0.0);
  for (std::size_t i = 0; i < p.coeffs().size(); ++i) {
    out[i + 1] += p.coeffs()[i];
    out[i] -= c * p.coeffs()[i];
  }
  return Poly(std::move(out));
}

inline Poly derivative(const Poly& p) {
  if (p.degree() < 1) return Poly();
  std::vector<double> c(static_cast<std::size_t>(p.degree()), 0.0);
  for (int k = 1; k <= p.degree(); ++k) {
    c[static_cast<std::size_t>(k - 1)] = static_cast<double>(k) * p[k];
  }
  return Poly(std::move(c));
}

/**
 * First divided difference as a polynomial in y:
 *
 *   (p(y) - p(x0)) / (y - x0),
 *
 * obtained by synthetic division; the remainder p(x0) is discarded exactly,
 * so no cancellation near y = x0 occurs. Degree drops by one.
 */
inline Poly divided_difference(const Poly& p, double x0) {
  if (p.degree() < 1) return Poly();
  const auto& c = p.coeffs();
  std::vector<double> g(c.size() - 1, 0.0);
  double carry = c.back();
  for (std::size_t i = c.size() - 1; i-- > 0;) {
    g[i] = carry;
    carry = c[i] + x0 * carry;
  }
  return Poly(std::move(g));
}

/**
 * Second-order divided-difference kernel: the polynomial r with
 *
 *   r(y) (y - x0)^2 = p(y) - p(x0) - p'(x0) (y - x0).
 *
 * Equivalently r = divided_difference(divided_difference(p, x0), x0); its
 * value at y = x0 is p''(x0)/2. This is the integrand of the polynomial
 * generator: the singular part of p at x0 is removed algebraically.
 */
inline Poly generator_integrand(const Poly& p, double x0) {
  return divided_difference(divided_difference(p, x0), x0);
}

}  // namespace qmeixner
