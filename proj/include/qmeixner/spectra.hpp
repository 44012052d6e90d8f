#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qmeixner/errors.hpp"
#include "qmeixner/recurrence.hpp"

namespace qmeixner {

/// Symmetric tridiagonal matrix encoding a positive-definite monic recurrence:
/// diag_i = a_i, offdiag_i = sqrt(b_{i+1}).
struct JacobiMatrix {
  std::vector<double> diag;
  std::vector<double> offdiag;  // size diag.size() - 1, strictly positive

  int size() const { return static_cast<int>(diag.size()); }

  /// [lo, hi] with every eigenvalue inside: union of Gershgorin discs.
  std::pair<double, double> gershgorin_interval() const {
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
      double r = 0.0;
      if (i > 0) r += std::abs(offdiag[i - 1]);
      if (i + 1 < diag.size()) r += std::abs(offdiag[i]);
      const double a = diag[i] - r, b = diag[i] + r;
      if (i == 0) {
        lo = a;
        hi = b;
      } else {
        lo = std::min(lo, a);
        hi = std::max(hi, b);
      }
    }
    return {lo, hi};
  }
};

inline JacobiMatrix jacobi_matrix(const RecurrenceCoeffs& rec, int N) {
  if (N < 1) throw std::invalid_argument("jacobi_matrix requires N >= 1");
  JacobiMatrix J;
  J.diag.resize(static_cast<std::size_t>(N));
  J.offdiag.resize(static_cast<std::size_t>(N) - 1);
  for (int i = 0; i < N; ++i) J.diag[static_cast<std::size_t>(i)] = rec.a(i);
  for (int i = 1; i < N; ++i) {
    const double b = rec.b(i);
    if (!(b > 0.0)) throw NonPositiveRecurrence(i);
    J.offdiag[static_cast<std::size_t>(i) - 1] = std::sqrt(b);
  }
  return J;
}

struct TridiagEigen {
  std::vector<double> values;            // ascending
  std::vector<double> first_components;  // first entries of orthonormal eigenvectors
};

/**
 * Eigendecomposition of a symmetric tridiagonal matrix by implicit-shift QL
 * with Wilkinson shifts. Only the first row of the eigenvector matrix is
 * accumulated: that row is all Golub-Welsch needs, and it cuts the rotation
 * work from O(N^3) to O(N^2).
 *
 * Deflation: offdiag entry e_i is treated as zero once
 * |e_i| <= 1e-15 (|d_i| + |d_{i+1}|). Each eigenvalue gets at most 50 QL
 * sweeps before NoConvergence is thrown.
 */
inline TridiagEigen tridiag_eigen(const JacobiMatrix& J) {
  constexpr double kDeflate = 1e-15;
  constexpr int kMaxSweeps = 50;

  const int n = J.size();
  std::vector<double> d = J.diag;
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i + 1 < n; ++i) e[static_cast<std::size_t>(i)] = J.offdiag[static_cast<std::size_t>(i)];
  std::vector<double> z(static_cast<std::size_t>(n), 0.0);
  z[0] = 1.0;

  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[static_cast<std::size_t>(m)]) +
                          std::abs(d[static_cast<std::size_t>(m) + 1]);
        if (std::abs(e[static_cast<std::size_t>(m)]) <= kDeflate * dd) break;
      }
      if (m != l) {
        if (++iter > kMaxSweeps) {
          throw NoConvergence("tridiagonal QL exceeded " + std::to_string(kMaxSweeps) +
                              " sweeps at index " + std::to_string(l));
        }
        double g = (d[static_cast<std::size_t>(l) + 1] - d[static_cast<std::size_t>(l)]) /
                   (2.0 * e[static_cast<std::size_t>(l)]);
        double r = std::hypot(g, 1.0);
        g = d[static_cast<std::size_t>(m)] - d[static_cast<std::size_t>(l)] +
            e[static_cast<std::size_t>(l)] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[static_cast<std::size_t>(i)];
          const double b = c * e[static_cast<std::size_t>(i)];
          r = std::hypot(f, g);
          e[static_cast<std::size_t>(i) + 1] = r;
          if (r == 0.0) {  // rotation annihilated early: split and restart
            d[static_cast<std::size_t>(i) + 1] -= p;
            e[static_cast<std::size_t>(m)] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[static_cast<std::size_t>(i) + 1] - p;
          r = (d[static_cast<std::size_t>(i)] - g) * s + 2.0 * c * b;
          p = s * r;
          d[static_cast<std::size_t>(i) + 1] = g + p;
          g = c * r - b;
          f = z[static_cast<std::size_t>(i) + 1];
          z[static_cast<std::size_t>(i) + 1] = s * z[static_cast<std::size_t>(i)] + c * f;
          z[static_cast<std::size_t>(i)] = c * z[static_cast<std::size_t>(i)] - s * f;
        }
        if (underflow) continue;
        d[static_cast<std::size_t>(l)] -= p;
        e[static_cast<std::size_t>(l)] = g;
        e[static_cast<std::size_t>(m)] = 0.0;
      }
    } while (m != l);
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&d](int i, int j) { return d[static_cast<std::size_t>(i)] < d[static_cast<std::size_t>(j)]; });
  TridiagEigen out;
  out.values.reserve(static_cast<std::size_t>(n));
  out.first_components.reserve(static_cast<std::size_t>(n));
  for (int idx : order) {
    out.values.push_back(d[static_cast<std::size_t>(idx)]);
    out.first_components.push_back(z[static_cast<std::size_t>(idx)]);
  }
  return out;
}

/// N-point discrete probability measure: sorted nodes, nonnegative weights
/// summing to 1, optionally tagged with the Gershgorin interval of the
/// Jacobi matrix it came from.
struct DiscreteMeasure {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::optional<std::pair<double, double>> enclosure;

  int size() const { return static_cast<int>(nodes.size()); }
};

namespace detail {
/// Clamp tiny negative weights (rounding artifacts) and renormalize to mass 1.
inline void finalize_weights(std::vector<double>& w) {
  double sum = 0.0;
  for (double& wi : w) {
    if (wi < 0.0) {
      if (wi < -1e-13) throw std::runtime_error("quadrature produced a negative weight");
      wi = 0.0;
    }
    sum += wi;
  }
  if (!(sum > 0.0)) throw std::runtime_error("quadrature weights sum to zero");
  for (double& wi : w) wi /= sum;
}

/// Merge nodes closer than 1e-12 * (enclosure width): degenerate near-atoms
/// whose separation is pure rounding noise. Weights add; the merged node is
/// the weight-averaged position.
inline void dedupe_nodes(std::vector<double>& nodes, std::vector<double>& weights,
                         double width) {
  const double tol = 1e-12 * width;
  std::size_t out = 0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (nodes[i] - nodes[out] < tol) {
      const double wsum = weights[out] + weights[i];
      if (wsum > 0.0) {
        nodes[out] = (nodes[out] * weights[out] + nodes[i] * weights[i]) / wsum;
      }
      weights[out] = wsum;
    } else {
      ++out;
      nodes[out] = nodes[i];
      weights[out] = weights[i];
    }
  }
  nodes.resize(out + 1);
  weights.resize(out + 1);
}
}  // namespace detail

/// Golub-Welsch: nodes are Jacobi eigenvalues, weights squared first
/// eigenvector components (total mass 1 for a probability recurrence).
inline DiscreteMeasure quadrature(const RecurrenceCoeffs& rec, int N) {
  const JacobiMatrix J = jacobi_matrix(rec, N);
  const TridiagEigen eig = tridiag_eigen(J);

  DiscreteMeasure m;
  m.nodes = eig.values;
  m.weights.resize(eig.first_components.size());
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    m.weights[i] = eig.first_components[i] * eig.first_components[i];
  }
  detail::finalize_weights(m.weights);
  const auto interval = J.gershgorin_interval();
  detail::dedupe_nodes(m.nodes, m.weights, interval.second - interval.first);
  m.enclosure = interval;
  return m;
}

/// N-point discretization of the transition kernel out of state x over [s, t].
inline DiscreteMeasure transition_measure(const ProcessParams& params, double x, double s,
                                          double t, int N) {
  return quadrature(transition_recurrence(params, x, s, t), N);
}

/// N-point discretization of the generator's representing measure at (x, t).
inline DiscreteMeasure nu_measure(const ProcessParams& params, double x, double t, int N) {
  return quadrature(nu_recurrence(params, x, t), N);
}

template <class F>
double integrate(const DiscreteMeasure& m, F&& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    sum += m.weights[i] * f(m.nodes[i]);
  }
  return sum;
}

/// Raw moments m_0..m_{k_max}. Orders beyond the quadrature's exactness
/// degree 2N-1 are rejected rather than returned silently wrong.
inline std::vector<double> moments(const DiscreteMeasure& m, int k_max) {
  if (k_max < 0) throw std::invalid_argument("moments requires k_max >= 0");
  if (k_max > 2 * m.size() - 1) {
    throw std::invalid_argument("moment order " + std::to_string(k_max) +
                                " exceeds the exactness degree " +
                                std::to_string(2 * m.size() - 1) + " of an N = " +
                                std::to_string(m.size()) + " rule");
  }
  std::vector<double> mom(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    double power = 1.0;
    for (int k = 0; k <= k_max; ++k) {
      mom[static_cast<std::size_t>(k)] += m.weights[i] * power;
      power *= m.nodes[i];
    }
  }
  return mom;
}

/// Quadrature of the semicircle law: constant recurrence a_n = mean,
/// b_n = variance. Support is [mean - 2 sqrt(variance), mean + 2 sqrt(variance)].
inline DiscreteMeasure semicircle_measure(double mean, double variance, int N) {
  if (!(variance > 0.0)) throw std::invalid_argument("semicircle variance must be positive");
  RecurrenceCoeffs rec([mean](int) { return mean; }, [variance](int) { return variance; },
                       "semicircle", /*require_positive_b=*/true);
  return quadrature(rec, N);
}

/**
 * Closed-form two-point transition law (the q = -1 degenerate case, used as
 * a test oracle): atoms at (theta -+ sqrt((theta - 2x)^2 + 4(t-s)))/2 with
 * weights 1/2 +- (theta - 2x)/(2 sqrt(...)). Mean x, variance t - s.
 */
inline DiscreteMeasure two_point_transition(double theta, double x, double s, double t) {
  if (!(s < t)) {
    throw InvalidTimeOrder("two_point_transition requires s < t");
  }
  const double a = theta - 2.0 * x;
  const double d = std::sqrt(a * a + 4.0 * (t - s));
  DiscreteMeasure m;
  m.nodes = {0.5 * (theta - d), 0.5 * (theta + d)};
  m.weights = {0.5 + a / (2.0 * d), 0.5 - a / (2.0 * d)};
  return m;
}

}  // namespace qmeixner
