#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qmeixner/errors.hpp"
#include "qmeixner/poly.hpp"
#include "qmeixner/recurrence.hpp"
#include "qmeixner/spectra.hpp"

namespace qmeixner {

enum class Side { Left, Right };

/**
 * Exact (up to rounding) expectation of a polynomial under the transition
 * kernel out of x over [s, t]: expand p in the martingale basis at time t,
 * then use that the kernel maps the degree-k basis member at t to the
 * degree-k member at s. No quadrature involved.
 */
inline double apply_transition_poly(const Poly& p, const ProcessParams& params, double x,
                                    double s, double t) {
  if (!(s >= 0.0) || !(s < t)) {
    throw InvalidTimeOrder("apply_transition_poly requires 0 <= s < t");
  }
  const std::vector<double> c = to_martingale_basis(p, params, t);
  const std::vector<double> mx =
      eval_family(martingale_recurrence(params, s), static_cast<int>(c.size()) - 1, x);
  double sum = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) sum += c[k] * mx[k];
  return sum;
}

/// Quadrature realization of the same operator for arbitrary integrands;
/// agrees with apply_transition_poly up to degree 2N-1.
template <class F>
double apply_transition_quad(F&& f, const ProcessParams& params, double x, double s, double t,
                             int N) {
  return integrate(transition_measure(params, x, s, t, N), std::forward<F>(f));
}

/**
 * Generator acting on a polynomial at (x, t):
 *
 *   A p (x) = integral of r dnu_{x,t},   r(y) (y-x)^2 = p(y) - p(x) - p'(x)(y-x).
 *
 * r is a polynomial of degree deg(p) - 2 (zero for deg <= 1), so the
 * quadrature is exact; the degree guard is conservative to keep every
 * operator built on top of this one inside the exactness range.
 */
inline double generator_poly(const Poly& p, const ProcessParams& params, double x, double t,
                             int N) {
  if (!(t > 0.0)) throw InvalidTime("generator requires t > 0");
  if (p.degree() + 1 > 2 * N - 1) {
    throw std::invalid_argument("polynomial degree " + std::to_string(p.degree()) +
                                " too high for an N = " + std::to_string(N) + " rule");
  }
  const Poly r = generator_integrand(p, x);
  if (r.is_zero()) return 0.0;
  return integrate(nu_measure(params, x, t, N), [&r](double y) { return eval(r, y); });
}

/// Generator on the degree-n martingale polynomial, through the time
/// derivative: A M_n(.; t) (x) = - d/dt M_n(x; t). Quadrature-free route.
inline double generator_martingale(const ProcessParams& params, int n, double x, double t) {
  if (!(t > 0.0)) throw InvalidTime("generator requires t > 0");
  return -eval(martingale_poly_dt(params, n, t), x);
}

/// Both computable forms of an operator that is one map in exact arithmetic;
/// their gap measures quadrature/eigensolver error.
struct OperatorForms {
  double integral_form;
  double difference_form;
};

/**
 * The lowering operator H_t p (x). Two routes:
 *   difference: A(y p)(x) - x A(p)(x)    (its definition)
 *   integral:   integral of (p(y) - p(x))/(y - x) dnu_{x,t}
 * h_operator returns the integral form; h_operator_forms exposes both.
 */
inline OperatorForms h_operator_forms(const Poly& p, const ProcessParams& params, double x,
                                      double t, int N) {
  if (!(t > 0.0)) throw InvalidTime("h_operator requires t > 0");
  const Poly dd = divided_difference(p, x);
  const double integral =
      dd.is_zero() ? 0.0
                   : integrate(nu_measure(params, x, t, N), [&dd](double y) { return eval(dd, y); });
  const double difference = generator_poly(mul_by_linear(p, 0.0), params, x, t, N) -
                            x * generator_poly(p, params, x, t, N);
  return {integral, difference};
}

inline double h_operator(const Poly& p, const ProcessParams& params, double x, double t,
                         int N) {
  return h_operator_forms(p, params, x, t, N).integral_form;
}

/**
 * C_t p (x) = H_t(y p)(x) - x H_t(p)(x), which collapses to the plain
 * integral of p against nu_{x,t}. The difference form is assembled from the
 * generator route of H (so disagreement between the forms would implicate a
 * genuine identity failure, not just reuse of the same quadrature).
 */
inline OperatorForms c_operator_forms(const Poly& p, const ProcessParams& params, double x,
                                      double t, int N) {
  if (!(t > 0.0)) throw InvalidTime("c_operator requires t > 0");
  const auto h_gen = [&](const Poly& r) {
    return generator_poly(mul_by_linear(r, 0.0), params, x, t, N) -
           x * generator_poly(r, params, x, t, N);
  };
  const Poly yp = mul_by_linear(p, 0.0);
  const double difference = h_gen(yp) - x * h_gen(p);
  const double integral =
      integrate(nu_measure(params, x, t, N), [&p](double y) { return eval(p, y); });
  return {integral, difference};
}

inline double c_operator(const Poly& p, const ProcessParams& params, double x, double t,
                         int N) {
  return c_operator_forms(p, params, x, t, N).difference_form;
}

/// A smooth test function together with its caller-supplied first and second
/// derivatives; the generator formula genuinely consumes all three.
struct SmoothFn {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
};

/// f(y) = 1/(1 + y^2) with analytic derivatives; bounded with bounded f''
/// (sup |f''| = 2, attained at y = 0).
inline SmoothFn make_cauchy() {
  SmoothFn fn;
  fn.f = [](double y) { return 1.0 / (1.0 + y * y); };
  fn.df = [](double y) {
    const double d = 1.0 + y * y;
    return -2.0 * y / (d * d);
  };
  fn.d2f = [](double y) {
    const double d = 1.0 + y * y;
    return (6.0 * y * y - 2.0) / (d * d * d);
  };
  return fn;
}

/**
 * Generator on a bounded C^2 function at (x, t), as the single integral of
 *
 *   phi(y) = (f(y) - f(x))/(y - x)^2 - f'(x)/(y - x),   phi(x) = f''(x)/2
 *
 * against nu_{x,t}. phi extends continuously across y = x; the two-term
 * expression is swapped for the Taylor value inside |y - x| <= delta, where
 * it would lose ~6 digits to cancellation while f''(x)/2 errs by O(delta).
 */
inline double generator_smooth(const SmoothFn& fn, const ProcessParams& params, double x,
                               double t, int N) {
  if (!(t > 0.0)) throw InvalidTime("generator requires t > 0");
  const DiscreteMeasure m = nu_measure(params, x, t, N);
  const double halfwidth = 0.5 * (m.enclosure->second - m.enclosure->first);
  const double delta = 1e-6 * (1.0 + std::abs(x) + halfwidth);
  const double fx = fn.f(x), dfx = fn.df(x), half_d2fx = 0.5 * fn.d2f(x);
  return integrate(m, [&](double y) {
    const double dy = y - x;
    if (std::abs(dy) <= delta) return half_d2fx;
    return (fn.f(y) - fx) / (dy * dy) - dfx / dy;
  });
}

/// Step size used by the CLI when none is given.
inline double default_fd_step(double t) { return 1e-5 * t; }

/// One-sided difference quotient of the transition semigroup at t:
/// right: (P_{t,t+h} f - f)(x)/h, left: (P_{t-h,t} f - f)(x)/h.
template <class F>
double generator_fd(F&& f, const ProcessParams& params, double x, double t, double h, int N,
                    Side side) {
  if (!(h > 0.0)) throw std::invalid_argument("difference step h must be positive");
  double applied;
  if (side == Side::Left) {
    if (!(t - h >= 0.0)) {
      throw std::invalid_argument("left difference requires t - h >= 0");
    }
    applied = apply_transition_quad(f, params, x, t - h, t, N);
  } else {
    applied = apply_transition_quad(f, params, x, t, t + h, N);
  }
  return (applied - f(x)) / h;
}

/**
 * The transition measure out of x over [s, t], reweighted by (y-x)^2/(t-s).
 * The reweighted mass equals the conditional variance ratio, i.e. 1, up to
 * quadrature rounding; a deviation beyond 1e-10 is a hard error, and the
 * rounding residual is renormalized away.
 */
inline DiscreteMeasure rescaled_second_diff_measure(const ProcessParams& params, double x,
                                                    double s, double t, int N) {
  DiscreteMeasure m = transition_measure(params, x, s, t, N);
  double sum = 0.0;
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    const double dy = m.nodes[i] - x;
    m.weights[i] *= dy * dy / (t - s);
    sum += m.weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-10) {
    throw std::runtime_error("second-difference reweighting has mass " + std::to_string(sum) +
                             ", expected 1 within 1e-10");
  }
  for (double& w : m.weights) w /= sum;
  return m;
}

struct ChapmanKolmogorovReport {
  std::vector<double> residuals;  // guarded relative, by moment order 0..k_max
  double max_residual = 0.0;
};

/**
 * Moments of the one-hop kernel over [s, u] against the two-hop composition
 * through time t. The inner expectation is the exact martingale-basis route,
 * the outer integral is quadrature, so the residual isolates eigensolver and
 * composition error in a single layer.
 */
inline ChapmanKolmogorovReport check_chapman_kolmogorov(const ProcessParams& params, double x,
                                                        double s, double t, double u,
                                                        int k_max, int N) {
  if (!(s >= 0.0) || !(s < t) || !(t < u)) {
    throw InvalidTimeOrder("Chapman-Kolmogorov check requires 0 <= s < t < u");
  }
  if (k_max < 0 || k_max > 2 * N - 1) {
    throw std::invalid_argument("k_max must lie in [0, 2N-1]");
  }
  const std::vector<double> lhs = moments(transition_measure(params, x, s, u, N), k_max);

  // Martingale-basis coefficients of y^k at horizon u, reused per outer node.
  std::vector<std::vector<double>> coeff(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) {
    coeff[static_cast<std::size_t>(k)] = to_martingale_basis(Poly::monomial(k), params, u);
  }

  const DiscreteMeasure outer = transition_measure(params, x, s, t, N);
  const RecurrenceCoeffs rec_t = martingale_recurrence(params, t);
  std::vector<double> rhs(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (std::size_t i = 0; i < outer.nodes.size(); ++i) {
    const std::vector<double> mz = eval_family(rec_t, k_max, outer.nodes[i]);
    for (int k = 0; k <= k_max; ++k) {
      double inner = 0.0;
      const auto& ck = coeff[static_cast<std::size_t>(k)];
      for (std::size_t j = 0; j < ck.size(); ++j) inner += ck[j] * mz[j];
      rhs[static_cast<std::size_t>(k)] += outer.weights[i] * inner;
    }
  }

  ChapmanKolmogorovReport rep;
  rep.residuals.resize(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) {
    const double r = std::abs(lhs[static_cast<std::size_t>(k)] - rhs[static_cast<std::size_t>(k)]) /
                     (1.0 + std::abs(lhs[static_cast<std::size_t>(k)]));
    rep.residuals[static_cast<std::size_t>(k)] = r;
    rep.max_residual = std::max(rep.max_residual, r);
  }
  return rep;
}

/// Least-squares slope of log(err) against log(h).
inline double fit_loglog_slope(const std::vector<double>& hs, const std::vector<double>& errs) {
  if (hs.size() != errs.size() || hs.size() < 2) {
    throw std::invalid_argument("slope fit needs >= 2 matching samples");
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    mx += std::log(hs[i]);
    my += std::log(errs[i]);
  }
  mx /= static_cast<double>(hs.size());
  my /= static_cast<double>(hs.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    const double dx = std::log(hs[i]) - mx;
    sxy += dx * (std::log(errs[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/**
 * How fast the rescaled second-difference measures approach nu_{x,T} as the
 * time gap h shrinks: per-order absolute moment errors and the fitted
 * log-log slope. side selects which endpoint moves: Left keeps t = T and
 * takes s = T - h; Right keeps s = T and takes t = T + h. Both limits target
 * nu_{x,T}.
 *
 * Orders whose errors sit at rounding level for every h (symmetric parameter
 * combinations produce exact agreement) get slope NaN instead of a garbage
 * fit.
 */
struct ConvergenceStudy {
  Side side = Side::Left;
  std::vector<double> hs;
  std::vector<double> reference_moments;    // of nu_{x,T}, order 0..k_max
  std::vector<std::vector<double>> errors;  // errors[i][k], per h then per order
  std::vector<double> slopes;               // per order; NaN when degenerate
};

inline ConvergenceStudy convergence_study(const ProcessParams& params, double x, double T,
                                          int k_max, const std::vector<double>& hs, int N,
                                          Side side) {
  if (!(T > 0.0)) throw InvalidTime("convergence study requires T > 0");
  if (hs.empty()) throw std::invalid_argument("h sweep must be nonempty");
  for (double h : hs) {
    if (!(h > 0.0)) throw std::invalid_argument("h sweep entries must be positive");
    if (side == Side::Left && !(T - h >= 0.0)) {
      throw std::invalid_argument("left-sided sweep requires T - h >= 0");
    }
  }

  ConvergenceStudy study;
  study.side = side;
  study.hs = hs;
  study.reference_moments = moments(nu_measure(params, x, T, N), k_max);
  for (double h : hs) {
    const DiscreteMeasure m = side == Side::Left
                                  ? rescaled_second_diff_measure(params, x, T - h, T, N)
                                  : rescaled_second_diff_measure(params, x, T, T + h, N);
    const std::vector<double> mo = moments(m, k_max);
    std::vector<double> err(static_cast<std::size_t>(k_max) + 1);
    for (int k = 0; k <= k_max; ++k) {
      err[static_cast<std::size_t>(k)] =
          std::abs(mo[static_cast<std::size_t>(k)] -
                   study.reference_moments[static_cast<std::size_t>(k)]);
    }
    study.errors.push_back(std::move(err));
  }

  study.slopes.assign(static_cast<std::size_t>(k_max) + 1,
                      std::numeric_limits<double>::quiet_NaN());
  for (int k = 0; k <= k_max; ++k) {
    const double floor_k =
        1e-12 * (1.0 + std::abs(study.reference_moments[static_cast<std::size_t>(k)]));
    std::vector<double> errs;
    errs.reserve(hs.size());
    bool fit = true;
    for (std::size_t i = 0; i < hs.size(); ++i) {
      const double e = study.errors[i][static_cast<std::size_t>(k)];
      if (e <= floor_k) {
        fit = false;  // exact within rounding; nothing to fit
        break;
      }
      errs.push_back(e);
    }
    if (fit && hs.size() >= 2) {
      study.slopes[static_cast<std::size_t>(k)] = fit_loglog_slope(hs, errs);
    }
  }
  return study;
}

}  // namespace qmeixner
