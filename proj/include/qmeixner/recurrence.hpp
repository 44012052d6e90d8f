#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qmeixner/errors.hpp"
#include "qmeixner/poly.hpp"
#include "qmeixner/qnum.hpp"

namespace qmeixner {

/**
 * Coefficients (a_n, b_n) of a monic three-term recurrence
 *
 *   p_{n+1}(y) = (y - a_n) p_n(y) - b_n p_{n-1}(y),   p_0 = 1, p_{-1} = 0.
 *
 * a_n is defined for n >= 0 and b_n for n >= 1; b_0 is never consulted.
 * Values are memoized on first access; the memo is shared between copies and
 * guarded by a mutex, so one RecurrenceCoeffs value can serve concurrent
 * readers. Indices are capped (kMaxIndex) to catch runaway loops.
 *
 * If require_positive_b is set, any computed b_n <= 0 throws
 * NonPositiveRecurrence immediately: the families below that feed quadrature
 * are positive-definite on their stated parameter domains, so a violation
 * means the caller left that domain.
 */
class RecurrenceCoeffs {
 public:
  using CoeffFn = std::function<double(int)>;
  static constexpr int kMaxIndex = 1024;

  RecurrenceCoeffs(CoeffFn a_fn, CoeffFn b_fn, std::string label,
                   bool require_positive_b = false)
      : state_(std::make_shared<State>()),
        label_(std::move(label)),
        require_positive_b_(require_positive_b) {
    state_->a_fn = std::move(a_fn);
    state_->b_fn = std::move(b_fn);
  }

  double a(int n) const {
    check_index(n, 0);
    std::lock_guard<std::mutex> lock(state_->mu);
    auto& memo = state_->a_memo;
    while (static_cast<int>(memo.size()) <= n) {
      memo.push_back(state_->a_fn(static_cast<int>(memo.size())));
    }
    return memo[static_cast<std::size_t>(n)];
  }

  double b(int n) const {
    check_index(n, 1);
    std::lock_guard<std::mutex> lock(state_->mu);
    auto& memo = state_->b_memo;  // memo[i] holds b_{i+1}
    while (static_cast<int>(memo.size()) < n) {
      int idx = static_cast<int>(memo.size()) + 1;
      double value = state_->b_fn(idx);
      if (require_positive_b_ && !(value > 0.0)) {
        throw NonPositiveRecurrence(idx);
      }
      memo.push_back(value);
    }
    return memo[static_cast<std::size_t>(n - 1)];
  }

  const std::string& label() const { return label_; }

 private:
  static void check_index(int n, int lo) {
    if (n < lo || n > kMaxIndex) {
      throw std::invalid_argument("recurrence index " + std::to_string(n) +
                                  " outside [" + std::to_string(lo) + ", " +
                                  std::to_string(kMaxIndex) + "]");
    }
  }

  struct State {
    CoeffFn a_fn;
    CoeffFn b_fn;
    std::mutex mu;
    std::vector<double> a_memo;
    std::vector<double> b_memo;
  };
  std::shared_ptr<State> state_;
  std::string label_;
  bool require_positive_b_;
};

/**
 * Recurrence of the monic polynomials orthogonal w.r.t. the transition
 * measure P_{s,t}(x, dy):
 *
 *   a_n = theta [n]_q + x q^n
 *   b_n = (t - s q^{n-1} + tau [n-1]_q) [n]_q
 *
 * For 0 <= s < t, |q| < 1, tau >= 0 every b_n is positive:
 * t - s q^{n-1} >= t - s > 0 and [n]_q > 0.
 */
inline RecurrenceCoeffs transition_recurrence(const ProcessParams& params, double x,
                                              double s, double t) {
  if (!(s >= 0.0) || !(s < t)) {
    throw InvalidTimeOrder("transition requires 0 <= s < t, got s = " + std::to_string(s) +
                           ", t = " + std::to_string(t));
  }
  const double q = params.q, theta = params.theta, tau = params.tau;
  return RecurrenceCoeffs(
      [theta, q, x](int n) { return theta * q_bracket(n, q) + x * std::pow(q, n); },
      [q, tau, s, t](int n) {
        return (t - s * std::pow(q, n - 1) + tau * q_bracket(n - 1, q)) * q_bracket(n, q);
      },
      "transition(x=" + std::to_string(x) + ", s=" + std::to_string(s) +
          ", t=" + std::to_string(t) + ")",
      /*require_positive_b=*/true);
}

/**
 * Recurrence of the monic polynomials orthogonal w.r.t. nu_{x,t}, the measure
 * representing the weak generator:
 *
 *   a_n = theta [n+1]_q + x q^{n+1}
 *   b_n = ((1-q) t + tau) [n]_q [n+1]_q
 *
 * positive for t > 0 since (1-q) t + tau > 0.
 */
inline RecurrenceCoeffs nu_recurrence(const ProcessParams& params, double x, double t) {
  if (!(t > 0.0)) {
    throw InvalidTime("nu measure requires t > 0, got t = " + std::to_string(t));
  }
  const double q = params.q, theta = params.theta, tau = params.tau;
  return RecurrenceCoeffs(
      [theta, q, x](int n) { return theta * q_bracket(n + 1, q) + x * std::pow(q, n + 1); },
      [q, tau, t](int n) {
        return ((1.0 - q) * t + tau) * q_bracket(n, q) * q_bracket(n + 1, q);
      },
      "nu(x=" + std::to_string(x) + ", t=" + std::to_string(t) + ")",
      /*require_positive_b=*/true);
}

/**
 * Recurrence of the martingale polynomials M_n(y; t): the transition
 * coefficients specialized to x = 0, s = 0,
 *
 *   a_n = theta [n]_q,   b_n = (t + tau [n-1]_q) [n]_q.
 *
 * Valid for all t >= 0 (at t = 0 with tau = 0 the recurrence degenerates to
 * b_n = 0, which is fine for evaluation though not for quadrature, hence no
 * positivity enforcement here).
 */
inline RecurrenceCoeffs martingale_recurrence(const ProcessParams& params, double t) {
  if (!(t >= 0.0)) {
    throw InvalidTime("martingale recurrence requires t >= 0, got t = " + std::to_string(t));
  }
  const double q = params.q, theta = params.theta, tau = params.tau;
  return RecurrenceCoeffs(
      [theta, q](int n) { return theta * q_bracket(n, q); },
      [q, tau, t](int n) { return (t + tau * q_bracket(n - 1, q)) * q_bracket(n, q); },
      "martingale(t=" + std::to_string(t) + ")");
}

/// Values p_0(y), ..., p_{n_max}(y) by the forward recurrence.
inline std::vector<double> eval_family(const RecurrenceCoeffs& rec, int n_max, double y) {
  if (n_max < 0) throw std::invalid_argument("eval_family requires n_max >= 0");
  std::vector<double> p(static_cast<std::size_t>(n_max) + 1);
  p[0] = 1.0;
  if (n_max == 0) return p;
  p[1] = y - rec.a(0);
  for (int n = 1; n < n_max; ++n) {
    p[static_cast<std::size_t>(n) + 1] =
        (y - rec.a(n)) * p[static_cast<std::size_t>(n)] -
        rec.b(n) * p[static_cast<std::size_t>(n) - 1];
  }
  return p;
}

/// The n-th member of the family as an explicit coefficient vector.
inline Poly family_poly(const RecurrenceCoeffs& rec, int n) {
  if (n < 0) throw std::invalid_argument("family_poly requires n >= 0");
  Poly prev;                  // p_{-1} = 0
  Poly cur = Poly::constant(1.0);
  for (int k = 0; k < n; ++k) {
    Poly next = mul_by_linear(cur, rec.a(k));
    if (k >= 1) next = add(next, scale(prev, -rec.b(k)));
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// M_n(y; t) in the monomial basis.
inline Poly martingale_poly(const ProcessParams& params, int n, double t) {
  return family_poly(martingale_recurrence(params, t), n);
}

/**
 * d/dt M_n(y; t), from differentiating the recurrence in t. Only b_n depends
 * on t (with d b_n / dt = [n]_q), so writing D_n = d/dt M_n:
 *
 *   D_{n+1} = (y - theta [n]_q) D_n - [n]_q M_{n-1} - (t + tau [n-1]_q) [n]_q D_{n-1},
 *   D_0 = D_1 = 0.
 */
inline Poly martingale_poly_dt(const ProcessParams& params, int n, double t) {
  if (n < 0) throw std::invalid_argument("martingale_poly_dt requires n >= 0");
  RecurrenceCoeffs rec = martingale_recurrence(params, t);
  const double q = params.q;
  Poly m_prev;                     // M_{-1} = 0
  Poly m_cur = Poly::constant(1.0);
  Poly d_prev;                     // D_{-1}, unused at k = 0
  Poly d_cur;                      // D_0 = 0
  for (int k = 0; k < n; ++k) {
    Poly d_next = mul_by_linear(d_cur, rec.a(k));
    if (k >= 1) {
      d_next = add(d_next, scale(m_prev, -q_bracket(k, q)));
      d_next = add(d_next, scale(d_prev, -rec.b(k)));
    }
    Poly m_next = mul_by_linear(m_cur, rec.a(k));
    if (k >= 1) m_next = add(m_next, scale(m_prev, -rec.b(k)));
    d_prev = std::move(d_cur);
    d_cur = std::move(d_next);
    m_prev = std::move(m_cur);
    m_cur = std::move(m_next);
  }
  return d_cur;
}

/**
 * Coefficients c_0..c_n with p = sum_k c_k M_k(.; t), by back-substitution on
 * the triangular (monic) system: repeatedly read off the leading coefficient
 * and subtract that multiple of the matching martingale polynomial.
 *
 * Warns on stderr once if any |c_k| exceeds 1e12: the conversion is then
 * ill-conditioned and downstream residuals lose meaning.
 */
inline std::vector<double> to_martingale_basis(const Poly& p, const ProcessParams& params,
                                               double t) {
  const int n = std::max(0, p.degree());
  RecurrenceCoeffs rec = martingale_recurrence(params, t);
  std::vector<Poly> m(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) m[static_cast<std::size_t>(k)] = family_poly(rec, k);

  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  Poly r = p;
  bool warned = false;
  for (int k = n; k >= 0; --k) {
    const double ck = r[k];
    c[static_cast<std::size_t>(k)] = ck;
    if (ck != 0.0) {
      r = add(r, scale(m[static_cast<std::size_t>(k)], -ck));
    }
    if (!warned && std::abs(ck) > 1e12) {
      std::cerr << "warning: martingale basis change is ill-conditioned (|c_" << k
                << "| = " << std::abs(ck) << ")\n";
      warned = true;
    }
  }
  return c;
}

/// Inverse of to_martingale_basis: sum_k c_k M_k(.; t) in the monomial basis.
inline Poly from_martingale_basis(const std::vector<double>& c, const ProcessParams& params,
                                  double t) {
  RecurrenceCoeffs rec = martingale_recurrence(params, t);
  Poly out;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] != 0.0) {
      out = add(out, scale(family_poly(rec, static_cast<int>(k)), c[k]));
    }
  }
  return out;
}

/**
 * Residuals of the coupled polynomial identities tying the transition family
 * at coincident times to the martingale family. With Q_j denoting members of
 * the transition-measure family and [n k] the q-binomial:
 *
 *  (zero sum)       0 = sum_{k=0}^{n} [n k] Q_{n-k}(0 | x,t,0) M_k(x; t),  n >= 1
 *  (expansion)      Q_{n+1}(y | x,t,t)
 *                     = sum_{k=1}^{n+1} [n+1 k] Q_{n+1-k}(0 | x,t,0) (M_k(y;t) - M_k(x;t))
 *  (factorization)  Q_{n+1}(y | x,t,t) = (y - x) W_n(y)
 *
 * where W_n runs on the nu_{x,t} recurrence. The expansion is also evaluated
 * with the sum truncated at k = n (expansion_truncated), purely as a
 * diagnostic; only the full sum is an identity.
 *
 * "Q_j(0 | x,t,0)" means the transition coefficient formulas evaluated with
 * the time pair (s,t) replaced by (t,0); that family has negative b_n, so it
 * is built raw, without positivity enforcement, and never used for quadrature.
 * Likewise Q(. | x,t,t) has b_1 = 0. Both are evaluated by the forward
 * recurrence only.
 *
 * Residuals are reported per degree together with the magnitude of the
 * largest term entering each identity, so callers can form relative errors.
 */
struct PolynomialIdentityReport {
  int n_max = 0;
  // Indexed by n = 0..n_max; entry 0 of the zero-sum rows is trivially 0.
  std::vector<double> coincident_direct;        // |Q_n(x | x,t,t)| by forward recurrence
  std::vector<double> zero_sum_residual;        // |sum_{k=0}^n ...| (0 for n = 0)
  std::vector<double> zero_sum_scale;           // max |term| in the zero sum
  // Indexed by n = 0..n_max - 1, describing degree n+1 members.
  std::vector<double> expansion_residual;       // max over sample y of expansion defect
  std::vector<double> expansion_truncated;      // same with the k = n+1 term dropped
  std::vector<double> expansion_scale;          // max |Q_{n+1}(y|x,t,t)| over sample y, >= 1
  std::vector<double> factorization_residual;   // max over sample y
  std::vector<double> factorization_scale;

  /// Largest residual relative to its scale across everything asserted.
  double max_relative() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < zero_sum_residual.size(); ++i) {
      worst = std::max(worst, zero_sum_residual[i] / std::max(1.0, zero_sum_scale[i]));
      worst = std::max(worst, coincident_direct[i] / std::max(1.0, zero_sum_scale[i]));
    }
    for (std::size_t i = 0; i < expansion_residual.size(); ++i) {
      worst = std::max(worst, expansion_residual[i] / expansion_scale[i]);
      worst = std::max(worst, factorization_residual[i] / factorization_scale[i]);
    }
    return worst;
  }
};

namespace detail {
/// Transition-family coefficients with the time pair taken literally (raw:
/// negative or zero b_n allowed, for identity checking only).
inline RecurrenceCoeffs raw_transition_recurrence(const ProcessParams& params, double x,
                                                  double s, double t) {
  const double q = params.q, theta = params.theta, tau = params.tau;
  return RecurrenceCoeffs(
      [theta, q, x](int n) { return theta * q_bracket(n, q) + x * std::pow(q, n); },
      [q, tau, s, t](int n) {
        return (t - s * std::pow(q, n - 1) + tau * q_bracket(n - 1, q)) * q_bracket(n, q);
      },
      "raw-transition");
}
}  // namespace detail

inline PolynomialIdentityReport check_polynomial_identities(const ProcessParams& params,
                                                            double x, double t, int n_max) {
  if (!(t > 0.0)) throw InvalidTime("identity check requires t > 0");
  if (n_max < 1 || n_max > 64) {
    throw std::invalid_argument("identity check supports 1 <= n_max <= 64");
  }

  const double q = params.q;
  // Q_j(0 | x, t, 0): time pair (t, 0).
  RecurrenceCoeffs rec_t0 = detail::raw_transition_recurrence(params, x, t, 0.0);
  // Q_j(. | x, t, t): coincident times, b_1 = 0.
  RecurrenceCoeffs rec_tt = detail::raw_transition_recurrence(params, x, t, t);
  RecurrenceCoeffs rec_m = martingale_recurrence(params, t);
  RecurrenceCoeffs rec_w = nu_recurrence(params, x, t);

  const std::vector<double> q0 = eval_family(rec_t0, n_max + 1, 0.0);
  const std::vector<double> mx = eval_family(rec_m, n_max + 1, x);
  const std::vector<double> qtt_x = eval_family(rec_tt, n_max, x);

  PolynomialIdentityReport rep;
  rep.n_max = n_max;
  rep.coincident_direct.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  rep.zero_sum_residual.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
  rep.zero_sum_scale.assign(static_cast<std::size_t>(n_max) + 1, 1.0);
  for (int n = 1; n <= n_max; ++n) {
    double sum = 0.0, scale_n = 0.0;
    for (int k = 0; k <= n; ++k) {
      const double term = q_binomial(n, k, q) * q0[static_cast<std::size_t>(n - k)] *
                          mx[static_cast<std::size_t>(k)];
      sum += term;
      scale_n = std::max(scale_n, std::abs(term));
    }
    rep.coincident_direct[static_cast<std::size_t>(n)] =
        std::abs(qtt_x[static_cast<std::size_t>(n)]);
    rep.zero_sum_residual[static_cast<std::size_t>(n)] = std::abs(sum);
    rep.zero_sum_scale[static_cast<std::size_t>(n)] = std::max(1.0, scale_n);
  }

  // Deterministic sample abscissas spread over the region where the families
  // have their mass; residuals are polynomial identities, so any points do.
  std::mt19937_64 gen(0x714d656978ULL);
  const double spread = 3.0 * std::max(1.0, std::sqrt(t + params.tau));
  const double lo = std::min(x, params.theta) - spread;
  const double hi = std::max(x, params.theta) + spread;
  std::uniform_real_distribution<double> uy(lo, hi);
  std::vector<double> ys(24);
  for (double& y : ys) y = uy(gen);

  rep.expansion_residual.assign(static_cast<std::size_t>(n_max), 0.0);
  rep.expansion_truncated.assign(static_cast<std::size_t>(n_max), 0.0);
  rep.expansion_scale.assign(static_cast<std::size_t>(n_max), 1.0);
  rep.factorization_residual.assign(static_cast<std::size_t>(n_max), 0.0);
  rep.factorization_scale.assign(static_cast<std::size_t>(n_max), 1.0);

  for (double y : ys) {
    const std::vector<double> qtt_y = eval_family(rec_tt, n_max, y);
    const std::vector<double> my = eval_family(rec_m, n_max, y);
    const std::vector<double> w = eval_family(rec_w, n_max - 1, y);
    for (int n = 0; n < n_max; ++n) {
      double sum = 0.0;
      double last_term = 0.0;
      for (int k = 1; k <= n + 1; ++k) {
        const double term = q_binomial(n + 1, k, q) * q0[static_cast<std::size_t>(n + 1 - k)] *
                            (my[static_cast<std::size_t>(k)] - mx[static_cast<std::size_t>(k)]);
        sum += term;
        if (k == n + 1) last_term = term;
      }
      const double lhs = qtt_y[static_cast<std::size_t>(n) + 1];
      auto& scale_n = rep.expansion_scale[static_cast<std::size_t>(n)];
      scale_n = std::max(scale_n, std::abs(lhs));
      rep.expansion_residual[static_cast<std::size_t>(n)] =
          std::max(rep.expansion_residual[static_cast<std::size_t>(n)], std::abs(lhs - sum));
      rep.expansion_truncated[static_cast<std::size_t>(n)] =
          std::max(rep.expansion_truncated[static_cast<std::size_t>(n)],
                   std::abs(lhs - (sum - last_term)));

      const double fact = (y - x) * w[static_cast<std::size_t>(n)];
      auto& fscale = rep.factorization_scale[static_cast<std::size_t>(n)];
      fscale = std::max(fscale, std::abs(lhs));
      rep.factorization_residual[static_cast<std::size_t>(n)] =
          std::max(rep.factorization_residual[static_cast<std::size_t>(n)],
                   std::abs(lhs - fact));
    }
  }
  return rep;
}

}  // namespace qmeixner
