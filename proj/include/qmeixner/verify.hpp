#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qmeixner/markov.hpp"
#include "qmeixner/poly.hpp"
#include "qmeixner/qnum.hpp"
#include "qmeixner/recurrence.hpp"
#include "qmeixner/serialize.hpp"
#include "qmeixner/spectra.hpp"

namespace qmeixner {

/// Tolerances of the verification suites, pinned once here. Residuals are
/// absolute or guarded-relative (|got - want| / (1 + |want|)) as noted.
namespace tol {
constexpr double martingale_mean = 1e-10;        // absolute
constexpr double conditional_variance = 1e-10;   // absolute
constexpr double martingale_projection = 1e-8;   // guarded relative
constexpr double chapman_kolmogorov = 1e-8;      // guarded relative
constexpr double h_lowering = 1e-8;              // guarded relative
constexpr double c_operator_forms = 1e-8;        // guarded relative
constexpr double generator_routes = 1e-8;        // guarded relative
constexpr double generator_quadratic = 1e-10;    // absolute
constexpr double polynomial_identities = 1e-8;   // relative to term scale
constexpr double smooth_generator_fd = 1e-3;     // guarded relative
constexpr double q0_closed_form = 1e-9;          // guarded relative
constexpr double q_brownian_reparam = 1e-9;      // guarded relative
constexpr double convergence_slope = 0.2;        // |slope - 1|
constexpr double quadrature_engine = 1e-8;       // relative to norm scale
}  // namespace tol

/// One evaluation point of a verify suite. Fields a given check does not
/// consume stay empty and serialize as null, so the JSON schema is stable.
struct GridPoint {
  std::optional<double> q, theta, tau, x, s, t, u;
};

struct CheckReport {
  std::string check;
  std::vector<GridPoint> grid;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline std::string grid_point_to_json(const GridPoint& g) {
  const auto field = [](const char* name, const std::optional<double>& v) {
    return "\"" + std::string(name) + "\":" + (v ? json_number(*v) : std::string("null"));
  };
  return "{" + field("q", g.q) + "," + field("theta", g.theta) + "," + field("tau", g.tau) +
         "," + field("x", g.x) + "," + field("s", g.s) + "," + field("t", g.t) + "," +
         field("u", g.u) + "}";
}

inline std::string check_report_to_json(const CheckReport& r) {
  std::string out = "{\"check\":\"" + json_escape(r.check) + "\",\"grid\":[";
  for (std::size_t i = 0; i < r.grid.size(); ++i) {
    if (i) out += ",";
    out += grid_point_to_json(r.grid[i]);
  }
  out += "],\"max_residual\":" + json_number(r.max_residual) +
         ",\"tolerance\":" + json_number(r.tolerance) + ",\"pass\":" +
         (r.pass ? "true" : "false") + "}";
  return out;
}

inline bool all_pass(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports) {
    if (!r.pass) return false;
  }
  return true;
}

inline std::string reports_to_json(const std::vector<CheckReport>& reports) {
  std::string out = "{\"checks\":[";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (i) out += ",";
    out += check_report_to_json(reports[i]);
  }
  out += "],\"all_pass\":";
  out += all_pass(reports) ? "true" : "false";
  out += "}\n";
  return out;
}

/// The built-in verification grid: sign cases of q, zero and nonzero theta
/// and tau, states on both sides of the origin, one fixed time triple.
struct VerifyGrid {
  std::vector<double> qs{-0.5, 0.0, 0.3, 0.7};
  std::vector<double> thetas{0.0, 0.3};
  std::vector<double> taus{0.0, 0.2};
  std::vector<double> xs{-1.0, 0.0, 0.4};
  double s = 0.2;
  double t = 0.7;
  double u = 1.3;
};

namespace detail {

/// Closed-form raw moments of the semicircle law of given mean and variance:
/// standardized even central moments are the Catalan numbers; the shift to
/// raw moments is the plain binomial expansion. Quadrature-free oracle.
inline std::vector<double> semicircle_raw_moments(double mean, double variance, int k_max) {
  static const double catalan[] = {1.0, 1.0, 2.0, 5.0, 14.0, 42.0, 132.0, 429.0};
  if (k_max < 0 || k_max > 14) {
    throw std::invalid_argument("semicircle moment oracle supports orders 0..14");
  }
  std::vector<double> central(static_cast<std::size_t>(k_max) + 1, 0.0);
  double vpow = 1.0;
  for (int j = 0; 2 * j <= k_max; ++j) {
    central[static_cast<std::size_t>(2 * j)] = catalan[j] * vpow;
    vpow *= variance;
  }
  std::vector<double> raw(static_cast<std::size_t>(k_max) + 1, 0.0);
  for (int k = 0; k <= k_max; ++k) {
    double binom = 1.0;  // binom(k, j), updated multiplicatively
    for (int j = 0; j <= k; ++j) {
      raw[static_cast<std::size_t>(k)] +=
          binom * std::pow(mean, k - j) * central[static_cast<std::size_t>(j)];
      binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
    }
  }
  return raw;
}

/// Run fn over the (q, theta, tau, x) product, recording one grid entry per
/// point; with_s/with_t/with_u tag which times the check consumed.
template <class Fn>
void scan_grid(const VerifyGrid& g, CheckReport& rep, bool with_s, bool with_t, bool with_u,
               Fn&& fn) {
  for (double q : g.qs) {
    for (double theta : g.thetas) {
      for (double tau : g.taus) {
        for (double x : g.xs) {
          const ProcessParams params(q, theta, tau);
          const double r = fn(params, x);
          GridPoint pt;
          pt.q = q;
          pt.theta = theta;
          pt.tau = tau;
          pt.x = x;
          if (with_s) pt.s = g.s;
          if (with_t) pt.t = g.t;
          if (with_u) pt.u = g.u;
          rep.grid.push_back(pt);
          rep.max_residual = std::max(rep.max_residual, r);
        }
      }
    }
  }
  rep.pass = rep.max_residual < rep.tolerance;
}

}  // namespace detail

inline CheckReport check_martingale_mean(const VerifyGrid& g, int N) {
  CheckReport rep{"martingale_mean", {}, 0.0, tol::martingale_mean, false};
  detail::scan_grid(g, rep, true, true, false, [&](const ProcessParams& params, double x) {
    const double mean =
        apply_transition_quad([](double y) { return y; }, params, x, g.s, g.t, N);
    return std::abs(mean - x);
  });
  return rep;
}

inline CheckReport check_conditional_variance(const VerifyGrid& g, int N) {
  CheckReport rep{"conditional_variance", {}, 0.0, tol::conditional_variance, false};
  detail::scan_grid(g, rep, true, true, false, [&](const ProcessParams& params, double x) {
    const double var = apply_transition_quad(
        [x](double y) { return (y - x) * (y - x); }, params, x, g.s, g.t, N);
    return std::abs(var - (g.t - g.s));
  });
  return rep;
}

/// The kernel maps each degree-n martingale polynomial at horizon t to its
/// value at (x, s); quadrature vs recurrence evaluation, n <= 10.
inline CheckReport check_martingale_projection(const VerifyGrid& g, int N) {
  constexpr int n_max = 10;
  CheckReport rep{"martingale_projection", {}, 0.0, tol::martingale_projection, false};
  detail::scan_grid(g, rep, true, true, false, [&](const ProcessParams& params, double x) {
    const RecurrenceCoeffs rec_t = martingale_recurrence(params, g.t);
    const DiscreteMeasure m = transition_measure(params, x, g.s, g.t, N);
    std::vector<double> applied(n_max + 1, 0.0);
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
      const std::vector<double> col = eval_family(rec_t, n_max, m.nodes[i]);
      for (int n = 0; n <= n_max; ++n) {
        applied[static_cast<std::size_t>(n)] += m.weights[i] * col[static_cast<std::size_t>(n)];
      }
    }
    const std::vector<double> expected =
        eval_family(martingale_recurrence(params, g.s), n_max, x);
    double worst = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      worst = std::max(worst,
                       std::abs(applied[static_cast<std::size_t>(n)] -
                                expected[static_cast<std::size_t>(n)]) /
                           (1.0 + std::abs(expected[static_cast<std::size_t>(n)])));
    }
    return worst;
  });
  return rep;
}

inline CheckReport check_chapman_kolmogorov_suite(const VerifyGrid& g, int N) {
  CheckReport rep{"chapman_kolmogorov", {}, 0.0, tol::chapman_kolmogorov, false};
  detail::scan_grid(g, rep, true, true, true, [&](const ProcessParams& params, double x) {
    return check_chapman_kolmogorov(params, x, g.s, g.t, g.u, 10, N).max_residual;
  });
  return rep;
}

/// H_t lowers the martingale family: H_t M_k = [k]_q M_{k-1}, k <= 10.
inline CheckReport check_h_lowering(const VerifyGrid& g, int N) {
  constexpr int k_max = 10;
  CheckReport rep{"h_lowering", {}, 0.0, tol::h_lowering, false};
  detail::scan_grid(g, rep, false, true, false, [&](const ProcessParams& params, double x) {
    const RecurrenceCoeffs rec_t = martingale_recurrence(params, g.t);
    const std::vector<double> mx = eval_family(rec_t, k_max, x);
    double worst = 0.0;
    for (int k = 0; k <= k_max; ++k) {
      const double got = h_operator(family_poly(rec_t, k), params, x, g.t, N);
      const double expected =
          k == 0 ? 0.0 : q_bracket(k, params.q) * mx[static_cast<std::size_t>(k) - 1];
      worst = std::max(worst, std::abs(got - expected) / (1.0 + std::abs(expected)));
    }
    return worst;
  });
  return rep;
}

/// Both routes to C_t agree on random degree-6 polynomials (20 per point).
inline CheckReport check_c_operator_forms(const VerifyGrid& g, int N) {
  CheckReport rep{"c_operator_forms", {}, 0.0, tol::c_operator_forms, false};
  std::uint64_t point_index = 0;
  detail::scan_grid(g, rep, false, true, false, [&](const ProcessParams& params, double x) {
    std::mt19937_64 gen(0xC0FFEEULL ^ (point_index++ * 0x9E3779B97F4A7C15ULL));
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> c(7);
      for (double& ci : c) ci = coeff(gen);
      const OperatorForms forms = c_operator_forms(Poly(c), params, x, g.t, N);
      worst = std::max(worst, std::abs(forms.integral_form - forms.difference_form) /
                                  (1.0 + std::abs(forms.integral_form)));
    }
    return worst;
  });
  return rep;
}

/// Quadrature route vs time-derivative route to the generator on the
/// martingale family, n <= 10.
inline CheckReport check_generator_routes(const VerifyGrid& g, int N) {
  constexpr int n_max = 10;
  CheckReport rep{"generator_routes", {}, 0.0, tol::generator_routes, false};
  detail::scan_grid(g, rep, false, true, false, [&](const ProcessParams& params, double x) {
    double worst = 0.0;
    for (int n = 0; n <= n_max; ++n) {
      const double via_quad =
          generator_poly(martingale_poly(params, n, g.t), params, x, g.t, N);
      const double via_dt = generator_martingale(params, n, x, g.t);
      worst = std::max(worst, std::abs(via_quad - via_dt) / (1.0 + std::abs(via_dt)));
    }
    return worst;
  });
  return rep;
}

inline CheckReport check_generator_quadratic(const VerifyGrid& g, int N) {
  CheckReport rep{"generator_quadratic", {}, 0.0, tol::generator_quadratic, false};
  detail::scan_grid(g, rep, false, true, false, [&](const ProcessParams& params, double x) {
    return std::abs(generator_poly(Poly::monomial(2), params, x, g.t, N) - 1.0);
  });
  return rep;
}

inline CheckReport check_polynomial_identity_suite(const VerifyGrid& g, int N) {
  (void)N;  // recurrence-only check, no quadrature
  CheckReport rep{"polynomial_identities", {}, 0.0, tol::polynomial_identities, false};
  detail::scan_grid(g, rep, false, true, false, [&](const ProcessParams& params, double x) {
    return check_polynomial_identities(params, x, g.t, 10).max_relative();
  });
  return rep;
}

/// Difference quotient of the semigroup against the singular-integral form
/// on the bounded C^2 test function 1/(1+y^2).
inline CheckReport check_smooth_generator_fd(const VerifyGrid& g, int N) {
  CheckReport rep{"smooth_generator_fd", {}, 0.0, tol::smooth_generator_fd, false};
  const SmoothFn cauchy = make_cauchy();
  detail::scan_grid(g, rep, false, true, false, [&](const ProcessParams& params, double x) {
    const double smooth = generator_smooth(cauchy, params, x, g.t, N);
    const double fd = generator_fd(cauchy.f, params, x, g.t, default_fd_step(g.t), N,
                                   Side::Right);
    return std::abs(fd - smooth) / (1.0 + std::abs(smooth));
  });
  return rep;
}

/// At q = 0 the representing measure is the semicircle law of mean theta and
/// variance t + tau; moments up to order 8 against the Catalan oracle.
inline CheckReport check_q0_closed_form(const VerifyGrid& g, int N) {
  constexpr int k_max = 8;
  CheckReport rep{"q0_closed_form", {}, 0.0, tol::q0_closed_form, false};
  for (double q : g.qs) {
    if (q != 0.0) continue;
    for (double theta : g.thetas) {
      for (double tau : g.taus) {
        for (double x : g.xs) {
          const ProcessParams params(q, theta, tau);
          const std::vector<double> got = moments(nu_measure(params, x, g.t, N), k_max);
          const std::vector<double> oracle =
              detail::semicircle_raw_moments(theta, g.t + tau, k_max);
          double worst = 0.0;
          for (int k = 0; k <= k_max; ++k) {
            worst = std::max(worst, std::abs(got[static_cast<std::size_t>(k)] -
                                             oracle[static_cast<std::size_t>(k)]) /
                                        (1.0 + std::abs(oracle[static_cast<std::size_t>(k)])));
          }
          GridPoint pt;
          pt.q = q;
          pt.theta = theta;
          pt.tau = tau;
          pt.x = x;
          pt.t = g.t;
          rep.grid.push_back(pt);
          rep.max_residual = std::max(rep.max_residual, worst);
        }
      }
    }
  }
  rep.pass = rep.max_residual < rep.tolerance;
  return rep;
}

/// For theta = tau = 0 the representing measure at (x, t) coincides with the
/// transition kernel out of qx over [q^2 t, t]; node-by-node comparison.
inline CheckReport check_q_brownian_reparam(const VerifyGrid& g, int N) {
  CheckReport rep{"q_brownian_reparam", {}, 0.0, tol::q_brownian_reparam, false};
  for (double q : g.qs) {
    for (double theta : g.thetas) {
      if (theta != 0.0) continue;
      for (double tau : g.taus) {
        if (tau != 0.0) continue;
        for (double x : g.xs) {
          const ProcessParams params(q, theta, tau);
          const DiscreteMeasure nu = nu_measure(params, x, g.t, N);
          const DiscreteMeasure tr =
              transition_measure(params, q * x, q * q * g.t, g.t, N);
          double worst = 0.0;
          for (int i = 0; i < nu.size(); ++i) {
            worst = std::max(
                worst, std::abs(nu.nodes[static_cast<std::size_t>(i)] -
                                tr.nodes[static_cast<std::size_t>(i)]) /
                           (1.0 + std::abs(tr.nodes[static_cast<std::size_t>(i)])));
            worst = std::max(worst, std::abs(nu.weights[static_cast<std::size_t>(i)] -
                                             tr.weights[static_cast<std::size_t>(i)]));
          }
          GridPoint pt;
          pt.q = q;
          pt.theta = theta;
          pt.tau = tau;
          pt.x = x;
          pt.t = g.t;
          rep.grid.push_back(pt);
          rep.max_residual = std::max(rep.max_residual, worst);
        }
      }
    }
  }
  rep.pass = rep.max_residual < rep.tolerance;
  return rep;
}

/// Fitted log-log order of moment convergence of the rescaled
/// second-difference measures toward nu, both one-sided limits; the order is
/// 1 in exact arithmetic. Orders whose errors vanish identically (symmetric
/// parameter points) are skipped by convergence_study itself.
inline CheckReport check_convergence_order(const VerifyGrid& g, int N) {
  constexpr int k_max = 6;
  const std::vector<double> hs{1e-1, 1e-2, 1e-3};
  CheckReport rep{"convergence_order", {}, 0.0, tol::convergence_slope, false};
  detail::scan_grid(g, rep, false, true, false, [&](const ProcessParams& params, double x) {
    double worst = 0.0;
    for (Side side : {Side::Left, Side::Right}) {
      const ConvergenceStudy study = convergence_study(params, x, g.t, k_max, hs, N, side);
      for (int k = 1; k <= k_max; ++k) {
        const double slope = study.slopes[static_cast<std::size_t>(k)];
        if (std::isnan(slope)) continue;
        worst = std::max(worst, std::abs(slope - 1.0));
      }
    }
    return worst;
  });
  return rep;
}

/// Gauss exactness of the quadrature engine on all three recurrence families:
/// cross moments vanish for j != k with j + k <= 2N-1, diagonal moments hit
/// the product of the b's; nodes stay inside the Gershgorin interval; weights
/// are nonnegative. Run at several rule sizes.
inline CheckReport check_quadrature_engine(const VerifyGrid& g, int N) {
  (void)N;  // this check picks its own rule sizes
  CheckReport rep{"quadrature_engine", {}, 0.0, tol::quadrature_engine, false};
  detail::scan_grid(g, rep, true, true, false, [&](const ProcessParams& params, double x) {
    double worst = 0.0;
    for (int n_rule : {8, 24, 40}) {
      for (int family = 0; family < 3; ++family) {
        const RecurrenceCoeffs rec = family == 0
                                         ? transition_recurrence(params, x, g.s, g.t)
                                     : family == 1 ? nu_recurrence(params, x, g.t)
                                                   : martingale_recurrence(params, g.t);
        const JacobiMatrix J = jacobi_matrix(rec, n_rule);
        const DiscreteMeasure m = quadrature(rec, n_rule);
        const auto [lo, hi] = J.gershgorin_interval();
        const double guard =
            4.0 * std::max(std::abs(lo), std::abs(hi)) *
            std::numeric_limits<double>::epsilon();
        for (double node : m.nodes) {
          if (node < lo - guard || node > hi + guard) worst = std::max(worst, 1.0);
        }
        for (double w : m.weights) {
          if (w < 0.0) worst = std::max(worst, 1.0);
        }

        const int deg = 2 * n_rule - 1;
        std::vector<double> norm2(static_cast<std::size_t>(deg) + 1, 1.0);
        for (int j = 1; j <= deg; ++j) {
          norm2[static_cast<std::size_t>(j)] = norm2[static_cast<std::size_t>(j) - 1] * rec.b(j);
        }
        // Values and first derivatives of the whole family at each node; the
        // derivative follows the differentiated three-term recurrence.
        std::vector<std::vector<double>> vals(m.nodes.size());
        std::vector<std::vector<double>> dvals(m.nodes.size());
        for (std::size_t i = 0; i < m.nodes.size(); ++i) {
          vals[i] = eval_family(rec, deg, m.nodes[i]);
          std::vector<double>& dp = dvals[i];
          dp.assign(static_cast<std::size_t>(deg) + 1, 0.0);
          if (deg >= 1) dp[1] = 1.0;
          for (int n = 1; n < deg; ++n) {
            dp[static_cast<std::size_t>(n) + 1] =
                vals[i][static_cast<std::size_t>(n)] +
                (m.nodes[i] - rec.a(n)) * dp[static_cast<std::size_t>(n)] -
                rec.b(n) * dp[static_cast<std::size_t>(n) - 1];
          }
        }
        // The computed rule carries O(eps) node/weight perturbations; their
        // first-order effect on the quadrature sum is bounded by
        //   eps * sum_i w_i (|p_j p_k| + width * |(p_j p_k)'|)
        // which can dwarf the norm scale when a node sits far outside the
        // essential spectrum (off-support polynomial growth is exponential in
        // the degree).  Exactness is asserted on the residual above that
        // provable round-off floor.
        const double width = hi - lo;
        const double eps = std::numeric_limits<double>::epsilon();
        for (int j = 0; j <= deg; ++j) {
          for (int k = 0; k <= j && j + k <= deg; ++k) {
            if (j == k && j > n_rule - 1) continue;  // diagonal beyond exactness
            double s_jk = 0.0, cancel = 0.0, deriv = 0.0;
            for (std::size_t i = 0; i < m.nodes.size(); ++i) {
              const double pj = vals[i][static_cast<std::size_t>(j)];
              const double pk = vals[i][static_cast<std::size_t>(k)];
              const double dpj = dvals[i][static_cast<std::size_t>(j)];
              const double dpk = dvals[i][static_cast<std::size_t>(k)];
              s_jk += m.weights[i] * pj * pk;
              cancel += m.weights[i] * std::abs(pj * pk);
              deriv += m.weights[i] * (std::abs(dpj * pk) + std::abs(pj * dpk));
            }
            const double expected = j == k ? norm2[static_cast<std::size_t>(j)] : 0.0;
            const double scale = std::sqrt(norm2[static_cast<std::size_t>(j)] *
                                           norm2[static_cast<std::size_t>(k)]);
            const double floor = 8.0 * eps * (cancel + width * deriv);
            const double excess = std::max(0.0, std::abs(s_jk - expected) - floor);
            worst = std::max(worst, excess / scale);
          }
        }
      }
    }
    return worst;
  });
  return rep;
}

struct VerifyOptions {
  int N = 32;
  std::vector<std::string> only;  // empty = every check
  std::optional<double> q, theta, tau, x;  // collapse a grid axis to one value
};

inline std::vector<std::string> verify_check_names() {
  return {"martingale_mean",     "conditional_variance", "martingale_projection",
          "chapman_kolmogorov",  "h_lowering",           "c_operator_forms",
          "generator_routes",    "generator_quadratic",  "polynomial_identities",
          "smooth_generator_fd", "q0_closed_form",       "q_brownian_reparam",
          "convergence_order",   "quadrature_engine"};
}

inline std::vector<CheckReport> run_verify(const VerifyOptions& opts) {
  VerifyGrid grid;
  if (opts.q) grid.qs = {*opts.q};
  if (opts.theta) grid.thetas = {*opts.theta};
  if (opts.tau) grid.taus = {*opts.tau};
  if (opts.x) grid.xs = {*opts.x};

  using CheckFn = CheckReport (*)(const VerifyGrid&, int);
  const std::vector<std::pair<std::string, CheckFn>> table = {
      {"martingale_mean", &check_martingale_mean},
      {"conditional_variance", &check_conditional_variance},
      {"martingale_projection", &check_martingale_projection},
      {"chapman_kolmogorov", &check_chapman_kolmogorov_suite},
      {"h_lowering", &check_h_lowering},
      {"c_operator_forms", &check_c_operator_forms},
      {"generator_routes", &check_generator_routes},
      {"generator_quadratic", &check_generator_quadratic},
      {"polynomial_identities", &check_polynomial_identity_suite},
      {"smooth_generator_fd", &check_smooth_generator_fd},
      {"q0_closed_form", &check_q0_closed_form},
      {"q_brownian_reparam", &check_q_brownian_reparam},
      {"convergence_order", &check_convergence_order},
      {"quadrature_engine", &check_quadrature_engine},
  };

  for (const std::string& name : opts.only) {
    const bool known = std::any_of(table.begin(), table.end(),
                                   [&name](const auto& e) { return e.first == name; });
    if (!known) {
      std::string names;
      for (const auto& e : table) names += (names.empty() ? "" : ", ") + e.first;
      throw std::invalid_argument("unknown check '" + name + "'; available: " + names);
    }
  }

  std::vector<CheckReport> reports;
  for (const auto& [name, fn] : table) {
    if (!opts.only.empty() &&
        std::find(opts.only.begin(), opts.only.end(), name) == opts.only.end()) {
      continue;
    }
    reports.push_back(fn(grid, opts.N));
  }
  return reports;
}

}  // namespace qmeixner
