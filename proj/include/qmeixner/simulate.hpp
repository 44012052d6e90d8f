#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qmeixner/markov.hpp"
#include "qmeixner/qnum.hpp"
#include "qmeixner/spectra.hpp"

namespace qmeixner {

/// Fixed-increment 64-bit finalizer; statistically solid and bijective, so
/// chaining it over (seed, path, step) gives collision-free substreams.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based uniform draw on [0, 1), keyed by (seed, path, step). No
/// sequential state: any draw can be produced independently of any other,
/// which is what makes path generation order-independent and parallel-safe.
inline double unit_uniform(std::uint64_t seed, std::uint64_t path, std::uint64_t step) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ path);
  k = splitmix64(k ^ step);
  return static_cast<double>(k >> 11) * 0x1.0p-53;
}

/// Inverse-CDF draw from a discrete measure: the first node whose cumulative
/// weight exceeds u.
inline double sample_from_measure(const DiscreteMeasure& m, double u) {
  if (!(u >= 0.0 && u < 1.0)) {
    throw std::invalid_argument("sample_from_measure requires u in [0, 1)");
  }
  double cum = 0.0;
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    cum += m.weights[i];
    if (cum > u) return m.nodes[i];
  }
  return m.nodes.back();  // cumulative rounding left u above the final sum
}

/// Trajectories of the process on a fixed time grid. values[p][i] is path p
/// at times[i]; every path starts at x0.
struct PathSample {
  std::vector<double> times;
  std::vector<std::vector<double>> values;

  int n_paths() const { return static_cast<int>(values.size()); }
  int n_times() const { return static_cast<int>(times.size()); }
};

namespace detail {
inline void validate_time_grid(const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("time grid must be nonempty");
  if (!(times.front() >= 0.0)) throw std::invalid_argument("time grid must start at t >= 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw std::invalid_argument("time grid must be strictly increasing");
    }
  }
}
}  // namespace detail

/// One path, fully determined by (seed, path_index): each step discretizes
/// the transition kernel out of the current state with an N-point rule and
/// draws from it with the counter RNG.
inline std::vector<double> simulate_single_path(const ProcessParams& params, double x0,
                                                const std::vector<double>& times, int N,
                                                std::uint64_t seed, std::uint64_t path_index) {
  detail::validate_time_grid(times);
  std::vector<double> v(times.size());
  v[0] = x0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const DiscreteMeasure kernel = transition_measure(params, v[i], times[i], times[i + 1], N);
    v[i + 1] = sample_from_measure(kernel, unit_uniform(seed, path_index, i));
  }
  return v;
}

/// Same per-path law and draws as simulate_single_path, but stepped across
/// all paths at once so each step's kernels can be cached: every state
/// reachable at step i is one of at most N nodes of a step-(i-1) kernel, so
/// the number of distinct (state, step) rules is tiny next to n_paths * steps.
/// Kernels are pure functions of the exact state bits, so caching cannot
/// change any sampled value.
inline PathSample simulate_paths(const ProcessParams& params, double x0,
                                 const std::vector<double>& times, int n_paths, int N,
                                 std::uint64_t seed) {
  detail::validate_time_grid(times);
  if (n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  PathSample ps;
  ps.times = times;
  ps.values.assign(static_cast<std::size_t>(n_paths), std::vector<double>(times.size()));
  for (auto& path : ps.values) path[0] = x0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    std::unordered_map<std::uint64_t, DiscreteMeasure> kernels;
    for (int p = 0; p < n_paths; ++p) {
      const double state = ps.values[static_cast<std::size_t>(p)][i];
      auto [it, inserted] = kernels.try_emplace(std::bit_cast<std::uint64_t>(state));
      if (inserted) {
        it->second = transition_measure(params, state, times[i], times[i + 1], N);
      }
      ps.values[static_cast<std::size_t>(p)][i + 1] = sample_from_measure(
          it->second, unit_uniform(seed, static_cast<std::uint64_t>(p), i));
    }
  }
  return ps;
}

/// Cross-sectional summaries used by the statistical checks.
struct EmpiricalStats {
  std::vector<double> mean;            // per time point
  std::vector<double> variance;        // per time point, n-1 denominator
  std::vector<double> increment_mean;  // mean of X_{t_{i+1}} - X_{t_i}, per step
};

inline EmpiricalStats empirical_stats(const PathSample& ps) {
  const int np = ps.n_paths();
  const int nt = ps.n_times();
  if (np < 2) throw std::invalid_argument("empirical_stats needs at least 2 paths");

  EmpiricalStats st;
  st.mean.assign(static_cast<std::size_t>(nt), 0.0);
  st.variance.assign(static_cast<std::size_t>(nt), 0.0);
  st.increment_mean.assign(static_cast<std::size_t>(nt) - 1, 0.0);

  for (const auto& path : ps.values) {
    for (int i = 0; i < nt; ++i) st.mean[static_cast<std::size_t>(i)] += path[static_cast<std::size_t>(i)];
  }
  for (double& m : st.mean) m /= static_cast<double>(np);

  for (const auto& path : ps.values) {
    for (int i = 0; i < nt; ++i) {
      const double d = path[static_cast<std::size_t>(i)] - st.mean[static_cast<std::size_t>(i)];
      st.variance[static_cast<std::size_t>(i)] += d * d;
    }
    for (int i = 0; i + 1 < nt; ++i) {
      st.increment_mean[static_cast<std::size_t>(i)] +=
          path[static_cast<std::size_t>(i) + 1] - path[static_cast<std::size_t>(i)];
    }
  }
  for (double& v : st.variance) v /= static_cast<double>(np - 1);
  for (double& r : st.increment_mean) r /= static_cast<double>(np);
  return st;
}

}  // namespace qmeixner
