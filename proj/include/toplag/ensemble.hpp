#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "toplag/error.hpp"
#include "toplag/lattice.hpp"
#include "toplag/partition.hpp"

namespace toplag {

/// Lag curve averaged over complete paths between the two anchors.
///
/// The forward field G(x,t) weights every path prefix that reaches layer t,
/// whatever it would cost to continue to the end anchor. Here each complete
/// anchored path carries its Boltzmann weight and contributes its own lag at
/// every layer: the node it visits there, or for a diagonal step over the
/// layer, the lag shared by both ends of that step. As T -> 0 the curve
/// converges to the minimum-cost path.
struct PathEnsemble {
  std::vector<LagSample> lag;
  /// Expected sum of weighted node costs over the ensemble. The anchor node
  /// and its two successors carry unit weight and so cost nothing.
  double expected_cost = 0.0;
  /// log of the total Boltzmann weight of all anchored paths.
  double log_partition = 0.0;
  /// Expected sum of eps over every node of the path, divided by the number
  /// of layers between the anchors. The ensemble counterpart of path_energy().
  double energy = 0.0;
};

inline PathEnsemble path_ensemble(const Lattice& lat, EndpointOffsets offsets) {
  const int n = lat.n();
  validate_offsets(n, offsets);
  const SeriesIndex s = offsets.start_node();
  const SeriesIndex e = offsets.end_node(n);
  const int t_start = s.t1 + s.t2 - 2;
  const int t_end = e.t1 + e.t2 - 2;
  const double ninf = -std::numeric_limits<double>::infinity();
  const double inv_t = 1.0 / lat.temperature();

  std::vector<LayerRange> ranges;
  for (int t = t_start; t <= t_end; ++t) {
    const LayerRange r =
        t == t_start ? LayerRange{s.t2 - s.t1, s.t2 - s.t1} : layer_range(t, s, e);
    if (r.empty()) throw data_error("no anchored path reaches layer " + std::to_string(t));
    ranges.push_back(r);
  }
  auto range = [&](int t) {
    return t < t_start || t > t_end ? LayerRange{1, 0}
                                    : ranges[static_cast<std::size_t>(t - t_start)];
  };
  auto admissible = [&](int t, int x) {
    const LayerRange r = range(t);
    return x >= r.lo && x <= r.hi && ((x - r.lo) & 1) == 0;
  };
  const std::size_t width = 2 * static_cast<std::size_t>(n) + 3;
  auto cell = [&](int t, int x) {
    return static_cast<std::size_t>(t - t_start) * width + static_cast<std::size_t>(x + n + 1);
  };
  // Unclamped: the log domain has no underflow to guard against.
  auto log_weight = [&](int t, int x) {
    if (t <= t_start + 1) return 0.0;
    return -lat.epsilon(1 + (t - x) / 2, 1 + (t + x) / 2) * inv_t;
  };
  auto lse = [ninf](std::initializer_list<double> v) {
    const double m = std::max(v);
    if (m == ninf) return m;
    double acc = 0.0;
    for (double a : v) acc += std::exp(a - m);
    return m + std::log(acc);
  };

  const std::size_t layers = static_cast<std::size_t>(t_end - t_start + 1);
  std::vector<double> log_f(layers * width, ninf), log_b(layers * width, ninf);
  auto lf = [&](int t, int x) { return admissible(t, x) ? log_f[cell(t, x)] : ninf; };
  // log of w(t,x) B(t,x): the weight of entering (t,x) times everything after it
  auto lwb = [&](int t, int x) {
    return admissible(t, x) ? log_weight(t, x) + log_b[cell(t, x)] : ninf;
  };

  for (int t = t_start; t <= t_end; ++t) {
    const LayerRange r = range(t);
    for (int x = r.lo; x <= r.hi; x += 2)
      log_f[cell(t, x)] = t <= t_start + 1
                              ? 0.0
                              : log_weight(t, x) + lse({lf(t - 1, x - 1), lf(t - 1, x + 1),
                                                        lf(t - 2, x)});
  }
  for (int t = t_end; t >= t_start; --t) {
    const LayerRange r = range(t);
    for (int x = r.lo; x <= r.hi; x += 2)
      log_b[cell(t, x)] = t == t_end ? 0.0
                                     : lse({lwb(t + 1, x - 1), lwb(t + 1, x + 1), lwb(t + 2, x)});
  }

  PathEnsemble out;
  out.log_partition = log_f[cell(t_end, e.t2 - e.t1)];
  if (!std::isfinite(out.log_partition)) throw data_error("no anchored path connects the anchors");
  const double log_z = out.log_partition;

  for (int t = t_start; t <= t_end; ++t) {
    const LayerRange r = range(t);
    double num = 0.0, den = 0.0;
    for (int x = r.lo; x <= r.hi; x += 2) {
      const double p = std::exp(log_f[cell(t, x)] + log_b[cell(t, x)] - log_z);
      num += x * p;
      den += p;
      const double eps = lat.epsilon(1 + (t - x) / 2, 1 + (t + x) / 2);
      out.expected_cost += p * (t <= t_start + 1 ? 0.0 : eps);
      out.energy += p * eps;
    }
    // paths stepping diagonally from layer t-1 to t+1 sit at that step's lag
    if (t > t_start && t < t_end) {
      const LayerRange before = range(t - 1);
      for (int x = before.lo; x <= before.hi; x += 2) {
        if (!admissible(t + 1, x)) continue;
        const double p =
            std::exp(log_f[cell(t - 1, x)] + log_weight(t + 1, x) + log_b[cell(t + 1, x)] - log_z);
        num += x * p;
        den += p;
      }
    }
    out.lag.push_back({t, num / den});
  }
  out.energy /= static_cast<double>(t_end - t_start + 1);
  return out;
}

}  // namespace toplag
