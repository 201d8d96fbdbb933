#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "toplag/error.hpp"
#include "toplag/lattice.hpp"

namespace toplag {

/// One diagonal layer of the partition function, stored as the in-layer
/// probabilities G(x,t)/G(t) for x = x_lo, x_lo+2, ..., x_hi.
struct LayerView {
  int t;
  int x_lo;
  int x_hi;
  double log_mass;  // log G(t) of the unnormalized recursion
  std::span<const double> p;

  double probability(int x) const {
    if (x < x_lo || x > x_hi || ((x - x_lo) & 1)) return 0.0;
    return p[static_cast<std::size_t>((x - x_lo) / 2)];
  }
  /// G(x,t) of the unnormalized recursion; overflows for long series.
  double unnormalized(int x) const { return probability(x) * std::exp(log_mass); }
  int size() const { return static_cast<int>(p.size()); }
};

/// Normalized partition function over the layers between the anchored start
/// and end nodes of one candidate path.
class PartitionField {
 public:
  int n() const { return n_; }
  EndpointOffsets offsets() const { return offsets_; }
  int first_layer() const { return first_; }
  int last_layer() const { return first_ + static_cast<int>(layers_.size()) - 1; }
  int layer_count() const { return static_cast<int>(layers_.size()); }

  LayerView layer(int t) const {
    if (t < first_layer() || t > last_layer())
      throw std::out_of_range("partition field: layer " + std::to_string(t));
    const auto& l = layers_[static_cast<std::size_t>(t - first_)];
    return {t, l.x_lo, l.x_hi, l.log_mass,
            std::span<const double>(values_).subspan(l.offset, l.count)};
  }

 private:
  struct Layer {
    int x_lo;
    int x_hi;
    double log_mass;
    std::size_t offset;
    std::size_t count;
  };

  friend PartitionField propagate_partition(const Lattice&, EndpointOffsets);

  int n_ = 0;
  EndpointOffsets offsets_;
  int first_ = 0;
  std::vector<Layer> layers_;
  std::vector<double> values_;
};

/// Admissible x range of layer t for a path anchored at `start` and `end`.
/// Nodes on the two edges through the start node are excluded once the path
/// is two or more layers past the start, so paths cannot run along the
/// border of the lattice.
struct LayerRange {
  int lo;
  int hi;
  bool empty() const { return lo > hi; }
};

inline LayerRange layer_range(int t, SeriesIndex start, SeriesIndex end) {
  const int t_start = start.t1 + start.t2 - 2;
  int lo = std::max(2 * start.t2 - 2 - t, t + 2 - 2 * end.t1);
  int hi = std::min(t + 2 - 2 * start.t1, 2 * end.t2 - 2 - t);
  if (t >= t_start + 2) {
    lo = std::max(lo, 2 * start.t2 - t);
    hi = std::min(hi, t - 2 * start.t1);
  }
  return {lo, hi};
}

inline void validate_offsets(int n, EndpointOffsets off) {
  if (std::abs(off.start) >= n || std::abs(off.end) >= n)
    throw std::invalid_argument("endpoint offset out of range");
  const auto s = off.start_node();
  const auto e = off.end_node(n);
  if (e.t1 - s.t1 < 1 || e.t2 - s.t2 < 1)
    throw std::invalid_argument("endpoint offsets leave no room for a path");
}

/// Transfer-matrix recursion over diagonal layers,
///
///   G(x,t+1) = [G(x-1,t) + G(x+1,t) + G(x,t-1)] exp(-eps(x,t+1)/T),
///
/// started with G = 1 on the anchor node and on its two successors. Only the
/// last two layers are live. After each new layer both live layers are
/// divided by the new layer's total so their relative scale survives.
inline PartitionField propagate_partition(const Lattice& lat, EndpointOffsets offsets) {
  const int n = lat.n();
  validate_offsets(n, offsets);
  const SeriesIndex s = offsets.start_node();
  const SeriesIndex e = offsets.end_node(n);
  const int t_start = s.t1 + s.t2 - 2;
  const int t_end = e.t1 + e.t2 - 2;

  PartitionField field;
  field.n_ = n;
  field.offsets_ = offsets;
  field.first_ = t_start;
  field.layers_.reserve(static_cast<std::size_t>(t_end - t_start + 1));
  field.values_.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n) / 2 + 4);

  // Dense buffers over x in [-n, n], padded so x +- 1 never leaves them.
  const std::size_t width = 2 * static_cast<std::size_t>(n) + 3;
  auto slot = [n](int x) { return static_cast<std::size_t>(x + n + 1); };
  std::vector<double> prev(width, 0.0), cur(width, 0.0), next(width, 0.0);

  double log_scale = 0.0;
  auto store = [&](const std::vector<double>& buf, LayerRange r) {
    const std::size_t offset = field.values_.size();
    for (int x = r.lo; x <= r.hi; x += 2) field.values_.push_back(buf[slot(x)]);
    field.layers_.push_back({r.lo, r.hi, log_scale, offset, field.values_.size() - offset});
  };
  auto collapse = [](int t) {
    return data_error("partition collapse at layer " + std::to_string(t) +
                      "; raise temperature");
  };

  const int x_start = s.t2 - s.t1;
  cur[slot(x_start)] = 1.0;
  store(cur, {x_start, x_start});

  for (int t = t_start + 1; t <= t_end; ++t) {
    const LayerRange r = layer_range(t, s, e);
    if (r.empty()) throw collapse(t);
    std::fill(next.begin(), next.end(), 0.0);
    double total = 0.0;
    for (int x = r.lo; x <= r.hi; x += 2) {
      double g;
      if (t == t_start + 1) {
        g = 1.0;
      } else {
        const int t1 = 1 + (t - x) / 2;
        const int t2 = 1 + (t + x) / 2;
        g = (cur[slot(x - 1)] + cur[slot(x + 1)] + prev[slot(x)]) * lat.weight(t1, t2);
      }
      next[slot(x)] = g;
      total += g;
    }
    if (!(total > 0.0) || !std::isfinite(total)) throw collapse(t);
    const double inv = 1.0 / total;
    for (int x = r.lo; x <= r.hi; x += 2) next[slot(x)] *= inv;
    for (double& v : cur) v *= inv;
    log_scale += std::log(total);
    store(next, r);
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  return field;
}

struct LagSample {
  int t;
  double x_mean;
};

/// <x(t)> = sum_x x G(x,t) / G(t) for every layer of the field.
inline std::vector<LagSample> thermal_average(const PartitionField& field) {
  std::vector<LagSample> out;
  out.reserve(static_cast<std::size_t>(field.layer_count()));
  for (int t = field.first_layer(); t <= field.last_layer(); ++t) {
    const LayerView l = field.layer(t);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < l.size(); ++i) {
      const double p = l.p[static_cast<std::size_t>(i)];
      num += (l.x_lo + 2 * i) * p;
      den += p;
    }
    out.push_back({t, num / den});
  }
  return out;
}

/// Thermal average of eps along the path ensemble, divided by the number of
/// layers traversed between the anchors.
inline double path_energy(const PartitionField& field, const Lattice& lat) {
  double sum = 0.0;
  for (int t = field.first_layer(); t <= field.last_layer(); ++t) {
    const LayerView l = field.layer(t);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < l.size(); ++i) {
      const int x = l.x_lo + 2 * i;
      const double p = l.p[static_cast<std::size_t>(i)];
      num += lat.epsilon(1 + (t - x) / 2, 1 + (t + x) / 2) * p;
      den += p;
    }
    sum += num / den;
  }
  return sum / field.layer_count();
}

}  // namespace toplag
