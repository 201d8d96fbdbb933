#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "toplag/ingest.hpp"

namespace toplag {

/// Node in the rotated frame: t runs along the main diagonal, x = t2 - t1 is
/// the lag of the second series behind the first.
struct LatticeCoord {
  int t = 0;
  int x = 0;
  friend bool operator==(const LatticeCoord&, const LatticeCoord&) = default;
};

struct SeriesIndex {
  int t1 = 1;
  int t2 = 1;
  friend bool operator==(const SeriesIndex&, const SeriesIndex&) = default;
};

inline LatticeCoord to_rotated(int t1, int t2) {
  if (t1 < 1 || t2 < 1) throw std::invalid_argument("to_rotated: series indices are 1-based");
  return {t1 + t2 - 2, t2 - t1};
}

inline SeriesIndex from_rotated(LatticeCoord c) {
  if (((c.t - c.x) & 1) != 0)
    throw std::invalid_argument("from_rotated: x and t must have equal parity");
  if (std::abs(c.x) > c.t) throw std::invalid_argument("from_rotated: |x| > t");
  return {1 + (c.t - c.x) / 2, 1 + (c.t + c.x) / 2};
}

/// Start and end anchors of a path. Offset k > 0 means the second series
/// starts (ends) k samples later than the first: the start node is
/// (t1, t2) = (1, 1 + k) and the end node (N - k, N). Negative offsets mirror.
struct EndpointOffsets {
  int start = 0;
  int end = 0;

  SeriesIndex start_node() const {
    return start >= 0 ? SeriesIndex{1, 1 + start} : SeriesIndex{1 - start, 1};
  }
  SeriesIndex end_node(int n) const {
    return end >= 0 ? SeriesIndex{n - end, n} : SeriesIndex{n, n + end};
  }
  friend bool operator==(const EndpointOffsets&, const EndpointOffsets&) = default;
};

/// Local distances eps(t1, t2) = (X(t1) - Y(t2))^2 together with the
/// Boltzmann weights exp(-eps / T) for one temperature.
class Lattice {
 public:
  /// Largest eps/T fed to exp(); beyond it weights would underflow to zero.
  static constexpr double kMaxExponent = 700.0;

  Lattice(std::span<const double> x, std::span<const double> y, double temperature)
      : n_(static_cast<int>(x.size())), temperature_(temperature) {
    if (!(temperature > 0.0) || !std::isfinite(temperature))
      throw std::invalid_argument("temperature must be > 0");
    if (x.size() != y.size()) throw std::invalid_argument("lattice: series lengths differ");
    if (x.size() < 2) throw std::invalid_argument("lattice: need at least 2 samples");
    const auto n = x.size();
    eps_.resize(n * n);
    weight_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double d = x[i] - y[j];
        const double e = d * d;
        eps_[i * n + j] = e;
        double a = e / temperature;
        if (a > kMaxExponent) {
          a = kMaxExponent;
          ++clamped_;
        }
        weight_[i * n + j] = std::exp(-a);
      }
    }
  }

  int n() const { return n_; }
  double temperature() const { return temperature_; }
  /// Number of nodes whose exponent was clamped to kMaxExponent.
  std::size_t clamped_weights() const { return clamped_; }

  /// 1-based series indices.
  double epsilon(int t1, int t2) const { return eps_[index(t1, t2)]; }
  double weight(int t1, int t2) const { return weight_[index(t1, t2)]; }

  double epsilon(LatticeCoord c) const {
    const auto s = from_rotated(c);
    return epsilon(s.t1, s.t2);
  }

 private:
  std::size_t index(int t1, int t2) const {
    return static_cast<std::size_t>(t1 - 1) * static_cast<std::size_t>(n_) +
           static_cast<std::size_t>(t2 - 1);
  }

  int n_;
  double temperature_;
  std::vector<double> eps_;
  std::vector<double> weight_;
  std::size_t clamped_ = 0;
};

inline Lattice build_lattice(const AlignedPair& pair, double temperature) {
  return Lattice(pair.x, pair.y, temperature);
}

}  // namespace toplag
