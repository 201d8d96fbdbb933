#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "toplag/error.hpp"
#include "toplag/ingest.hpp"
#include "toplag/multistart.hpp"
#include "toplag/parallel.hpp"
#include "toplag/rng.hpp"

namespace toplag {

/// Which surrogate lags count as "at least as extreme" as the observed one.
enum class Tail {
  magnitude,  // |x_i| >= |x_obs|
  upper,      // x_i >= x_obs
  lower,      // x_i <= x_obs
};

struct BootstrapConfig {
  int n_replicas = 1000;
  double lower_q = 0.05;
  double upper_q = 0.95;
  std::uint64_t seed = 0;
  double temperature = kDefaultTemperature;
  int max_offset = kDefaultMaxOffset;
  Tail tail = Tail::magnitude;
  /// 1 permutes samples independently. Larger values permute contiguous
  /// blocks, which keeps short-range autocorrelation in the surrogates.
  int block_length = 1;
  /// When false, surrogates use only the diagonal anchors (m = 0).
  bool surrogate_multistart = true;
  LagEstimator estimator = LagEstimator::forward;
  unsigned threads = 1;
  /// Largest tolerated fraction of replicas lost to partition collapse.
  double max_dropped_fraction = 0.05;

  void validate() const {
    if (n_replicas < 1) throw std::invalid_argument("bootstrap replicas must be >= 1");
    if (!(lower_q > 0.0 && lower_q < 1.0 && upper_q > 0.0 && upper_q < 1.0))
      throw std::invalid_argument("quantiles must lie in (0, 1)");
    if (!(lower_q < upper_q)) throw std::invalid_argument("lower quantile must be < upper");
    if (block_length < 1) throw std::invalid_argument("block length must be >= 1");
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  }
};

struct EnvelopePoint {
  int t;
  double lower;  // L(t); NaN when no replica covers t
  double upper;  // U(t)
  double p;      // in [1/(n_t+1), 1]
  int n_defined; // replicas whose path covers layer t
  bool significant;
};

struct BootstrapEnvelope {
  std::vector<EnvelopePoint> points;
  int n_used = 0;
  int n_dropped = 0;
};

/// Sample quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be ascending and nonempty.
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

inline void permute_blocks(std::vector<double>& v, Rng& rng, int block_length) {
  if (block_length <= 1) {
    rng.shuffle(std::span<double>(v));
    return;
  }
  const auto b = static_cast<std::size_t>(block_length);
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < v.size(); i += b) starts.push_back(i);
  rng.shuffle(std::span<std::size_t>(starts));
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t s : starts)
    for (std::size_t i = s; i < std::min(s + b, v.size()); ++i) out.push_back(v[i]);
  v = std::move(out);
}

/// Independently permutes both series. Dates and flags are kept.
inline AlignedPair shuffle_surrogate(const AlignedPair& pair, Rng& rng, int block_length = 1) {
  AlignedPair out = pair;
  permute_blocks(out.x, rng, block_length);
  permute_blocks(out.y, rng, block_length);
  return out;
}

inline bool outside_envelope(double observed, double lower, double upper) {
  return observed < lower || observed > upper;
}

/// Per-layer quantile bands and p-values of the observed lag curve against
/// the lag curves of shuffled surrogates. Replica i draws from
/// Rng::stream(seed, i), so the result does not depend on thread count.
inline BootstrapEnvelope bootstrap_envelope(const AlignedPair& pair, const ThermalPath& observed,
                                            const BootstrapConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.n_replicas);
  MultistartOptions ms;
  ms.max_offset = cfg.surrogate_multistart ? cfg.max_offset : 0;
  ms.estimator = cfg.estimator;

  std::vector<std::optional<ThermalPath>> replicas(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    Rng rng = Rng::stream(cfg.seed, i);
    const AlignedPair surrogate = shuffle_surrogate(pair, rng, cfg.block_length);
    try {
      replicas[i] = multistart_search(surrogate, cfg.temperature, ms);
    } catch (const data_error&) {
      replicas[i].reset();
    }
  });

  BootstrapEnvelope env;
  for (const auto& r : replicas) (r ? env.n_used : env.n_dropped)++;
  if (static_cast<double>(env.n_dropped) > cfg.max_dropped_fraction * static_cast<double>(n))
    throw data_error(std::to_string(env.n_dropped) + " of " + std::to_string(n) +
                     " bootstrap replicas collapsed; raise temperature");

  std::vector<double> sample;
  for (const auto& obs : observed.lag) {
    sample.clear();
    int extreme = 0;
    for (const auto& r : replicas) {
      if (!r) continue;
      const auto v = r->at(obs.t);
      if (!v) continue;
      sample.push_back(*v);
      switch (cfg.tail) {
        case Tail::magnitude: extreme += std::abs(*v) >= std::abs(obs.x_mean); break;
        case Tail::upper: extreme += *v >= obs.x_mean; break;
        case Tail::lower: extreme += *v <= obs.x_mean; break;
      }
    }
    EnvelopePoint pt{obs.t, std::numeric_limits<double>::quiet_NaN(),
                     std::numeric_limits<double>::quiet_NaN(), 1.0,
                     static_cast<int>(sample.size()), false};
    if (!sample.empty()) {
      std::sort(sample.begin(), sample.end());
      pt.lower = quantile_sorted(sample, cfg.lower_q);
      pt.upper = quantile_sorted(sample, cfg.upper_q);
      pt.p = (1.0 + extreme) / (1.0 + static_cast<double>(sample.size()));
      pt.significant = outside_envelope(obs.x_mean, pt.lower, pt.upper);
    }
    env.points.push_back(pt);
  }
  return env;
}

}  // namespace toplag
