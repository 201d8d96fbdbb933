#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "toplag/ingest.hpp"
#include "toplag/parallel.hpp"
#include "toplag/rng.hpp"
#include "toplag/significance.hpp"

namespace toplag {

struct XcorrLag {
  int tau;
  std::optional<double> c;  // missing when an overlap window has zero variance
  int n_overlap;
};

struct XcorrPoint {
  int tau;
  std::optional<double> c;
  double lo;
  double hi;
  bool significant;
  int n_overlap;
};

struct XcorrResult {
  int tau_max = 0;
  std::vector<XcorrPoint> points;
  int n_replicas = 0;
};

namespace detail {

// Pearson correlation of a[i] with b[i] over the window, centred on the
// window's own means.
inline std::optional<double> window_correlation(std::span<const double> a,
                                                std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline void check_tau_max(std::size_t n, int tau_max) {
  if (tau_max < 0) throw std::invalid_argument("tau-max must be >= 0");
  if (static_cast<std::size_t>(tau_max) + 2 >= n)
    throw std::invalid_argument("tau-max must be < N - 2 (N = " + std::to_string(n) + ")");
}

}  // namespace detail

/// c(tau) = corr(X(t), Y(t + tau)) over the N - |tau| overlapping samples.
/// Positive tau means the second series lags the first.
inline std::vector<XcorrLag> lagged_xcorr(std::span<const double> x, std::span<const double> y,
                                          int tau_max) {
  if (x.size() != y.size()) throw std::invalid_argument("lagged_xcorr: length mismatch");
  detail::check_tau_max(x.size(), tau_max);
  const auto n = x.size();
  std::vector<XcorrLag> out;
  for (int tau = -tau_max; tau <= tau_max; ++tau) {
    const auto k = static_cast<std::size_t>(std::abs(tau));
    const auto len = n - k;
    const auto a = tau >= 0 ? x.subspan(0, len) : x.subspan(k, len);
    const auto b = tau >= 0 ? y.subspan(k, len) : y.subspan(0, len);
    out.push_back({tau, detail::window_correlation(a, b), static_cast<int>(len)});
  }
  return out;
}

inline std::vector<XcorrLag> lagged_xcorr(const AlignedPair& pair, int tau_max) {
  return lagged_xcorr(pair.x, pair.y, tau_max);
}

/// Lagged correlation with per-lag permutation bands at cfg.lower_q and
/// cfg.upper_q. Surrogates come from the same shuffling engine and RNG
/// streams as the lag-curve bootstrap.
inline XcorrResult xcorr_significance(const AlignedPair& pair, int tau_max,
                                      const BootstrapConfig& cfg) {
  cfg.validate();
  const auto observed = lagged_xcorr(pair, tau_max);
  const auto n = static_cast<std::size_t>(cfg.n_replicas);
  std::vector<std::vector<XcorrLag>> replicas(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    Rng rng = Rng::stream(cfg.seed, i);
    replicas[i] = lagged_xcorr(shuffle_surrogate(pair, rng, cfg.block_length), tau_max);
  });

  XcorrResult out;
  out.tau_max = tau_max;
  out.n_replicas = cfg.n_replicas;
  std::vector<double> sample;
  for (std::size_t j = 0; j < observed.size(); ++j) {
    sample.clear();
    for (const auto& r : replicas)
      if (r[j].c) sample.push_back(*r[j].c);
    XcorrPoint pt{observed[j].tau, observed[j].c, std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN(), false, observed[j].n_overlap};
    if (!sample.empty()) {
      std::sort(sample.begin(), sample.end());
      pt.lo = quantile_sorted(sample, cfg.lower_q);
      pt.hi = quantile_sorted(sample, cfg.upper_q);
      pt.significant = pt.c && outside_envelope(*pt.c, pt.lo, pt.hi);
    }
    out.points.push_back(pt);
  }
  return out;
}

}  // namespace toplag
