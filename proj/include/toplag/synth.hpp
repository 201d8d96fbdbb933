#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "toplag/date.hpp"
#include "toplag/ingest.hpp"
#include "toplag/rng.hpp"

namespace toplag {

enum class SynthKind { fixed_lag, ramp_lag, regime_switch, independent_noise };

inline const char* to_string(SynthKind k) {
  switch (k) {
    case SynthKind::fixed_lag: return "fixed_lag";
    case SynthKind::ramp_lag: return "ramp_lag";
    case SynthKind::regime_switch: return "regime_switch";
    case SynthKind::independent_noise: return "independent_noise";
  }
  return "?";
}

inline std::optional<SynthKind> parse_synth_kind(std::string_view s) {
  for (auto k : {SynthKind::fixed_lag, SynthKind::ramp_lag, SynthKind::regime_switch,
                 SynthKind::independent_noise})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

struct SynthSpec {
  SynthKind kind = SynthKind::fixed_lag;
  int n = 200;
  int lag = 0;        // fixed lag; first regime / ramp start otherwise
  int lag_end = 0;    // second regime / ramp end
  int switch_at = 0;  // first sample (1-based) of the second regime; 0 = n/2 + 1
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  bool standardize = true;
  Date first_date{2000, 1, 1};
};

struct SynthPair {
  AlignedPair pair;
  std::vector<int> true_lag;  // per sample; empty for independent_noise
};

/// Ground-truth lag schedule, indexed by the second series' sample (1-based
/// t stored at t-1).
inline std::vector<int> lag_schedule(const SynthSpec& spec) {
  std::vector<int> lag;
  if (spec.kind == SynthKind::independent_noise) return lag;
  const int n = spec.n;
  const int switch_at = spec.switch_at > 0 ? spec.switch_at : n / 2 + 1;
  for (int t = 1; t <= n; ++t) {
    switch (spec.kind) {
      case SynthKind::fixed_lag: lag.push_back(spec.lag); break;
      case SynthKind::regime_switch: lag.push_back(t < switch_at ? spec.lag : spec.lag_end); break;
      case SynthKind::ramp_lag: {
        const double f = n > 1 ? static_cast<double>(t - 1) / (n - 1) : 0.0;
        lag.push_back(static_cast<int>(std::lround(spec.lag + f * (spec.lag_end - spec.lag))));
        break;
      }
      case SynthKind::independent_noise: break;
    }
  }
  return lag;
}

inline void validate(const SynthSpec& spec) {
  if (spec.n < 5) throw std::invalid_argument("synthetic length must be >= 5");
  if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma))
    throw std::invalid_argument("noise sigma must be >= 0");
  for (int k : lag_schedule(spec))
    if (4 * std::abs(k) > spec.n)
      throw std::invalid_argument("lag " + std::to_string(k) + " exceeds n/4 = " +
                                  std::to_string(spec.n / 4));
}

/// X is i.i.d. standard normal; Y(t) = X(t - lag(t)) + sigma * eta(t). Where
/// t - lag(t) falls outside the series Y gets a fresh normal draw instead.
inline SynthPair generate(const SynthSpec& spec) {
  validate(spec);
  Rng rng(spec.seed);
  const auto n = static_cast<std::size_t>(spec.n);
  std::vector<double> x(n), y(n);
  for (double& v : x) v = rng.normal();

  SynthPair out;
  out.true_lag = lag_schedule(spec);
  for (int t = 1; t <= spec.n; ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    if (spec.kind == SynthKind::independent_noise) {
      y[i] = rng.normal();
      continue;
    }
    const int src = t - out.true_lag[i];
    const double base = src >= 1 && src <= spec.n ? x[static_cast<std::size_t>(src - 1)]
                                                   : rng.normal();
    y[i] = base + spec.noise_sigma * rng.normal();
  }

  out.pair.x = std::move(x);
  out.pair.y = std::move(y);
  for (int i = 0; i < spec.n; ++i) out.pair.dates.push_back(spec.first_date.plus_days(i).str());
  if (spec.standardize) {
    standardize(out.pair.x, "x");
    standardize(out.pair.y, "y");
    out.pair.standardized = true;
  }
  return out;
}

}  // namespace toplag
