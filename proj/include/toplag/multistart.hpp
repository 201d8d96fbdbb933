#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "toplag/ensemble.hpp"
#include "toplag/error.hpp"
#include "toplag/ingest.hpp"
#include "toplag/lattice.hpp"
#include "toplag/parallel.hpp"
#include "toplag/partition.hpp"

namespace toplag {

inline constexpr double kDefaultTemperature = 2.0;
inline constexpr int kDefaultMaxOffset = 9;

/// How <x(t)> is read off the lattice. `forward` is the classic estimator,
/// sum_x x G(x,t) / G(t) over the forward partition function. `path_ensemble`
/// averages over complete anchored paths (see path_ensemble()).
enum class LagEstimator { forward, path_ensemble };

inline const char* to_string(LagEstimator e) {
  return e == LagEstimator::forward ? "forward" : "path_ensemble";
}

struct LagPoint {
  int t;             // diagonal layer index
  std::string date;  // label of sample t/2 (0-based), the layer's midpoint
  double x_mean;
};

/// Lead-lag curve <x(t)> of one anchored path ensemble and its energy.
struct ThermalPath {
  std::vector<LagPoint> lag;
  double energy = 0.0;
  EndpointOffsets offsets;
  int max_offset = 0;
  double temperature = kDefaultTemperature;
  LagEstimator estimator = LagEstimator::forward;
  std::size_t candidates_evaluated = 0;
  std::size_t candidates_collapsed = 0;

  int first_layer() const { return lag.empty() ? 0 : lag.front().t; }
  int last_layer() const { return lag.empty() ? -1 : lag.back().t; }

  /// x_mean at layer t, or nullopt when the path does not cover t.
  std::optional<double> at(int t) const {
    if (t < first_layer() || t > last_layer()) return std::nullopt;
    return lag[static_cast<std::size_t>(t - first_layer())].x_mean;
  }
};

struct MultistartOptions {
  int max_offset = kDefaultMaxOffset;
  unsigned threads = 1;
  LagEstimator estimator = LagEstimator::forward;
};

/// Curve and energy of one anchored candidate. With the forward estimator
/// both come from the forward field; with the path ensemble both come from
/// complete-path averages, so candidates are ranked consistently with the
/// curve that is reported.
inline ThermalPath make_thermal_path(const AlignedPair& pair, const PartitionField& field,
                                     const Lattice& lat,
                                     LagEstimator estimator = LagEstimator::forward) {
  ThermalPath out;
  out.offsets = field.offsets();
  out.temperature = lat.temperature();
  out.estimator = estimator;
  std::vector<LagSample> curve;
  if (estimator == LagEstimator::forward) {
    out.energy = path_energy(field, lat);
    curve = thermal_average(field);
  } else {
    auto ens = path_ensemble(lat, field.offsets());
    out.energy = ens.energy;
    curve = std::move(ens.lag);
  }
  for (const auto& s : curve) {
    const auto idx = static_cast<std::size_t>(s.t / 2);
    out.lag.push_back({s.t, idx < pair.dates.size() ? pair.dates[idx] : std::string{}, s.x_mean});
  }
  out.candidates_evaluated = 1;
  return out;
}

/// Ranking energy of one candidate under the chosen estimator.
inline double candidate_energy(const Lattice& lat, EndpointOffsets offsets,
                               LagEstimator estimator) {
  if (estimator == LagEstimator::path_ensemble) return path_ensemble(lat, offsets).energy;
  return path_energy(propagate_partition(lat, offsets), lat);
}

/// Thermal path for one fixed pair of anchors.
inline ThermalPath anchored_path(const AlignedPair& pair, double temperature,
                                 EndpointOffsets offsets,
                                 LagEstimator estimator = LagEstimator::forward) {
  const Lattice lat = build_lattice(pair, temperature);
  return make_thermal_path(pair, propagate_partition(lat, offsets), lat, estimator);
}

/// Strict total order used to pick the winning candidate: lower energy, then
/// smaller |start|, smaller |end|, then negative offsets before positive.
inline bool candidate_precedes(double ea, EndpointOffsets a, double eb, EndpointOffsets b) {
  return std::make_tuple(ea, std::abs(a.start), std::abs(a.end), a.start, a.end) <
         std::make_tuple(eb, std::abs(b.start), std::abs(b.end), b.start, b.end);
}

/// Evaluates every start/end offset pair in [-m, m]^2 and returns the path
/// with minimal energy.
inline ThermalPath multistart_search(const AlignedPair& pair, double temperature,
                                     const MultistartOptions& opts = {}) {
  const int m = opts.max_offset;
  if (m < 0) throw std::invalid_argument("max offset must be >= 0");
  if (2 * m >= static_cast<int>(pair.n()))
    throw std::invalid_argument("max offset must satisfy 2m < N (N = " +
                                std::to_string(pair.n()) + ")");
  const Lattice lat = build_lattice(pair, temperature);

  const int side = 2 * m + 1;
  const auto count = static_cast<std::size_t>(side * side);
  std::vector<std::optional<double>> energies(count);
  auto offsets_of = [&](std::size_t i) {
    return EndpointOffsets{static_cast<int>(i) / side - m, static_cast<int>(i) % side - m};
  };

  parallel_for(count, opts.threads, [&](std::size_t i) {
    try {
      energies[i] = candidate_energy(lat, offsets_of(i), opts.estimator);
    } catch (const data_error&) {
      energies[i].reset();
    }
  });

  std::optional<std::size_t> best;
  std::size_t collapsed = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (!energies[i]) {
      ++collapsed;
      continue;
    }
    if (!best || candidate_precedes(*energies[i], offsets_of(i), *energies[*best],
                                    offsets_of(*best)))
      best = i;
  }
  if (!best) throw data_error("partition collapse in every candidate; raise temperature");

  ThermalPath out =
      make_thermal_path(pair, propagate_partition(lat, offsets_of(*best)), lat, opts.estimator);
  out.max_offset = m;
  out.candidates_evaluated = count;
  out.candidates_collapsed = collapsed;
  return out;
}

}  // namespace toplag
