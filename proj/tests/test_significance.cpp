#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "test_util.hpp"
#include "toplag/significance.hpp"
#include "toplag/synth.hpp"

using namespace toplag;
using Catch::Matchers::WithinAbs;

namespace {

AlignedPair random_pair(std::uint64_t seed, std::size_t n) {
  return make_pair(testutil::normals(seed, n), testutil::normals(seed + 999, n));
}

std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("type-7 quantiles") {
  const std::vector<double> v{1, 2, 3, 4};
  CHECK(quantile_sorted(v, 0.0) == 1.0);
  CHECK(quantile_sorted(v, 1.0) == 4.0);
  CHECK_THAT(quantile_sorted(v, 0.25), WithinAbs(1.75, 1e-15));
  CHECK_THAT(quantile_sorted(v, 0.5), WithinAbs(2.5, 1e-15));
  CHECK(quantile_sorted(std::vector<double>{7.0}, 0.3) == 7.0);
}

TEST_CASE("surrogates preserve each series' values") {
  const auto pair = random_pair(1, 37);
  for (int block : {1, 5}) {
    Rng rng(4);
    const auto s = shuffle_surrogate(pair, rng, block);
    CHECK(sorted(s.x) == sorted(pair.x));
    CHECK(sorted(s.y) == sorted(pair.y));
    CHECK(s.x != pair.x);
    CHECK(s.dates == pair.dates);
  }
}

TEST_CASE("block surrogates move whole blocks") {
  std::vector<double> v(20);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  Rng rng(9);
  permute_blocks(v, rng, 4);
  for (std::size_t b = 0; b < 5; ++b) {
    const double first = v[b * 4];
    CHECK(static_cast<int>(first) % 4 == 0);
    for (std::size_t j = 1; j < 4; ++j) CHECK(v[b * 4 + j] == first + static_cast<double>(j));
  }
}

TEST_CASE("a single sample is its own permutation") {
  std::vector<double> v{3.5};
  Rng rng(1);
  permute_blocks(v, rng, 1);
  CHECK(v == std::vector<double>{3.5});
}

TEST_CASE("envelope is deterministic and independent of threads") {
  const auto pair = random_pair(2, 40);
  const auto obs = multistart_search(pair, 2.0, {.max_offset = 2});
  BootstrapConfig cfg{.n_replicas = 30, .seed = 11, .max_offset = 2};
  const auto a = bootstrap_envelope(pair, obs, cfg);
  cfg.threads = 3;
  const auto b = bootstrap_envelope(pair, obs, cfg);
  REQUIRE(a.points.size() == obs.lag.size());
  REQUIRE(a.points.size() == b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    CHECK(a.points[i].lower == b.points[i].lower);
    CHECK(a.points[i].upper == b.points[i].upper);
    CHECK(a.points[i].p == b.points[i].p);
  }
  cfg.seed = 12;
  const auto c = bootstrap_envelope(pair, obs, cfg);
  bool differs = false;
  for (std::size_t i = 0; i < a.points.size(); ++i) differs |= a.points[i].upper != c.points[i].upper;
  CHECK(differs);
}

TEST_CASE("envelope fields are consistent") {
  const auto pair = random_pair(3, 40);
  const auto obs = multistart_search(pair, 2.0, {.max_offset = 2});
  const BootstrapConfig cfg{.n_replicas = 40, .seed = 5, .max_offset = 2};
  const auto env = bootstrap_envelope(pair, obs, cfg);
  CHECK(env.n_used + env.n_dropped == 40);
  for (std::size_t i = 0; i < env.points.size(); ++i) {
    const auto& pt = env.points[i];
    const double x = obs.lag[i].x_mean;
    CHECK(pt.t == obs.lag[i].t);
    if (pt.n_defined == 0) {
      CHECK(std::isnan(pt.lower));
      CHECK(pt.p == 1.0);
      CHECK_FALSE(pt.significant);
      continue;
    }
    CHECK(pt.lower <= pt.upper);
    CHECK(pt.p >= 1.0 / (pt.n_defined + 1));
    CHECK(pt.p <= 1.0);
    CHECK(pt.significant == (x < pt.lower || x > pt.upper));
  }
}

TEST_CASE("a strong lead-lag is flagged, white noise mostly is not") {
  // Surrogate curves at T = 2 wander over roughly +-12 samples in the
  // middle of a 100-sample pair, so only a large lag clears the band.
  const auto lagged = generate({.kind = SynthKind::fixed_lag, .n = 100, .lag = 15,
                                .noise_sigma = 0.1, .seed = 21});
  const BootstrapConfig cfg{.n_replicas = 60, .seed = 1, .max_offset = 5};
  const auto obs = multistart_search(lagged.pair, 2.0, {.max_offset = 5});
  const auto env = bootstrap_envelope(lagged.pair, obs, cfg);
  std::size_t mid_flags = 0, mid = 0;
  for (std::size_t i = env.points.size() / 4; i < env.points.size() * 3 / 4; ++i, ++mid)
    mid_flags += env.points[i].significant;
  CHECK(mid_flags > mid / 2);

  const auto noise = generate({.kind = SynthKind::independent_noise, .n = 100, .seed = 22});
  const auto obs0 = multistart_search(noise.pair, 2.0, {.max_offset = 5});
  const auto env0 = bootstrap_envelope(noise.pair, obs0, cfg);
  std::size_t flags = 0;
  for (const auto& pt : env0.points) flags += pt.significant;
  CHECK(flags < env0.points.size() / 4);
}

TEST_CASE("one-sided tails") {
  const auto lagged = generate({.kind = SynthKind::fixed_lag, .n = 100, .lag = 15,
                                .noise_sigma = 0.1, .seed = 8});
  const auto obs = multistart_search(lagged.pair, 2.0, {.max_offset = 5});
  BootstrapConfig cfg{.n_replicas = 40, .seed = 2, .max_offset = 5};
  cfg.tail = Tail::upper;
  const auto up = bootstrap_envelope(lagged.pair, obs, cfg);
  cfg.tail = Tail::lower;
  const auto lo = bootstrap_envelope(lagged.pair, obs, cfg);
  const std::size_t mid = up.points.size() / 2;
  CAPTURE(obs.lag[mid].x_mean);
  // Surrogate bands are wide at N=100, so only the ordering is sharp.
  CHECK(up.points[mid].p < 0.25);
  CHECK(lo.points[mid].p > 0.75);
  CHECK(up.points[mid].p < lo.points[mid].p);
}

TEST_CASE("diagonal-only surrogates") {
  const auto pair = random_pair(4, 30);
  const auto obs = multistart_search(pair, 2.0, {.max_offset = 0});
  const BootstrapConfig cfg{.n_replicas = 10, .seed = 3, .surrogate_multistart = false};
  const auto env = bootstrap_envelope(pair, obs, cfg);
  for (const auto& pt : env.points) CHECK(pt.n_defined == 10);
}

TEST_CASE("bootstrap configuration validation") {
  const auto pair = random_pair(5, 20);
  const auto obs = multistart_search(pair, 2.0, {.max_offset = 1});
  CHECK_THROWS_AS(bootstrap_envelope(pair, obs, {.n_replicas = 0}), std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_envelope(pair, obs, {.lower_q = 0.9, .upper_q = 0.1}),
                  std::invalid_argument);
  CHECK_THROWS_AS(bootstrap_envelope(pair, obs, {.block_length = 0}), std::invalid_argument);
}
