#pragma once

// Brute-force references for the test suite. Nothing here includes or calls
// the library: distances, anchors and admissibility are recomputed from the
// raw series in plain (t1, t2) coordinates.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace oracle {

struct Node {
  int t1;
  int t2;
  bool operator==(const Node&) const = default;
};

struct OraclePath {
  std::vector<Node> nodes;
  double objective = 0.0;   // sum of eps over nodes the recursion weights
  double total_cost = 0.0;  // sum of eps over all nodes
  double mean_cost = 0.0;   // total_cost / nodes
};

/// Anchored rectangle of admissible nodes. Offsets follow the library's
/// convention: k > 0 delays the second series.
class Grid {
 public:
  Grid(std::span<const double> x, std::span<const double> y, int start_offset, int end_offset)
      : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
    const int n = static_cast<int>(x.size());
    s1_ = start_offset >= 0 ? 1 : 1 - start_offset;
    s2_ = start_offset >= 0 ? 1 + start_offset : 1;
    e1_ = end_offset >= 0 ? n - end_offset : n;
    e2_ = end_offset >= 0 ? n : n + end_offset;
  }

  Node start() const { return {s1_, s2_}; }
  Node end() const { return {e1_, e2_}; }

  double eps(Node v) const {
    const double d = x_[static_cast<std::size_t>(v.t1 - 1)] - y_[static_cast<std::size_t>(v.t2 - 1)];
    return d * d;
  }

  bool admissible(Node v) const {
    if (v.t1 < s1_ || v.t1 > e1_ || v.t2 < s2_ || v.t2 > e2_) return false;
    // A path may touch the two start edges only at the start node and the
    // first step away from it.
    if (v.t1 == s1_ || v.t2 == s2_) return near_start(v);
    return true;
  }

  /// Start node and its two single-step successors carry unit weight.
  bool free(Node v) const { return near_start(v); }

  double weighted_cost(Node v) const { return free(v) ? 0.0 : eps(v); }

 private:
  bool near_start(Node v) const {
    return (v.t1 == s1_ && v.t2 == s2_) || (v.t1 == s1_ + 1 && v.t2 == s2_) ||
           (v.t1 == s1_ && v.t2 == s2_ + 1);
  }

  std::vector<double> x_, y_;
  int s1_, s2_, e1_, e2_;
};

inline OraclePath finish(const Grid& g, std::vector<Node> nodes) {
  OraclePath p;
  for (const auto& v : nodes) {
    p.objective += g.weighted_cost(v);
    p.total_cost += g.eps(v);
  }
  p.mean_cost = p.total_cost / static_cast<double>(nodes.size());
  p.nodes = std::move(nodes);
  return p;
}

/// Exact minimum of the weighted cost over the three-move graph. Ties prefer
/// the diagonal predecessor, then the horizontal one (t1 - 1).
inline OraclePath min_cost_path(std::span<const double> x, std::span<const double> y,
                                int start_offset = 0, int end_offset = 0) {
  const Grid g(x, y, start_offset, end_offset);
  const int n = static_cast<int>(x.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(static_cast<std::size_t>((n + 1) * (n + 1)), inf);
  auto at = [&](Node v) -> double& { return best[static_cast<std::size_t>(v.t1 * (n + 1) + v.t2)]; };

  const Node s = g.start(), e = g.end();
  for (int t1 = s.t1; t1 <= e.t1; ++t1) {
    for (int t2 = s.t2; t2 <= e.t2; ++t2) {
      const Node v{t1, t2};
      if (!g.admissible(v)) continue;
      if (v == s) {
        at(v) = g.weighted_cost(v);
        continue;
      }
      double m = inf;
      for (Node u : {Node{t1 - 1, t2 - 1}, Node{t1 - 1, t2}, Node{t1, t2 - 1}})
        if (g.admissible(u)) m = std::min(m, at(u));
      if (m < inf) at(v) = m + g.weighted_cost(v);
    }
  }
  if (!(at(e) < inf)) throw std::runtime_error("oracle: end node unreachable");

  std::vector<Node> rev{e};
  Node v = e;
  while (!(v == s)) {
    Node pick{0, 0};
    double pick_val = inf;
    for (Node u : {Node{v.t1 - 1, v.t2 - 1}, Node{v.t1 - 1, v.t2}, Node{v.t1, v.t2 - 1}}) {
      if (!g.admissible(u)) continue;
      // strict < keeps the earlier (preferred) move on exact ties
      if (at(u) < pick_val) {
        pick_val = at(u);
        pick = u;
      }
    }
    v = pick;
    rev.push_back(v);
  }
  return finish(g, {rev.rbegin(), rev.rend()});
}

/// Visits every admissible path from start to end. Exponential; N <= 8.
inline void for_each_path(const Grid& g, const std::function<void(const std::vector<Node>&)>& fn) {
  std::vector<Node> stack{g.start()};
  const Node e = g.end();
  std::function<void()> walk = [&] {
    const Node v = stack.back();
    if (v == e) {
      fn(stack);
      return;
    }
    for (Node u : {Node{v.t1 + 1, v.t2 + 1}, Node{v.t1 + 1, v.t2}, Node{v.t1, v.t2 + 1}}) {
      if (!g.admissible(u)) continue;
      stack.push_back(u);
      walk();
      stack.pop_back();
    }
  };
  walk();
}

inline OraclePath enumerate_min_cost(std::span<const double> x, std::span<const double> y,
                                     int start_offset = 0, int end_offset = 0) {
  const Grid g(x, y, start_offset, end_offset);
  std::vector<Node> best;
  double best_obj = std::numeric_limits<double>::infinity();
  for_each_path(g, [&](const std::vector<Node>& path) {
    double obj = 0.0;
    for (const auto& v : path) obj += g.weighted_cost(v);
    if (obj < best_obj) {
      best_obj = obj;
      best = path;
    }
  });
  return finish(g, best);
}

/// Number of admissible paths from the start node to `target`.
inline std::uint64_t count_paths(const Grid& g, Node target) {
  if (!g.admissible(target)) return 0;
  const Node s = g.start();
  if (target == s) return 1;
  std::uint64_t total = 0;
  for (Node u : {Node{target.t1 - 1, target.t2 - 1}, Node{target.t1 - 1, target.t2},
                 Node{target.t1, target.t2 - 1}})
    total += count_paths(g, u);
  return total;
}

/// Lag x = t2 - t1 of the path at every diagonal layer between its anchors.
/// Layers skipped by a diagonal step take the lag shared by both neighbours.
inline std::vector<int> lag_by_layer(const OraclePath& p) {
  std::vector<int> out;
  for (std::size_t i = 0; i < p.nodes.size(); ++i) {
    const Node v = p.nodes[i];
    if (i > 0) {
      const Node u = p.nodes[i - 1];
      if (v.t1 == u.t1 + 1 && v.t2 == u.t2 + 1) out.push_back(v.t2 - v.t1);
    }
    out.push_back(v.t2 - v.t1);
  }
  return out;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("pearson: bad lengths");
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw std::invalid_argument("pearson: zero variance");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace oracle
