#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace rplsim {

/// Node identifier; ids are contiguous from 0 and 0 is always the root.
using NodeId = std::uint32_t;
inline constexpr NodeId kRootId = 0;
inline constexpr NodeId kNoNode = UINT32_MAX;

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct RadioParams {
  double area_side = 150.0;
  double tx_range = 40.0;
  double interference_range = 80.0;
};

/// Static node placement with unit-disk link and interference sets.
class Topology {
 public:
  Topology() = default;

  Topology(std::vector<Point> positions, RadioParams params, std::uint64_t seed = 0)
      : positions_(std::move(positions)), params_(params), seed_(seed) {
    if (params_.tx_range > params_.interference_range) {
      throw TopologyError("tx_range exceeds interference_range");
    }
    derive();
  }

  std::size_t size() const { return positions_.size(); }
  const RadioParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<Point>& positions() const { return positions_; }

  Point position(NodeId id) const {
    check(id);
    return positions_[id];
  }

  bool contains(NodeId id) const { return id < positions_.size(); }

  /// Unit-disk link test: distance within tx_range. Irreflexive.
  bool linked(NodeId a, NodeId b) const {
    check(a);
    check(b);
    if (a == b) return false;
    return distance(positions_[a], positions_[b]) <= params_.tx_range;
  }

  bool within_interference(NodeId a, NodeId b) const {
    check(a);
    check(b);
    if (a == b) return false;
    return distance(positions_[a], positions_[b]) <= params_.interference_range;
  }

  /// Linked neighbors of `a`, ascending by id.
  const std::vector<NodeId>& neighbors(NodeId a) const {
    check(a);
    return neighbors_[a];
  }

  /// Nodes within interference range of `a` (excluding `a`), ascending by id.
  const std::vector<NodeId>& interferers(NodeId a) const {
    check(a);
    return interferers_[a];
  }

  /// Hop distance from the root over tx links; -1 when unreachable.
  std::vector<int> hops_from_root() const {
    std::vector<int> hops(size(), -1);
    if (size() == 0) return hops;
    std::queue<NodeId> q;
    hops[kRootId] = 0;
    q.push(kRootId);
    while (!q.empty()) {
      const NodeId u = q.front();
      q.pop();
      for (NodeId v : neighbors_[u]) {
        if (hops[v] < 0) {
          hops[v] = hops[u] + 1;
          q.push(v);
        }
      }
    }
    return hops;
  }

  bool connected() const {
    const auto hops = hops_from_root();
    return std::none_of(hops.begin(), hops.end(), [](int h) { return h < 0; });
  }

  /// Plain-text table: comment header, then one "id x y" line per node.
  void write(std::ostream& os) const {
    os << "# rplsim topology: id x y (meters)\n";
    os << "# area_side " << params_.area_side << " tx_range " << params_.tx_range
       << " interference_range " << params_.interference_range << " seed " << seed_ << "\n";
    char buf[96];
    for (std::size_t i = 0; i < size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu %.17g %.17g\n", i, positions_[i].x, positions_[i].y);
      os << buf;
    }
  }

  /// Parses the table written by write(). Ids must be exactly 0..n-1.
  static Topology read(std::istream& is, RadioParams params) {
    std::vector<std::pair<NodeId, Point>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      std::istringstream ls(line);
      long long id = -1;
      Point p;
      if (!(ls >> id >> p.x >> p.y) || id < 0) {
        throw TopologyError("malformed topology line " + std::to_string(lineno));
      }
      rows.emplace_back(static_cast<NodeId>(id), p);
    }
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Point> positions;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].first != i) throw TopologyError("topology ids must be contiguous from 0");
      positions.push_back(rows[i].second);
    }
    if (positions.size() < 2) throw TopologyError("topology needs at least two nodes");
    return Topology(std::move(positions), params);
  }

 private:
  void check(NodeId id) const {
    if (id >= positions_.size()) throw TopologyError("unknown node id " + std::to_string(id));
  }

  void derive() {
    const std::size_t n = positions_.size();
    neighbors_.assign(n, {});
    interferers_.assign(n, {});
    for (NodeId a = 0; a < n; ++a) {
      for (NodeId b = 0; b < n; ++b) {
        if (a == b) continue;
        const double d = distance(positions_[a], positions_[b]);
        if (d <= params_.tx_range) neighbors_[a].push_back(b);
        if (d <= params_.interference_range) interferers_[a].push_back(b);
      }
    }
  }

  std::vector<Point> positions_;
  RadioParams params_;
  std::uint64_t seed_ = 0;
  std::vector<std::vector<NodeId>> neighbors_;
  std::vector<std::vector<NodeId>> interferers_;
};

/// Uniform random placement in the square area, resampling whole layouts
/// until the tx-range graph is connected.
inline Topology generate_topology(std::size_t n, std::uint64_t seed, RadioParams params = {},
                                  int max_attempts = 200000) {
  if (n < 2) throw TopologyError("topology needs at least two nodes");
  Rng rng(seed, 0x746f706fULL);
  std::vector<Point> positions(n);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    for (auto& p : positions) {
      p.x = rng.uniform(0.0, params.area_side);
      p.y = rng.uniform(0.0, params.area_side);
    }
    Topology t(positions, params, seed);
    if (t.connected()) return t;
  }
  throw TopologyError("no connected layout found for n=" + std::to_string(n) + " after " +
                      std::to_string(max_attempts) + " attempts");
}

}  // namespace rplsim
