#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "rplsim/rplsim.hpp"

namespace rplsim::testing {

inline Topology make(std::vector<Point> pts, RadioParams radio = {}) {
  return Topology(std::move(pts), radio, 0);
}

/// Nodes on a line `spacing` meters apart; node 0 is the root.
inline Topology chain(std::size_t n, double spacing = 30.0) {
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({5.0 + spacing * static_cast<double>(i), 5.0});
  return make(pts);
}

/// Root in the middle, `leaves` nodes on a 35 m circle. Leaves are more than
/// 40 m apart as long as there are at most five.
inline Topology star(std::size_t leaves) {
  std::vector<Point> pts{{75, 75}};
  for (std::size_t i = 0; i < leaves; ++i) {
    const double a = 2.0 * 3.14159265358979 * static_cast<double>(i) / static_cast<double>(leaves);
    pts.push_back({75 + 35 * std::cos(a), 75 + 35 * std::sin(a)});
  }
  return make(pts);
}

/// Root 0 with child 1 (the attacker in cascade tests), grandchildren 2 and
/// 3, and leaves 4, 5 under 2 and 6, 7 under 3.
inline Topology binary_tree() {
  return make({{0, 0}, {30, 0}, {60, 25}, {60, -25}, {85, 50}, {95, 25}, {85, -50}, {95, -25}});
}

/// Two-branch layout where node 5 prefers 3 (under root child 2) but also
/// hears 4 (under root child 1) at the same rank:
///   0 -> 1 -> 4,  0 -> 2 -> 3 -> 5,  5 may keep 4 as extra DAO parent.
inline Topology witness_layout() {
  return make({{0, 0}, {35, 0}, {0, 35}, {25, 60}, {60, 25}, {55, 55}});
}

/// Hand-built DODAG from preferred parents and DAO-parent sets.
inline Dodag dodag(std::vector<NodeId> preferred, std::vector<std::vector<NodeId>> dao = {}) {
  Dodag g;
  g.preferred = std::move(preferred);
  const std::size_t n = g.preferred.size();
  g.rank.assign(n, 0);
  g.dao_parents = dao.empty() ? std::vector<std::vector<NodeId>>(n) : std::move(dao);
  for (NodeId v = 0; v < n; ++v) {
    if (g.dao_parents[v].empty() && g.preferred[v] != kNoNode) g.dao_parents[v] = {g.preferred[v]};
    const int d = g.depth(v);
    g.rank[v] = 256 + 256 * static_cast<std::uint32_t>(std::max(d, 0));
  }
  return g;
}

/// Scenario on a fixed topology written to a temp file.
inline Scenario scenario_for(const Topology& t, const std::string& name) {
  const std::string path = ::testing::TempDir() + name + ".topo";
  {
    std::ofstream out(path);
    t.write(out);
  }
  Scenario sc;
  sc.nodes = t.size();
  sc.topology_file = path;
  return sc;
}

inline std::vector<TraceLine> lines_with(const Trace& tr, std::string_view tag) {
  std::vector<TraceLine> out;
  for (const auto& l : tr.lines) {
    TraceLine t(l);
    if (t.tag() == tag) out.push_back(t);
  }
  return out;
}

}  // namespace rplsim::testing
