#pragma once

#include <cstdint>
#include <vector>

#include "node_protocol.hpp"
#include "topology.hpp"

namespace rplsim {

/// Immutable snapshot of a DODAG: ranks, preferred-parent tree and DAO
/// parent sets.
struct Dodag {
  std::vector<std::uint32_t> rank;
  std::vector<NodeId> preferred;  // kNoNode for the root and unjoined nodes
  std::vector<std::vector<NodeId>> dao_parents;

  std::size_t size() const { return rank.size(); }

  std::vector<std::vector<NodeId>> children() const {
    std::vector<std::vector<NodeId>> out(size());
    for (NodeId v = 0; v < size(); ++v) {
      if (preferred[v] != kNoNode) out[preferred[v]].push_back(v);
    }
    return out;
  }

  /// Membership mask of `v` and all its preferred-tree descendants.
  std::vector<bool> sub_dodag(NodeId v) const {
    const auto kids = children();
    std::vector<bool> in(size(), false);
    std::vector<NodeId> stack{v};
    in[v] = true;
    while (!stack.empty()) {
      const NodeId u = stack.back();
      stack.pop_back();
      for (NodeId c : kids[u]) {
        if (!in[c]) {
          in[c] = true;
          stack.push_back(c);
        }
      }
    }
    return in;
  }

  std::size_t descendant_count(NodeId v) const {
    std::size_t n = 0;
    for (bool b : sub_dodag(v)) n += b;
    return n - 1;
  }

  /// Hops to the root along preferred parents; -1 when unjoined.
  int depth(NodeId v) const {
    int d = 0;
    while (v != kRootId) {
      if (preferred[v] == kNoNode || d > static_cast<int>(size())) return -1;
      v = preferred[v];
      ++d;
    }
    return d;
  }
};

inline Dodag snapshot(const std::vector<NodeState>& nodes) {
  Dodag g;
  for (const auto& s : nodes) {
    g.rank.push_back(s.rank);
    g.preferred.push_back(s.is_root() ? kNoNode : s.preferred_parent);
    g.dao_parents.push_back(s.dao_parents);
  }
  return g;
}

/// Converged DODAG under the hop-count objective with lossless links, using
/// the same parent-selection rules as the node state machine.
inline Dodag build_dodag(const Topology& t, const ProtocolParams& params) {
  const auto hops = t.hops_from_root();
  Dodag g;
  g.rank.assign(t.size(), kUnjoinedRank);
  g.preferred.assign(t.size(), kNoNode);
  g.dao_parents.assign(t.size(), {});
  for (NodeId v = 0; v < t.size(); ++v) {
    if (hops[v] < 0) continue;
    std::uint32_t r = params.root_rank;
    for (int h = 0; h < hops[v]; ++h) r = compute_rank(r, params.rank_step);
    g.rank[v] = r;
  }
  for (NodeId v = 1; v < t.size(); ++v) {
    if (g.rank[v] == kUnjoinedRank) continue;
    std::vector<CandidateParent> candidates;
    for (NodeId u : t.neighbors(v)) {
      if (g.rank[u] < g.rank[v]) candidates.push_back({u, g.rank[u], {}});
    }
    g.preferred[v] = select_preferred_parent(candidates);
    g.dao_parents[v] = select_dao_parents(candidates, g.preferred[v], params.extra_dao_parents);
  }
  return g;
}

}  // namespace rplsim
