#pragma once

#include <optional>
#include <vector>

#include "dodag.hpp"
#include "messages.hpp"
#include "node_protocol.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "time.hpp"

namespace rplsim {

/// Picks the malicious node uniformly among the root's children in the
/// DODAG that head a non-empty sub-DODAG (all root children when none do).
inline NodeId pick_attacker(const Dodag& dodag, std::uint64_t seed) {
  const auto kids = dodag.children();
  std::vector<NodeId> candidates;
  for (NodeId v : kids[kRootId]) {
    if (!kids[v].empty()) candidates.push_back(v);
  }
  if (candidates.empty()) candidates = kids[kRootId];
  if (candidates.empty()) throw TopologyError("root has no children to host the attacker");
  Rng rng(seed, 0x61747461636bULL);
  return candidates[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];
}

/// Times of the attacker's DTSN increments: start + m * period for m >= 1,
/// up to and including `end`.
inline std::vector<SimTime> attack_schedule(const AttackerConfig& cfg, SimTime end) {
  std::vector<SimTime> out;
  if (!cfg.enabled) return out;
  const SimTime start = from_seconds(cfg.start_s);
  const SimTime period = from_seconds(cfg.increment_period_s);
  for (SimTime t = start + period; t <= end; t += period) out.push_back(t);
  return out;
}

/// One attack step: bump the DTSN and advertise it at once. The caller
/// also resets the trickle timer.
inline Dio attack_tick(NodeState& s) {
  s.dtsn = increment(s.dtsn);
  return Dio{s.id, s.rank, s.dtsn, 0};
}

enum class ForwardDecision { Forward, Drop };

/// The attacker silently discards DAOs of other nodes so the triggered
/// DAOs from its sub-DODAG never reach the root.
inline ForwardDecision filter_forward(const NodeState& s, const Dao& d, const AttackerConfig& cfg) {
  if (cfg.drop_descendant_daos && d.origin != s.id) return ForwardDecision::Drop;
  return ForwardDecision::Forward;
}

}  // namespace rplsim
