#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dodag.hpp"
#include "messages.hpp"
#include "node_protocol.hpp"
#include "time.hpp"

namespace rplsim {

struct DetectionConfig {
  std::size_t k = 0;
  bool enabled = false;
};

/// Raised by the root when a trigger-bit DAO arrives for a DTSN increment the
/// root did not start.
struct Alarm {
  SimTime time = 0;
  NodeId reporting_origin = kNoNode;
  std::uint64_t evidence_dao = 0;
};

/// Witness rule run by a node that heard a non-preferred DAO parent
/// increment its DTSN: a trigger-bit DAO toward the preferred parent, with
/// no change to its own DTSN.
inline std::optional<ScheduleDao> on_nonpreferred_dtsn_increment(const NodeState&,
                                                                 const DetectionConfig& cfg) {
  if (!cfg.enabled) return std::nullopt;
  return ScheduleDao{true};
}

/// Root-side bookkeeping of the DTSN increments the root itself started.
class RootMonitor {
 public:
  explicit RootMonitor(SimTime grace) : grace_(grace) {}

  void record_root_increment(SimTime t) { root_increments_.push_back(t); }

  bool in_root_epoch(SimTime t) const {
    for (SimTime s : root_increments_) {
      if (t >= s && t - s <= grace_) return true;
    }
    return false;
  }

  SimTime grace() const { return grace_; }

 private:
  SimTime grace_;
  std::vector<SimTime> root_increments_;
};

inline std::optional<Alarm> root_check(const Dao& d, SimTime now, bool root_initiated_window) {
  if (!d.trigger || root_initiated_window) return std::nullopt;
  return Alarm{now, d.origin, d.id};
}

inline std::optional<Alarm> root_check(const RootMonitor& monitor, const Dao& d, SimTime now) {
  return root_check(d, now, monitor.in_root_epoch(now));
}

/// 1 iff some node keeps a DAO parent inside the attacker's sub-DODAG
/// (attacker included) while its preferred parent lies outside it.
inline int detectability(const Dodag& g, NodeId attacker) {
  const auto inside = g.sub_dodag(attacker);
  for (NodeId w = 1; w < g.size(); ++w) {
    const NodeId p = g.preferred[w];
    if (p == kNoNode || inside[p]) continue;
    for (NodeId dp : g.dao_parents[w]) {
      if (inside[dp]) return 1;
    }
  }
  return 0;
}

struct DetectionRate {
  double rate = 0.0;
  /// Every weight was zero (e.g. a star) and the rate is 1 by convention.
  bool vacuous = false;
};

/// Descendant-weighted mean of per-attacker detectability over all non-root
/// nodes. Childless nodes carry zero weight.
inline DetectionRate detection_rate(const Dodag& g) {
  const auto kids = g.children();
  double weighted = 0.0;
  double total = 0.0;
  for (NodeId u = 1; u < g.size(); ++u) {
    if (kids[u].empty()) continue;
    const double w = static_cast<double>(g.descendant_count(u));
    total += w;
    weighted += w * detectability(g, u);
  }
  if (total == 0.0) return {1.0, true};
  return {weighted / total, false};
}

}  // namespace rplsim
