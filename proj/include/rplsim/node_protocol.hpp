#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "messages.hpp"
#include "rng.hpp"
#include "seq_counter.hpp"
#include "time.hpp"
#include "topology.hpp"

namespace rplsim {

enum class Mode { Storing, NonStoring };

inline const char* to_string(Mode m) { return m == Mode::Storing ? "storing" : "non-storing"; }

inline constexpr std::uint32_t kUnjoinedRank = UINT32_MAX;

class NoRouteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProtocolParams {
  Mode mode = Mode::NonStoring;
  std::uint32_t rank_step = 256;
  std::uint32_t root_rank = 256;
  /// Extra (non-preferred) DAO parents each node keeps.
  std::size_t extra_dao_parents = 0;
  /// Nodes react to DTSN increments from non-preferred DAO parents.
  bool detection_enabled = false;
};

/// Hop-count objective: parent rank plus a fixed step.
inline constexpr std::uint32_t compute_rank(std::uint32_t parent_rank,
                                            std::uint32_t rank_step = 256) {
  return parent_rank + rank_step;
}

/// Last-heard DIO state of one neighbor.
struct CandidateParent {
  NodeId id = kNoNode;
  std::uint32_t rank = kUnjoinedRank;
  LollipopCounter dtsn;
};

/// Trickle timer state (interval doubling between Imin and Imax, with
/// redundancy-based suppression).
struct Trickle {
  SimTime imin = 4 * kMicrosPerSecond;
  int doublings = 8;
  int redundancy = 10;

  SimTime interval = 0;
  SimTime interval_end = 0;
  SimTime fire_at = 0;
  int counter = 0;
  std::uint64_t generation = 0;

  SimTime imax() const { return imin << doublings; }

  void start_interval(SimTime now, Rng& rng) {
    counter = 0;
    fire_at = now + rng.uniform_int(interval / 2, interval - 1);
    interval_end = now + interval;
    ++generation;
  }

  void reset(SimTime now, Rng& rng) {
    interval = imin;
    start_interval(now, rng);
  }

  void expire(SimTime now, Rng& rng) {
    interval = std::min(interval * 2, imax());
    start_interval(now, rng);
  }

  bool may_transmit() const { return counter < redundancy; }
};

/// Full RPL state of one node.
struct NodeState {
  NodeId id = kNoNode;
  std::uint32_t rank = kUnjoinedRank;
  std::vector<CandidateParent> candidates;  // every DIO sender heard, ascending id
  NodeId preferred_parent = kNoNode;
  std::vector<NodeId> dao_parents;  // preferred first
  LollipopCounter dtsn;
  std::map<NodeId, NodeId> routing_table;  // destination -> next hop (storing)
  std::map<NodeId, NodeId> source_routes;  // origin -> parent of origin (root, non-storing)
  bool dao_pending = false;
  bool dao_pending_trigger = false;
  SimTime dao_due = 0;
  Trickle trickle;

  bool is_root() const { return id == kRootId; }
  bool joined() const { return rank != kUnjoinedRank; }

  const CandidateParent* candidate(NodeId n) const {
    auto it = std::find_if(candidates.begin(), candidates.end(),
                           [n](const CandidateParent& c) { return c.id == n; });
    return it == candidates.end() ? nullptr : &*it;
  }

  bool is_dao_parent(NodeId n) const {
    return std::find(dao_parents.begin(), dao_parents.end(), n) != dao_parents.end();
  }
};

inline NodeState make_root(std::uint32_t root_rank = 256) {
  NodeState s;
  s.id = kRootId;
  s.rank = root_rank;
  return s;
}

inline NodeState make_node(NodeId id) {
  NodeState s;
  s.id = id;
  return s;
}

namespace detail {
inline bool better_parent(const CandidateParent& a, const CandidateParent& b) {
  return a.rank != b.rank ? a.rank < b.rank : a.id < b.id;
}
}  // namespace detail

/// Candidate yielding the lowest resulting rank; ties go to the lowest id.
inline NodeId select_preferred_parent(std::span<const CandidateParent> candidates) {
  if (candidates.empty()) throw std::invalid_argument("no candidate parents");
  return std::min_element(candidates.begin(), candidates.end(), detail::better_parent)->id;
}

/// Preferred parent first, then up to `extra` lowest-rank others.
inline std::vector<NodeId> select_dao_parents(std::span<const CandidateParent> candidates,
                                              NodeId preferred, std::size_t extra) {
  std::vector<CandidateParent> others;
  bool found = false;
  for (const auto& c : candidates) {
    if (c.id == preferred) {
      found = true;
    } else {
      others.push_back(c);
    }
  }
  if (!found) throw std::invalid_argument("preferred parent is not a candidate");
  std::sort(others.begin(), others.end(), detail::better_parent);
  std::vector<NodeId> out{preferred};
  for (std::size_t i = 0; i < others.size() && i < extra; ++i) out.push_back(others[i].id);
  return out;
}

/// Neighbors that may serve as parents: rank strictly below the rank the
/// node would take from its best neighbor.
inline std::vector<CandidateParent> eligible_parents(const NodeState& s,
                                                     const ProtocolParams& params) {
  std::uint32_t best = kUnjoinedRank;
  for (const auto& c : s.candidates) best = std::min(best, c.rank);
  std::vector<CandidateParent> out;
  if (best == kUnjoinedRank) return out;
  const std::uint32_t own = compute_rank(best, params.rank_step);
  for (const auto& c : s.candidates) {
    if (c.rank < own) out.push_back(c);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Actions returned by the handlers; the engine carries them out.

struct ScheduleDao {
  bool trigger = false;
};
struct ResetTrickle {};
struct DtsnIncremented {
  LollipopCounter value;
};
struct ParentChanged {
  NodeId previous = kNoNode;
  NodeId current = kNoNode;
  std::uint32_t rank = kUnjoinedRank;
};

using Action = std::variant<ScheduleDao, ResetTrickle, DtsnIncremented, ParentChanged>;

template <class T>
bool has_action(const std::vector<Action>& actions) {
  return std::any_of(actions.begin(), actions.end(),
                     [](const Action& a) { return std::holds_alternative<T>(a); });
}

/// Processes a received DIO.
///
/// Records the sender, recomputes rank, preferred parent and DAO parents,
/// then reacts to a DTSN increment by a DAO parent: the preferred parent's
/// increment schedules a triggered DAO (and in non-storing mode bumps our
/// own DTSN); a non-preferred DAO parent's increment schedules a triggered
/// DAO toward the preferred parent only when detection is enabled.
inline std::vector<Action> handle_dio(NodeState& s, const Dio& d, const ProtocolParams& params) {
  std::vector<Action> actions;
  if (d.sender == s.id) return actions;

  std::optional<LollipopCounter> previous_dtsn;
  auto it = std::find_if(s.candidates.begin(), s.candidates.end(),
                         [&](const CandidateParent& c) { return c.id == d.sender; });
  if (it == s.candidates.end()) {
    auto pos = std::lower_bound(s.candidates.begin(), s.candidates.end(), d.sender,
                                [](const CandidateParent& c, NodeId id) { return c.id < id; });
    it = s.candidates.insert(pos, CandidateParent{d.sender, d.rank, d.dtsn});
  } else {
    previous_dtsn = it->dtsn;
    it->rank = d.rank;
    it->dtsn = d.dtsn;
  }

  if (s.is_root()) return actions;

  const bool was_joined = s.joined();
  const NodeId old_parent = s.preferred_parent;
  const std::uint32_t old_rank = s.rank;

  const auto eligible = eligible_parents(s, params);
  if (!eligible.empty()) {
    s.preferred_parent = select_preferred_parent(eligible);
    s.rank = compute_rank(s.candidate(s.preferred_parent)->rank, params.rank_step);
    s.dao_parents = select_dao_parents(eligible, s.preferred_parent, params.extra_dao_parents);
  }

  bool inconsistent = false;
  if (s.preferred_parent != old_parent) {
    actions.push_back(ParentChanged{old_parent, s.preferred_parent, s.rank});
    actions.push_back(ScheduleDao{false});
  }
  if (s.rank != old_rank || !was_joined) inconsistent = true;

  const bool incremented = previous_dtsn && is_newer(d.dtsn, *previous_dtsn);
  if (incremented && s.is_dao_parent(d.sender)) {
    if (d.sender == s.preferred_parent) {
      actions.push_back(ScheduleDao{true});
      if (params.mode == Mode::NonStoring) {
        s.dtsn = increment(s.dtsn);
        actions.push_back(DtsnIncremented{s.dtsn});
        inconsistent = true;
      }
    } else if (params.detection_enabled) {
      actions.push_back(ScheduleDao{true});
    }
  }

  if (inconsistent) {
    actions.push_back(ResetTrickle{});
  } else if (d.rank < s.rank) {
    // Only an unchanged view from a lower-rank sender counts as consistent.
    ++s.trickle.counter;
  }
  return actions;
}

/// A joined node answers a DIS with an immediate DIO; unjoined nodes ignore it.
inline std::optional<Dio> handle_dis(const NodeState& s) {
  if (!s.joined()) return std::nullopt;
  return Dio{s.id, s.rank, s.dtsn, 0};
}

/// The DIO a node advertises when its trickle timer fires, if not suppressed.
inline std::optional<Dio> trickle_tick(const NodeState& s, SimTime now) {
  if (!s.joined() || now != s.trickle.fire_at || !s.trickle.may_transmit()) return std::nullopt;
  return Dio{s.id, s.rank, s.dtsn, 0};
}

/// Originates a DAO for `s` toward `via` (a DAO parent).
inline Dao emit_dao(NodeState& s, NodeId via, bool trigger, std::uint64_t dao_id = 0) {
  if (!s.joined() || s.is_root()) throw std::logic_error("emit_dao on root or unjoined node");
  if (!s.is_dao_parent(via)) throw std::invalid_argument("DAO target is not a DAO parent");
  s.dao_pending = false;
  s.dao_pending_trigger = false;
  Dao d;
  d.id = dao_id;
  d.origin = s.id;
  d.forwarder = s.id;
  d.parent_of_origin = s.preferred_parent;
  d.trigger = trigger;
  d.hop_trail = {s.id};
  return d;
}

enum class DropReason { Unjoined, Attacker, MacRetries, QueueFull, NoParent };

inline const char* to_string(DropReason r) {
  switch (r) {
    case DropReason::Unjoined: return "unjoined";
    case DropReason::Attacker: return "attacker";
    case DropReason::MacRetries: return "mac-retries";
    case DropReason::QueueFull: return "queue-full";
    case DropReason::NoParent: return "no-parent";
  }
  return "?";
}

struct ForwardDao {
  Dao dao;
  NodeId next_hop = kNoNode;
};
struct RecordDao {
  Dao dao;
};
struct DropDao {
  Dao dao;
  DropReason reason = DropReason::Unjoined;
};
using DaoOutcome = std::variant<ForwardDao, RecordDao, DropDao>;

/// Processes a DAO received from `from` on its way up.
inline DaoOutcome handle_dao(NodeState& s, Dao d, NodeId from, Mode mode) {
  if (!s.is_root() && !s.joined()) return DropDao{std::move(d), DropReason::Unjoined};
  if (mode == Mode::Storing) s.routing_table[d.origin] = from;
  if (s.is_root()) {
    if (mode == Mode::NonStoring) s.source_routes[d.origin] = d.parent_of_origin;
    return RecordDao{std::move(d)};
  }
  d.forwarder = s.id;
  d.hop_trail.push_back(s.id);
  return ForwardDao{std::move(d), s.preferred_parent};
}

/// Full source route root -> ... -> dest from the recorded parent links.
inline std::vector<NodeId> source_route(const NodeState& root, NodeId dest) {
  std::vector<NodeId> path{dest};
  NodeId cur = dest;
  while (cur != root.id) {
    auto it = root.source_routes.find(cur);
    if (it == root.source_routes.end() || path.size() > root.source_routes.size() + 1) {
      throw NoRouteError("no route to node " + std::to_string(dest));
    }
    cur = it->second;
    path.push_back(cur);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

inline NodeId next_hop(const NodeState& s, NodeId dest) {
  auto it = s.routing_table.find(dest);
  if (it == s.routing_table.end()) throw NoRouteError("no route to node " + std::to_string(dest));
  return it->second;
}

/// Downward route from the root: the full source route in non-storing mode,
/// or the single next hop in storing mode.
inline std::vector<NodeId> route_downward(const NodeState& root, NodeId dest, Mode mode) {
  if (mode == Mode::NonStoring) return source_route(root, dest);
  return {next_hop(root, dest)};
}

}  // namespace rplsim
