#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "adversary.hpp"
#include "detection.hpp"
#include "dodag.hpp"
#include "messages.hpp"
#include "metrics.hpp"
#include "node_protocol.hpp"
#include "rng.hpp"
#include "scenario.hpp"
#include "time.hpp"
#include "topology.hpp"
#include "trace.hpp"

namespace rplsim {

enum class EventKind : std::uint8_t {
  Boot,
  TrickleFire,
  TrickleEnd,
  DaoTimer,
  DisTimer,
  Traffic,
  TxAttempt,
  TxEnd,
  AttackTick,
  RootIncrement,
  DaoRefresh,
};

/// Scheduled event. Ordered by (time, sequence); the sequence number is
/// assigned at insertion so simultaneous events run in scheduling order.
struct Event {
  SimTime time = 0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::Boot;
  NodeId node = kNoNode;
  std::uint64_t token = 0;

  friend bool operator>(const Event& a, const Event& b) {
    return a.time != b.time ? a.time > b.time : a.sequence > b.sequence;
  }
};

class EventQueue {
 public:
  void push(SimTime time, EventKind kind, NodeId node, std::uint64_t token = 0) {
    heap_.push(Event{time, next_sequence_++, kind, node, token});
  }
  bool empty() const { return heap_.empty(); }
  Event pop() {
    Event e = heap_.top();
    heap_.pop();
    return e;
  }

 private:
  std::priority_queue<Event, std::vector<Event>, std::greater<>> heap_;
  std::uint64_t next_sequence_ = 0;
};

/// Frame queued at a node's MAC. `dest == kNoNode` means broadcast.
struct Frame {
  Message msg;
  NodeId dest = kNoNode;
  std::uint32_t bytes = 0;
  int attempt = 1;
};

inline SimTime airtime(std::uint32_t bytes, double bitrate_bps) {
  const double us = static_cast<double>(bytes) * 8.0 * 1e6 / bitrate_bps;
  return std::max<SimTime>(1, static_cast<SimTime>(std::ceil(us)));
}

/// Shared radio medium: transmissions on the air and the collision rule.
///
/// A reception fails when another transmission overlaps it from a sender
/// within the receiver's interference range, or when the receiver itself
/// transmits during it. With collisions disabled only the caller's link
/// draws decide.
class Channel {
 public:
  Channel(const Topology& topo, bool collisions) : topo_(&topo), collisions_(collisions) {}

  /// Starts a transmission to `receivers`; `ok[i]` is the link draw for
  /// receiver i. Returns the transmission id.
  std::uint64_t begin(NodeId sender, std::vector<NodeId> receivers, std::vector<char> ok) {
    if (collisions_) {
      for (auto& other : active_) {
        for (std::size_t i = 0; i < other.receivers.size(); ++i) {
          const NodeId r = other.receivers[i];
          if (r == sender || topo_->within_interference(sender, r)) other.ok[i] = 0;
        }
      }
      for (std::size_t i = 0; i < receivers.size(); ++i) {
        for (const auto& other : active_) {
          const NodeId r = receivers[i];
          if (other.sender == r || topo_->within_interference(other.sender, r)) ok[i] = 0;
        }
      }
    }
    active_.push_back(Active{++next_id_, sender, std::move(receivers), std::move(ok)});
    return next_id_;
  }

  /// Ends a transmission and returns the receivers that got it intact.
  std::vector<NodeId> end(std::uint64_t id) {
    auto it = std::find_if(active_.begin(), active_.end(),
                           [id](const Active& a) { return a.id == id; });
    if (it == active_.end()) throw std::logic_error("unknown transmission");
    std::vector<NodeId> out;
    for (std::size_t i = 0; i < it->receivers.size(); ++i) {
      if (it->ok[i]) out.push_back(it->receivers[i]);
    }
    active_.erase(it);
    return out;
  }

  /// Carrier sense: some other node within interference range is on the air.
  bool busy_near(NodeId node) const {
    return std::any_of(active_.begin(), active_.end(), [&](const Active& a) {
      return a.sender != node && topo_->within_interference(a.sender, node);
    });
  }

  std::size_t on_air() const { return active_.size(); }

 private:
  struct Active {
    std::uint64_t id = 0;
    NodeId sender = kNoNode;
    std::vector<NodeId> receivers;
    std::vector<char> ok;
  };

  const Topology* topo_;
  bool collisions_;
  std::vector<Active> active_;
  std::uint64_t next_id_ = 0;
};

struct RunResult {
  Scenario scenario;
  Topology topology;
  NodeId attacker = kNoNode;
  Trace trace;
  MetricsReport report;
  std::vector<NodeState> nodes;
  std::optional<Dodag> dodag_at_attack;
};

class Simulation;
using EventObserver = std::function<void(const Simulation&, const Event&)>;

inline Topology make_topology(const Scenario& sc) {
  if (!sc.topology_file.empty()) {
    std::ifstream in(sc.topology_file);
    if (!in) throw ConfigError("cannot open topology file '" + sc.topology_file + "'");
    Topology t = Topology::read(in, sc.radio);
    if (!t.connected()) throw TopologyError("topology file is not connected");
    return t;
  }
  return generate_topology(sc.nodes, sc.topology_seed, sc.radio, sc.topology_attempts);
}

/// Single-threaded discrete-event run of one scenario: RPL nodes over an
/// abstract CSMA MAC on a unit-disk topology.
///
/// MAC model: one frame on the air per node at a time; each attempt waits a
/// random backoff, defers while carrier sense reports a transmission within
/// interference range, then occupies the channel for bytes*8/bitrate. A
/// reception fails if another transmission overlaps it from within the
/// receiver's interference range, if the receiver is itself transmitting,
/// or on a failed per-link success draw. Unicast frames are retried up to
/// max_retries times; broadcasts are sent once.
class Simulation {
 public:
  Simulation(Scenario sc, Topology topo)
      : sc_(std::move(sc)), topo_(std::move(topo)), channel_(topo_, sc_.mac.collisions) {
    validate(sc_);
    params_ = sc_.protocol();
    end_ = from_seconds(sc_.duration_s);
    drain_end_ = end_ + from_seconds(sc_.drain_s);
    monitor_ = RootMonitor(from_seconds(sc_.detection.grace_s));
    const std::size_t n = topo_.size();
    nodes_.reserve(n);
    rngs_.reserve(n);
    for (NodeId i = 0; i < n; ++i) {
      nodes_.push_back(i == kRootId ? make_root(sc_.rpl.root_rank) : make_node(i));
      nodes_.back().trickle.imin = from_seconds(sc_.trickle.imin_s);
      nodes_.back().trickle.doublings = sc_.trickle.doublings;
      nodes_.back().trickle.redundancy = sc_.trickle.redundancy;
      rngs_.push_back(NodeRngs{Rng(sc_.scenario_seed, 3 * i + 1), Rng(sc_.scenario_seed, 3 * i + 2),
                               Rng(sc_.scenario_seed, 3 * i + 3)});
    }
    booted_.assign(n, false);
    macs_.assign(n, {});
    dao_generation_.assign(n, 0);

    if (sc_.attacker.enabled) {
      if (sc_.attacker.node < 0) {
        attacker_ = pick_attacker(build_dodag(topo_, params_), sc_.scenario_seed);
      } else {
        attacker_ = static_cast<NodeId>(sc_.attacker.node);
        if (!topo_.contains(attacker_)) throw ConfigError("attacker.node is not in the topology");
      }
    }
  }

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  const Scenario& scenario() const { return sc_; }
  const Topology& topology() const { return topo_; }
  const std::vector<NodeState>& nodes() const { return nodes_; }
  NodeId attacker() const { return attacker_; }
  SimTime now() const { return now_; }

  RunResult run(const EventObserver& observer = {}) {
    schedule_initial();
    while (!queue_.empty()) {
      const Event ev = queue_.pop();
      if (ev.time > end_) {
        if (ev.time > drain_end_) break;
        if (ev.kind != EventKind::TxAttempt && ev.kind != EventKind::TxEnd) continue;
      }
      now_ = ev.time;
      dispatch(ev);
      if (observer) observer(*this, ev);
    }

    RunResult out;
    out.trace.header = make_header();
    out.trace.lines = std::move(lines_);
    out.report = compute_metrics(out.trace, topo_, sc_.energy, sc_.duration_s);
    out.scenario = sc_;
    out.topology = topo_;
    out.attacker = attacker_;
    out.nodes = nodes_;
    out.dodag_at_attack = std::move(dodag_at_attack_);
    return out;
  }

 private:
  struct MacState {
    std::deque<Frame> queue;
    bool busy = false;  // an attempt is scheduled or a frame is on the air
  };

  /// Separate streams per purpose keep paired runs (e.g. attack vs
  /// baseline) drawing the same data-path randomness.
  struct NodeRngs {
    Rng protocol;
    Rng control_mac;
    Rng data_mac;
  };


  void schedule_initial() {
    const SimTime window = from_seconds(sc_.join.window_s);
    const SimTime period = from_seconds(sc_.traffic.period_s);
    const SimTime traffic_start = from_seconds(sc_.traffic.start_s);
    queue_.push(0, EventKind::Boot, kRootId);
    for (NodeId i = 1; i < nodes_.size(); ++i) {
      queue_.push(rngs_[i].protocol.uniform_int(0, window), EventKind::Boot, i);
      const SimTime first = traffic_start + rngs_[i].protocol.uniform_int(0, period - 1);
      if (first <= end_) queue_.push(first, EventKind::Traffic, i);
      if (sc_.rpl.dao_refresh_s > 0) {
        queue_.push(traffic_start + rngs_[i].protocol.uniform_int(0, from_seconds(sc_.rpl.dao_refresh_s) - 1),
                    EventKind::DaoRefresh, i);
      }
    }
    for (double t : sc_.rpl.root_dtsn_increments_s) {
      queue_.push(from_seconds(t), EventKind::RootIncrement, kRootId);
    }
    if (attacker_ != kNoNode) {
      for (SimTime t : attack_schedule(sc_.attacker, end_)) {
        queue_.push(t, EventKind::AttackTick, attacker_);
      }
    }
  }

  void dispatch(const Event& ev) {
    NodeState& s = nodes_[ev.node];
    switch (ev.kind) {
      case EventKind::Boot:
        booted_[ev.node] = true;
        log("BOOT", ev.node);
        if (s.is_root()) {
          reset_trickle(ev.node);
        } else {
          queue_.push(now_ + from_seconds(sc_.join.dis_delay_s), EventKind::DisTimer, ev.node);
        }
        break;
      case EventKind::TrickleFire:
        if (ev.token == s.trickle.generation) {
          if (auto dio = trickle_tick(s, now_)) broadcast(ev.node, *dio);
        }
        break;
      case EventKind::TrickleEnd:
        if (ev.token == s.trickle.generation) {
          s.trickle.expire(now_, rngs_[ev.node].protocol);
          push_trickle(ev.node);
        }
        break;
      case EventKind::DaoTimer:
        if (ev.token == dao_generation_[ev.node] && s.dao_pending) {
          if (s.joined() && s.preferred_parent != kNoNode) {
            Dao d = emit_dao(s, s.preferred_parent, s.dao_pending_trigger, ++dao_counter_);
            unicast(ev.node, s.preferred_parent, d, sc_.sizes.dao_bytes);
          } else {
            s.dao_pending = false;
            s.dao_pending_trigger = false;
          }
        }
        break;
      case EventKind::DisTimer:
        if (!s.joined()) {
          broadcast(ev.node, Dis{ev.node});
          queue_.push(now_ + from_seconds(sc_.join.dis_interval_s), EventKind::DisTimer, ev.node);
        }
        break;
      case EventKind::Traffic: {
        DataPacket p;
        p.id = ++packet_counter_;
        p.origin = ev.node;
        p.forwarder = ev.node;
        p.created_at = now_;
        p.size_bytes = sc_.traffic.packet_bytes;
        log("GEN", ev.node, "pkt=" + std::to_string(p.id));
        if (s.joined()) {
          unicast(ev.node, s.preferred_parent, p, p.size_bytes);
        } else {
          log("DROP", ev.node, "DATA\treason=no-parent\tpkt=" + std::to_string(p.id));
        }
        const SimTime next = now_ + from_seconds(sc_.traffic.period_s);
        if (next <= end_) queue_.push(next, EventKind::Traffic, ev.node);
        break;
      }
      case EventKind::TxAttempt:
        attempt(ev.node);
        break;
      case EventKind::TxEnd:
        finish(ev.node, ev.token);
        break;
      case EventKind::AttackTick: {
        if (!dodag_at_attack_) dodag_at_attack_ = snapshot(nodes_);
        const Dio dio = attack_tick(s);
        log("ATTACK", ev.node, "dtsn=" + std::to_string(s.dtsn.value()));
        reset_trickle(ev.node);
        if (s.joined()) broadcast(ev.node, dio);
        break;
      }
      case EventKind::RootIncrement:
        s.dtsn = increment(s.dtsn);
        monitor_.record_root_increment(now_);
        log("ROOTINC", ev.node, "dtsn=" + std::to_string(s.dtsn.value()));
        reset_trickle(ev.node);
        broadcast(ev.node, Dio{s.id, s.rank, s.dtsn, 0});
        break;
      case EventKind::DaoRefresh:
        if (s.joined()) schedule_dao(ev.node, false);
        if (now_ + from_seconds(sc_.rpl.dao_refresh_s) <= end_) {
          queue_.push(now_ + from_seconds(sc_.rpl.dao_refresh_s), EventKind::DaoRefresh, ev.node);
        }
        break;
    }
  }

  // --- protocol glue --------------------------------------------------------

  void process(NodeId node, const std::vector<Action>& actions) {
    for (const auto& a : actions) {
      if (const auto* sd = std::get_if<ScheduleDao>(&a)) {
        schedule_dao(node, sd->trigger);
      } else if (std::holds_alternative<ResetTrickle>(a)) {
        reset_trickle(node);
      } else if (const auto* di = std::get_if<DtsnIncremented>(&a)) {
        log("DTSN", node, "dtsn=" + std::to_string(di->value.value()));
      } else if (const auto* pc = std::get_if<ParentChanged>(&a)) {
        log("PARENT", node, "parent=" + node_field(pc->current) + "\trank=" + std::to_string(pc->rank));
      }
    }
  }

  void schedule_dao(NodeId node, bool trigger) {
    NodeState& s = nodes_[node];
    if (s.is_root()) return;
    if (!s.dao_pending) {
      s.dao_pending = true;
      s.dao_due = now_ + rngs_[node].protocol.uniform_int(0, from_seconds(sc_.rpl.dao_delay_s));
      queue_.push(s.dao_due, EventKind::DaoTimer, node, ++dao_generation_[node]);
    }
    s.dao_pending_trigger = s.dao_pending_trigger || trigger;
  }

  void reset_trickle(NodeId node) {
    nodes_[node].trickle.reset(now_, rngs_[node].protocol);
    push_trickle(node);
  }

  void push_trickle(NodeId node) {
    const Trickle& t = nodes_[node].trickle;
    queue_.push(t.fire_at, EventKind::TrickleFire, node, t.generation);
    queue_.push(t.interval_end, EventKind::TrickleEnd, node, t.generation);
  }

  void deliver(NodeId to, const Message& msg, NodeId from) {
    NodeState& s = nodes_[to];
    if (const auto* dio = std::get_if<Dio>(&msg)) {
      process(to, handle_dio(s, *dio, params_));
    } else if (std::holds_alternative<Dis>(msg)) {
      if (auto dio = handle_dis(s)) broadcast(to, *dio);
    } else if (const auto* dao = std::get_if<Dao>(&msg)) {
      receive_dao(to, *dao, from);
    } else if (const auto* pkt = std::get_if<DataPacket>(&msg)) {
      if (s.is_root()) {
        log("DELIVER", pkt->origin,
            "pkt=" + std::to_string(pkt->id) + "\tcreated=" + format_time(pkt->created_at));
      } else if (s.joined()) {
        DataPacket fwd = *pkt;
        fwd.forwarder = to;
        unicast(to, s.preferred_parent, fwd, fwd.size_bytes);
      } else {
        log("DROP", to, "DATA\treason=unjoined\tpkt=" + std::to_string(pkt->id));
      }
    }
  }

  void receive_dao(NodeId to, const Dao& dao, NodeId from) {
    NodeState& s = nodes_[to];
    if (to == attacker_ && filter_forward(s, dao, sc_.attacker) == ForwardDecision::Drop) {
      log("DROP", to, "DAO\treason=attacker\tdao=" + std::to_string(dao.id) +
                          "\torigin=" + std::to_string(dao.origin));
      return;
    }
    auto outcome = handle_dao(s, dao, from, sc_.mode);
    if (auto* f = std::get_if<ForwardDao>(&outcome)) {
      unicast(to, f->next_hop, f->dao, sc_.sizes.dao_bytes);
    } else if (auto* r = std::get_if<RecordDao>(&outcome)) {
      log("DAORECV", r->dao.origin,
          "dao=" + std::to_string(r->dao.id) + "\ttrigger=" + (r->dao.trigger ? "T" : "F"));
      if (sc_.detection.enabled) {
        if (auto alarm = root_check(monitor_, r->dao, now_)) {
          log("ALARM", alarm->reporting_origin, "dao=" + std::to_string(alarm->evidence_dao));
        }
      }
    } else if (auto* d = std::get_if<DropDao>(&outcome)) {
      log("DROP", to, std::string("DAO\treason=") + to_string(d->reason) +
                          "\tdao=" + std::to_string(d->dao.id));
    }
  }

  // --- MAC --------------------------------------------------------------------

  Rng& mac_rng(NodeId node, const Frame& f) {
    return std::holds_alternative<DataPacket>(f.msg) ? rngs_[node].data_mac : rngs_[node].control_mac;
  }

  SimTime backoff(NodeId node, const Frame& f) {
    return mac_rng(node, f).uniform_int(from_seconds(sc_.mac.backoff_min_s),
                                   from_seconds(sc_.mac.backoff_max_s));
  }

  void broadcast(NodeId from, const Message& msg) {
    std::uint32_t bytes = sc_.sizes.dio_bytes;
    if (std::holds_alternative<Dis>(msg)) bytes = sc_.sizes.dis_bytes;
    enqueue(from, Frame{msg, kNoNode, bytes, 1});
  }

  void unicast(NodeId from, NodeId to, const Message& msg, std::uint32_t bytes) {
    if (to == kNoNode) {
      log("DROP", from, std::string(message_kind(msg)) + "\treason=no-parent");
      return;
    }
    enqueue(from, Frame{msg, to, bytes, 1});
  }

  void enqueue(NodeId node, Frame f) {
    MacState& mac = macs_[node];
    if (mac.queue.size() >= sc_.mac.queue_limit) {
      log("DROP", node, std::string(message_kind(f.msg)) + "\treason=queue-full");
      return;
    }
    mac.queue.push_back(std::move(f));
    if (!mac.busy) {
      mac.busy = true;
      queue_.push(now_ + backoff(node, mac.queue.front()), EventKind::TxAttempt, node);
    }
  }

  void attempt(NodeId node) {
    MacState& mac = macs_[node];
    const Frame& f = mac.queue.front();
    if (sc_.mac.carrier_sense && channel_.busy_near(node)) {
      queue_.push(now_ + backoff(node, f), EventKind::TxAttempt, node);
      return;
    }
    lines_.push_back(encode_trace(f.msg, now_, f.dest, f.bytes, f.attempt));

    std::vector<NodeId> receivers;
    std::vector<char> ok;
    for (NodeId r : topo_.neighbors(node)) {
      if (!booted_[r]) continue;
      receivers.push_back(r);
      ok.push_back(mac_rng(node, f).bernoulli(sc_.mac.link_success) ? 1 : 0);
    }
    const std::uint64_t id = channel_.begin(node, std::move(receivers), std::move(ok));
    queue_.push(now_ + airtime(f.bytes, sc_.mac.bitrate_bps), EventKind::TxEnd, node, id);
  }

  void finish(NodeId node, std::uint64_t tx_id) {
    const std::vector<NodeId> received = channel_.end(tx_id);

    MacState& mac = macs_[node];
    Frame f = mac.queue.front();
    std::vector<NodeId> deliver_to;
    if (f.dest == kNoNode) {
      deliver_to = received;
      mac.queue.pop_front();
    } else {
      const bool acked = std::find(received.begin(), received.end(), f.dest) != received.end();
      if (acked) {
        deliver_to.push_back(f.dest);
        mac.queue.pop_front();
      } else if (f.attempt <= sc_.mac.max_retries) {
        ++mac.queue.front().attempt;
      } else {
        log("DROP", node, std::string(message_kind(f.msg)) + "\treason=mac-retries\tto=" +
                              std::to_string(f.dest));
        mac.queue.pop_front();
      }
    }
    if (mac.queue.empty()) {
      mac.busy = false;
    } else {
      queue_.push(now_ + backoff(node, mac.queue.front()), EventKind::TxAttempt, node);
    }
    for (NodeId r : deliver_to) deliver(r, f.msg, node);
  }

  // --- trace ------------------------------------------------------------------

  void log(std::string_view tag, NodeId node, std::string_view rest = {}) {
    lines_.push_back(trace_event(now_, tag, node, rest));
  }

  std::vector<std::string> make_header() const {
    std::vector<std::string> h;
    h.push_back("# rplsim trace v1");
    h.push_back("# columns time_s<TAB>event<TAB>node<TAB>fields (TX: kind sender receiver bytes attempt fields)");
    h.push_back("# warmup nodes boot uniformly in [0, join.window_s]; data traffic starts at traffic.start_s; "
                "after duration_s only in-flight frames are drained for drain_s");
    h.push_back("# config " + to_json(sc_).dump());
    h.push_back("# attacker " + node_field(attacker_));
    char buf[96];
    for (NodeId i = 0; i < topo_.size(); ++i) {
      const Point p = topo_.position(i);
      std::snprintf(buf, sizeof buf, "# node %u %.17g %.17g", i, p.x, p.y);
      h.emplace_back(buf);
    }
    return h;
  }

  Scenario sc_;
  Topology topo_;
  ProtocolParams params_;
  SimTime end_ = 0;
  SimTime drain_end_ = 0;
  SimTime now_ = 0;
  EventQueue queue_;
  std::vector<NodeState> nodes_;
  std::vector<NodeRngs> rngs_;
  std::vector<bool> booted_;
  std::vector<MacState> macs_;
  Channel channel_;
  std::vector<std::uint64_t> dao_generation_;
  RootMonitor monitor_{0};
  NodeId attacker_ = kNoNode;
  std::optional<Dodag> dodag_at_attack_;
  std::uint64_t dao_counter_ = 0;
  std::uint64_t packet_counter_ = 0;
  std::uint64_t tx_counter_ = 0;
  std::vector<std::string> lines_;
};

inline RunResult run(const Scenario& sc, const EventObserver& observer = {}) {
  Simulation sim(sc, make_topology(sc));
  return sim.run(observer);
}

/// Scenario and topology recorded in a trace header.
inline std::pair<Scenario, Topology> scenario_from_trace(const Trace& trace) {
  const auto cfg = trace.header_value("config");
  if (!cfg) throw ConfigError("trace has no config header");
  Scenario sc = parse_scenario(*cfg);
  std::vector<Point> positions;
  for (const auto& h : trace.header) {
    unsigned id = 0;
    Point p;
    if (std::sscanf(h.c_str(), "# node %u %lf %lf", &id, &p.x, &p.y) == 3) {
      if (id != positions.size()) throw ConfigError("trace node header out of order");
      positions.push_back(p);
    }
  }
  if (positions.size() < 2) throw ConfigError("trace has no topology header");
  return {sc, Topology(std::move(positions), sc.radio, sc.topology_seed)};
}

/// Recomputes the metrics of a saved trace.
inline MetricsReport replay(const Trace& trace) {
  const auto [sc, topo] = scenario_from_trace(trace);
  return compute_metrics(trace, topo, sc.energy, sc.duration_s);
}

}  // namespace rplsim
