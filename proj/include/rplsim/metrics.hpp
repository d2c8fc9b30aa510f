#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "detection.hpp"
#include "scenario.hpp"
#include "topology.hpp"
#include "trace.hpp"

namespace rplsim {

struct NodeMetrics {
  std::uint64_t tx_bytes = 0;
  std::uint64_t rx_bytes = 0;
  std::uint64_t packets_sent = 0;
  std::uint64_t packets_delivered = 0;
  std::uint64_t dtsn_increments = 0;
  std::uint64_t dao_originations = 0;
  std::uint64_t trigger_dao_originations = 0;
  double power_mw = 0.0;
};

struct MetricsReport {
  std::uint64_t dao_overhead = 0;
  double avg_power_mw = 0.0;
  double packet_loss_ratio = 0.0;
  std::optional<double> avg_latency_s;
  std::vector<Alarm> alarms;
  std::vector<NodeMetrics> per_node;

  std::map<std::string, std::uint64_t> transmissions;  // per message kind
  std::uint64_t dao_originations = 0;
  std::uint64_t trigger_dao_originations = 0;
  std::uint64_t daos_at_root = 0;
  std::uint64_t attack_increments = 0;
  std::optional<SimTime> first_attack;

  bool detected() const { return !alarms.empty(); }

  std::optional<double> time_to_detect_s() const {
    if (alarms.empty() || !first_attack) return std::nullopt;
    return to_seconds(alarms.front().time - *first_attack);
  }

  std::uint64_t total_transmissions() const {
    std::uint64_t n = 0;
    for (const auto& [kind, count] : transmissions) n += count;
    return n;
  }
};

/// Every DAO hop transmission, retransmissions included.
inline std::uint64_t dao_overhead(const Trace& trace) {
  std::uint64_t n = 0;
  for (const auto& l : trace.lines) {
    const TraceLine t(l);
    if (t.tag() == "TX" && t.col(2) == "DAO") ++n;
  }
  return n;
}

/// Mean over non-root nodes of tx/rx energy per second plus the idle floor.
/// Receive energy is charged to every linked neighbor of a transmitter.
inline double avg_power(const std::vector<NodeMetrics>& nodes, const EnergyModel& model,
                        double duration_s) {
  if (nodes.size() < 2) return model.p_idle_mw;
  double sum = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    sum += (model.e_tx_mj_per_byte * static_cast<double>(nodes[i].tx_bytes) +
            model.e_rx_mj_per_byte * static_cast<double>(nodes[i].rx_bytes)) /
               duration_s +
           model.p_idle_mw;
  }
  return sum / static_cast<double>(nodes.size() - 1);
}

/// Per-node (1 - delivered/sent), averaged over nodes that sent anything.
inline double packet_loss_ratio(const std::vector<NodeMetrics>& nodes) {
  double sum = 0.0;
  std::size_t senders = 0;
  for (const auto& n : nodes) {
    if (n.packets_sent == 0) continue;
    sum += 1.0 - static_cast<double>(n.packets_delivered) / static_cast<double>(n.packets_sent);
    ++senders;
  }
  return senders ? sum / static_cast<double>(senders) : 0.0;
}

/// Recomputes the full report from a trace. The simulator itself reports
/// through this function, so a saved trace reproduces its report exactly.
inline MetricsReport compute_metrics(const Trace& trace, const Topology& topo,
                                     const EnergyModel& energy, double duration_s) {
  MetricsReport r;
  r.per_node.assign(topo.size(), {});
  SimTime latency_sum = 0;
  std::uint64_t delivered = 0;

  for (const auto& raw : trace.lines) {
    const TraceLine l(raw);
    const auto tag = l.tag();
    if (tag == "TX") {
      const auto kind = std::string(l.col(2));
      const auto sender = static_cast<NodeId>(TraceLine::to_uint(l.col(3)));
      const auto bytes = TraceLine::to_uint(l.col(5));
      ++r.transmissions[kind];
      r.per_node.at(sender).tx_bytes += bytes;
      for (NodeId nb : topo.neighbors(sender)) r.per_node[nb].rx_bytes += bytes;
      if (kind == "DAO") {
        ++r.dao_overhead;
        const auto origin = TraceLine::to_uint(*l.field("origin"));
        if (origin == sender && l.col(6) == "1") {
          ++r.dao_originations;
          ++r.per_node[sender].dao_originations;
          if (*l.field("trigger") == "T") {
            ++r.trigger_dao_originations;
            ++r.per_node[sender].trigger_dao_originations;
          }
        }
      }
    } else if (tag == "GEN") {
      ++r.per_node.at(TraceLine::to_uint(l.col(2))).packets_sent;
    } else if (tag == "DELIVER") {
      ++r.per_node.at(TraceLine::to_uint(l.col(2))).packets_delivered;
      latency_sum += l.time() - TraceLine::parse_time(*l.field("created"));
      ++delivered;
    } else if (tag == "DAORECV") {
      ++r.daos_at_root;
    } else if (tag == "ALARM") {
      r.alarms.push_back(Alarm{l.time(), static_cast<NodeId>(TraceLine::to_uint(l.col(2))),
                               TraceLine::to_uint(*l.field("dao"))});
    } else if (tag == "DTSN") {
      ++r.per_node.at(TraceLine::to_uint(l.col(2))).dtsn_increments;
    } else if (tag == "ATTACK") {
      ++r.attack_increments;
      if (!r.first_attack) r.first_attack = l.time();
    }
  }

  for (std::size_t i = 0; i < r.per_node.size(); ++i) {
    auto& n = r.per_node[i];
    n.power_mw = (energy.e_tx_mj_per_byte * static_cast<double>(n.tx_bytes) +
                  energy.e_rx_mj_per_byte * static_cast<double>(n.rx_bytes)) /
                     duration_s +
                 energy.p_idle_mw;
  }
  r.avg_power_mw = avg_power(r.per_node, energy, duration_s);
  r.packet_loss_ratio = packet_loss_ratio(r.per_node);
  if (delivered > 0) {
    r.avg_latency_s = to_seconds(latency_sum) / static_cast<double>(delivered);
  }
  return r;
}

}  // namespace rplsim
