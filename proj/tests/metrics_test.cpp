#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "test_util.hpp"

using namespace rplsim;
using namespace rplsim::testing;

namespace {

Dao dao(std::uint64_t id, NodeId origin, NodeId forwarder, bool trigger = false) {
  Dao d;
  d.id = id;
  d.origin = origin;
  d.forwarder = forwarder;
  d.parent_of_origin = 1;
  d.trigger = trigger;
  d.hop_trail = {origin};
  if (forwarder != origin) d.hop_trail.push_back(forwarder);
  return d;
}

/// Chain 0-1-2: node 2 sends one triggered DAO (retried once on the last
/// hop) and node 1 generates two packets of which one arrives.
Trace synthetic() {
  Trace t;
  t.lines = {
      encode_trace(dao(1, 2, 2, true), from_seconds(1), 1, 64, 1),
      encode_trace(dao(1, 2, 1, true), from_seconds(2), 0, 64, 1),
      encode_trace(dao(1, 2, 1, true), from_seconds(3), 0, 64, 2),
      trace_event(from_seconds(3), "DAORECV", 2, "dao=1\ttrigger=T"),
      trace_event(from_seconds(60), "GEN", 1, "pkt=1"),
      trace_event(from_seconds(120), "GEN", 1, "pkt=2"),
      trace_event(from_seconds(60.25), "DELIVER", 1, "pkt=1\tcreated=60.000000"),
  };
  return t;
}

}  // namespace

TEST(Metrics, DaoOverheadCountsEveryHop) {
  const auto r = compute_metrics(synthetic(), chain(3), {}, 100);
  EXPECT_EQ(dao_overhead(synthetic()), 3u);
  EXPECT_EQ(r.dao_overhead, 3u);
  EXPECT_EQ(r.dao_originations, 1u);
  EXPECT_EQ(r.trigger_dao_originations, 1u);
  EXPECT_EQ(r.daos_at_root, 1u);
  EXPECT_GE(r.dao_overhead, r.dao_originations);
}

TEST(Metrics, PowerFromTxRxBytes) {
  EnergyModel e;
  const auto r = compute_metrics(synthetic(), chain(3), e, 100);
  // Node 1 sends 128 B and overhears 64 B from node 2; node 2 sends 64 B and
  // overhears node 1's 128 B.
  EXPECT_EQ(r.per_node[1].tx_bytes, 128u);
  EXPECT_EQ(r.per_node[1].rx_bytes, 64u);
  EXPECT_EQ(r.per_node[2].tx_bytes, 64u);
  EXPECT_EQ(r.per_node[2].rx_bytes, 128u);
  EXPECT_EQ(r.per_node[0].rx_bytes, 128u);
  const double p1 = (e.e_tx_mj_per_byte * 128 + e.e_rx_mj_per_byte * 64) / 100 + e.p_idle_mw;
  const double p2 = (e.e_tx_mj_per_byte * 64 + e.e_rx_mj_per_byte * 128) / 100 + e.p_idle_mw;
  EXPECT_DOUBLE_EQ(r.avg_power_mw, (p1 + p2) / 2);
}

TEST(Metrics, ZeroTrafficGivesIdlePower) {
  const EnergyModel e;
  const auto r = compute_metrics(Trace{}, chain(4), e, 1800);
  EXPECT_EQ(r.avg_power_mw, e.p_idle_mw);
  EXPECT_EQ(r.dao_overhead, 0u);
  EXPECT_FALSE(r.avg_latency_s.has_value());
  EXPECT_EQ(r.packet_loss_ratio, 0.0);
}

TEST(Metrics, TxComponentIsLinearInEtx) {
  EnergyModel e;
  e.e_rx_mj_per_byte = 0;
  e.p_idle_mw = 0;
  const double once = compute_metrics(synthetic(), chain(3), e, 100).avg_power_mw;
  e.e_tx_mj_per_byte *= 2;
  EXPECT_DOUBLE_EQ(compute_metrics(synthetic(), chain(3), e, 100).avg_power_mw, 2 * once);
}

TEST(Metrics, LossAndLatencyUseDeliveredPacketsOnly) {
  const auto r = compute_metrics(synthetic(), chain(3), {}, 100);
  EXPECT_EQ(r.per_node[1].packets_sent, 2u);
  EXPECT_EQ(r.per_node[1].packets_delivered, 1u);
  EXPECT_DOUBLE_EQ(r.packet_loss_ratio, 0.5);
  ASSERT_TRUE(r.avg_latency_s.has_value());
  EXPECT_DOUBLE_EQ(*r.avg_latency_s, 0.25);
}

TEST(Metrics, LossRatioFormula) {
  std::vector<NodeMetrics> nodes(3);
  nodes[1].packets_sent = 10;
  nodes[1].packets_delivered = 9;
  EXPECT_DOUBLE_EQ(packet_loss_ratio(nodes), 0.1);
  nodes[2].packets_sent = 4;
  nodes[2].packets_delivered = 4;
  EXPECT_DOUBLE_EQ(packet_loss_ratio(nodes), 0.05);
}

TEST(Metrics, AlarmsAndAttackTiming) {
  Trace t;
  t.lines = {trace_event(from_seconds(60), "ATTACK", 1, "dtsn=1"),
             trace_event(from_seconds(71.5), "ALARM", 5, "dao=9"),
             trace_event(from_seconds(90), "ATTACK", 1, "dtsn=2")};
  const auto r = compute_metrics(t, chain(6), {}, 100);
  EXPECT_EQ(r.attack_increments, 2u);
  ASSERT_TRUE(r.detected());
  EXPECT_EQ(r.alarms.front().reporting_origin, 5u);
  EXPECT_EQ(r.alarms.front().evidence_dao, 9u);
  EXPECT_DOUBLE_EQ(*r.time_to_detect_s(), 11.5);
}

TEST(Metrics, DeepDaoCostsOneTransmissionPerHop) {
  Scenario sc = scenario_for(chain(5), "chain5");
  sc.duration_s = 200;
  sc.lossless();
  const auto r = run(sc);
  // Each DAO is originated once and crosses depth(origin) links.
  std::map<std::string, std::pair<std::string, std::size_t>> per_dao;
  for (const auto& l : lines_with(r.trace, "TX")) {
    if (l.col(2) != "DAO") continue;
    auto& e = per_dao[std::string(*l.field("dao"))];
    e.first = *l.field("origin");
    ++e.second;
  }
  ASSERT_FALSE(per_dao.empty());
  bool saw_depth_three = false;
  for (const auto& [id, e] : per_dao) {
    const std::size_t depth = std::stoul(e.first);
    EXPECT_EQ(e.second, depth) << "dao " << id;
    saw_depth_three = saw_depth_three || depth == 3;
  }
  EXPECT_TRUE(saw_depth_three);
}

TEST(Metrics, FixedPerHopDelayComposes) {
  Scenario sc = scenario_for(chain(4), "chain4");
  sc.duration_s = 900;
  sc.lossless();
  sc.mac.carrier_sense = false;
  sc.mac.backoff_min_s = sc.mac.backoff_max_s = 0.001;
  const auto r = run(sc);
  const SimTime hop = from_seconds(0.001) + airtime(50, sc.mac.bitrate_bps);
  std::map<std::string, std::vector<SimTime>> latency;
  for (const auto& l : lines_with(r.trace, "DELIVER")) {
    latency[std::string(l.col(2))].push_back(l.time() - TraceLine::parse_time(*l.field("created")));
  }
  for (int origin = 1; origin <= 3; ++origin) {
    auto& v = latency[std::to_string(origin)];
    ASSERT_FALSE(v.empty());
    std::sort(v.begin(), v.end());
    EXPECT_EQ(v.front(), origin * hop);
    EXPECT_EQ(v[v.size() / 2], origin * hop);
  }
}

TEST(Metrics, ReplayReproducesReport) {
  Scenario sc;
  sc.nodes = 20;
  sc.duration_s = 600;
  sc.attacker.enabled = true;
  sc.detection.enabled = true;
  sc.detection.k = 2;
  const auto res = run(sc);
  std::stringstream ss;
  res.trace.write(ss);
  const auto trace = Trace::read(ss);
  EXPECT_EQ(trace.str(), res.trace.str());
  const auto again = replay(trace);
  EXPECT_EQ(again.dao_overhead, res.report.dao_overhead);
  EXPECT_EQ(again.avg_power_mw, res.report.avg_power_mw);
  EXPECT_EQ(again.packet_loss_ratio, res.report.packet_loss_ratio);
  EXPECT_EQ(again.avg_latency_s, res.report.avg_latency_s);
  EXPECT_EQ(again.alarms.size(), res.report.alarms.size());
  EXPECT_EQ(again.transmissions, res.report.transmissions);
  const auto [sc2, topo2] = scenario_from_trace(trace);
  EXPECT_EQ(to_json(sc2), to_json(sc));
  EXPECT_EQ(topo2.positions().size(), res.topology.size());
}

TEST(Metrics, ReplayRejectsForeignFiles) {
  Trace t;
  t.lines = {"1.000000\tBOOT\t1"};
  EXPECT_THROW(replay(t), ConfigError);
}
