#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace rplsim;

namespace {

Dio dio(NodeId sender, std::uint32_t rank, int dtsn = 0) {
  return Dio{sender, rank, LollipopCounter(static_cast<std::uint8_t>(dtsn)), 0};
}

ProtocolParams params(Mode mode, std::size_t k = 0, bool detection = false) {
  ProtocolParams p;
  p.mode = mode;
  p.extra_dao_parents = k;
  p.detection_enabled = detection;
  return p;
}

std::optional<bool> scheduled_trigger(const std::vector<Action>& actions) {
  std::optional<bool> out;
  for (const auto& a : actions) {
    if (auto* s = std::get_if<ScheduleDao>(&a)) out = out.value_or(false) || s->trigger;
  }
  return out;
}

/// Node 5 joined under preferred parent 2 (rank 512) with extra DAO parent 3.
NodeState two_parent_node(const ProtocolParams& p) {
  NodeState s = make_node(5);
  handle_dio(s, dio(2, 512), p);
  handle_dio(s, dio(3, 512), p);
  return s;
}

}  // namespace

TEST(Rank, HopCountObjective) {
  EXPECT_EQ(compute_rank(256), 512u);
  for (std::uint32_t r : {0u, 256u, 1000u, 70000u}) { EXPECT_EQ(compute_rank(r), r + 256); }
  std::uint32_t r = 256;
  std::vector<std::uint32_t> chain{r};
  for (int i = 0; i < 3; ++i) chain.push_back(r = compute_rank(r));
  EXPECT_EQ(chain, (std::vector<std::uint32_t>{256, 512, 768, 1024}));
}

TEST(HandleDio, UnjoinedNodeJoinsUnderRoot) {
  NodeState s = make_node(1);
  const auto actions = handle_dio(s, dio(0, 256), params(Mode::NonStoring));
  EXPECT_EQ(s.rank, 512u);
  EXPECT_EQ(s.preferred_parent, 0u);
  EXPECT_EQ(s.dao_parents, (std::vector<NodeId>{0}));
  EXPECT_TRUE(has_action<ParentChanged>(actions));
  EXPECT_TRUE(has_action<ResetTrickle>(actions));
  EXPECT_EQ(scheduled_trigger(actions), false);
}

TEST(HandleDio, SameDtsnFromPreferredParentSchedulesNothing) {
  NodeState s = make_node(1);
  const auto p = params(Mode::NonStoring);
  handle_dio(s, dio(0, 256, 4), p);
  const auto actions = handle_dio(s, dio(0, 256, 4), p);
  EXPECT_FALSE(scheduled_trigger(actions).has_value());
  EXPECT_FALSE(has_action<ResetTrickle>(actions));
  EXPECT_EQ(s.trickle.counter, 1);
}

TEST(HandleDio, NonStoringCascadeFromPreferredParent) {
  NodeState s = make_node(1);
  const auto p = params(Mode::NonStoring);
  handle_dio(s, dio(0, 256, 0), p);
  const auto before = s.dtsn;
  const auto actions = handle_dio(s, dio(0, 256, 1), p);
  EXPECT_EQ(s.dtsn, increment(before));
  EXPECT_EQ(scheduled_trigger(actions), true);
  EXPECT_TRUE(has_action<DtsnIncremented>(actions));
  EXPECT_TRUE(has_action<ResetTrickle>(actions));
}

TEST(HandleDio, StoringModeDoesNotPropagateDtsn) {
  NodeState s = make_node(1);
  const auto p = params(Mode::Storing);
  handle_dio(s, dio(0, 256, 0), p);
  const auto actions = handle_dio(s, dio(0, 256, 1), p);
  EXPECT_EQ(s.dtsn, LollipopCounter(0));
  EXPECT_EQ(scheduled_trigger(actions), true);
  EXPECT_FALSE(has_action<DtsnIncremented>(actions));
}

TEST(HandleDio, WrapAroundCountsAsIncrement) {
  NodeState s = make_node(1);
  const auto p = params(Mode::NonStoring);
  handle_dio(s, dio(0, 256, 255), p);
  const auto actions = handle_dio(s, dio(0, 256, 0), p);
  EXPECT_EQ(scheduled_trigger(actions), true);
}

TEST(HandleDio, OlderDtsnIsIgnored) {
  NodeState s = make_node(1);
  const auto p = params(Mode::NonStoring);
  handle_dio(s, dio(0, 256, 10), p);
  const auto actions = handle_dio(s, dio(0, 256, 9), p);
  EXPECT_FALSE(scheduled_trigger(actions).has_value());
  EXPECT_EQ(s.dtsn, LollipopCounter(0));
  EXPECT_EQ(s.candidate(0)->dtsn, LollipopCounter(9));
}

TEST(HandleDio, NonPreferredDaoParentIncrement) {
  for (bool detection : {false, true}) {
    const auto p = params(Mode::NonStoring, 1, detection);
    NodeState s = two_parent_node(p);
    ASSERT_EQ(s.preferred_parent, 2u);
    ASSERT_EQ(s.dao_parents, (std::vector<NodeId>{2, 3}));
    const auto actions = handle_dio(s, dio(3, 512, 1), p);
    EXPECT_EQ(s.dtsn, LollipopCounter(0)) << "own DTSN must not move";
    EXPECT_FALSE(has_action<DtsnIncremented>(actions));
    if (detection) {
      EXPECT_EQ(scheduled_trigger(actions), true);
    } else {
      EXPECT_FALSE(scheduled_trigger(actions).has_value());
    }
  }
}

TEST(HandleDio, IncrementFromNonDaoParentIsIgnored) {
  const auto p = params(Mode::NonStoring, 0, true);
  NodeState s = two_parent_node(p);
  ASSERT_FALSE(s.is_dao_parent(3));
  const auto actions = handle_dio(s, dio(3, 512, 1), p);
  EXPECT_FALSE(scheduled_trigger(actions).has_value());
}

TEST(HandleDio, HigherRankSenderRecordedButNeverParent) {
  const auto p = params(Mode::Storing, 2);
  NodeState s = make_node(4);
  handle_dio(s, dio(1, 512), p);
  handle_dio(s, dio(7, 768), p);
  handle_dio(s, dio(8, 1024), p);
  EXPECT_EQ(s.rank, 768u);
  EXPECT_NE(s.candidate(7), nullptr);
  EXPECT_EQ(s.dao_parents, (std::vector<NodeId>{1}));
  for (NodeId dp : s.dao_parents) { EXPECT_LT(s.candidate(dp)->rank, s.rank); }
}

TEST(HandleDio, BetterParentTriggersSwitch) {
  const auto p = params(Mode::Storing);
  NodeState s = make_node(4);
  handle_dio(s, dio(1, 768), p);
  ASSERT_EQ(s.rank, 1024u);
  const auto actions = handle_dio(s, dio(2, 512), p);
  EXPECT_EQ(s.preferred_parent, 2u);
  EXPECT_EQ(s.rank, 768u);
  ASSERT_TRUE(has_action<ParentChanged>(actions));
  EXPECT_EQ(scheduled_trigger(actions), false);
  EXPECT_TRUE(has_action<ResetTrickle>(actions));
}

TEST(HandleDio, RootOnlyRecords) {
  NodeState r = make_root();
  const auto actions = handle_dio(r, dio(1, 512, 3), params(Mode::NonStoring));
  EXPECT_TRUE(actions.empty());
  EXPECT_EQ(r.rank, 256u);
  EXPECT_EQ(r.preferred_parent, kNoNode);
}

TEST(SelectParent, Examples) {
  const CandidateParent a{1, 256, {}}, b{2, 512, {}}, four{4, 512, {}}, seven{7, 512, {}};
  EXPECT_EQ(select_preferred_parent(std::vector{b, a}), 1u);
  EXPECT_EQ(select_preferred_parent(std::vector{seven, four}), 4u);
  EXPECT_EQ(select_preferred_parent(std::vector{seven}), 7u);
  EXPECT_THROW(select_preferred_parent(std::vector<CandidateParent>{}), std::invalid_argument);
}

TEST(SelectDaoParents, Examples) {
  const std::vector<CandidateParent> four{{9, 512, {}}, {3, 256, {}}, {5, 512, {}}, {2, 512, {}}};
  EXPECT_EQ(select_dao_parents(four, 3, 2), (std::vector<NodeId>{3, 2, 5}));
  EXPECT_EQ(select_dao_parents(four, 3, 0), (std::vector<NodeId>{3}));
  EXPECT_EQ(select_dao_parents(four, 3, 10), (std::vector<NodeId>{3, 2, 5, 9}));
  const std::vector<CandidateParent> one{{6, 256, {}}};
  EXPECT_EQ(select_dao_parents(one, 6, 2), (std::vector<NodeId>{6}));
  EXPECT_THROW(select_dao_parents(one, 7, 1), std::invalid_argument);
}

TEST(HandleDis, JoinedRepliesUnjoinedIgnores) {
  NodeState s = make_node(2);
  EXPECT_FALSE(handle_dis(s).has_value());
  handle_dio(s, dio(0, 256, 5), params(Mode::Storing));
  const auto a = handle_dis(s);
  const auto b = handle_dis(s);
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->sender, 2u);
  EXPECT_EQ(a->rank, 512u);
  EXPECT_TRUE(handle_dis(make_root()).has_value());
}

TEST(EmitDao, FieldsAndPreconditions) {
  const auto p = params(Mode::NonStoring, 1, true);
  NodeState s = two_parent_node(p);
  s.dao_pending = true;
  s.dao_pending_trigger = true;
  const Dao d = emit_dao(s, 2, true, 77);
  EXPECT_EQ(d.id, 77u);
  EXPECT_EQ(d.origin, 5u);
  EXPECT_EQ(d.forwarder, 5u);
  EXPECT_EQ(d.parent_of_origin, 2u);
  EXPECT_TRUE(d.trigger);
  EXPECT_EQ(d.hop_trail, (std::vector<NodeId>{5}));
  EXPECT_FALSE(s.dao_pending);
  EXPECT_FALSE(emit_dao(s, 2, false).trigger);
  EXPECT_NO_THROW(emit_dao(s, 3, false));
  EXPECT_THROW(emit_dao(s, 9, false), std::invalid_argument);
  NodeState unjoined = make_node(8);
  EXPECT_THROW(emit_dao(unjoined, 0, false), std::logic_error);
  NodeState root = make_root();
  EXPECT_THROW(emit_dao(root, 0, false), std::logic_error);
}

TEST(HandleDao, StoringIntermediateLearnsRouteAndForwards) {
  NodeState a = make_node(1);
  handle_dio(a, dio(0, 256), params(Mode::Storing));
  Dao d;
  d.origin = 3;
  d.forwarder = 2;
  d.parent_of_origin = 2;
  d.hop_trail = {3, 2};
  const auto out = handle_dao(a, d, 2, Mode::Storing);
  const auto* fwd = std::get_if<ForwardDao>(&out);
  ASSERT_NE(fwd, nullptr);
  EXPECT_EQ(fwd->next_hop, 0u);
  EXPECT_EQ(fwd->dao.forwarder, 1u);
  EXPECT_EQ(fwd->dao.hop_trail, (std::vector<NodeId>{3, 2, 1}));
  EXPECT_EQ(a.routing_table.at(3), 2u);
}

TEST(HandleDao, NonStoringIntermediateKeepsNoTable) {
  NodeState a = make_node(1);
  handle_dio(a, dio(0, 256), params(Mode::NonStoring));
  Dao d;
  d.origin = 3;
  d.forwarder = 2;
  d.parent_of_origin = 2;
  d.hop_trail = {3, 2};
  const auto out = handle_dao(a, d, 2, Mode::NonStoring);
  ASSERT_TRUE(std::holds_alternative<ForwardDao>(out));
  EXPECT_TRUE(a.routing_table.empty());
}

TEST(HandleDao, RootRecordsOnce) {
  NodeState root = make_root();
  Dao d;
  d.origin = 2;
  d.forwarder = 1;
  d.parent_of_origin = 1;
  d.hop_trail = {2, 1};
  const auto out = handle_dao(root, d, 1, Mode::NonStoring);
  EXPECT_TRUE(std::holds_alternative<RecordDao>(out));
  EXPECT_EQ(root.source_routes.at(2), 1u);
  EXPECT_TRUE(root.routing_table.empty());
}

TEST(HandleDao, UnjoinedNodeDrops) {
  NodeState s = make_node(4);
  Dao d;
  d.origin = 6;
  const auto out = handle_dao(s, d, 6, Mode::Storing);
  ASSERT_TRUE(std::holds_alternative<DropDao>(out));
  EXPECT_EQ(std::get<DropDao>(out).reason, DropReason::Unjoined);
}

TEST(RouteDownward, ChainInBothModes) {
  // root - a(1) - b(2)
  NodeState root = make_root();
  Dao from_a;
  from_a.origin = 1;
  from_a.parent_of_origin = 0;
  Dao from_b;
  from_b.origin = 2;
  from_b.parent_of_origin = 1;
  handle_dao(root, from_a, 1, Mode::NonStoring);
  handle_dao(root, from_b, 1, Mode::NonStoring);
  EXPECT_EQ(route_downward(root, 2, Mode::NonStoring), (std::vector<NodeId>{0, 1, 2}));
  EXPECT_THROW(route_downward(root, 9, Mode::NonStoring), NoRouteError);

  NodeState sroot = make_root();
  handle_dao(sroot, from_a, 1, Mode::Storing);
  handle_dao(sroot, from_b, 1, Mode::Storing);
  EXPECT_EQ(route_downward(sroot, 2, Mode::Storing), (std::vector<NodeId>{1}));
  EXPECT_THROW(route_downward(sroot, 9, Mode::Storing), NoRouteError);
}

TEST(RouteDownward, CorruptParentGraphDoesNotLoop) {
  NodeState root = make_root();
  root.source_routes = {{1, 2}, {2, 1}};
  EXPECT_THROW(source_route(root, 1), NoRouteError);
}

TEST(Trickle, ResetFiresWithinFirstInterval) {
  Rng rng(1, 1);
  Trickle t;
  for (int i = 0; i < 200; ++i) {
    t.reset(1000, rng);
    EXPECT_EQ(t.interval, t.imin);
    EXPECT_GE(t.fire_at, 1000 + t.imin / 2);
    EXPECT_LT(t.fire_at, 1000 + t.imin);
    EXPECT_EQ(t.interval_end, 1000 + t.imin);
    EXPECT_EQ(t.counter, 0);
  }
}

TEST(Trickle, IntervalDoublesUpToImax) {
  Rng rng(2, 1);
  Trickle t;
  t.reset(0, rng);
  SimTime now = 0;
  std::vector<SimTime> seen;
  for (int i = 0; i < 12; ++i) {
    now = t.interval_end;
    t.expire(now, rng);
    seen.push_back(t.interval);
  }
  EXPECT_EQ(seen[0], 2 * t.imin);
  EXPECT_EQ(seen[7], t.imax());
  EXPECT_EQ(seen.back(), t.imax());
  EXPECT_EQ(t.imax(), from_seconds(1024));
}

TEST(Trickle, SuppressionAndTick) {
  NodeState s = make_node(3);
  handle_dio(s, dio(0, 256), params(Mode::Storing));
  Rng rng(3, 1);
  s.trickle.reset(0, rng);
  EXPECT_FALSE(trickle_tick(s, s.trickle.fire_at - 1).has_value());
  ASSERT_TRUE(trickle_tick(s, s.trickle.fire_at).has_value());
  s.trickle.counter = s.trickle.redundancy;
  EXPECT_FALSE(trickle_tick(s, s.trickle.fire_at).has_value());
  EXPECT_FALSE(trickle_tick(make_node(9), 0).has_value());
}
