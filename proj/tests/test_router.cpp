#include <gtest/gtest.h>

#include "fixflex/router.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace fixflex;
using fixflex::fixture::base_from;
using fixflex::fixture::grid;

namespace {

TravelerProfile traveler(NodeId o, NodeId d, double dp = 6 * 3600.0) {
  TravelerProfile t;
  t.origin = o;
  t.destination = d;
  t.dp_time = dp;
  t.betas = CoefficientVector{0, 0.184, 0.994, 0.022, 0.213, 0.104, 0.069, 0.104, 0.102, 0.504, 0.554};
  return t;
}

// 1 - 2 - 3 on a line, 1 mi links, 120 s auto.
BaseNetworks line3() {
  std::vector<Node> nodes{{1, 0, 0, 0, 0}, {2, 1, 0, 0, 0}, {3, 2, 0, 0, 0}};
  std::vector<fixture::LinkTuple> links{{1, 2, 1.0, 120}, {2, 1, 1.0, 120}, {2, 3, 1.0, 120}, {3, 2, 1.0, 120}};
  return base_from(StreetNetwork::from_ids(nodes, links), {fixture::line("R", {1, 3}, 15, 4, 2.0)});
}

ScenarioConfig config(TransitMode mode, int fleet = 5) {
  ScenarioConfig c;
  c.transit_mode = mode;
  c.fleet_size = mode == TransitMode::FixedOnly ? 0 : fleet;
  c.operating_periods = {named_period("AM")};
  return c;
}

std::vector<LinkType> types(const Supernetwork& sn, const std::vector<std::size_t>& links) {
  std::vector<LinkType> out;
  for (auto e : links) out.push_back(sn.link(e).type);
  return out;
}

std::size_t find_link(const Supernetwork& sn, LinkType type, bool boarding, std::size_t from_street) {
  for (std::size_t e = 0; e < sn.links().size(); ++e) {
    const auto& l = sn.link(e);
    if (l.type == type && l.boarding == boarding && sn.node(l.from).street == from_street) return e;
  }
  throw std::runtime_error("link not found");
}

}  // namespace

TEST(Decompose, FrtPathChargesFlatFareOnce) {
  const auto sn = build_supernetwork(line3(), config(TransitMode::FixedOnly), 1.0, 0.0);
  // Board at 1, ride to 3, alight, walk 3 -> 2.
  std::vector<std::size_t> path{find_link(sn, LinkType::FrtWait, true, 0)};
  for (std::size_t e = 0; e < sn.links().size(); ++e)
    if (sn.link(e).type == LinkType::FrtRide && sn.node(sn.link(e).from).street == 0) path.push_back(e);
  for (std::size_t e = 0; e < sn.links().size(); ++e) {
    const auto& l = sn.link(e);
    if (l.type == LinkType::FrtWait && !l.boarding && sn.node(l.from).street == 2) path.push_back(e);
  }
  for (std::size_t e = 0; e < sn.links().size(); ++e) {
    const auto& l = sn.link(e);
    if (l.type == LinkType::Walk && l.from == 2 && l.to == 1) path.push_back(e);
  }
  const auto a = decompose_path(sn, path, std::nullopt, FareSchedule{});
  EXPECT_EQ(a.fare, 2.5);
  EXPECT_EQ(a.transfers, 0);
  EXPECT_EQ(a.frt_wait_min, 7.5);
  EXPECT_EQ(a.frt_ivtt_min, 4.0);
  EXPECT_NEAR(a.walk_min, 1.0 / 2.8 * 60.0, 1e-12);
  EXPECT_EQ(a.micro_wait_min, 0.0);
  ASSERT_EQ(a.legs.size(), 4u);
  EXPECT_TRUE(a.uses_frt());
  EXPECT_FALSE(a.uses_micro());
}

TEST(Decompose, MicroFareIsPerMile) {
  const auto sn = build_supernetwork(line3(), config(TransitMode::MicroOnly), 1.0, 120.0);
  std::vector<std::size_t> path{find_link(sn, LinkType::MicroWait, true, 0)};
  for (std::size_t e = 0; e < sn.links().size(); ++e) {
    const auto& l = sn.link(e);
    if (l.type == LinkType::MicroRide && sn.node(l.to).street == sn.node(l.from).street + 1) path.push_back(e);
  }
  path.push_back(find_link(sn, LinkType::MicroWait, false, 2));
  const auto a = decompose_path(sn, path, 0, FareSchedule{});
  EXPECT_DOUBLE_EQ(a.fare, 3.94);
  EXPECT_EQ(a.micro_distance_mi, 2.0);
  EXPECT_EQ(a.micro_wait_min, 2.0);
  EXPECT_EQ(a.micro_ivtt_min, 4.0);
  ASSERT_EQ(a.legs.size(), 3u);  // wait, ride (merged), alight
}

TEST(Decompose, EmptyPathIsAllZero) {
  const auto sn = build_supernetwork(line3(), config(TransitMode::MicroPlusFixed), 1.0, 0.0);
  const auto a = decompose_path(sn, {}, std::nullopt, FareSchedule{});
  EXPECT_EQ(a.total_time_min(), 0.0);
  EXPECT_EQ(a.fare, 0.0);
  EXPECT_EQ(a.transfers, 0);
  EXPECT_TRUE(a.legs.empty());
}

TEST(Transit, AdjacentWalkOnly) {
  const auto base = line3();
  ScenarioConfig c = config(TransitMode::MicroOnly, 0);
  c.virtual_stop_coverage = 0.0;
  const auto sn = build_supernetwork(base, c, 1.0, 0.0);
  const auto p = least_cost_transit_path(sn, traveler(1, 2), FareSchedule{});
  ASSERT_TRUE(p.reachable);
  EXPECT_EQ(types(sn, p.links), std::vector<LinkType>{LinkType::Walk});
  EXPECT_DOUBLE_EQ(p.attrs.walk_min, 1.0 / 2.8 * 60.0);
  EXPECT_EQ(p.attrs.fare + p.attrs.frt_wait_min + p.attrs.micro_wait_min + p.attrs.frt_ivtt_min + p.attrs.micro_ivtt_min,
            0.0);
}

TEST(Transit, DisconnectedIsUnreachable) {
  std::vector<Node> nodes{{1, 0, 0, 0, 0}, {2, 1, 0, 0, 0}};
  const auto sn = build_supernetwork(base_from(StreetNetwork::from_ids(nodes, {})), config(TransitMode::MicroOnly), 1.0, 0.0);
  const auto p = least_cost_transit_path(sn, traveler(1, 2), FareSchedule{});
  EXPECT_FALSE(p.reachable);
  EXPECT_EQ(p.generalized_cost, kInf);
}

TEST(Transit, UnknownOdThrows) {
  const auto sn = build_supernetwork(line3(), config(TransitMode::MicroOnly), 1.0, 0.0);
  EXPECT_THROW(least_cost_transit_path(sn, traveler(1, 99), FareSchedule{}), ValidationError);
}

TEST(Transit, NoMicroOutsideOperatingPeriods) {
  const auto sn = build_supernetwork(base_from(grid(4)), config(TransitMode::MicroOnly), 1.0, 0.0);
  auto t = traveler(1, 16, 12 * 3600.0);  // midday, only AM configured
  t.betas.walk = 5.0;
  const auto off = least_cost_transit_path(sn, t, FareSchedule{});
  ASSERT_TRUE(off.reachable);
  EXPECT_FALSE(off.attrs.uses_micro());
  t.dp_time = 6 * 3600.0;
  const auto on = least_cost_transit_path(sn, t, FareSchedule{});
  EXPECT_TRUE(on.attrs.uses_micro());
}

TEST(Transit, HeterogeneousWalkAversion) {
  auto base = base_from(grid(5), {fixture::line("R1", {11, 12, 13, 14, 15}, 15, 20, 4.0)});
  const auto sn = build_supernetwork(base, config(TransitMode::MicroPlusFixed), 1.2, 300.0);
  for (NodeId o : {1, 6, 11, 16}) {
    for (NodeId d : {5, 10, 15, 25}) {
      auto a = traveler(o, d);
      auto b = a;
      b.betas.walk = 10 * a.betas.walk;
      const auto pa = least_cost_transit_path(sn, a, FareSchedule{});
      const auto pb = least_cost_transit_path(sn, b, FareSchedule{});
      ASSERT_TRUE(pa.reachable && pb.reachable);
      EXPECT_LE(pb.attrs.walk_min, pa.attrs.walk_min + 1e-12) << o << "->" << d;
    }
  }
}

TEST(Transit, SecondBoardingCountsAsTransfer) {
  // Two routes meeting at node 13 of a 5x5 grid; 1 -> 25 corner to corner
  // with walking made expensive forces a ride on both.
  auto base = base_from(grid(5), {fixture::line("R1", {11, 12, 13, 14, 15}, 15, 20, 4.0),
                                  fixture::line("R2", {3, 8, 13, 18, 23}, 15, 20, 4.0)});
  const auto sn = build_supernetwork(base, config(TransitMode::FixedOnly), 1.0, 0.0);
  auto t = traveler(11, 23);
  t.betas.walk = 50.0;
  const auto p = least_cost_transit_path(sn, t, FareSchedule{});
  ASSERT_TRUE(p.reachable);
  EXPECT_EQ(p.attrs.transfers, 1);
  EXPECT_EQ(p.attrs.fare, 2.5);
  EXPECT_EQ(p.attrs.walk_min, 0.0);
  const auto w = GeneralizedCostWeights::from(t.betas, FareSchedule{});
  EXPECT_NEAR(w.cost_of(p.attrs), p.generalized_cost, 1e-9);
}

TEST(Transit, MatchesExhaustiveEnumeration) {
  Rng rng(20240601);
  std::size_t checked = 0;
  for (int i = 0; i < 60; ++i) {
    const auto r = oracle::check_router_instance(rng, 6, 5);
    EXPECT_EQ(r.mismatches, 0u) << "instance " << i << " worst " << r.worst;
    checked += r.travelers;
  }
  EXPECT_EQ(checked, 300u);
}

TEST(Transit, CostNeverDecreasesWhenABetaGrows) {
  Rng rng(8);
  for (int i = 0; i < 40; ++i) {
    const auto inst = oracle::random_instance(rng, 8);
    const auto& street = inst.base.auto_net;
    auto t = traveler(street.node(0).id, street.node(street.size() - 1).id, 7 * 3600.0);
    t.betas = oracle::random_betas(rng);
    const double c0 = least_cost_transit_path(inst.supernet, t, inst.config.fares).generalized_cost;
    auto arr = t.betas.as_array();
    for (std::size_t k = 3; k < arr.size(); ++k) {
      auto bumped = arr;
      bumped[k] += 0.5;
      auto u = t;
      u.betas = CoefficientVector::from_array(bumped);
      EXPECT_GE(least_cost_transit_path(inst.supernet, u, inst.config.fares).generalized_cost, c0 - 1e-12);
    }
  }
}

TEST(Transit, Deterministic) {
  Rng rng(4);
  const auto inst = oracle::random_instance(rng, 10);
  auto t = traveler(inst.base.auto_net.node(0).id, inst.base.auto_net.node(1).id);
  const auto a = least_cost_transit_path(inst.supernet, t, inst.config.fares);
  const auto b = least_cost_transit_path(inst.supernet, t, inst.config.fares);
  EXPECT_EQ(a.links, b.links);
  EXPECT_EQ(a.generalized_cost, b.generalized_cost);
}

TEST(Auto, SingleLinkTimeAndFuel) {
  std::vector<Node> nodes{{1, 0, 0, 0, 0}, {2, 1, 0, 0, 0}};
  const auto street = StreetNetwork::from_ids(nodes, {{1, 2, 1.0, 120.0}});
  const auto p = least_cost_auto_path(street, traveler(1, 2), 0.35);
  ASSERT_TRUE(p.reachable);
  EXPECT_EQ(p.attrs.ivtt_min, 2.0);
  EXPECT_DOUBLE_EQ(p.attrs.gas_cost, 0.35);
  EXPECT_EQ(p.attrs.distance_mi, 1.0);
}

TEST(Auto, ZeroGasWeightGivesTimeShortestPath) {
  Rng rng(31);
  for (int i = 0; i < 30; ++i) {
    const auto street = oracle::random_street(2 + rng.index(10), rng);
    auto t = traveler(street.node(0).id, street.node(street.size() - 1).id);
    t.betas.auto_gas = 0.0;
    const auto p = least_cost_auto_path(street, t, 0.35);
    auto tree = street.shortest_paths(0, [](const StreetLink& l) { return l.time_s; });
    ASSERT_TRUE(p.reachable);
    EXPECT_NEAR(p.attrs.ivtt_min * 60.0, tree.dist[street.size() - 1], 1e-9);
  }
}

TEST(Auto, DisconnectedIsUnreachable) {
  std::vector<Node> nodes{{1, 0, 0, 0, 0}, {2, 1, 0, 0, 0}};
  const auto street = StreetNetwork::from_ids(nodes, {{2, 1, 1.0, 120.0}});
  EXPECT_FALSE(least_cost_auto_path(street, traveler(1, 2), 0.35).reachable);
}
