#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance gate.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "fixflex/metrics.hpp"
#include "fixflex/network.hpp"
#include "fixflex/router.hpp"

namespace fixflex::oracle {

struct RandomInstance {
  BaseNetworks base;
  ScenarioConfig config;
  Supernetwork supernet;
};

// Connected random street graph on n nodes: a random spanning tree plus a few
// extra links, each link one- or two-way.
inline StreetNetwork random_street(std::size_t n, Rng& rng) {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < n; ++i)
    nodes.push_back({static_cast<NodeId>(10 + 3 * i), rng.uniform() * 3, rng.uniform() * 3, 0,
                     std::floor(rng.uniform() * 100)});
  std::vector<std::tuple<NodeId, NodeId, double, double>> links;
  auto add = [&](std::size_t a, std::size_t b, bool both) {
    const double len = 0.05 + std::floor(rng.uniform() * 20) / 10.0;
    const double t = 30 + std::floor(rng.uniform() * 300);
    links.emplace_back(nodes[a].id, nodes[b].id, len, t);
    if (both) links.emplace_back(nodes[b].id, nodes[a].id, len, t);
  };
  for (std::size_t i = 1; i < n; ++i) add(i, rng.index(i), true);
  const std::size_t extra = rng.index(n + 1);
  for (std::size_t k = 0; k < extra; ++k) {
    const std::size_t a = rng.index(n), b = rng.index(n);
    if (a != b) add(a, b, rng.uniform() < 0.5);
  }
  return StreetNetwork::from_ids(std::move(nodes), links);
}

inline std::vector<FrtLine> random_lines(const StreetNetwork& street, Rng& rng) {
  std::vector<FrtLine> lines;
  const std::size_t count = street.size() < 2 ? 0 : 1 + rng.index(2);
  for (std::size_t r = 0; r < count; ++r) {
    std::vector<std::size_t> idx(street.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
    const std::size_t len = 2 + rng.index(std::min<std::size_t>(idx.size() - 1, 4));
    FrtLine l;
    l.route_id = "L" + std::to_string(r);
    l.headway_min = 5 + std::floor(rng.uniform() * 30);
    l.duration_min = 5 + std::floor(rng.uniform() * 30);
    l.length_mi = 1 + std::floor(rng.uniform() * 5);
    l.operating_hr = 19;
    std::vector<NodeId> stops;
    for (std::size_t k = 0; k < len; ++k) stops.push_back(street.node(idx[k]).id);
    l.directions.push_back(stops);
    if (rng.uniform() < 0.7) {
      std::reverse(stops.begin(), stops.end());
      l.directions.push_back(stops);
    }
    lines.push_back(std::move(l));
  }
  return lines;
}

inline CoefficientVector random_betas(Rng& rng) {
  std::array<double, CoefficientVector::kSize> a{};
  for (double& b : a) b = rng.uniform() < 0.15 ? 0.0 : rng.uniform();
  return CoefficientVector::from_array(a);
}

// A random scenario on a random street graph of at most `max_nodes` nodes.
inline RandomInstance random_instance(Rng& rng, std::size_t max_nodes) {
  RandomInstance inst;
  const std::size_t n = 2 + rng.index(max_nodes - 1);
  inst.base.auto_net = random_street(n, rng);
  inst.base.walk_net = inst.base.auto_net.with_speed(2.8);
  inst.base.lines = random_lines(inst.base.auto_net, rng);
  auto& c = inst.config;
  const double m = rng.uniform();
  c.transit_mode = inst.base.lines.empty() || m < 0.2 ? TransitMode::MicroOnly
                   : m < 0.4                           ? TransitMode::FixedOnly
                                                       : TransitMode::MicroPlusFixed;
  if (c.has_frt() && rng.uniform() < 0.5) c.headway_min = 10 + std::floor(rng.uniform() * 30);
  c.virtual_stop_coverage = std::floor(rng.uniform() * 5) / 4.0;
  c.fleet_size = c.has_micro() && rng.uniform() < 0.85 ? 5 : 0;
  c.operating_periods = {named_period("AM"), named_period("PM")};
  c.master_seed = rng.next();
  c.network.transfer_radius_m = rng.uniform() < 0.3 ? 1.0 : 0.0;
  inst.supernet = build_supernetwork(inst.base, c, 1.0 + rng.uniform(), std::floor(rng.uniform() * 900));
  if (inst.supernet.micro_layer()) {
    MicroService svc = inst.supernet.service();
    for (double& w : svc.period_wait_s) w = std::floor(rng.uniform() * 900);
    inst.supernet = inst.supernet.with_service(svc);
    if (rng.uniform() < 0.3) {
      std::map<NodeId, int> zones;
      for (const auto& node : inst.base.auto_net.nodes()) zones[node.id] = 1 + static_cast<int>(rng.index(2));
      inst.supernet = apply_zonal_partition(inst.supernet, zones);
    }
  }
  return inst;
}

// Exhaustive depth-first enumeration of simple supernetwork paths from the
// origin's walk node to the destination's walk node. Each complete path is
// priced through decompose_path and the traveler's weights; partial prices
// (non-decreasing along a path) prune branches that cannot win.
class PathEnumerator {
 public:
  PathEnumerator(const Supernetwork& sn, const TravelerProfile& t, const FareSchedule& fares)
      : sn_(sn), t_(t), fares_(fares), w_(GeneralizedCostWeights::from(t.betas, fares)),
        period_(sn.period_index(t.dp_time)), micro_ok_(sn.micro_service() && period_.has_value()) {}

  double best() {
    const std::size_t o = sn_.walk_node(*sn_.street().index_of(t_.origin));
    target_ = sn_.walk_node(*sn_.street().index_of(t_.destination));
    visited_.assign(sn_.size(), 0);
    visited_[o] = 1;
    dfs(o, 0.0, false);
    return best_;
  }

  std::size_t paths_priced() const { return priced_; }

 private:
  double step(const SuperLink& l, std::size_t e, bool boarded) const {
    const double t = sn_.link_time(e, period_) / 60.0;
    switch (l.type) {
      case LinkType::Walk: return w_.walk * t;
      case LinkType::FrtRide: return w_.frt_ride * t;
      case LinkType::FrtTransfer: return w_.frt_wait * t + w_.transfer;
      case LinkType::MicroWait: return w_.micro_wait * t;
      case LinkType::MicroRide: return w_.micro_ride * t + w_.fare * fares_.micro_per_mile * l.length_mi;
      case LinkType::FrtWait:
        return w_.frt_wait * t + (l.boarding ? (boarded ? w_.transfer : w_.fare * fares_.frt_flat) : 0.0);
    }
    return 0.0;
  }

  void dfs(std::size_t u, double partial, bool boarded) {
    if (partial > best_ + 1e-9) return;
    if (u == target_) {
      ++priced_;
      const double c = w_.cost_of(decompose_path(sn_, path_, period_, fares_));
      best_ = std::min(best_, c);
      return;
    }
    for (std::size_t e : sn_.out_links(u)) {
      const SuperLink& l = sn_.link(e);
      if (visited_[l.to]) continue;
      if (is_micro(l.type) && !micro_ok_) continue;
      visited_[l.to] = 1;
      path_.push_back(e);
      dfs(l.to, partial + step(l, e, boarded), boarded || (l.type == LinkType::FrtWait && l.boarding));
      path_.pop_back();
      visited_[l.to] = 0;
    }
  }

  const Supernetwork& sn_;
  const TravelerProfile& t_;
  const FareSchedule& fares_;
  GeneralizedCostWeights w_;
  std::optional<std::size_t> period_;
  bool micro_ok_;
  std::size_t target_ = 0;
  std::vector<char> visited_;
  std::vector<std::size_t> path_;
  double best_ = kInf;
  std::size_t priced_ = 0;
};

struct OracleCheck {
  std::size_t travelers = 0;
  std::size_t mismatches = 0;
  double worst = 0.0;
};

// Compares the router to exhaustive enumeration for `per_instance` random
// travelers on one random instance.
inline OracleCheck check_router_instance(Rng& rng, std::size_t max_nodes, std::size_t per_instance) {
  OracleCheck out;
  const auto inst = random_instance(rng, max_nodes);
  const auto& street = inst.base.auto_net;
  for (std::size_t k = 0; k < per_instance; ++k) {
    TravelerProfile t;
    t.rq_id = static_cast<std::int64_t>(k);
    const std::size_t o = rng.index(street.size());
    std::size_t d = rng.index(street.size() - 1);
    if (d >= o) ++d;
    t.origin = street.node(o).id;
    t.destination = street.node(d).id;
    t.dp_time = 5 * 3600 + std::floor(rng.uniform() * 19 * 3600);
    t.betas = random_betas(rng);
    const auto path = least_cost_transit_path(inst.supernet, t, inst.config.fares);
    PathEnumerator en(inst.supernet, t, inst.config.fares);
    const double want = en.best();
    ++out.travelers;
    const double got = path.reachable ? path.generalized_cost : kInf;
    bool ok = (got == kInf && want == kInf);
    if (!ok && got < kInf && want < kInf) {
      const double diff = std::abs(got - want);
      // The returned path must also price to the returned cost.
      const double repriced =
          GeneralizedCostWeights::from(t.betas, inst.config.fares).cost_of(path.attrs);
      ok = diff <= 1e-9 * std::max(1.0, want) && std::abs(repriced - got) <= 1e-9 * std::max(1.0, got);
      out.worst = std::max(out.worst, diff);
    }
    if (!ok) ++out.mismatches;
  }
  return out;
}

// Brute-force jobs reachable within `budget_s` using Bellman-Ford relaxation
// over the supernetwork's link times (micro links only when in service).
inline std::map<int, double> accessibility_bruteforce(const Supernetwork& sn, double budget_s = 900.0) {
  const auto& street = sn.street();
  std::map<int, std::vector<std::size_t>> zones;
  for (std::size_t i = 0; i < street.size(); ++i) zones[street.node(i).zone_id].push_back(i);
  std::map<int, double> out;
  for (const auto& [zone, members] : zones) {
    double total = 0.0;
    for (std::size_t s : members) {
      std::vector<double> dist(sn.size(), kInf);
      dist[sn.walk_node(s)] = 0.0;
      for (std::size_t round = 0; round < sn.size(); ++round) {
        bool changed = false;
        for (const auto& l : sn.links()) {
          if (is_micro(l.type) && !sn.micro_service()) continue;
          if (dist[l.from] + l.time_s < dist[l.to]) {
            dist[l.to] = dist[l.from] + l.time_s;
            changed = true;
          }
        }
        if (!changed) break;
      }
      for (std::size_t i = 0; i < street.size(); ++i)
        if (dist[sn.walk_node(i)] <= budget_s) total += street.node(i).jobs;
    }
    out[zone] = total / static_cast<double>(members.size());
  }
  return out;
}

}  // namespace fixflex::oracle
