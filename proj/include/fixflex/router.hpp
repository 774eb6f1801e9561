#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fixflex/common.hpp"
#include "fixflex/config.hpp"
#include "fixflex/demand.hpp"
#include "fixflex/dijkstra.hpp"
#include "fixflex/network.hpp"

namespace fixflex {

// One maximal run of consecutive links of the same type.
struct Leg {
  LinkType type = LinkType::Walk;
  std::size_t from_node = 0;  // supernetwork indices
  std::size_t to_node = 0;
  double time_s = 0.0;
  double length_mi = 0.0;
  int route = -1;
  bool boarding = false;
};

struct ModalPathAttributes {
  double walk_min = 0.0;
  double micro_wait_min = 0.0;
  double frt_wait_min = 0.0;
  double micro_ivtt_min = 0.0;
  double frt_ivtt_min = 0.0;
  double fare = 0.0;
  int transfers = 0;
  double micro_distance_mi = 0.0;
  double frt_distance_mi = 0.0;
  double walk_distance_mi = 0.0;
  std::vector<Leg> legs;

  bool uses_micro() const {
    for (const auto& l : legs)
      if (is_micro(l.type)) return true;
    return false;
  }
  bool uses_frt() const {
    for (const auto& l : legs)
      if (is_frt(l.type)) return true;
    return false;
  }
  double total_time_min() const {
    return walk_min + micro_wait_min + frt_wait_min + micro_ivtt_min + frt_ivtt_min;
  }
  double total_distance_mi() const { return micro_distance_mi + frt_distance_mi + walk_distance_mi; }
};

struct TransitPath {
  bool reachable = false;
  std::vector<std::size_t> links;  // supernetwork link indices, in order
  ModalPathAttributes attrs;
  double generalized_cost = kInf;
  std::optional<std::size_t> period;  // operating period of the departure, if any
};

struct AutoPathAttributes {
  double ivtt_min = 0.0;
  double gas_cost = 0.0;
  double distance_mi = 0.0;
};

struct AutoPath {
  bool reachable = false;
  std::vector<std::size_t> links;  // street link indices
  AutoPathAttributes attrs;
  double generalized_cost = kInf;
};

// Per-link-type multipliers for one traveler. Time weights are per minute.
struct GeneralizedCostWeights {
  double walk = 0.0;
  double frt_ride = 0.0;
  double frt_wait = 0.0;
  double transfer = 0.0;  // per transfer
  double micro_ride = 0.0;
  double micro_wait = 0.0;
  double fare = 0.0;  // per $
  FareSchedule fares;

  static GeneralizedCostWeights from(const CoefficientVector& b, const FareSchedule& fares) {
    return {b.walk, b.frt_ivtt, b.frt_wait, b.frt_transfer, b.micro_ivtt, b.micro_wait, b.fare, fares};
  }

  // Σ β·x over the transit attributes (ASC excluded).
  double cost_of(const ModalPathAttributes& a) const {
    return walk * a.walk_min + micro_wait * a.micro_wait_min + frt_wait * a.frt_wait_min +
           micro_ride * a.micro_ivtt_min + frt_ride * a.frt_ivtt_min + fare * a.fare +
           transfer * static_cast<double>(a.transfers);
  }
};

// Sums link attributes by type. The flat FRT fare is charged once per path;
// every FRT boarding after the first counts as a transfer, as does every
// transfer-link traversal.
inline ModalPathAttributes decompose_path(const Supernetwork& sn, const std::vector<std::size_t>& links,
                                          std::optional<std::size_t> period, const FareSchedule& fares) {
  ModalPathAttributes a;
  int frt_boardings = 0;
  int transfer_links = 0;
  for (std::size_t e : links) {
    const SuperLink& l = sn.link(e);
    const double t_s = sn.link_time(e, period);
    const double t = t_s / kSecondsPerMinute;
    switch (l.type) {
      case LinkType::Walk:
        a.walk_min += t;
        a.walk_distance_mi += l.length_mi;
        break;
      case LinkType::FrtRide:
        a.frt_ivtt_min += t;
        a.frt_distance_mi += l.length_mi;
        break;
      case LinkType::FrtWait:
        a.frt_wait_min += t;
        if (l.boarding) ++frt_boardings;
        break;
      case LinkType::FrtTransfer:
        a.frt_wait_min += t;
        ++transfer_links;
        break;
      case LinkType::MicroRide:
        a.micro_ivtt_min += t;
        a.micro_distance_mi += l.length_mi;
        break;
      case LinkType::MicroWait:
        a.micro_wait_min += t;
        break;
    }
    if (!a.legs.empty() && a.legs.back().type == l.type && a.legs.back().route == l.route &&
        l.type != LinkType::FrtWait && l.type != LinkType::MicroWait) {
      a.legs.back().to_node = l.to;
      a.legs.back().time_s += t_s;
      a.legs.back().length_mi += l.length_mi;
    } else {
      a.legs.push_back({l.type, l.from, l.to, t_s, l.length_mi, l.route, l.boarding});
    }
  }
  a.transfers = transfer_links + std::max(0, frt_boardings - 1);
  a.fare = (frt_boardings > 0 ? fares.frt_flat : 0.0) + fares.micro_per_mile * a.micro_distance_mi;
  return a;
}

// Least generalized cost transit path for one traveler. The search runs on
// (node, has-boarded-FRT) states so that the flat fare is paid on the first
// FRT boarding and later boardings are charged as transfers. Microtransit
// links are usable only when the departure falls in an operating period.
inline TransitPath least_cost_transit_path(const Supernetwork& sn, const TravelerProfile& traveler,
                                           const FareSchedule& fares) {
  const auto o = sn.street().index_of(traveler.origin);
  const auto d = sn.street().index_of(traveler.destination);
  if (!o || !d) throw ValidationError("traveler " + std::to_string(traveler.rq_id) + ": OD not in supernetwork");

  const auto w = GeneralizedCostWeights::from(traveler.betas, fares);
  const auto period = sn.period_index(traveler.dp_time);
  const bool micro_ok = sn.micro_service() && period.has_value();

  auto tree = dijkstra(2 * sn.size(), 2 * sn.walk_node(*o), [&](std::size_t state, auto&& relax) {
    const std::size_t u = state / 2;
    const bool boarded = state % 2 == 1;
    for (std::size_t e : sn.out_links(u)) {
      const SuperLink& l = sn.link(e);
      if (is_micro(l.type) && !micro_ok) continue;
      const double t = sn.link_time(e, period) / kSecondsPerMinute;
      double c = 0.0;
      bool next_boarded = boarded;
      switch (l.type) {
        case LinkType::Walk: c = w.walk * t; break;
        case LinkType::FrtRide: c = w.frt_ride * t; break;
        case LinkType::FrtTransfer: c = w.frt_wait * t + w.transfer; break;
        case LinkType::MicroWait: c = w.micro_wait * t; break;
        case LinkType::MicroRide: c = w.micro_ride * t + w.fare * fares.micro_per_mile * l.length_mi; break;
        case LinkType::FrtWait:
          c = w.frt_wait * t;
          if (l.boarding) {
            c += boarded ? w.transfer : w.fare * fares.frt_flat;
            next_boarded = true;
          }
          break;
      }
      relax(2 * l.to + (next_boarded ? 1 : 0), e, c);
    }
  });

  TransitPath path;
  path.period = period;
  const std::size_t target0 = 2 * sn.walk_node(*d);
  const std::size_t target = tree.dist[target0 + 1] < tree.dist[target0] ? target0 + 1 : target0;
  if (!tree.reached(target)) return path;
  path.reachable = true;
  path.generalized_cost = tree.dist[target];
  path.links = tree.edges_to(target);
  path.attrs = decompose_path(sn, path.links, period, fares);
  return path;
}

// Least β_D_ivt·time + β_D_gas·fuel path on the auto network.
inline AutoPath least_cost_auto_path(const StreetNetwork& auto_net, const TravelerProfile& traveler,
                                     double fuel_per_mile) {
  const auto o = auto_net.index_of(traveler.origin);
  const auto d = auto_net.index_of(traveler.destination);
  if (!o || !d) throw ValidationError("traveler " + std::to_string(traveler.rq_id) + ": OD not in auto network");
  const auto& b = traveler.betas;
  auto tree = auto_net.shortest_paths(*o, [&](const StreetLink& l) {
    return b.auto_ivtt * l.time_s / kSecondsPerMinute + b.auto_gas * fuel_per_mile * l.length_mi;
  });
  AutoPath path;
  if (!tree.reached(*d)) return path;
  path.reachable = true;
  path.generalized_cost = tree.dist[*d];
  path.links = tree.edges_to(*d);
  for (std::size_t e : path.links) {
    const auto& l = auto_net.link(e);
    path.attrs.ivtt_min += l.time_s / kSecondsPerMinute;
    path.attrs.distance_mi += l.length_mi;
  }
  path.attrs.gas_cost = path.attrs.distance_mi * fuel_per_mile;
  return path;
}

}  // namespace fixflex
