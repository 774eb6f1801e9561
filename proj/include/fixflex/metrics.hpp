#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fixflex/common.hpp"
#include "fixflex/config.hpp"
#include "fixflex/demand.hpp"
#include "fixflex/dijkstra.hpp"
#include "fixflex/equilibrium.hpp"
#include "fixflex/network.hpp"

namespace fixflex {

// ---------------------------------------------------------------------------
// Operating cost, revenue, subsidy
// ---------------------------------------------------------------------------

struct LineCost {
  double labor = 0.0;
  double gas = 0.0;
  double total() const { return labor + gas; }
};

// Daily cost of one two-direction line: vehicles in service (D/h per
// direction) times hours times the labor rate, plus vehicle trips
// (T·60/h per direction) times route length times the per-mile rate.
inline LineCost frt_line_cost(const FrtLine& line, const CostCoefficients& c) {
  if (!(line.headway_min > 0.0)) throw ValidationError("line " + line.route_id + ": headway must be > 0");
  LineCost out;
  out.labor = 2.0 * (line.duration_min / line.headway_min) * line.operating_hr * c.frt_labor_per_hr;
  out.gas = 2.0 * (line.operating_hr * 60.0 / line.headway_min) * line.length_mi * c.frt_gas_per_mile;
  return out;
}

inline double frt_system_cost(const std::vector<FrtLine>& lines, const CostCoefficients& c) {
  double total = 0.0;
  for (const auto& l : lines) total += frt_line_cost(l, c).total();
  return total;
}

inline double frt_line_vmt(const FrtLine& line) {
  return 2.0 * (line.operating_hr * 60.0 / line.headway_min) * line.length_mi;
}

inline double micro_system_cost(double operating_hours, int fleet_size, double vmt_mi, const CostCoefficients& c) {
  if (operating_hours < 0.0 || fleet_size < 0 || vmt_mi < 0.0)
    throw ValidationError("micro_system_cost inputs must be >= 0");
  return operating_hours * fleet_size * c.micro_labor_per_hr + vmt_mi * c.micro_gas_per_mile;
}

struct CostBreakdown {
  double frt_cost = 0.0;
  double micro_cost = 0.0;
  double frt_revenue = 0.0;
  double micro_revenue = 0.0;
  double subsidy_total = 0.0;
  std::optional<double> subsidy_per_transit_user;  // none without transit users
  std::size_t transit_users = 0;
  std::size_t frt_fares = 0;
  double micro_passenger_miles = 0.0;
  CostCoefficients coefficients;
};

// Costs from the scenario's lines and fleet; FRT revenue is one flat fare per
// transit path that boards FRT; micro revenue is the per-mile fare over served
// requests. Transit users are transit choosers whose path uses FRT or micro.
inline CostBreakdown revenues_and_subsidy(const EquilibriumResult& result, const ScenarioConfig& scenario) {
  CostBreakdown out;
  out.coefficients = scenario.costs;
  out.frt_cost = frt_system_cost(result.supernet.lines(), scenario.costs);
  out.micro_cost = result.supernet.micro_layer()
                       ? micro_system_cost(scenario.micro_operating_hours(), scenario.fleet_size,
                                           result.fleet.stats.vmt_mi, scenario.costs)
                       : 0.0;
  for (const auto& t : result.travelers) {
    if (t.mode() != Mode::Transit || !t.transit.reachable) continue;
    const bool frt = t.transit.attrs.uses_frt();
    if (frt) ++out.frt_fares;
    if (frt || t.transit.attrs.uses_micro()) ++out.transit_users;
  }
  for (const auto& r : result.fleet.records)
    if (r.status == ServiceStatus::Served) out.micro_passenger_miles += r.fare_distance_mi;
  out.frt_revenue = scenario.fares.frt_flat * static_cast<double>(out.frt_fares);
  out.micro_revenue = scenario.fares.micro_per_mile * out.micro_passenger_miles;
  out.subsidy_total = out.frt_cost + out.micro_cost - out.frt_revenue - out.micro_revenue;
  if (out.transit_users > 0) out.subsidy_per_transit_user = out.subsidy_total / static_cast<double>(out.transit_users);
  return out;
}

// ---------------------------------------------------------------------------
// Mode share and VMT
// ---------------------------------------------------------------------------

enum class ShareClass : std::uint8_t { Auto, Frt, Micro, Walk };

inline const char* to_string(ShareClass c) {
  switch (c) {
    case ShareClass::Auto: return "auto";
    case ShareClass::Frt: return "frt";
    case ShareClass::Micro: return "micro";
    case ShareClass::Walk: return "walk";
  }
  return "?";
}

// Micro if any micro leg, else FRT if any FRT leg, else walk.
inline ShareClass classify(const TravelerOutcome& t) {
  if (t.mode() == Mode::Auto) return ShareClass::Auto;
  if (t.transit.attrs.uses_micro()) return ShareClass::Micro;
  if (t.transit.attrs.uses_frt()) return ShareClass::Frt;
  return ShareClass::Walk;
}

struct ModeShares {
  double auto_pct = 0.0;
  double frt_pct = 0.0;
  double micro_pct = 0.0;
  double walk_pct = 0.0;
  std::array<std::size_t, 4> counts{};
};

inline ModeShares mode_shares(const EquilibriumResult& result) {
  ModeShares s;
  for (const auto& t : result.travelers) ++s.counts[static_cast<std::size_t>(classify(t))];
  const double n = static_cast<double>(result.travelers.size());
  if (n > 0) {
    s.auto_pct = 100.0 * static_cast<double>(s.counts[0]) / n;
    s.frt_pct = 100.0 * static_cast<double>(s.counts[1]) / n;
    s.micro_pct = 100.0 * static_cast<double>(s.counts[2]) / n;
    s.walk_pct = 100.0 * static_cast<double>(s.counts[3]) / n;
  }
  return s;
}

struct VmtSummary {
  double auto_mi = 0.0;
  double micro_mi = 0.0;
  double frt_mi = 0.0;
  double total_mi = 0.0;
};

inline VmtSummary vmt_summary(const EquilibriumResult& result) {
  VmtSummary v;
  for (const auto& t : result.travelers)
    if (t.mode() == Mode::Auto && t.auto_path.reachable) v.auto_mi += t.auto_path.attrs.distance_mi;
  v.micro_mi = result.fleet.stats.vmt_mi;
  for (const auto& l : result.supernet.lines()) v.frt_mi += frt_line_vmt(l);
  v.total_mi = v.auto_mi + v.micro_mi + v.frt_mi;
  return v;
}

// ---------------------------------------------------------------------------
// Accessibility
// ---------------------------------------------------------------------------

// Street node indices grouped by zone id.
inline std::map<int, std::vector<std::size_t>> zones_from_nodes(const StreetNetwork& street) {
  std::map<int, std::vector<std::size_t>> zones;
  for (std::size_t i = 0; i < street.size(); ++i) zones[street.node(i).zone_id].push_back(i);
  return zones;
}

// Jobs at walk-layer nodes reachable from `origin` within `budget_s` on
// travel time alone (walk, waits, rides; no fares or taste weights).
inline double jobs_within(const Supernetwork& sn, std::size_t origin, double budget_s) {
  const bool micro_ok = sn.micro_service();
  auto tree = dijkstra(
      sn.size(), sn.walk_node(origin),
      [&](std::size_t u, auto&& relax) {
        for (std::size_t e : sn.out_links(u)) {
          const SuperLink& l = sn.link(e);
          if (is_micro(l.type) && !micro_ok) continue;
          relax(l.to, e, l.time_s);
        }
      },
      budget_s);
  double jobs = 0.0;
  for (std::size_t i = 0; i < sn.street_size(); ++i)
    if (tree.dist[sn.walk_node(i)] <= budget_s) jobs += sn.street().node(i).jobs;
  return jobs;
}

// Per zone, the mean over its nodes of the jobs reachable within 15 minutes.
inline std::map<int, double> accessibility_15min(const Supernetwork& sn,
                                                 const std::map<int, std::vector<std::size_t>>& zones,
                                                 double budget_s = 15 * kSecondsPerMinute) {
  std::map<int, double> out;
  for (const auto& [zone, nodes] : zones) {
    if (nodes.empty()) throw ValidationError("zone " + std::to_string(zone) + " has no nodes");
    double sum = 0.0;
    for (std::size_t n : nodes) sum += jobs_within(sn, n, budget_s);
    out[zone] = sum / static_cast<double>(nodes.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Line usage
// ---------------------------------------------------------------------------

inline constexpr std::array<const char*, 4> kDayBuckets = {"AM", "MD", "PM", "EV"};

inline std::size_t day_bucket(double clock_s) {
  const double h = clock_s / kSecondsPerHour;
  if (h < 10) return 0;
  if (h < 15) return 1;
  if (h < 20) return 2;
  return 3;
}

struct RouteUsage {
  std::string route_id;
  std::size_t link_traversals = 0;
  std::size_t unique_riders = 0;
  std::array<std::size_t, 4> riders_by_bucket{};
};

struct LineUsage {
  std::map<std::size_t, std::size_t> link_counts;  // FrtRide link index -> travelers
  std::vector<RouteUsage> routes;                  // one per line, in line order
};

inline LineUsage line_usage(const EquilibriumResult& result, const std::vector<TravelerProfile>& demand) {
  const Supernetwork& sn = result.supernet;
  LineUsage u;
  for (const auto& line : sn.lines()) u.routes.push_back({line.route_id, 0, 0, {}});
  for (std::size_t e = 0; e < sn.links().size(); ++e)
    if (sn.link(e).type == LinkType::FrtRide) u.link_counts[e] = 0;
  for (std::size_t i = 0; i < result.travelers.size(); ++i) {
    const auto& t = result.travelers[i];
    if (t.mode() != Mode::Transit) continue;
    std::set<int> routes;
    for (std::size_t e : t.transit.links) {
      const SuperLink& l = sn.link(e);
      if (l.type != LinkType::FrtRide) continue;
      ++u.link_counts[e];
      ++u.routes[static_cast<std::size_t>(l.route)].link_traversals;
      routes.insert(l.route);
    }
    for (int r : routes) {
      ++u.routes[static_cast<std::size_t>(r)].unique_riders;
      ++u.routes[static_cast<std::size_t>(r)].riders_by_bucket[day_bucket(demand[i].dp_time)];
    }
  }
  return u;
}

// ---------------------------------------------------------------------------
// Trip length distribution
// ---------------------------------------------------------------------------

struct Histogram {
  double bin_width = 1.0;
  std::vector<std::size_t> counts;
  std::size_t n = 0;
  double sum = 0.0;

  void add(double x) {
    const auto bin = static_cast<std::size_t>(std::floor(std::max(0.0, x) / bin_width));
    if (counts.size() <= bin) counts.resize(bin + 1, 0);
    ++counts[bin];
    ++n;
    sum += x;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
  double binned_mean() const {
    if (!n) return 0.0;
    double s = 0.0;
    for (std::size_t b = 0; b < counts.size(); ++b) s += (static_cast<double>(b) + 0.5) * bin_width * counts[b];
    return s / static_cast<double>(n);
  }
};

struct TripLengthDistribution {
  std::map<std::string, Histogram> legs;   // walk, frt, micro, auto
  std::map<std::string, Histogram> trips;  // by share class
};

inline TripLengthDistribution trip_length_distribution(const EquilibriumResult& result, double bin_width) {
  if (!(bin_width > 0.0)) throw ValidationError("bin_width must be > 0");
  TripLengthDistribution d;
  auto hist = [&](std::map<std::string, Histogram>& m, const std::string& key) -> Histogram& {
    auto [it, inserted] = m.try_emplace(key);
    if (inserted) it->second.bin_width = bin_width;
    return it->second;
  };
  for (const auto& t : result.travelers) {
    const ShareClass cls = classify(t);
    if (cls == ShareClass::Auto) {
      if (!t.auto_path.reachable) continue;
      hist(d.legs, "auto").add(t.auto_path.attrs.distance_mi);
      hist(d.trips, "auto").add(t.auto_path.attrs.distance_mi);
      continue;
    }
    for (const auto& leg : t.transit.attrs.legs) {
      if (leg.type == LinkType::Walk) hist(d.legs, "walk").add(leg.length_mi);
      else if (leg.type == LinkType::FrtRide) hist(d.legs, "frt").add(leg.length_mi);
      else if (leg.type == LinkType::MicroRide) hist(d.legs, "micro").add(leg.length_mi);
    }
    hist(d.trips, to_string(cls)).add(t.transit.attrs.total_distance_mi());
  }
  return d;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

struct MetricsReport {
  CostBreakdown costs;
  std::map<int, double> accessibility;
  ModeShares shares;
  VmtSummary vmt;
  LineUsage lines;
  TripLengthDistribution trip_lengths;
};

inline MetricsReport compute_metrics(const EquilibriumResult& result, const ScenarioConfig& scenario,
                                     const std::vector<TravelerProfile>& demand, double bin_width = 0.25) {
  MetricsReport m;
  m.costs = revenues_and_subsidy(result, scenario);
  m.accessibility = accessibility_15min(result.supernet, zones_from_nodes(result.supernet.street()));
  m.shares = mode_shares(result);
  m.vmt = vmt_summary(result);
  m.lines = line_usage(result, demand);
  m.trip_lengths = trip_length_distribution(result, bin_width);
  return m;
}

}  // namespace fixflex
