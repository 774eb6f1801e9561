#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fixflex/common.hpp"
#include "fixflex/config.hpp"
#include "fixflex/dijkstra.hpp"
#include "fixflex/network.hpp"

namespace fixflex {

// ---------------------------------------------------------------------------
// Drive graph for fleet vehicles (street indices, undelayed auto times)
// ---------------------------------------------------------------------------

struct DriveLink {
  std::size_t from = 0;
  std::size_t to = 0;
  double time_s = 0.0;
  double length_mi = 0.0;
};

// Microtransit operating network: drive links, pickup/drop-off stops and
// (optionally) a zone per node. Shortest-time trees are cached per source.
class MicroNetwork {
 public:
  MicroNetwork(std::size_t n, std::vector<DriveLink> links, std::vector<std::size_t> stops,
               std::vector<int> zones = {})
      : n_(n), links_(std::move(links)), stops_(std::move(stops)), zones_(std::move(zones)), trees_(n) {
    std::sort(stops_.begin(), stops_.end());
    is_stop_.assign(n_, 0);
    for (std::size_t s : stops_) is_stop_.at(s) = 1;
    if (zones_.empty()) zones_.assign(n_, 0);
    offsets_.assign(n_ + 1, 0);
    for (const auto& l : links_) ++offsets_[l.from + 1];
    for (std::size_t i = 0; i < n_; ++i) offsets_[i + 1] += offsets_[i];
    out_.assign(links_.size(), 0);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t e = 0; e < links_.size(); ++e) out_[fill[links_[e].from]++] = e;
  }

  // Micro layer of a supernetwork: MicroRide links at their base auto times.
  static MicroNetwork from_supernetwork(const Supernetwork& sn) {
    std::vector<DriveLink> links;
    for (const auto& l : sn.links())
      if (l.type == LinkType::MicroRide)
        links.push_back({sn.node(l.from).street, sn.node(l.to).street, l.base_time_s, l.length_mi});
    std::vector<std::size_t> stops;
    for (std::size_t v : sn.virtual_stops()) stops.push_back(sn.node(v).street);
    std::vector<int> zones;
    if (sn.partitioned())
      for (std::size_t i = 0; i < sn.street_size(); ++i) zones.push_back(sn.partition_zone(i));
    return MicroNetwork(sn.street_size(), std::move(links), std::move(stops), std::move(zones));
  }

  std::size_t size() const noexcept { return n_; }
  const std::vector<std::size_t>& stops() const noexcept { return stops_; }
  bool is_stop(std::size_t s) const { return s < n_ && is_stop_[s]; }
  int zone(std::size_t s) const { return zones_.at(s); }
  const DriveLink& link(std::size_t e) const { return links_.at(e); }

  double time(std::size_t a, std::size_t b) const { return tree(a).dist[b]; }

  double distance(std::size_t a, std::size_t b) const {
    double d = 0.0;
    for (std::size_t e : route(a, b)) d += links_[e].length_mi;
    return d;
  }

  std::vector<std::size_t> route(std::size_t a, std::size_t b) const { return tree(a).edges_to(b); }

 private:
  const ShortestPathTree& tree(std::size_t source) const {
    auto& t = trees_.at(source);
    if (!t) {
      t = dijkstra(n_, source, [&](std::size_t u, auto&& relax) {
        for (std::size_t i = offsets_[u]; i < offsets_[u + 1]; ++i) {
          const auto& l = links_[out_[i]];
          relax(l.to, out_[i], l.time_s);
        }
      });
    }
    return *t;
  }

  std::size_t n_;
  std::vector<DriveLink> links_;
  std::vector<std::size_t> stops_;
  std::vector<char> is_stop_;
  std::vector<int> zones_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> out_;
  mutable std::vector<std::optional<ShortestPathTree>> trees_;
};

// ---------------------------------------------------------------------------
// Requests, vehicles, records
// ---------------------------------------------------------------------------

struct RideRequest {
  std::int64_t rq_id = 0;
  int leg = 0;  // index of the micro leg within the traveler's path
  double request_time_s = 0.0;
  std::size_t pickup_stop = 0;  // street indices
  std::size_t dropoff_stop = 0;
  double walk_access_min = 0.0;
  double walk_egress_min = 0.0;
  double fare_distance_mi = 0.0;  // micro distance charged by the router
};

enum class ServiceStatus : std::uint8_t { Served, Rejected };
enum class RejectReason : std::uint8_t { None, OutsidePeriod, NoFeasibleVehicle };

struct ServiceRecord {
  std::int64_t rq_id = 0;
  int leg = 0;
  ServiceStatus status = ServiceStatus::Rejected;
  RejectReason reason = RejectReason::None;
  int vehicle = -1;
  double request_time_s = 0.0;
  double pickup_time_s = 0.0;
  double dropoff_time_s = 0.0;
  double wait_min = 0.0;
  double ivtt_min = 0.0;
  double direct_min = 0.0;
  double detour_ratio = 1.0;
  double fare_distance_mi = 0.0;
};

enum class FleetEventKind : std::uint8_t { Pickup, Dropoff, Reposition };

inline const char* to_string(FleetEventKind k) {
  switch (k) {
    case FleetEventKind::Pickup: return "pickup";
    case FleetEventKind::Dropoff: return "dropoff";
    case FleetEventKind::Reposition: return "reposition";
  }
  return "?";
}

struct FleetEvent {
  double time_s = 0.0;
  int vehicle = 0;
  FleetEventKind kind = FleetEventKind::Pickup;
  std::size_t node = 0;
  std::int64_t rq_id = -1;
};

struct Movement {
  int vehicle = 0;
  std::size_t from = 0;
  std::size_t to = 0;
  double depart_s = 0.0;
  double arrive_s = 0.0;
  double length_mi = 0.0;
};

struct Task {
  enum class Kind : std::uint8_t { Pickup, Dropoff };
  Kind kind = Kind::Pickup;
  std::size_t request = 0;  // index into the request list
  std::size_t node = 0;
};

struct Vehicle {
  int id = 0;
  int capacity = 8;
  std::size_t node = 0;  // last node reached (or being reached at `time_s`)
  double time_s = 0.0;
  std::vector<Task> schedule;
  std::vector<std::size_t> onboard;  // request indices
  std::optional<std::size_t> reposition_target;
  double odometer_mi = 0.0;
};

struct PeriodStats {
  std::string name;
  std::size_t requests = 0;
  std::size_t served = 0;
  std::size_t rejected = 0;
  double mean_wait_min = 0.0;  // over served; 0 when none
};

struct FleetStats {
  double mean_wait_min = 0.0;
  double mean_detour_ratio = 1.0;
  bool detour_defaulted = false;  // no served requests
  double vmt_mi = 0.0;
  std::size_t requests = 0;
  std::size_t served = 0;
  std::size_t rejected = 0;
  std::vector<PeriodStats> periods;
  std::map<int, std::vector<PeriodStats>> zone_periods;  // partitioned networks only

  double rejection_rate() const { return requests ? static_cast<double>(rejected) / static_cast<double>(requests) : 0.0; }
};

struct FleetResult {
  std::vector<ServiceRecord> records;  // same order as the request list
  FleetStats stats;
  std::vector<FleetEvent> events;      // sorted by (time, vehicle)
  std::vector<Movement> movements;
  std::vector<Vehicle> vehicles;       // final state
};

// ---------------------------------------------------------------------------
// Insertion
// ---------------------------------------------------------------------------

// Read-only view of the simulation state needed to evaluate schedules.
struct ScheduleContext {
  const MicroNetwork& net;
  const std::vector<RideRequest>& requests;
  const std::vector<double>& pickup_time;  // actual pickups; NaN if pending
  const std::vector<double>& direct_s;
  const FleetParams& params;
};

struct ScheduleEval {
  bool feasible = false;
  double drive_s = 0.0;
};

// Drives `schedule` from the vehicle's anchor, departing no earlier than
// `now`, and checks capacity, wait and detour limits for every rider.
inline ScheduleEval evaluate_schedule(const Vehicle& v, const std::vector<Task>& schedule, double now,
                                      const ScheduleContext& ctx) {
  ScheduleEval out;
  std::size_t cur = v.node;
  double t = std::max(v.time_s, now);
  auto load = static_cast<int>(v.onboard.size());
  std::vector<std::pair<std::size_t, double>> planned;
  for (const Task& task : schedule) {
    const double tt = ctx.net.time(cur, task.node);
    if (!(tt < kInf)) return out;
    t += tt;
    out.drive_s += tt;
    cur = task.node;
    const RideRequest& r = ctx.requests[task.request];
    if (task.kind == Task::Kind::Pickup) {
      t = std::max(t, r.request_time_s);
      if (t - r.request_time_s > ctx.params.max_wait_s + 1e-9) return out;
      if (++load > v.capacity) return out;
      planned.emplace_back(task.request, t);
    } else {
      double picked = ctx.pickup_time[task.request];
      for (const auto& [req, pt] : planned)
        if (req == task.request) picked = pt;
      if (t - picked > ctx.params.max_detour * ctx.direct_s[task.request] + 1e-6) return out;
      --load;
    }
  }
  out.feasible = true;
  return out;
}

struct InsertionResult {
  bool feasible = false;
  double cost_s = kInf;  // added drive time
  std::vector<Task> schedule;
  std::size_t pickup_pos = 0;
  std::size_t dropoff_pos = 0;
};

// Cheapest feasible placement of request `req` into the vehicle's schedule,
// over every (pickup, dropoff) position pair that keeps existing task order.
inline InsertionResult insertion_cost(const Vehicle& v, std::size_t req, double now, const ScheduleContext& ctx) {
  InsertionResult best;
  const auto base = evaluate_schedule(v, v.schedule, now, ctx);
  const double base_drive = base.feasible ? base.drive_s : 0.0;
  const RideRequest& r = ctx.requests[req];
  const std::size_t m = v.schedule.size();
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = i; j <= m; ++j) {
      std::vector<Task> cand;
      cand.reserve(m + 2);
      for (std::size_t k = 0; k <= m; ++k) {
        if (k == i) cand.push_back({Task::Kind::Pickup, req, r.pickup_stop});
        if (k == j) cand.push_back({Task::Kind::Dropoff, req, r.dropoff_stop});
        if (k < m) cand.push_back(v.schedule[k]);
      }
      const auto ev = evaluate_schedule(v, cand, now, ctx);
      if (!ev.feasible) continue;
      const double cost = ev.drive_s - base_drive;
      if (cost < best.cost_s) {
        best.feasible = true;
        best.cost_s = cost;
        best.schedule = std::move(cand);
        best.pickup_pos = i;
        best.dropoff_pos = j;
      }
    }
  }
  return best;
}

// Greedy rebalancing target: the stop maximizing weight / (1 + tt / tau).
// Ties go to the nearer stop, then the lower index. With no positive weight
// the vehicle stays put.
inline std::size_t reposition_vehicle(std::size_t position, const MicroNetwork& net, const std::vector<double>& weights,
                                      double tau_s) {
  std::size_t best = position;
  double best_score = 0.0;
  double best_tt = kInf;
  for (std::size_t s : net.stops()) {
    const double w = s < weights.size() ? weights[s] : 0.0;
    if (!(w > 0.0)) continue;
    const double tt = net.time(position, s);
    if (!(tt < kInf)) continue;
    const double score = w / (1.0 + tt / tau_s);
    if (score > best_score || (score == best_score && tt < best_tt)) {
      best = s;
      best_score = score;
      best_tt = tt;
    }
  }
  return best;
}

struct DetourSummary {
  double mean = 1.0;
  bool defaulted = false;
};

// Mean realized detour ratio over served records; `fallback` when none.
inline DetourSummary compute_detour_ratio(const std::vector<ServiceRecord>& records, double fallback) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.status != ServiceStatus::Served) continue;
    sum += r.detour_ratio;
    ++n;
  }
  if (n == 0) return {fallback, true};
  return {sum / static_cast<double>(n), false};
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace detail {

class FleetSimulation {
 public:
  FleetSimulation(const MicroNetwork& net, std::vector<RideRequest> requests, int fleet_size,
                  std::vector<OperatingPeriod> periods, const FleetParams& params, std::uint64_t seed,
                  double cold_start_detour)
      : net_(net),
        requests_(std::move(requests)),
        periods_(std::move(periods)),
        params_(params),
        cold_start_detour_(cold_start_detour),
        pickup_time_(requests_.size(), std::numeric_limits<double>::quiet_NaN()),
        direct_s_(requests_.size(), 0.0),
        weights_(net.size(), 0.0) {
    for (std::size_t i = 0; i < requests_.size(); ++i) {
      const auto& r = requests_[i];
      if (r.pickup_stop == r.dropoff_stop || !net_.is_stop(r.pickup_stop) || !net_.is_stop(r.dropoff_stop))
        throw ValidationError("request " + std::to_string(r.rq_id) + ": pickup/dropoff must be distinct virtual stops");
      direct_s_[i] = net_.time(r.pickup_stop, r.dropoff_stop);
    }
    result_.records.resize(requests_.size());
    place_vehicles(fleet_size, seed);
  }

  FleetResult run() {
    std::vector<std::size_t> order(requests_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& ra = requests_[a];
      const auto& rb = requests_[b];
      if (ra.request_time_s != rb.request_time_s) return ra.request_time_s < rb.request_time_s;
      if (ra.rq_id != rb.rq_id) return ra.rq_id < rb.rq_id;
      return ra.leg < rb.leg;
    });
    const ScheduleContext ctx{net_, requests_, pickup_time_, direct_s_, params_};
    for (std::size_t idx : order) {
      const RideRequest& r = requests_[idx];
      const double now = r.request_time_s;
      for (auto& v : vehicles_) advance(v, now, false);
      ServiceRecord& rec = result_.records[idx];
      rec.rq_id = r.rq_id;
      rec.leg = r.leg;
      rec.request_time_s = now;
      rec.direct_min = direct_s_[idx] / kSecondsPerMinute;
      rec.fare_distance_mi = r.fare_distance_mi;
      history_.emplace_back(now, r.pickup_stop);
      if (!in_period(now)) {
        rec.reason = RejectReason::OutsidePeriod;
        continue;
      }
      InsertionResult best;
      int best_vehicle = -1;
      for (auto& v : vehicles_) {
        auto ins = insertion_cost(v, idx, now, ctx);
        if (ins.feasible && ins.cost_s < best.cost_s) {
          best = std::move(ins);
          best_vehicle = v.id;
        }
      }
      if (best_vehicle < 0) {
        rec.reason = RejectReason::NoFeasibleVehicle;
        continue;
      }
      Vehicle& v = vehicles_[static_cast<std::size_t>(best_vehicle)];
      v.schedule = std::move(best.schedule);
      v.reposition_target.reset();
      v.time_s = std::max(v.time_s, now);
      rec.vehicle = v.id;
    }
    for (auto& v : vehicles_) advance(v, kInf, true);
    finish();
    return std::move(result_);
  }

 private:
  bool in_period(double t) const {
    return std::any_of(periods_.begin(), periods_.end(), [t](const OperatingPeriod& p) { return p.contains(t); });
  }

  void place_vehicles(int fleet_size, std::uint64_t seed) {
    const auto& stops = net_.stops();
    if (fleet_size > 0 && stops.empty()) return;  // nowhere to operate
    double start = 0.0;
    if (!periods_.empty()) {
      start = periods_.front().start_s;
      for (const auto& p : periods_) start = std::min(start, p.start_s);
    }
    std::vector<std::size_t> pool = stops;
    Rng rng(derive_seed(seed, "fleet_placement"));
    for (int i = 0; i < fleet_size; ++i) {
      const std::size_t k = static_cast<std::size_t>(i) % pool.size();
      if (k == 0)  // reshuffle each pass over the stops
        for (std::size_t a = 0; a + 1 < pool.size(); ++a) std::swap(pool[a], pool[a + rng.index(pool.size() - a)]);
      Vehicle v;
      v.id = i;
      v.capacity = params_.capacity;
      v.node = pool[k];
      v.time_s = start;
      vehicles_.push_back(std::move(v));
    }
  }

  void log(const Vehicle& v, FleetEventKind kind, std::size_t node, std::int64_t rq) {
    result_.events.push_back({v.time_s, v.id, kind, node, rq});
  }

  // Requests per pickup stop over the trailing window ending at `now`.
  const std::vector<double>& trailing_weights(double now) {
    std::fill(weights_.begin(), weights_.end(), 0.0);
    for (auto it = history_.rbegin(); it != history_.rend() && it->first >= now - params_.reposition_window_s; ++it)
      if (it->first <= now) weights_[it->second] += 1.0;
    return weights_;
  }

  // Moves the vehicle forward until its next departure would be at or after
  // `now`. A vehicle always finishes the link it has started.
  void advance(Vehicle& v, double now, bool final_flush) {
    while (v.time_s <= now) {
      std::size_t target;
      if (!v.schedule.empty()) target = v.schedule.front().node;
      else if (v.reposition_target) target = *v.reposition_target;
      else break;

      if (v.node == target) {
        if (v.schedule.empty()) {
          v.reposition_target.reset();
          continue;
        }
        const Task task = v.schedule.front();
        v.schedule.erase(v.schedule.begin());
        if (task.kind == Task::Kind::Pickup) {
          v.time_s = std::max(v.time_s, requests_[task.request].request_time_s);
          pickup_time_[task.request] = v.time_s;
          v.onboard.push_back(task.request);
          log(v, FleetEventKind::Pickup, v.node, requests_[task.request].rq_id);
        } else {
          std::erase(v.onboard, task.request);
          complete(task.request, v);
          log(v, FleetEventKind::Dropoff, v.node, requests_[task.request].rq_id);
          if (v.schedule.empty() && !final_flush && params_.reposition && in_period(v.time_s)) {
            const std::size_t dest =
                reposition_vehicle(v.node, net_, trailing_weights(v.time_s), params_.reposition_tau_s);
            if (dest != v.node) {
              v.reposition_target = dest;
              log(v, FleetEventKind::Reposition, dest, -1);
            }
          }
        }
        continue;
      }
      if (final_flush && v.schedule.empty()) {
        v.reposition_target.reset();
        break;
      }
      if (v.time_s >= now) break;
      const auto path = net_.route(v.node, target);
      if (path.empty()) throw Error("vehicle " + std::to_string(v.id) + " cannot reach its next stop");
      const DriveLink& l = net_.link(path.front());
      result_.movements.push_back({v.id, l.from, l.to, v.time_s, v.time_s + l.time_s, l.length_mi});
      v.odometer_mi += l.length_mi;
      v.node = l.to;
      v.time_s += l.time_s;
    }
  }

  void complete(std::size_t req, const Vehicle& v) {
    ServiceRecord& rec = result_.records[req];
    rec.status = ServiceStatus::Served;
    rec.reason = RejectReason::None;
    rec.vehicle = v.id;
    rec.pickup_time_s = pickup_time_[req];
    rec.dropoff_time_s = v.time_s;
    rec.wait_min = (rec.pickup_time_s - rec.request_time_s) / kSecondsPerMinute;
    const double ivtt_s = rec.dropoff_time_s - rec.pickup_time_s;
    rec.ivtt_min = ivtt_s / kSecondsPerMinute;
    const double direct = direct_s_[req];
    // Float slack between absolute clock sums and the tree's path length.
    rec.detour_ratio = direct > 0.0 ? std::max(1.0, ivtt_s / direct) : 1.0;
  }

  PeriodStats period_stats(const std::string& name, const std::vector<std::size_t>& idx) const {
    PeriodStats ps;
    ps.name = name;
    double wait = 0.0;
    for (std::size_t i : idx) {
      ++ps.requests;
      if (result_.records[i].status == ServiceStatus::Served) {
        ++ps.served;
        wait += result_.records[i].wait_min;
      } else {
        ++ps.rejected;
      }
    }
    ps.mean_wait_min = ps.served ? wait / static_cast<double>(ps.served) : 0.0;
    return ps;
  }

  void finish() {
    std::stable_sort(result_.events.begin(), result_.events.end(), [](const FleetEvent& a, const FleetEvent& b) {
      if (a.time_s != b.time_s) return a.time_s < b.time_s;
      return a.vehicle < b.vehicle;
    });
    FleetStats& st = result_.stats;
    std::vector<std::size_t> all(requests_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto whole = period_stats("all", all);
    st.requests = whole.requests;
    st.served = whole.served;
    st.rejected = whole.rejected;
    st.mean_wait_min = whole.mean_wait_min;
    const auto detour = compute_detour_ratio(result_.records, cold_start_detour_);
    st.mean_detour_ratio = detour.mean;
    st.detour_defaulted = detour.defaulted;
    for (const auto& m : result_.movements) st.vmt_mi += m.length_mi;

    std::map<int, std::vector<std::vector<std::size_t>>> by_zone;
    std::vector<std::vector<std::size_t>> by_period(periods_.size());
    for (std::size_t i = 0; i < requests_.size(); ++i) {
      for (std::size_t p = 0; p < periods_.size(); ++p) {
        if (!periods_[p].contains(requests_[i].request_time_s)) continue;
        by_period[p].push_back(i);
        auto& z = by_zone[net_.zone(requests_[i].pickup_stop)];
        z.resize(periods_.size());
        z[p].push_back(i);
        break;
      }
    }
    for (std::size_t p = 0; p < periods_.size(); ++p) st.periods.push_back(period_stats(periods_[p].name, by_period[p]));
    if (by_zone.size() > 1 || (by_zone.size() == 1 && by_zone.begin()->first != 0)) {
      for (auto& [zone, lists] : by_zone) {
        auto& out = st.zone_periods[zone];
        for (std::size_t p = 0; p < periods_.size(); ++p) out.push_back(period_stats(periods_[p].name, lists[p]));
      }
    }
    result_.vehicles = vehicles_;
  }

  const MicroNetwork& net_;
  std::vector<RideRequest> requests_;
  std::vector<OperatingPeriod> periods_;
  FleetParams params_;
  double cold_start_detour_;
  std::vector<double> pickup_time_;
  std::vector<double> direct_s_;
  std::vector<double> weights_;
  std::vector<std::pair<double, std::size_t>> history_;
  std::vector<Vehicle> vehicles_;
  FleetResult result_;
};

}  // namespace detail

// Immediate-response ride-pooling simulation: each request, on arrival, is
// inserted into the vehicle with the smallest added drive time among those
// that can take it without breaking capacity, wait or detour limits, or is
// rejected. Vehicles drive shortest-time routes and rebalance when idle.
inline FleetResult simulate_fleet(const MicroNetwork& net, std::vector<RideRequest> requests, int fleet_size,
                                  std::vector<OperatingPeriod> periods, const FleetParams& params,
                                  std::uint64_t seed = 1, double cold_start_detour = 1.2) {
  if (fleet_size < 0) throw ConfigError("fleet_size must be >= 0");
  detail::FleetSimulation sim(net, std::move(requests), fleet_size, std::move(periods), params, seed,
                              cold_start_detour);
  return sim.run();
}

// Event log: time_s,vehicle_id,event,node_id,rq_id
inline void write_event_log(std::ostream& os, const FleetResult& result, const StreetNetwork& street) {
  os << "time_s,vehicle_id,event,node_id,rq_id\n";
  for (const auto& e : result.events) {
    os << format_double(e.time_s) << ',' << e.vehicle << ',' << to_string(e.kind) << ',' << street.node(e.node).id
       << ',';
    if (e.rq_id >= 0) os << e.rq_id;
    os << '\n';
  }
}

}  // namespace fixflex
