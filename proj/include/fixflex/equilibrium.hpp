#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <thread>
#include <vector>

#include "fixflex/choice.hpp"
#include "fixflex/common.hpp"
#include "fixflex/config.hpp"
#include "fixflex/demand.hpp"
#include "fixflex/fleet.hpp"
#include "fixflex/network.hpp"
#include "fixflex/router.hpp"

namespace fixflex {

inline constexpr double kProbabilityFloor = 1e-9;

struct IterationRecord {
  int iteration = 0;
  std::optional<double> gap;  // none on the first iteration
  std::size_t transit_count = 0;
  std::size_t auto_count = 0;
  double expected_transit = 0.0;  // Σ Pr(transit), diagnostic
  std::size_t micro_requests = 0;
  FleetStats fleet;
  MicroService service;  // level of service the travelers saw
  std::vector<double> prob_transit;
};

struct TravelerOutcome {
  TransitPath transit;
  AutoPath auto_path;
  double v_transit = -kInf;
  double v_auto = -kInf;
  ModeChoiceState choice;

  Mode mode() const { return choice.chosen_mode.value_or(Mode::Auto); }
};

struct EquilibriumResult {
  bool converged = false;
  std::vector<IterationRecord> iterations;
  std::vector<TravelerOutcome> travelers;  // same order as the demand list
  std::vector<RideRequest> requests;       // final iteration
  FleetResult fleet;                       // final iteration
  Supernetwork supernet;                   // after the final level-of-service update
};

// Convergence gap: Σ_i Σ_m (Ψⁿ − Ψⁿ⁻¹)² / Ψⁿ⁻¹ over the two modes, with both
// vectors holding Pr(transit). Probabilities are floored at 1e-9.
inline double convergence_gap(const std::vector<double>& probs_n, const std::vector<double>& probs_prev) {
  if (probs_n.size() != probs_prev.size()) throw ValidationError("probability vectors differ in length");
  double gap = 0.0;
  for (std::size_t i = 0; i < probs_n.size(); ++i) {
    const double pt = std::clamp(probs_n[i], kProbabilityFloor, 1.0 - kProbabilityFloor);
    const double qt = std::clamp(probs_prev[i], kProbabilityFloor, 1.0 - kProbabilityFloor);
    const double dt = pt - qt;
    gap += dt * dt / qt + dt * dt / (1.0 - qt);
  }
  return gap;
}

// Rejection-inflated wait: wait / (1 − r), at most `cap` times the wait.
inline double inflate_wait(double wait_s, std::size_t requests, std::size_t rejected, double cap) {
  if (requests == 0) return wait_s;
  const double r = static_cast<double>(rejected) / static_cast<double>(requests);
  const double factor = r >= 1.0 ? cap : std::min(1.0 / (1.0 - r), cap);
  return wait_s * factor;
}

// Weight kept on the previous level of service after the n-th fleet run.
inline double carry_weight(const EquilibriumParams& params, int n) {
  if (params.msa) return n > 1 ? 1.0 - 1.0 / static_cast<double>(n) : 0.0;
  return params.damping;
}

// Broadcasts fleet performance onto the microtransit layer: boarding waits
// take the (per-period, optionally per-zone) mean wait and ride links take
// auto time × mean detour ratio. Periods without served requests fall back
// to the cold-start wait. `n` is the 1-based iteration that produced `stats`.
inline Supernetwork update_supernetwork_from_fleet(const Supernetwork& sn, const FleetStats& stats,
                                                   const EquilibriumParams& params, int n = 1) {
  if (!sn.micro_layer()) return sn;
  const double cap = params.rejection_cap;
  auto wait_of = [&](std::size_t served, double mean_wait_min, std::size_t requests, std::size_t rejected) {
    const double base = served > 0 ? mean_wait_min * kSecondsPerMinute : params.cold_start_wait_s;
    return inflate_wait(base, requests, rejected, cap);
  };
  MicroService svc;
  svc.mean_wait_s = wait_of(stats.served, stats.mean_wait_min, stats.requests, stats.rejected);
  svc.detour_ratio = stats.served > 0 ? stats.mean_detour_ratio : params.cold_start_detour;
  for (std::size_t p = 0; p < sn.periods().size(); ++p) {
    if (p < stats.periods.size()) {
      const auto& ps = stats.periods[p];
      svc.period_wait_s.push_back(wait_of(ps.served, ps.mean_wait_min, ps.requests, ps.rejected));
    } else {
      svc.period_wait_s.push_back(svc.mean_wait_s);
    }
  }
  if (params.per_zone_waits && sn.partitioned()) {
    for (const auto& [zone, periods] : stats.zone_periods) {
      auto& out = svc.zone_period_wait_s[zone];
      for (const auto& ps : periods) out.push_back(wait_of(ps.served, ps.mean_wait_min, ps.requests, ps.rejected));
    }
  }
  if (const double a = carry_weight(params, n); a > 0.0) {
    const MicroService& old = sn.service();
    auto mix = [a](double before, double now) { return a * before + (1 - a) * now; };
    svc.mean_wait_s = mix(old.mean_wait_s, svc.mean_wait_s);
    svc.detour_ratio = mix(old.detour_ratio, svc.detour_ratio);
    for (std::size_t p = 0; p < svc.period_wait_s.size() && p < old.period_wait_s.size(); ++p)
      svc.period_wait_s[p] = mix(old.period_wait_s[p], svc.period_wait_s[p]);
    for (auto& [zone, waits] : svc.zone_period_wait_s) {
      auto it = old.zone_period_wait_s.find(zone);
      if (it == old.zone_period_wait_s.end()) continue;
      for (std::size_t p = 0; p < waits.size() && p < it->second.size(); ++p) waits[p] = mix(it->second[p], waits[p]);
    }
  }
  return sn.with_service(std::move(svc));
}

// One microtransit request per contiguous micro segment of a transit path.
// Request time is the departure plus the path time before the boarding wait.
inline std::vector<RideRequest> extract_requests(const Supernetwork& sn, const TravelerProfile& t,
                                                 const TransitPath& path) {
  std::vector<RideRequest> out;
  double clock = t.dp_time;
  double walk_run = 0.0;  // consecutive walking minutes
  bool egress = false;    // walking right after a micro alighting
  std::optional<RideRequest> open;
  for (std::size_t e : path.links) {
    const SuperLink& l = sn.link(e);
    const double dt = sn.link_time(e, path.period);
    if (l.type == LinkType::Walk) {
      walk_run += dt / kSecondsPerMinute;
      if (egress) out.back().walk_egress_min += dt / kSecondsPerMinute;
    } else {
      if (l.type == LinkType::MicroWait && l.boarding) {
        RideRequest r;
        r.rq_id = t.rq_id;
        r.leg = static_cast<int>(out.size());
        r.request_time_s = clock;
        r.pickup_stop = sn.node(l.to).street;
        r.walk_access_min = walk_run;
        open = r;
      } else if (l.type == LinkType::MicroWait && open) {
        open->dropoff_stop = sn.node(l.from).street;
        out.push_back(*open);
        open.reset();
      } else if (l.type == LinkType::MicroRide && open) {
        open->fare_distance_mi += l.length_mi;
      }
      egress = l.type == LinkType::MicroWait && !l.boarding;
      walk_run = 0.0;
    }
    clock += dt;
  }
  return out;
}

namespace detail {

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers = std::clamp<std::size_t>(threads > 0 ? static_cast<std::size_t>(threads) : 1, 1, n ? n : 1);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
}

}  // namespace detail

// Routes every traveler on `sn` and refreshes utilities; choices untouched.
inline void route_travelers(const Supernetwork& sn, const std::vector<TravelerProfile>& demand,
                            const FareSchedule& fares, int threads, std::vector<TravelerOutcome>& out) {
  detail::parallel_for(demand.size(), threads, [&](std::size_t i) {
    out[i].transit = least_cost_transit_path(sn, demand[i], fares);
    out[i].v_transit = transit_utility(out[i].transit, demand[i].betas, fares);
  });
}

inline std::vector<double> transit_probabilities(const std::vector<TravelerOutcome>& travelers) {
  std::vector<double> p(travelers.size());
  for (std::size_t i = 0; i < travelers.size(); ++i)
    p[i] = choice_probability(travelers[i].v_transit, travelers[i].v_auto);
  return p;
}

// Fixed-point loop: route → choose → simulate fleet → update the micro layer
// → test the gap. The first iteration has no gap; the loop stops once the gap
// falls to epsilon or max_iterations is reached.
inline EquilibriumResult run_equilibrium(const ScenarioConfig& scenario, const std::vector<TravelerProfile>& demand,
                                         const Supernetwork& initial) {
  const auto& params = scenario.equilibrium;
  const auto& fares = scenario.fares;
  EquilibriumResult result;
  result.travelers.resize(demand.size());

  // Auto level of service is fixed across iterations.
  detail::parallel_for(demand.size(), params.threads, [&](std::size_t i) {
    auto& o = result.travelers[i];
    o.auto_path = least_cost_auto_path(initial.auto_network(), demand[i], scenario.network.auto_fuel_per_mile);
    o.v_auto = auto_utility(o.auto_path, demand[i].betas);
    o.choice = initial_choice_state(demand[i]);
  });

  const bool run_fleet = initial.micro_layer() && initial.micro_service();
  const auto micro_net = MicroNetwork::from_supernetwork(initial);
  Supernetwork sn = initial;
  std::vector<double> prev;
  for (int n = 1; n <= params.max_iterations; ++n) {
    route_travelers(sn, demand, fares, params.threads, result.travelers);
    auto probs = transit_probabilities(result.travelers);

    IterationRecord rec;
    rec.iteration = n;
    rec.service = sn.service();
    if (n > 1) rec.gap = convergence_gap(probs, prev);

    std::vector<RideRequest> requests;
    for (std::size_t i = 0; i < demand.size(); ++i) {
      auto& o = result.travelers[i];
      o.choice = assign_mode(o.choice, probs[i], params.eta);
      rec.expected_transit += probs[i];
      if (o.mode() == Mode::Transit) {
        ++rec.transit_count;
        if (run_fleet && o.transit.attrs.uses_micro()) {
          auto reqs = extract_requests(sn, demand[i], o.transit);
          requests.insert(requests.end(), reqs.begin(), reqs.end());
        }
      } else {
        ++rec.auto_count;
      }
    }
    rec.micro_requests = requests.size();
    if (run_fleet) {
      result.fleet = simulate_fleet(micro_net, requests, scenario.fleet_size, scenario.operating_periods,
                                    scenario.fleet, derive_seed(scenario.master_seed, "fleet"),
                                    params.cold_start_detour);
    } else {
      result.fleet = FleetResult{};
    }
    result.requests = std::move(requests);
    rec.fleet = result.fleet.stats;
    rec.prob_transit = probs;
    log(LogLevel::Info, "scenario " + scenario.scenario_id + " iteration " + std::to_string(n) + ": transit " +
                            std::to_string(rec.transit_count) + ", auto " + std::to_string(rec.auto_count) +
                            ", micro requests " + std::to_string(rec.micro_requests) +
                            (rec.gap ? ", gap " + format_double(*rec.gap) : std::string()));
    const bool done = rec.gap && *rec.gap <= params.epsilon;
    result.iterations.push_back(std::move(rec));
    if (run_fleet) sn = update_supernetwork_from_fleet(sn, result.fleet.stats, params, n);
    prev = std::move(probs);
    if (done) {
      result.converged = true;
      break;
    }
  }
  result.supernet = std::move(sn);
  return result;
}

// Gap between the last iteration's probabilities and one more route+choose
// pass on the final (frozen) supernetwork.
inline double fixed_point_gap(const EquilibriumResult& result, const ScenarioConfig& scenario,
                              const std::vector<TravelerProfile>& demand) {
  if (result.iterations.empty()) throw Error("no iterations recorded");
  std::vector<TravelerOutcome> again = result.travelers;
  route_travelers(result.supernet, demand, scenario.fares, scenario.equilibrium.threads, again);
  return convergence_gap(transit_probabilities(again), result.iterations.back().prob_transit);
}

}  // namespace fixflex
