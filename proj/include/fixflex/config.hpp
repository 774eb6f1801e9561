#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fixflex/common.hpp"

namespace fixflex {

enum class TransitMode { MicroOnly, FixedOnly, MicroPlusFixed };

inline std::string to_string(TransitMode m) {
  switch (m) {
    case TransitMode::MicroOnly: return "MicroOnly";
    case TransitMode::FixedOnly: return "FixedOnly";
    case TransitMode::MicroPlusFixed: return "MicroPlusFixed";
  }
  return "?";
}

inline TransitMode parse_transit_mode(std::string_view s) {
  if (s == "MicroOnly" || s == "Micro only") return TransitMode::MicroOnly;
  if (s == "FixedOnly" || s == "Fixed only") return TransitMode::FixedOnly;
  if (s == "MicroPlusFixed" || s == "Micro+Fixed") return TransitMode::MicroPlusFixed;
  throw ConfigError("unknown transit mode '" + std::string(s) + "'");
}

// A clock interval [start_s, end_s) during which microtransit runs.
struct OperatingPeriod {
  std::string name;
  double start_s = 0.0;
  double end_s = 0.0;

  bool contains(double t) const noexcept { return t >= start_s && t < end_s; }
  double hours() const noexcept { return (end_s - start_s) / kSecondsPerHour; }
  bool operator==(const OperatingPeriod&) const = default;
};

inline OperatingPeriod named_period(std::string_view name) {
  if (name == "AM") return {"AM", 5 * kSecondsPerHour, 10 * kSecondsPerHour};
  if (name == "MD") return {"MD", 10 * kSecondsPerHour, 15 * kSecondsPerHour};
  if (name == "PM") return {"PM", 15 * kSecondsPerHour, 20 * kSecondsPerHour};
  throw ConfigError("unknown operating period '" + std::string(name) + "' (expected AM, MD or PM)");
}

struct FareSchedule {
  double frt_flat = 2.5;         // $ per linked FRT trip
  double micro_per_mile = 1.97;  // $ per microtransit mile
  bool operator==(const FareSchedule&) const = default;
};

struct CostCoefficients {
  double frt_operating_hr = 19.0;     // T_l
  double frt_labor_per_hr = 170.0;    // C_F^d
  double frt_gas_per_mile = 0.350;    // G_F
  double micro_labor_per_hr = 130.0;  // C_M^d
  double micro_gas_per_mile = 0.305;  // G_M
  bool operator==(const CostCoefficients&) const = default;
};

struct NetworkParams {
  double walk_speed_mph = 2.8;
  double transfer_radius_m = 0.0;
  double transfer_penalty_s = 60.0;
  double auto_fuel_per_mile = 0.35;  // $ per auto mile
  bool operator==(const NetworkParams&) const = default;
};

struct FleetParams {
  int capacity = 8;
  double max_wait_s = 20 * kSecondsPerMinute;
  double max_detour = 2.0;
  bool reposition = true;
  double reposition_window_s = kSecondsPerHour;
  double reposition_tau_s = 10 * kSecondsPerMinute;
  bool operator==(const FleetParams&) const = default;
};

struct EquilibriumParams {
  double epsilon = 0.01;
  double eta = 0.05;
  int max_iterations = 20;
  double cold_start_detour = 1.2;
  double cold_start_wait_s = 300.0;
  double damping = 0.0;        // weight on the previous level of service, in [0, 1)
  bool msa = false;            // successive averages: weight 1 − 1/n, overrides damping
  double rejection_cap = 3.0;  // max wait inflation from rejections
  bool per_zone_waits = false;
  int threads = 1;
  bool operator==(const EquilibriumParams&) const = default;
};

struct ScenarioConfig {
  std::string scenario_id = "0";
  TransitMode transit_mode = TransitMode::MicroPlusFixed;
  std::optional<double> headway_min;  // nullopt: no FRT, or keep file headways
  double virtual_stop_coverage = 1.0;
  int fleet_size = 0;
  std::vector<OperatingPeriod> operating_periods;
  std::optional<std::string> partition;  // zone-map path
  std::uint64_t master_seed = 1;
  FareSchedule fares;
  CostCoefficients costs;
  NetworkParams network;
  FleetParams fleet;
  EquilibriumParams equilibrium;

  bool has_frt() const noexcept { return transit_mode != TransitMode::MicroOnly; }
  bool has_micro() const noexcept { return transit_mode != TransitMode::FixedOnly; }
  double micro_operating_hours() const noexcept {
    double h = 0.0;
    for (const auto& p : operating_periods) h += p.hours();
    return h;
  }

  void validate() const {
    if (scenario_id.empty()) throw ConfigError("scenario_id must not be empty");
    if (transit_mode == TransitMode::FixedOnly && fleet_size != 0)
      throw ConfigError("FixedOnly scenario requires fleet_size = 0");
    if (transit_mode == TransitMode::MicroOnly && headway_min.has_value())
      throw ConfigError("MicroOnly scenario must not set a headway");
    if (headway_min && !(*headway_min > 0.0)) throw ConfigError("headway_min must be > 0");
    if (!(virtual_stop_coverage >= 0.0 && virtual_stop_coverage <= 1.0))
      throw ConfigError("virtual_stop_coverage must lie in [0, 1]");
    if (fleet_size < 0) throw ConfigError("fleet_size must be >= 0");
    for (const auto& p : operating_periods)
      if (!(p.end_s > p.start_s)) throw ConfigError("operating period '" + p.name + "' is empty");
    const auto& eq = equilibrium;
    if (!(eq.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
    if (!(eq.eta >= 0.0)) throw ConfigError("eta must be >= 0");
    if (eq.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (!(eq.cold_start_detour >= 1.0)) throw ConfigError("cold_start_detour must be >= 1");
    if (!(eq.cold_start_wait_s >= 0.0)) throw ConfigError("cold_start_wait_s must be >= 0");
    if (!(eq.damping >= 0.0 && eq.damping < 1.0)) throw ConfigError("damping must lie in [0, 1)");
    if (!(eq.rejection_cap >= 1.0)) throw ConfigError("rejection_cap must be >= 1");
    if (fleet.capacity < 1) throw ConfigError("vehicle capacity must be >= 1");
    if (!(fleet.max_detour >= 1.0)) throw ConfigError("max_detour must be >= 1");
    if (!(fleet.max_wait_s >= 0.0)) throw ConfigError("max_wait_s must be >= 0");
    if (!(network.walk_speed_mph > 0.0)) throw ConfigError("walk_speed_mph must be > 0");
    if (fares.frt_flat < 0.0 || fares.micro_per_mile < 0.0) throw ConfigError("fares must be >= 0");
  }
};

}  // namespace fixflex
