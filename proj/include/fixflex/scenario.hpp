#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "fixflex/common.hpp"
#include "fixflex/config.hpp"
#include "fixflex/csv.hpp"
#include "fixflex/demand.hpp"
#include "fixflex/equilibrium.hpp"
#include "fixflex/metrics.hpp"
#include "fixflex/network.hpp"

namespace fixflex {

namespace fs = std::filesystem;
using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Scenario config <-> JSON
// ---------------------------------------------------------------------------

namespace detail {

template <class T>
void read_opt(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; }))
      throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

inline Json object_at(const Json& j, const char* key) {
  if (!j.contains(key)) return Json::object();
  if (!j.at(key).is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
  return j.at(key);
}

inline OperatingPeriod period_from_json(const Json& p) {
  if (p.is_string()) return named_period(p.get<std::string>());
  if (!p.is_object()) throw ConfigError("operating period must be a name or an object");
  reject_unknown(p, {"name", "start_h", "end_h"}, "operating period");
  OperatingPeriod out;
  out.name = p.value("name", std::string());
  out.start_s = p.at("start_h").get<double>() * kSecondsPerHour;
  out.end_s = p.at("end_h").get<double>() * kSecondsPerHour;
  return out;
}

inline Json period_to_json(const OperatingPeriod& p) {
  for (const char* name : {"AM", "MD", "PM"})
    if (p == named_period(name)) return name;
  return Json{{"name", p.name}, {"start_h", p.start_s / kSecondsPerHour}, {"end_h", p.end_s / kSecondsPerHour}};
}

}  // namespace detail

// Missing keys keep their defaults; unknown keys are errors.
inline ScenarioConfig config_from_json(const Json& j, ScenarioConfig c = {}) {
  using detail::object_at;
  using detail::read_opt;
  if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
  try {
    detail::reject_unknown(j,
                           {"scenario_id", "transit_mode", "headway_min", "virtual_stop_coverage", "fleet_size",
                            "operating_periods", "partition", "master_seed", "fares", "costs", "network", "fleet",
                            "equilibrium"},
                           "scenario config");
    if (j.contains("scenario_id")) {
      const auto& id = j.at("scenario_id");
      c.scenario_id = id.is_string() ? id.get<std::string>() : id.dump();
    }
    if (j.contains("transit_mode")) c.transit_mode = parse_transit_mode(j.at("transit_mode").get<std::string>());
    if (j.contains("headway_min")) {
      const auto& h = j.at("headway_min");
      c.headway_min = h.is_null() ? std::nullopt : std::optional<double>(h.get<double>());
    }
    read_opt(j, "virtual_stop_coverage", c.virtual_stop_coverage);
    read_opt(j, "fleet_size", c.fleet_size);
    if (j.contains("operating_periods")) {
      c.operating_periods.clear();
      for (const auto& p : j.at("operating_periods")) c.operating_periods.push_back(detail::period_from_json(p));
    }
    if (j.contains("partition")) {
      const auto& p = j.at("partition");
      c.partition = p.is_null() ? std::nullopt : std::optional<std::string>(p.get<std::string>());
    }
    read_opt(j, "master_seed", c.master_seed);

    const Json fares = object_at(j, "fares");
    detail::reject_unknown(fares, {"frt_flat", "micro_per_mile"}, "fares");
    read_opt(fares, "frt_flat", c.fares.frt_flat);
    read_opt(fares, "micro_per_mile", c.fares.micro_per_mile);

    const Json costs = object_at(j, "costs");
    detail::reject_unknown(costs,
                           {"frt_operating_hr", "frt_labor_per_hr", "frt_gas_per_mile", "micro_labor_per_hr",
                            "micro_gas_per_mile"},
                           "costs");
    read_opt(costs, "frt_operating_hr", c.costs.frt_operating_hr);
    read_opt(costs, "frt_labor_per_hr", c.costs.frt_labor_per_hr);
    read_opt(costs, "frt_gas_per_mile", c.costs.frt_gas_per_mile);
    read_opt(costs, "micro_labor_per_hr", c.costs.micro_labor_per_hr);
    read_opt(costs, "micro_gas_per_mile", c.costs.micro_gas_per_mile);

    const Json net = object_at(j, "network");
    detail::reject_unknown(net, {"walk_speed_mph", "transfer_radius_m", "transfer_penalty_s", "auto_fuel_per_mile"},
                           "network");
    read_opt(net, "walk_speed_mph", c.network.walk_speed_mph);
    read_opt(net, "transfer_radius_m", c.network.transfer_radius_m);
    read_opt(net, "transfer_penalty_s", c.network.transfer_penalty_s);
    read_opt(net, "auto_fuel_per_mile", c.network.auto_fuel_per_mile);

    const Json fleet = object_at(j, "fleet");
    detail::reject_unknown(fleet,
                           {"capacity", "max_wait_s", "max_detour", "reposition", "reposition_window_s",
                            "reposition_tau_s"},
                           "fleet");
    read_opt(fleet, "capacity", c.fleet.capacity);
    read_opt(fleet, "max_wait_s", c.fleet.max_wait_s);
    read_opt(fleet, "max_detour", c.fleet.max_detour);
    read_opt(fleet, "reposition", c.fleet.reposition);
    read_opt(fleet, "reposition_window_s", c.fleet.reposition_window_s);
    read_opt(fleet, "reposition_tau_s", c.fleet.reposition_tau_s);

    const Json eq = object_at(j, "equilibrium");
    detail::reject_unknown(eq,
                           {"epsilon", "eta", "max_iterations", "cold_start_detour", "cold_start_wait_s", "damping", "msa",
                            "rejection_cap", "per_zone_waits", "threads"},
                           "equilibrium");
    read_opt(eq, "epsilon", c.equilibrium.epsilon);
    read_opt(eq, "eta", c.equilibrium.eta);
    read_opt(eq, "max_iterations", c.equilibrium.max_iterations);
    read_opt(eq, "cold_start_detour", c.equilibrium.cold_start_detour);
    read_opt(eq, "cold_start_wait_s", c.equilibrium.cold_start_wait_s);
    read_opt(eq, "damping", c.equilibrium.damping);
    read_opt(eq, "msa", c.equilibrium.msa);
    read_opt(eq, "rejection_cap", c.equilibrium.rejection_cap);
    read_opt(eq, "per_zone_waits", c.equilibrium.per_zone_waits);
    read_opt(eq, "threads", c.equilibrium.threads);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed scenario config: ") + e.what());
  }
  c.validate();
  return c;
}

inline Json config_to_json(const ScenarioConfig& c) {
  Json periods = Json::array();
  for (const auto& p : c.operating_periods) periods.push_back(detail::period_to_json(p));
  return Json{
      {"scenario_id", c.scenario_id},
      {"transit_mode", to_string(c.transit_mode)},
      {"headway_min", c.headway_min ? Json(*c.headway_min) : Json(nullptr)},
      {"virtual_stop_coverage", c.virtual_stop_coverage},
      {"fleet_size", c.fleet_size},
      {"operating_periods", periods},
      {"partition", c.partition ? Json(*c.partition) : Json(nullptr)},
      {"master_seed", c.master_seed},
      {"fares", {{"frt_flat", c.fares.frt_flat}, {"micro_per_mile", c.fares.micro_per_mile}}},
      {"costs",
       {{"frt_operating_hr", c.costs.frt_operating_hr},
        {"frt_labor_per_hr", c.costs.frt_labor_per_hr},
        {"frt_gas_per_mile", c.costs.frt_gas_per_mile},
        {"micro_labor_per_hr", c.costs.micro_labor_per_hr},
        {"micro_gas_per_mile", c.costs.micro_gas_per_mile}}},
      {"network",
       {{"walk_speed_mph", c.network.walk_speed_mph},
        {"transfer_radius_m", c.network.transfer_radius_m},
        {"transfer_penalty_s", c.network.transfer_penalty_s},
        {"auto_fuel_per_mile", c.network.auto_fuel_per_mile}}},
      {"fleet",
       {{"capacity", c.fleet.capacity},
        {"max_wait_s", c.fleet.max_wait_s},
        {"max_detour", c.fleet.max_detour},
        {"reposition", c.fleet.reposition},
        {"reposition_window_s", c.fleet.reposition_window_s},
        {"reposition_tau_s", c.fleet.reposition_tau_s}}},
      {"equilibrium",
       {{"epsilon", c.equilibrium.epsilon},
        {"eta", c.equilibrium.eta},
        {"max_iterations", c.equilibrium.max_iterations},
        {"cold_start_detour", c.equilibrium.cold_start_detour},
        {"cold_start_wait_s", c.equilibrium.cold_start_wait_s},
        {"damping", c.equilibrium.damping},
        {"msa", c.equilibrium.msa},
        {"rejection_cap", c.equilibrium.rejection_cap},
        {"per_zone_waits", c.equilibrium.per_zone_waits},
        {"threads", c.equilibrium.threads}}},
  };
}

inline ScenarioConfig load_config(const fs::path& file, ScenarioConfig base = {}) {
  std::ifstream is(file);
  if (!is) throw ConfigError("cannot open config " + file.string());
  Json j;
  try {
    j = Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return config_from_json(j, std::move(base));
}

// ---------------------------------------------------------------------------
// Scenario matrix (one row per scenario)
// ---------------------------------------------------------------------------

// "['AM', 'PM']" or "AM;PM" or "0" / "" for none.
inline std::vector<OperatingPeriod> parse_period_list(std::string_view text) {
  std::vector<OperatingPeriod> out;
  std::string cleaned;
  for (char ch : text)
    if (ch != '[' && ch != ']' && ch != '\'' && ch != '"') cleaned += ch;
  const auto t = trim(cleaned);
  if (t.empty() || t == "0") return out;
  std::size_t pos = 0;
  while (pos <= t.size()) {
    const std::size_t next = t.find_first_of(",;", pos);
    const auto token = trim(t.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (!token.empty()) out.push_back(named_period(token));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

inline const std::vector<std::string> kMatrixHeader = {"scenario_id",      "transit_mode", "headway_min",
                                                       "virtual_stop_pct", "fleet_size",   "operating_periods"};

// Each row overrides the scenario fields of `base`; headway 0 means no FRT
// headway override for MicroOnly rows. An optional trailing `partition`
// column names a zone-map file.
inline std::vector<ScenarioConfig> load_matrix(const fs::path& file, const ScenarioConfig& base = {}) {
  auto table = csv::Table::read(file);
  if (table.empty_file()) throw ParseError(file.string(), 1, "empty scenario matrix");
  auto header = table.header();
  const bool has_partition = header.size() == kMatrixHeader.size() + 1 && header.back() == "partition";
  if (has_partition) header.pop_back();
  if (header != kMatrixHeader) table.require_header(kMatrixHeader);
  std::vector<ScenarioConfig> out;
  for (const auto& row : table.rows()) {
    ScenarioConfig c = base;
    try {
      c.scenario_id = std::string(trim(row.fields.at(0)));
      c.transit_mode = parse_transit_mode(trim(row.fields.at(1)));
      const double h = table.real(row, 2);
      c.headway_min = h > 0.0 ? std::optional<double>(h) : std::nullopt;
      c.virtual_stop_coverage = table.real(row, 3) / 100.0;
      c.fleet_size = static_cast<int>(table.integer(row, 4));
      c.operating_periods = parse_period_list(row.fields.at(5));
      c.partition.reset();
      if (has_partition && row.fields.size() > 6 && !trim(row.fields[6]).empty())
        c.partition = std::string(trim(row.fields[6]));
      c.validate();
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(table.file(), row.line, e.what());
    }
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

// An inputs directory holds nodes.csv (node_id,x,y,jobs), links.csv
// (from,to,length_mi,auto_time_s), frt_lines.csv, demand.csv and optionally
// zones.csv (node_id,zone_id), which sets the reporting zones.
struct ScenarioInputs {
  BaseNetworks base;
  std::vector<TravelerProfile> demand;
  std::optional<std::map<NodeId, int>> zones;
};

inline ScenarioInputs load_inputs(const fs::path& dir, double walk_speed_mph, std::uint64_t demand_seed) {
  if (!fs::is_directory(dir)) throw ValidationError("inputs directory " + dir.string() + " does not exist");
  for (const char* f : {"nodes.csv", "links.csv", "frt_lines.csv", "demand.csv"})
    if (!fs::exists(dir / f)) throw ValidationError("missing input file " + (dir / f).string());
  ScenarioInputs in;
  in.base = load_networks(dir / "links.csv", dir / "frt_lines.csv", dir / "nodes.csv", walk_speed_mph);
  if (fs::exists(dir / "zones.csv")) {
    in.zones = load_zone_map(dir / "zones.csv");
    in.base.auto_net.set_zones(*in.zones);
    in.base.walk_net.set_zones(*in.zones);
  }
  in.demand = load_demand(dir / "demand.csv", demand_seed);
  validate_demand(in.demand, in.base.auto_net);
  return in;
}

inline Supernetwork initial_supernetwork(const ScenarioInputs& in, const ScenarioConfig& c, const fs::path& inputs_dir) {
  Supernetwork sn = build_supernetwork(in.base, c, c.equilibrium.cold_start_detour, c.equilibrium.cold_start_wait_s);
  if (c.partition) {
    fs::path p = *c.partition;
    if (p.is_relative()) p = inputs_dir / p;
    sn = apply_zonal_partition(sn, load_zone_map(p));
  }
  return sn;
}

// ---------------------------------------------------------------------------
// Output writers
// ---------------------------------------------------------------------------

inline Json metrics_to_json(const MetricsReport& m, const EquilibriumResult& r) {
  Json j;
  const auto& c = m.costs;
  j["costs"] = {{"frt_cost", c.frt_cost},
                {"micro_cost", c.micro_cost},
                {"frt_revenue", c.frt_revenue},
                {"micro_revenue", c.micro_revenue},
                {"subsidy_total", c.subsidy_total},
                {"subsidy_per_transit_user",
                 c.subsidy_per_transit_user ? Json(*c.subsidy_per_transit_user) : Json(nullptr)},
                {"subsidy_per_user_defined", c.subsidy_per_transit_user.has_value()},
                {"transit_users", c.transit_users},
                {"frt_fares", c.frt_fares},
                {"micro_passenger_miles", c.micro_passenger_miles}};
  Json acc = Json::object();
  double acc_sum = 0.0;
  for (const auto& [zone, v] : m.accessibility) {
    acc[std::to_string(zone)] = v;
    acc_sum += v;
  }
  j["accessibility_15min"] = acc;
  j["accessibility_15min_mean"] = m.accessibility.empty() ? 0.0 : acc_sum / static_cast<double>(m.accessibility.size());
  j["mode_share_pct"] = {{"auto", m.shares.auto_pct},
                         {"frt", m.shares.frt_pct},
                         {"micro", m.shares.micro_pct},
                         {"walk", m.shares.walk_pct}};
  j["mode_counts"] = {{"auto", m.shares.counts[0]},
                      {"frt", m.shares.counts[1]},
                      {"micro", m.shares.counts[2]},
                      {"walk", m.shares.counts[3]}};
  j["vmt_mi"] = {{"auto", m.vmt.auto_mi}, {"micro", m.vmt.micro_mi}, {"frt", m.vmt.frt_mi}, {"total", m.vmt.total_mi}};
  Json routes = Json::array();
  for (const auto& u : m.lines.routes) {
    Json b = Json::object();
    for (std::size_t k = 0; k < kDayBuckets.size(); ++k) b[kDayBuckets[k]] = u.riders_by_bucket[k];
    routes.push_back({{"route_id", u.route_id},
                      {"link_traversals", u.link_traversals},
                      {"unique_riders", u.unique_riders},
                      {"riders_by_period", b}});
  }
  j["line_usage"] = routes;
  auto hist_json = [](const std::map<std::string, Histogram>& hs) {
    Json o = Json::object();
    for (const auto& [k, h] : hs)
      o[k] = {{"bin_width_mi", h.bin_width}, {"counts", h.counts}, {"n", h.n}, {"mean_mi", h.mean()}};
    return o;
  };
  j["trip_length"] = {{"legs", hist_json(m.trip_lengths.legs)}, {"trips", hist_json(m.trip_lengths.trips)}};
  const auto& fl = r.fleet.stats;
  j["fleet"] = {{"requests", fl.requests}, {"served", fl.served},
                {"rejected", fl.rejected}, {"mean_wait_min", fl.mean_wait_min},
                {"mean_detour_ratio", fl.mean_detour_ratio}, {"detour_defaulted", fl.detour_defaulted},
                {"vmt_mi", fl.vmt_mi}};
  j["converged"] = r.converged;
  j["iterations"] = r.iterations.size();
  j["final_gap"] = !r.iterations.empty() && r.iterations.back().gap ? Json(*r.iterations.back().gap) : Json(nullptr);
  return j;
}

inline void write_iterations_csv(std::ostream& os, const EquilibriumResult& r) {
  os << "iteration,gap,transit,auto,expected_transit,micro_requests,served,rejected,mean_wait_min,"
        "mean_detour_ratio,micro_vmt_mi,los_wait_s,los_detour_ratio\n";
  for (const auto& it : r.iterations) {
    os << it.iteration << ',' << (it.gap ? format_double(*it.gap) : std::string()) << ',' << it.transit_count << ','
       << it.auto_count << ',' << format_double(it.expected_transit) << ',' << it.micro_requests << ','
       << it.fleet.served << ',' << it.fleet.rejected << ',' << format_double(it.fleet.mean_wait_min) << ','
       << format_double(it.fleet.mean_detour_ratio) << ',' << format_double(it.fleet.vmt_mi) << ','
       << format_double(it.service.mean_wait_s) << ',' << format_double(it.service.detour_ratio) << '\n';
  }
}

inline Json iterations_to_json(const EquilibriumResult& r) {
  Json arr = Json::array();
  for (const auto& it : r.iterations) {
    arr.push_back({{"iteration", it.iteration},
                   {"gap", it.gap ? Json(*it.gap) : Json(nullptr)},
                   {"transit", it.transit_count},
                   {"auto", it.auto_count},
                   {"micro_requests", it.micro_requests},
                   {"served", it.fleet.served},
                   {"rejected", it.fleet.rejected},
                   {"mean_wait_min", it.fleet.mean_wait_min},
                   {"mean_detour_ratio", it.fleet.mean_detour_ratio},
                   {"los_wait_s", it.service.mean_wait_s},
                   {"los_detour_ratio", it.service.detour_ratio}});
  }
  return arr;
}

inline void write_line_usage_csv(std::ostream& os, const LineUsage& u) {
  os << "route_id,link_traversals,unique_riders,AM,MD,PM,EV\n";
  for (const auto& r : u.routes) {
    os << csv::quote_if_needed(r.route_id) << ',' << r.link_traversals << ',' << r.unique_riders;
    for (std::size_t k : r.riders_by_bucket) os << ',' << k;
    os << '\n';
  }
}

inline void write_legs_csv(std::ostream& os, const EquilibriumResult& r, const std::vector<TravelerProfile>& demand) {
  const Supernetwork& sn = r.supernet;
  const auto& street = sn.street();
  os << "rq_id,mode,class,leg,type,route_id,from_node,to_node,time_s,length_mi\n";
  for (std::size_t i = 0; i < r.travelers.size(); ++i) {
    const auto& t = r.travelers[i];
    const std::string prefix = std::to_string(demand[i].rq_id) + ',' + to_string(t.mode()) + ',' + to_string(classify(t));
    if (t.mode() == Mode::Auto) {
      os << prefix << ",0,auto,," << demand[i].origin << ',' << demand[i].destination << ','
         << format_double(t.auto_path.attrs.ivtt_min * kSecondsPerMinute) << ','
         << format_double(t.auto_path.attrs.distance_mi) << '\n';
      continue;
    }
    const auto& legs = t.transit.attrs.legs;
    for (std::size_t k = 0; k < legs.size(); ++k) {
      const Leg& l = legs[k];
      os << prefix << ',' << k << ',' << to_string(l.type) << ','
         << (l.route >= 0 ? csv::quote_if_needed(sn.lines()[static_cast<std::size_t>(l.route)].route_id) : "")
         << ',' << street.node(sn.node(l.from_node).street).id << ',' << street.node(sn.node(l.to_node).street).id
         << ',' << format_double(l.time_s) << ',' << format_double(l.length_mi) << '\n';
    }
  }
}

namespace detail {

inline std::vector<std::pair<double, double>> convex_hull(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  auto cross = [](auto o, auto a, auto b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  };
  std::vector<std::pair<double, double>> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

}  // namespace detail

// Zone geometry is the convex hull of the zone's node coordinates; zones with
// fewer than three distinct non-collinear nodes are emitted as MultiPoint.
inline Json accessibility_geojson(const StreetNetwork& street, const std::map<int, double>& access) {
  const auto zones = zones_from_nodes(street);
  Json features = Json::array();
  for (const auto& [zone, value] : access) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i : zones.at(zone)) pts.emplace_back(street.node(i).x, street.node(i).y);
    const auto hull = detail::convex_hull(pts);
    Json coords = Json::array();
    for (const auto& [x, y] : hull) coords.push_back({x, y});
    Json geometry;
    if (hull.size() >= 3) {
      coords.push_back({hull.front().first, hull.front().second});
      geometry = {{"type", "Polygon"}, {"coordinates", Json::array({coords})}};
    } else {
      geometry = {{"type", "MultiPoint"}, {"coordinates", coords}};
    }
    features.push_back({{"type", "Feature"},
                        {"properties", {{"zone_id", zone}, {"jobs_15min", value}}},
                        {"geometry", geometry}});
  }
  return {{"type", "FeatureCollection"}, {"features", features}};
}

namespace detail {

inline void write_text(const fs::path& file, const std::string& text) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw Error("cannot write " + file.string());
  os << text;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Running scenarios
// ---------------------------------------------------------------------------

inline constexpr int kExitConverged = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNotConverged = 2;

struct ScenarioOutcome {
  std::string scenario_id;
  int exit_code = kExitInvalid;
  std::string error;
  bool converged = false;
  std::size_t iterations = 0;
  std::optional<MetricsReport> metrics;
  fs::path out_dir;
};

// Runs one scenario on already loaded inputs and writes its outputs under
// out_root/<scenario_id>/.
inline ScenarioOutcome run_scenario(const ScenarioConfig& config, const ScenarioInputs& inputs,
                                    const fs::path& inputs_dir, const fs::path& out_root) {
  ScenarioOutcome out;
  out.scenario_id = config.scenario_id;
  try {
    config.validate();
    const Supernetwork sn0 = initial_supernetwork(inputs, config, inputs_dir);
    auto result = run_equilibrium(config, inputs.demand, sn0);
    auto metrics = compute_metrics(result, config, inputs.demand);

    out.out_dir = out_root / config.scenario_id;
    fs::create_directories(out.out_dir);
    detail::write_text(out.out_dir / "metrics.json", metrics_to_json(metrics, result).dump(2) + "\n");
    detail::write_text(out.out_dir / "iterations.json", iterations_to_json(result).dump(2) + "\n");
    detail::write_text(out.out_dir / "config.json", config_to_json(config).dump(2) + "\n");
    detail::write_text(out.out_dir / "accessibility.geojson",
                       accessibility_geojson(sn0.street(), metrics.accessibility).dump(2) + "\n");
    std::ostringstream iters, usage, legs, events;
    write_iterations_csv(iters, result);
    write_line_usage_csv(usage, metrics.lines);
    write_legs_csv(legs, result, inputs.demand);
    write_event_log(events, result.fleet, sn0.street());
    detail::write_text(out.out_dir / "iterations.csv", iters.str());
    detail::write_text(out.out_dir / "line_usage.csv", usage.str());
    detail::write_text(out.out_dir / "legs.csv", legs.str());
    detail::write_text(out.out_dir / "events.csv", events.str());

    out.converged = result.converged;
    out.iterations = result.iterations.size();
    out.metrics = std::move(metrics);
    out.exit_code = result.converged ? kExitConverged : kExitNotConverged;
  } catch (const std::exception& e) {
    out.error = e.what();
    out.exit_code = kExitInvalid;
    log(LogLevel::Error, "scenario " + config.scenario_id + ": " + e.what());
  }
  return out;
}

inline ScenarioOutcome run_scenario(const ScenarioConfig& config, const fs::path& inputs_dir,
                                    const fs::path& out_root) {
  try {
    config.validate();
    const auto inputs = load_inputs(inputs_dir, config.network.walk_speed_mph, config.master_seed);
    return run_scenario(config, inputs, inputs_dir, out_root);
  } catch (const std::exception& e) {
    ScenarioOutcome out;
    out.scenario_id = config.scenario_id;
    out.error = e.what();
    log(LogLevel::Error, "scenario " + config.scenario_id + ": " + e.what());
    return out;
  }
}

inline void write_summary_csv(std::ostream& os, const std::vector<ScenarioOutcome>& outcomes) {
  os << "scenario_id,status,converged,iterations,subsidy_total,subsidy_per_transit_user,accessibility_15min_mean,"
        "auto_pct,frt_pct,micro_pct,walk_pct,vmt_auto_mi,vmt_micro_mi,vmt_frt_mi,vmt_total_mi,error\n";
  for (const auto& o : outcomes) {
    os << csv::quote_if_needed(o.scenario_id) << ',' << (o.exit_code == kExitInvalid ? "failed" : "ok") << ','
       << (o.converged ? "true" : "false") << ',' << o.iterations << ',';
    if (o.metrics) {
      const auto& m = *o.metrics;
      double acc = 0.0;
      for (const auto& [z, v] : m.accessibility) acc += v;
      if (!m.accessibility.empty()) acc /= static_cast<double>(m.accessibility.size());
      os << format_double(m.costs.subsidy_total) << ','
         << (m.costs.subsidy_per_transit_user ? format_double(*m.costs.subsidy_per_transit_user) : "") << ','
         << format_double(acc) << ',' << format_double(m.shares.auto_pct) << ',' << format_double(m.shares.frt_pct)
         << ',' << format_double(m.shares.micro_pct) << ',' << format_double(m.shares.walk_pct) << ','
         << format_double(m.vmt.auto_mi) << ',' << format_double(m.vmt.micro_mi) << ','
         << format_double(m.vmt.frt_mi) << ',' << format_double(m.vmt.total_mi) << ',';
    } else {
      os << ",,,,,,,,,,,";
    }
    os << csv::quote_if_needed(o.error) << '\n';
  }
}

// Runs every scenario with up to `jobs` concurrent workers. Failures are
// recorded and the batch continues; summary.csv keeps matrix order.
inline std::vector<ScenarioOutcome> run_batch(const std::vector<ScenarioConfig>& scenarios, const fs::path& inputs_dir,
                                              const fs::path& out_root, int jobs) {
  std::vector<ScenarioOutcome> outcomes(scenarios.size());
  std::map<std::pair<double, std::uint64_t>, std::shared_ptr<const ScenarioInputs>> cache;
  std::mutex cache_mutex;
  auto inputs_for = [&](const ScenarioConfig& c) -> std::shared_ptr<const ScenarioInputs> {
    std::lock_guard lock(cache_mutex);
    auto key = std::make_pair(c.network.walk_speed_mph, c.master_seed);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto in = std::make_shared<const ScenarioInputs>(load_inputs(inputs_dir, c.network.walk_speed_mph, c.master_seed));
    cache.emplace(key, in);
    return in;
  };
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < scenarios.size(); i = next++) {
      const auto& c = scenarios[i];
      try {
        outcomes[i] = run_scenario(c, *inputs_for(c), inputs_dir, out_root);
      } catch (const std::exception& e) {
        outcomes[i].scenario_id = c.scenario_id;
        outcomes[i].error = e.what();
      }
      log(LogLevel::Info, "scenario " + c.scenario_id + " finished with status " + std::to_string(outcomes[i].exit_code));
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(scenarios.size())));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < n; ++w) pool.emplace_back(worker);
    worker();
  }
  fs::create_directories(out_root);
  std::ofstream os(out_root / "summary.csv", std::ios::binary);
  if (!os) throw Error("cannot write " + (out_root / "summary.csv").string());
  write_summary_csv(os, outcomes);
  return outcomes;
}

// ---------------------------------------------------------------------------
// Input validation
// ---------------------------------------------------------------------------

struct ValidationReport {
  std::size_t nodes = 0;
  std::size_t links = 0;
  std::size_t lines = 0;
  std::size_t travelers = 0;
  std::size_t zones = 0;
  std::vector<std::string> warnings;
};

// Loads every input file and applies all structural checks; throws on the
// first hard error.
inline ValidationReport validate_inputs(const fs::path& dir, double walk_speed_mph = 2.8) {
  const auto in = load_inputs(dir, walk_speed_mph, 1);
  ValidationReport r;
  r.nodes = in.base.auto_net.size();
  r.links = in.base.auto_net.links().size();
  r.lines = in.base.lines.size();
  r.travelers = in.demand.size();
  r.zones = in.zones ? zones_from_nodes(in.base.auto_net).size() : 0;
  if (!in.zones) r.warnings.push_back("no zones.csv: accessibility is reported for a single zone");
  for (const auto& t : in.demand) {
    const auto o = in.base.auto_net.require_index(t.origin);
    const auto d = in.base.auto_net.require_index(t.destination);
    if (!in.base.auto_net.shortest_paths(o, [](const StreetLink& l) { return l.time_s; }).reached(d))
      r.warnings.push_back("traveler " + std::to_string(t.rq_id) + ": destination unreachable by auto");
  }
  return r;
}

}  // namespace fixflex
