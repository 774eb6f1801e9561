#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "fixflex/common.hpp"
#include "fixflex/csv.hpp"
#include "fixflex/network.hpp"

namespace fixflex {

inline constexpr double kDayStart_s = 5 * kSecondsPerHour;  // first departure 5:00
inline constexpr double kDayEnd_s = 24 * kSecondsPerHour;    // last departure 23:59:59
inline constexpr std::size_t kDayHours = 19;

// Per-traveler taste coefficients. All stored as non-negative magnitudes;
// non-constant terms enter utilities as disutilities.
struct CoefficientVector {
  double auto_asc = 0.0;        // β_D0
  double auto_ivtt = 0.0;       // β_D_ivt, 1/min
  double auto_gas = 0.0;        // β_D_gas, 1/$
  double transit_asc = 0.0;     // β_T0
  double walk = 0.0;            // β_T_wk, 1/min
  double micro_wait = 0.0;      // β_M_wt, 1/min
  double frt_wait = 0.0;        // β_F_wt, 1/min
  double micro_ivtt = 0.0;      // β_M_ivt, 1/min
  double frt_ivtt = 0.0;        // β_F_ivt, 1/min
  double frt_transfer = 0.0;    // β_F_trfr, 1/transfer
  double fare = 0.0;            // β_T_fr, 1/$

  static constexpr std::size_t kSize = 11;

  std::array<double, kSize> as_array() const {
    return {auto_asc, auto_ivtt, auto_gas, transit_asc, walk, micro_wait, frt_wait, micro_ivtt, frt_ivtt,
            frt_transfer, fare};
  }
  static CoefficientVector from_array(const std::array<double, kSize>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8], a[9], a[10]};
  }
  bool operator==(const CoefficientVector&) const = default;
};

inline constexpr std::array<const char*, CoefficientVector::kSize> kCoefficientNames = {
    "b_D0", "b_D_ivt", "b_D_gas", "b_T0", "b_T_wk", "b_M_wt", "b_F_wt", "b_M_ivt", "b_F_ivt", "b_F_trfr", "b_T_fr"};

struct CoefficientDistribution {
  double mean = 0.0;
  double std_dev = 0.0;
  double threshold = 0.0;  // ω: draws are clamped to max(draw, ω)
  bool operator==(const CoefficientDistribution&) const = default;
};

struct CoefficientSpec {
  std::array<CoefficientDistribution, CoefficientVector::kSize> dists{};

  void validate() const {
    for (std::size_t i = 0; i < dists.size(); ++i)
      if (dists[i].std_dev < 0.0 || dists[i].threshold < 0.0)
        throw ConfigError(std::string("coefficient ") + kCoefficientNames[i] + ": std_dev and threshold must be >= 0");
  }

  // Downtown San Diego (mean, sd, ω).
  static CoefficientSpec san_diego() {
    return {{{{0, 0, 0},
              {0.184, 0.047, 0.01},
              {0.994, 0.377, 0.05},
              {0.022, 0.04, 0},
              {0.213, 0.140, 0.01},
              {0.104, 0.022, 0.01},
              {0.069, 0.022, 0.01},
              {0.104, 0.022, 0.01},
              {0.102, 0.029, 0.01},
              {0.504, 0.022, 0.01},
              {0.554, 0.377, 0.05}}}};
  }

  static CoefficientSpec lemon_grove() {
    return {{{{0, 0, 0},
              {0.198, 0.047, 0.01},
              {0.579, 0.377, 0.05},
              {0.292, 0.04, 0},
              {0.329, 0.140, 0.01},
              {0.094, 0.022, 0.01},
              {0.082, 0.022, 0.01},
              {0.104, 0.022, 0.01},
              {0.106, 0.029, 0.01},
              {0.504, 0.022, 0.01},
              {0.554, 0.377, 0.05}}}};
  }
};

struct TravelerProfile {
  std::int64_t rq_id = 0;
  NodeId origin = 0;
  NodeId destination = 0;
  double dp_time = 0.0;  // seconds after midnight
  CoefficientVector betas;
  std::uint64_t rng_seed = 0;
  bool operator==(const TravelerProfile&) const = default;
};

inline std::uint64_t traveler_seed(std::uint64_t global_seed, std::int64_t rq_id) {
  return derive_seed(derive_seed(global_seed, "traveler"), static_cast<std::uint64_t>(rq_id));
}

// β = max(Normal(mean, sd), ω) for every coefficient, in declaration order.
inline CoefficientVector sample_coefficients(const CoefficientSpec& spec, Rng& rng) {
  std::array<double, CoefficientVector::kSize> out{};
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& d = spec.dists[i];
    const double draw = d.std_dev > 0.0 ? rng.normal(d.mean, d.std_dev) : d.mean;
    out[i] = std::max(draw, d.threshold);
  }
  return CoefficientVector::from_array(out);
}

inline void validate_profile(const TravelerProfile& t) {
  const std::string who = "traveler " + std::to_string(t.rq_id);
  if (t.origin == t.destination) throw ValidationError(who + ": origin equals destination");
  if (!(t.dp_time >= 0.0 && t.dp_time < kDayEnd_s)) throw ValidationError(who + ": dp_time outside the day");
  for (double b : t.betas.as_array())
    if (!(b >= 0.0)) throw ValidationError(who + ": negative coefficient");
}

// Checks that every origin and destination exists in the street network.
inline void validate_demand(const std::vector<TravelerProfile>& demand, const StreetNetwork& street) {
  for (const auto& t : demand) {
    if (!street.index_of(t.origin) || !street.index_of(t.destination))
      throw ValidationError("traveler " + std::to_string(t.rq_id) + " references a node outside the network");
  }
}

// Compact layout: one wait column feeds both wait coefficients.
inline const std::vector<std::string> kDemandHeaderCompact = {
    "dp_time", "O", "D", "rq_id", "b_c0", "b_c_ivt", "b_c_gas", "b_T0", "b_T_wk", "b_T_wt", "b_m_ivt", "b_f_ivt",
    "b_f_trfr", "b_T_fr"};
inline const std::vector<std::string> kDemandHeaderExtended = {
    "dp_time", "O", "D", "rq_id", "b_c0", "b_c_ivt", "b_c_gas", "b_T0", "b_T_wk", "b_m_wt", "b_f_wt", "b_m_ivt",
    "b_f_ivt", "b_f_trfr", "b_T_fr"};

inline std::vector<TravelerProfile> load_demand(const std::filesystem::path& file, std::uint64_t global_seed = 1) {
  auto table = csv::Table::read(file);
  std::vector<TravelerProfile> out;
  if (table.empty_file()) return out;
  bool extended = false;
  if (table.header() == kDemandHeaderExtended) extended = true;
  else table.require_header(kDemandHeaderCompact);
  std::set<std::int64_t> seen;
  for (const auto& row : table.rows()) {
    TravelerProfile t;
    t.dp_time = table.real(row, 0);
    t.origin = table.integer(row, 1);
    t.destination = table.integer(row, 2);
    t.rq_id = table.integer(row, 3);
    auto& b = t.betas;
    std::size_t c = 4;
    b.auto_asc = table.real(row, c++);
    b.auto_ivtt = table.real(row, c++);
    b.auto_gas = table.real(row, c++);
    b.transit_asc = table.real(row, c++);
    b.walk = table.real(row, c++);
    b.micro_wait = table.real(row, c++);
    b.frt_wait = extended ? table.real(row, c++) : b.micro_wait;
    b.micro_ivtt = table.real(row, c++);
    b.frt_ivtt = table.real(row, c++);
    b.frt_transfer = table.real(row, c++);
    b.fare = table.real(row, c++);
    try {
      validate_profile(t);
    } catch (const ValidationError& e) {
      throw ValidationError(table.file() + ":" + std::to_string(row.line) + ": " + e.what());
    }
    if (!seen.insert(t.rq_id).second)
      throw ValidationError(table.file() + ":" + std::to_string(row.line) + ": duplicate rq_id " +
                            std::to_string(t.rq_id));
    t.rng_seed = traveler_seed(global_seed, t.rq_id);
    out.push_back(t);
  }
  return out;
}

// Writes the compact layout when every traveler has equal wait coefficients,
// otherwise the extended one.
inline void write_demand(std::ostream& os, const std::vector<TravelerProfile>& demand) {
  const bool extended = std::any_of(demand.begin(), demand.end(), [](const TravelerProfile& t) {
    return t.betas.micro_wait != t.betas.frt_wait;
  });
  const auto& header = extended ? kDemandHeaderExtended : kDemandHeaderCompact;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  for (const auto& t : demand) {
    const auto& b = t.betas;
    os << format_double(t.dp_time) << ',' << t.origin << ',' << t.destination << ',' << t.rq_id << ','
       << format_double(b.auto_asc) << ',' << format_double(b.auto_ivtt) << ',' << format_double(b.auto_gas) << ','
       << format_double(b.transit_asc) << ',' << format_double(b.walk) << ',' << format_double(b.micro_wait) << ',';
    if (extended) os << format_double(b.frt_wait) << ',';
    os << format_double(b.micro_ivtt) << ',' << format_double(b.frt_ivtt) << ',' << format_double(b.frt_transfer)
       << ',' << format_double(b.fare) << '\n';
  }
}

inline void write_demand(const std::filesystem::path& file, const std::vector<TravelerProfile>& demand) {
  std::ofstream os(file);
  if (!os) throw Error("cannot write " + file.string());
  write_demand(os, demand);
}

// Hourly departure weights from 5:00 to 24:00 (19 bins), normalized.
class TemporalProfile {
 public:
  explicit TemporalProfile(std::array<double, kDayHours> weights) : weights_(weights) {
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0)) throw ConfigError("temporal profile weights must be >= 0");
      total += w;
    }
    if (!(total > 0.0)) throw ConfigError("temporal profile has no mass");
    for (double& w : weights_) w /= total;
  }

  static TemporalProfile uniform() {
    std::array<double, kDayHours> w{};
    w.fill(1.0);
    return TemporalProfile(w);
  }

  // Morning peak 7-9, evening peak 18-19.
  static TemporalProfile two_peak() {
    return TemporalProfile({2, 4, 9, 9, 5, 4, 4, 5, 5, 5, 6, 6, 7, 8, 4, 3, 2, 1.5, 1});
  }

  const std::array<double, kDayHours>& weights() const noexcept { return weights_; }

  double sample(Rng& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t hour = kDayHours - 1;
    for (std::size_t h = 0; h < kDayHours; ++h) {
      acc += weights_[h];
      if (u < acc) {
        hour = h;
        break;
      }
    }
    return kDayStart_s + static_cast<double>(hour) * kSecondsPerHour + std::floor(rng.uniform() * kSecondsPerHour);
  }

 private:
  std::array<double, kDayHours> weights_;
};

// Stand-in for an activity-based demand model: uniform origins and
// destinations over street nodes, departures from `profile`, coefficients
// from `spec`. Every traveler draws from its own seed-derived stream.
inline std::vector<TravelerProfile> generate_synthetic_demand(std::size_t n_trips, const StreetNetwork& network,
                                                              const TemporalProfile& profile,
                                                              const CoefficientSpec& spec, std::uint64_t seed) {
  if (network.size() < 2) throw ValidationError("synthetic demand needs a network with at least two nodes");
  spec.validate();
  std::vector<TravelerProfile> out;
  out.reserve(n_trips);
  for (std::size_t i = 0; i < n_trips; ++i) {
    TravelerProfile t;
    t.rq_id = static_cast<std::int64_t>(i);
    t.rng_seed = traveler_seed(seed, t.rq_id);
    Rng rng(derive_seed(t.rng_seed, "synthesis"));
    const std::size_t o = rng.index(network.size());
    std::size_t d = rng.index(network.size() - 1);
    if (d >= o) ++d;
    t.origin = network.node(o).id;
    t.destination = network.node(d).id;
    t.dp_time = profile.sample(rng);
    t.betas = sample_coefficients(spec, rng);
    out.push_back(t);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const TravelerProfile& a, const TravelerProfile& b) { return a.dp_time < b.dp_time; });
  return out;
}

}  // namespace fixflex
