#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fixflex/common.hpp"
#include "fixflex/demand.hpp"
#include "fixflex/network.hpp"

namespace fixflex::synthetic {

// A small grid city: side×side nodes spaced `spacing_mi` apart, two-way
// streets, jobs peaked at the center, one FRT line along the middle row and
// one along the middle column, four quadrant zones.
struct CitySpec {
  int side = 5;
  double spacing_mi = 1.0;
  double auto_time_s = 144.0;  // per block
  double line_duration_min = 20.0;
  double line_headway_min = 15.0;
  double line_operating_hr = 19.0;
  double peak_jobs = 2000.0;
  double job_decay_mi = 1.5;
  std::size_t travelers = 2000;
  std::uint64_t seed = 2024;
};

inline NodeId grid_id(const CitySpec& s, int row, int col) { return static_cast<NodeId>(row * s.side + col + 1); }

inline int quadrant(const CitySpec& s, int row, int col) {
  const int mid = s.side / 2;
  return (row <= mid ? 0 : 2) + (col <= mid ? 0 : 1) + 1;
}

inline void write_city(const std::filesystem::path& dir, const CitySpec& s = {}) {
  if (s.side < 3) throw ConfigError("synthetic city needs side >= 3");
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw Error("cannot write " + (dir / name).string());
    return os;
  };
  const double c = (s.side - 1) * s.spacing_mi / 2.0;

  {
    auto os = open("nodes.csv");
    os << "node_id,x,y,jobs\n";
    for (int r = 0; r < s.side; ++r)
      for (int k = 0; k < s.side; ++k) {
        const double x = k * s.spacing_mi;
        const double y = r * s.spacing_mi;
        const double d = std::hypot(x - c, y - c);
        const double jobs = std::round(s.peak_jobs * std::exp(-d / s.job_decay_mi));
        os << grid_id(s, r, k) << ',' << format_double(x) << ',' << format_double(y) << ',' << format_double(jobs)
           << '\n';
      }
  }
  {
    auto os = open("links.csv");
    os << "from,to,length_mi,auto_time_s\n";
    auto both = [&](NodeId a, NodeId b) {
      os << a << ',' << b << ',' << format_double(s.spacing_mi) << ',' << format_double(s.auto_time_s) << '\n';
      os << b << ',' << a << ',' << format_double(s.spacing_mi) << ',' << format_double(s.auto_time_s) << '\n';
    };
    for (int r = 0; r < s.side; ++r)
      for (int k = 0; k < s.side; ++k) {
        if (k + 1 < s.side) both(grid_id(s, r, k), grid_id(s, r, k + 1));
        if (r + 1 < s.side) both(grid_id(s, r, k), grid_id(s, r + 1, k));
      }
  }
  {
    auto os = open("frt_lines.csv");
    os << "route_id,direction,stop_seq,node_id,headway_min,duration_min,length_mi,operating_hr\n";
    const int mid = s.side / 2;
    const double length = (s.side - 1) * s.spacing_mi;
    auto line = [&](const std::string& id, auto node_at) {
      for (int dir = 0; dir < 2; ++dir)
        for (int i = 0; i < s.side; ++i) {
          const int pos = dir == 0 ? i : s.side - 1 - i;
          os << id << ',' << dir << ',' << i << ',' << node_at(pos) << ',' << format_double(s.line_headway_min)
             << ',' << format_double(s.line_duration_min) << ',' << format_double(length) << ','
             << format_double(s.line_operating_hr) << '\n';
        }
    };
    line("R1", [&](int i) { return grid_id(s, mid, i); });
    line("R2", [&](int i) { return grid_id(s, i, mid); });
  }
  {
    auto os = open("zones.csv");
    os << "node_id,zone_id\n";
    for (int r = 0; r < s.side; ++r)
      for (int k = 0; k < s.side; ++k) os << grid_id(s, r, k) << ',' << quadrant(s, r, k) << '\n';
  }
  const auto base = load_networks(dir / "links.csv", dir / "frt_lines.csv", dir / "nodes.csv");
  const auto demand = generate_synthetic_demand(s.travelers, base.auto_net, TemporalProfile::two_peak(),
                                                CoefficientSpec::san_diego(), s.seed);
  write_demand(dir / "demand.csv", demand);
}

}  // namespace fixflex::synthetic
