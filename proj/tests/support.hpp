#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "fixflex/network.hpp"

namespace fixflex::fixture {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("fixflex_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  os << text;
  return path;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

using LinkTuple = std::tuple<NodeId, NodeId, double, double>;

// side×side grid, ids 1.., both directions, `spacing` miles and `time_s`
// seconds per block.
inline StreetNetwork grid(int side, double spacing = 1.0, double time_s = 144.0, double jobs = 0.0) {
  std::vector<Node> nodes;
  std::vector<LinkTuple> links;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      const NodeId id = r * side + c + 1;
      nodes.push_back({id, c * spacing, r * spacing, 0, jobs});
      if (c + 1 < side) {
        links.emplace_back(id, id + 1, spacing, time_s);
        links.emplace_back(id + 1, id, spacing, time_s);
      }
      if (r + 1 < side) {
        links.emplace_back(id, id + side, spacing, time_s);
        links.emplace_back(id + side, id, spacing, time_s);
      }
    }
  return StreetNetwork::from_ids(std::move(nodes), links);
}

inline BaseNetworks base_from(StreetNetwork street, std::vector<FrtLine> lines = {}, double walk_mph = 2.8) {
  BaseNetworks b;
  b.auto_net = std::move(street);
  b.walk_net = b.auto_net.with_speed(walk_mph);
  b.lines = std::move(lines);
  return b;
}

inline FrtLine line(std::string id, std::vector<NodeId> stops, double headway, double duration, double length) {
  FrtLine l;
  l.route_id = std::move(id);
  l.headway_min = headway;
  l.duration_min = duration;
  l.length_mi = length;
  l.operating_hr = 19.0;
  l.directions.push_back(stops);
  std::reverse(stops.begin(), stops.end());
  l.directions.push_back(std::move(stops));
  return l;
}

}  // namespace fixflex::fixture
