#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fixflex/common.hpp"
#include "fixflex/config.hpp"
#include "fixflex/csv.hpp"
#include "fixflex/dijkstra.hpp"

namespace fixflex {

// ---------------------------------------------------------------------------
// Street network
// ---------------------------------------------------------------------------

struct Node {
  NodeId id = 0;
  double x = 0.0;
  double y = 0.0;
  int zone_id = 0;
  double jobs = 0.0;
};

struct StreetLink {
  std::size_t from = 0;  // node index
  std::size_t to = 0;
  double length_mi = 0.0;
  double time_s = 0.0;
};

// Directed street graph with dense node indices. Nodes are kept sorted by id.
class StreetNetwork {
 public:
  StreetNetwork() = default;

  StreetNetwork(std::vector<Node> nodes, std::vector<StreetLink> links)
      : nodes_(std::move(nodes)), links_(std::move(links)) {
    index();
  }

  // Builds from id-addressed links. Throws ValidationError on duplicate node
  // ids, dangling references or negative attributes.
  static StreetNetwork from_ids(std::vector<Node> nodes,
                                const std::vector<std::tuple<NodeId, NodeId, double, double>>& links) {
    std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < nodes.size(); ++i)
      if (nodes[i].id == nodes[i - 1].id)
        throw ValidationError("duplicate node id " + std::to_string(nodes[i].id));
    for (const auto& n : nodes)
      if (n.jobs < 0.0) throw ValidationError("node " + std::to_string(n.id) + " has negative jobs");
    StreetNetwork net;
    net.nodes_ = std::move(nodes);
    net.rebuild_lookup();
    for (const auto& [from, to, len, t] : links) {
      auto f = net.index_of(from);
      auto g = net.index_of(to);
      if (!f || !g)
        throw ValidationError("link " + std::to_string(from) + "->" + std::to_string(to) +
                              " references unknown node " + std::to_string(!f ? from : to));
      if (len < 0.0 || t < 0.0)
        throw ValidationError("link " + std::to_string(from) + "->" + std::to_string(to) +
                              " has negative length or time");
      net.links_.push_back({*f, *g, len, t});
    }
    net.index();
    return net;
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<StreetLink>& links() const noexcept { return links_; }
  const StreetLink& link(std::size_t e) const { return links_.at(e); }

  std::optional<std::size_t> index_of(NodeId id) const {
    auto it = lookup_.find(id);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t require_index(NodeId id) const {
    auto i = index_of(id);
    if (!i) throw ValidationError("unknown node id " + std::to_string(id));
    return *i;
  }

  std::span<const std::size_t> out_links(std::size_t u) const {
    return {out_.data() + offsets_[u], out_.data() + offsets_[u + 1]};
  }

  // Copy of this network with every link time recomputed from its length.
  StreetNetwork with_speed(double mph) const {
    StreetNetwork net = *this;
    for (auto& l : net.links_) l.time_s = l.length_mi / mph * kSecondsPerHour;
    return net;
  }

  void set_zones(const std::map<NodeId, int>& zones) {
    for (auto& n : nodes_) {
      auto it = zones.find(n.id);
      if (it == zones.end()) throw ValidationError("node " + std::to_string(n.id) + " missing from zone map");
      n.zone_id = it->second;
    }
  }

  template <class Weight>
  ShortestPathTree shortest_paths(std::size_t source, Weight&& weight, double bound = kInf) const {
    return dijkstra(size(), source,
                    [&](std::size_t u, auto&& relax) {
                      for (std::size_t e : out_links(u)) relax(links_[e].to, e, weight(links_[e]));
                    },
                    bound);
  }

 private:
  void rebuild_lookup() {
    lookup_.clear();
    for (std::size_t i = 0; i < nodes_.size(); ++i) lookup_.emplace(nodes_[i].id, i);
  }

  void index() {
    rebuild_lookup();
    offsets_.assign(nodes_.size() + 1, 0);
    for (const auto& l : links_) ++offsets_[l.from + 1];
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    out_.assign(links_.size(), 0);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t e = 0; e < links_.size(); ++e) out_[fill[links_[e].from]++] = e;
  }

  std::vector<Node> nodes_;
  std::vector<StreetLink> links_;
  std::unordered_map<NodeId, std::size_t> lookup_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> out_;
};

// ---------------------------------------------------------------------------
// Fixed-route lines
// ---------------------------------------------------------------------------

struct FrtLine {
  std::string route_id;
  double headway_min = 0.0;
  double duration_min = 0.0;  // one direction, end to end
  double length_mi = 0.0;     // one direction
  double operating_hr = 0.0;
  std::vector<std::vector<NodeId>> directions;  // ordered stops per direction

  void validate() const {
    if (!(headway_min > 0.0 && duration_min > 0.0 && length_mi > 0.0 && operating_hr > 0.0))
      throw ValidationError("line " + route_id + ": headway, duration, length and operating hours must be > 0");
    for (const auto& d : directions)
      if (d.size() < 2) throw ValidationError("line " + route_id + ": a direction needs at least two stops");
  }
};

struct BaseNetworks {
  StreetNetwork auto_net;
  StreetNetwork walk_net;
  std::vector<FrtLine> lines;
};

namespace detail {

inline std::vector<FrtLine> read_frt_lines(const std::filesystem::path& file) {
  auto table = csv::Table::read(file);
  if (table.empty_file()) return {};
  table.require_header({"route_id", "direction", "stop_seq", "node_id", "headway_min", "duration_min",
                        "length_mi", "operating_hr"});
  struct StopRow {
    std::int64_t seq;
    NodeId node;
  };
  std::map<std::string, FrtLine> lines;
  std::map<std::string, std::map<std::int64_t, std::vector<StopRow>>> stops;
  for (const auto& row : table.rows()) {
    const std::string& rid = row.fields[0];
    if (rid.empty()) throw ParseError(table.file(), row.line, "empty route_id");
    FrtLine attrs;
    attrs.route_id = rid;
    attrs.headway_min = table.real(row, 4);
    attrs.duration_min = table.real(row, 5);
    attrs.length_mi = table.real(row, 6);
    attrs.operating_hr = table.real(row, 7);
    auto [it, inserted] = lines.emplace(rid, attrs);
    if (!inserted) {
      const auto& l = it->second;
      if (l.headway_min != attrs.headway_min || l.duration_min != attrs.duration_min ||
          l.length_mi != attrs.length_mi || l.operating_hr != attrs.operating_hr)
        throw ParseError(table.file(), row.line, "line attributes differ between rows of route " + rid);
    }
    stops[rid][table.integer(row, 1)].push_back({table.integer(row, 2), table.integer(row, 3)});
  }
  std::vector<FrtLine> out;
  for (auto& [rid, line] : lines) {
    for (auto& [dir, rows] : stops[rid]) {
      std::sort(rows.begin(), rows.end(), [](const StopRow& a, const StopRow& b) { return a.seq < b.seq; });
      std::vector<NodeId> seq;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].seq == rows[i - 1].seq)
          throw ValidationError("line " + rid + ": duplicate stop_seq " + std::to_string(rows[i].seq));
        seq.push_back(rows[i].node);
      }
      line.directions.push_back(std::move(seq));
    }
    line.validate();
    out.push_back(std::move(line));
  }
  return out;
}

}  // namespace detail

// Reads the node/land-use file (node_id,x,y,jobs), the street link file
// (from,to,length_mi,auto_time_s) and the FRT line file. The walk network
// shares the street topology with times derived from walk_speed_mph.
inline BaseNetworks load_networks(const std::filesystem::path& street_file, const std::filesystem::path& frt_file,
                                  const std::filesystem::path& land_use_file, double walk_speed_mph = 2.8) {
  auto node_table = csv::Table::read(land_use_file);
  std::vector<Node> nodes;
  if (!node_table.empty_file()) {
    node_table.require_header({"node_id", "x", "y", "jobs"});
    for (const auto& row : node_table.rows()) {
      Node n;
      n.id = node_table.integer(row, 0);
      n.x = node_table.real(row, 1);
      n.y = node_table.real(row, 2);
      n.jobs = node_table.real(row, 3);
      if (n.jobs < 0.0) throw ParseError(node_table.file(), row.line, "negative jobs");
      nodes.push_back(n);
    }
  }
  auto link_table = csv::Table::read(street_file);
  std::vector<std::tuple<NodeId, NodeId, double, double>> links;
  if (!link_table.empty_file()) {
    link_table.require_header({"from", "to", "length_mi", "auto_time_s"});
    for (const auto& row : link_table.rows()) {
      const double len = link_table.real(row, 2);
      const double t = link_table.real(row, 3);
      if (len < 0.0 || t < 0.0) throw ParseError(link_table.file(), row.line, "negative length or time");
      links.emplace_back(link_table.integer(row, 0), link_table.integer(row, 1), len, t);
    }
  }
  BaseNetworks base;
  base.auto_net = StreetNetwork::from_ids(std::move(nodes), links);
  base.walk_net = base.auto_net.with_speed(walk_speed_mph);
  base.lines = detail::read_frt_lines(frt_file);
  for (const auto& line : base.lines)
    for (const auto& dir : line.directions)
      for (NodeId s : dir)
        if (!base.auto_net.index_of(s))
          throw ValidationError("line " + line.route_id + " references unknown node " + std::to_string(s));
  return base;
}

inline std::map<NodeId, int> load_zone_map(const std::filesystem::path& file) {
  auto table = csv::Table::read(file);
  std::map<NodeId, int> zones;
  if (table.empty_file()) return zones;
  table.require_header({"node_id", "zone_id"});
  for (const auto& row : table.rows()) {
    auto [it, inserted] = zones.emplace(table.integer(row, 0), static_cast<int>(table.integer(row, 1)));
    if (!inserted) throw ParseError(table.file(), row.line, "duplicate node_id");
  }
  return zones;
}

// ---------------------------------------------------------------------------
// Supernetwork
// ---------------------------------------------------------------------------

enum class Layer : std::uint8_t { Walk = 0, Frt = 1, Micro = 2 };

enum class LinkType : std::uint8_t { Walk = 0, FrtRide = 1, FrtWait = 2, FrtTransfer = 3, MicroRide = 4, MicroWait = 5 };

inline const char* to_string(LinkType t) {
  switch (t) {
    case LinkType::Walk: return "walk";
    case LinkType::FrtRide: return "frt_ride";
    case LinkType::FrtWait: return "frt_wait";
    case LinkType::FrtTransfer: return "frt_transfer";
    case LinkType::MicroRide: return "micro_ride";
    case LinkType::MicroWait: return "micro_wait";
  }
  return "?";
}

inline bool is_micro(LinkType t) { return t == LinkType::MicroRide || t == LinkType::MicroWait; }
inline bool is_frt(LinkType t) {
  return t == LinkType::FrtRide || t == LinkType::FrtWait || t == LinkType::FrtTransfer;
}

struct SuperNode {
  Layer layer = Layer::Walk;
  std::size_t street = 0;  // index of the underlying street node
  int route = -1;          // FRT nodes: index into Supernetwork::lines()
};

struct SuperLink {
  std::size_t from = 0;
  std::size_t to = 0;
  double length_mi = 0.0;
  double time_s = 0.0;
  LinkType type = LinkType::Walk;
  int route = -1;         // FRT ride/wait links
  bool boarding = false;  // wait links: walk -> service direction
  double base_time_s = 0.0;  // MicroRide: undelayed auto time
};

// Level of service currently broadcast onto the microtransit layer.
struct MicroService {
  double mean_wait_s = 0.0;
  double detour_ratio = 1.0;
  std::vector<double> period_wait_s;                   // per operating period
  std::map<int, std::vector<double>> zone_period_wait_s;  // optional per-zone override
  bool operator==(const MicroService&) const = default;
};

// Layered walk / FRT / microtransit graph. Node indices: walk copies of the
// street nodes first, then micro copies, then one FRT node per (route, stop).
class Supernetwork {
 public:
  std::size_t street_size() const noexcept { return street_->size(); }
  const StreetNetwork& street() const noexcept { return *street_; }
  const StreetNetwork& auto_network() const noexcept { return *street_; }

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<SuperNode>& nodes() const noexcept { return nodes_; }
  const SuperNode& node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<SuperLink>& links() const noexcept { return links_; }
  const SuperLink& link(std::size_t e) const { return links_.at(e); }
  std::span<const std::size_t> out_links(std::size_t u) const {
    return {out_.data() + offsets_[u], out_.data() + offsets_[u + 1]};
  }

  std::size_t walk_node(std::size_t street_index) const noexcept { return street_index; }
  std::size_t micro_node(std::size_t street_index) const noexcept { return street_size() + street_index; }
  Layer layer_of(std::size_t i) const { return nodes_.at(i).layer; }

  const std::vector<FrtLine>& lines() const noexcept { return lines_; }
  const std::vector<OperatingPeriod>& periods() const noexcept { return periods_; }
  const std::vector<std::size_t>& virtual_stops() const noexcept { return virtual_stops_; }
  bool is_virtual_stop(std::size_t street_index) const {
    return std::binary_search(virtual_stops_.begin(), virtual_stops_.end(), micro_node(street_index));
  }

  bool micro_layer() const noexcept { return micro_layer_; }
  // True when vehicles exist to serve the microtransit layer.
  bool micro_service() const noexcept { return micro_service_; }
  const MicroService& service() const noexcept { return service_; }

  bool partitioned() const noexcept { return !partition_.empty(); }
  int partition_zone(std::size_t street_index) const {
    return partition_.empty() ? 0 : partition_.at(street_index);
  }

  std::optional<std::size_t> period_index(double clock_s) const {
    for (std::size_t p = 0; p < periods_.size(); ++p)
      if (periods_[p].contains(clock_s)) return p;
    return std::nullopt;
  }

  bool micro_available_at(double clock_s) const { return micro_service_ && period_index(clock_s).has_value(); }

  // Travel time of a link as experienced by someone departing in `period`.
  // Only microtransit boarding waits vary by period (and optionally zone).
  double link_time(std::size_t e, std::optional<std::size_t> period) const {
    const SuperLink& l = links_[e];
    if (l.type != LinkType::MicroWait || !l.boarding || !period) return l.time_s;
    if (!service_.zone_period_wait_s.empty()) {
      auto it = service_.zone_period_wait_s.find(partition_zone(nodes_[l.from].street));
      if (it != service_.zone_period_wait_s.end() && *period < it->second.size()) return it->second[*period];
    }
    if (*period < service_.period_wait_s.size()) return service_.period_wait_s[*period];
    return l.time_s;
  }

  // New value with microtransit waits and ride times replaced.
  Supernetwork with_service(MicroService svc) const {
    Supernetwork out = *this;
    for (auto& l : out.links_) {
      if (l.type == LinkType::MicroWait && l.boarding) l.time_s = svc.mean_wait_s;
      if (l.type == LinkType::MicroRide) l.time_s = l.base_time_s * svc.detour_ratio;
    }
    out.service_ = std::move(svc);
    return out;
  }

  // Table-5 style dump: from,to,length_mi,time_s,link_type,route_id.
  void write_csv(std::ostream& os) const {
    os << "from,to,length_mi,time_s,link_type,route_id\n";
    for (const auto& l : links_) {
      os << l.from << ',' << l.to << ',' << format_double(l.length_mi) << ',' << format_double(l.time_s) << ','
         << static_cast<int>(l.type) << ',' << (l.route >= 0 ? lines_[l.route].route_id : std::string()) << '\n';
    }
  }

 private:
  friend Supernetwork build_supernetwork(const BaseNetworks&, const ScenarioConfig&, double, double);
  friend Supernetwork apply_zonal_partition(const Supernetwork&, const std::map<NodeId, int>&);

  void index() {
    offsets_.assign(nodes_.size() + 1, 0);
    for (const auto& l : links_) ++offsets_[l.from + 1];
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    out_.assign(links_.size(), 0);
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t e = 0; e < links_.size(); ++e) out_[fill[links_[e].from]++] = e;
  }

  std::shared_ptr<const StreetNetwork> street_;
  std::vector<SuperNode> nodes_;
  std::vector<SuperLink> links_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> out_;
  std::vector<FrtLine> lines_;
  std::vector<OperatingPeriod> periods_;
  std::vector<std::size_t> virtual_stops_;
  std::vector<int> partition_;
  MicroService service_;
  bool micro_layer_ = false;
  bool micro_service_ = false;
};

namespace detail {

// Uniform sample of k distinct indices from [0, n), returned sorted.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  k = std::min(k, n);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.index(n - i)]);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace detail

// Assembles the walk, FRT and microtransit layers for one scenario. FRT
// boarding waits are half the headway; microtransit boarding waits are
// `mean_wait_s`; microtransit ride times are auto times scaled by
// `detour_ratio`.
inline Supernetwork build_supernetwork(const BaseNetworks& base, const ScenarioConfig& scenario, double detour_ratio,
                                       double mean_wait_s) {
  if (!(scenario.virtual_stop_coverage >= 0.0 && scenario.virtual_stop_coverage <= 1.0))
    throw ConfigError("virtual_stop_coverage must lie in [0, 1]");
  if (!(detour_ratio >= 1.0)) throw ConfigError("detour_ratio must be >= 1");
  if (!(mean_wait_s >= 0.0)) throw ConfigError("mean_wait must be >= 0");

  const StreetNetwork& street = base.auto_net;
  const std::size_t n = street.size();
  Supernetwork sn;
  sn.street_ = std::make_shared<const StreetNetwork>(street);
  sn.periods_ = scenario.operating_periods;

  for (std::size_t i = 0; i < n; ++i) sn.nodes_.push_back({Layer::Walk, i, -1});
  for (std::size_t i = 0; i < n; ++i) sn.nodes_.push_back({Layer::Micro, i, -1});

  // Walk layer.
  for (std::size_t e = 0; e < base.walk_net.links().size(); ++e) {
    const auto& l = base.walk_net.link(e);
    sn.links_.push_back({l.from, l.to, l.length_mi, l.time_s, LinkType::Walk, -1, false, l.time_s});
  }

  // FRT layer.
  if (scenario.has_frt()) {
    sn.lines_ = base.lines;
    if (scenario.headway_min)
      for (auto& line : sn.lines_) line.headway_min = *scenario.headway_min;
    for (auto& line : sn.lines_) line.operating_hr = scenario.costs.frt_operating_hr;
    std::sort(sn.lines_.begin(), sn.lines_.end(),
              [](const FrtLine& a, const FrtLine& b) { return a.route_id < b.route_id; });
    std::map<std::pair<int, std::size_t>, std::size_t> frt_node;
    auto stop_node = [&](int route, std::size_t s) {
      auto [it, inserted] = frt_node.emplace(std::make_pair(route, s), sn.nodes_.size());
      if (inserted) sn.nodes_.push_back({Layer::Frt, s, route});
      return it->second;
    };
    for (int r = 0; r < static_cast<int>(sn.lines_.size()); ++r) {
      const FrtLine& line = sn.lines_[r];
      line.validate();
      for (const auto& dir : line.directions) {
        std::vector<double> seg;
        for (std::size_t k = 0; k + 1 < dir.size(); ++k) {
          const std::size_t a = street.require_index(dir[k]);
          const std::size_t b = street.require_index(dir[k + 1]);
          auto tree = street.shortest_paths(a, [](const StreetLink& l) { return l.length_mi; });
          if (!tree.reached(b))
            throw ValidationError("line " + line.route_id + ": stops " + std::to_string(dir[k]) + " and " +
                                  std::to_string(dir[k + 1]) + " are not connected in the street network");
          seg.push_back(tree.dist[b]);
        }
        const double total = std::accumulate(seg.begin(), seg.end(), 0.0);
        for (std::size_t k = 0; k < seg.size(); ++k) {
          const double share = total > 0.0 ? seg[k] / total : 1.0 / static_cast<double>(seg.size());
          const std::size_t a = stop_node(r, street.require_index(dir[k]));
          const std::size_t b = stop_node(r, street.require_index(dir[k + 1]));
          const double t = line.duration_min * kSecondsPerMinute * share;
          sn.links_.push_back({a, b, line.length_mi * share, t, LinkType::FrtRide, r, false, t});
        }
      }
    }
    // Boarding / alighting pairs, in node order.
    for (const auto& [key, fnode] : frt_node) {
      const auto [r, s] = key;
      const double wait = sn.lines_[r].headway_min * kSecondsPerMinute / 2.0;
      sn.links_.push_back({sn.walk_node(s), fnode, 0.0, wait, LinkType::FrtWait, r, true, wait});
      sn.links_.push_back({fnode, sn.walk_node(s), 0.0, 0.0, LinkType::FrtWait, r, false, 0.0});
    }
    // Transfers between co-located stops of distinct routes.
    const double radius = scenario.network.transfer_radius_m;
    const double penalty = scenario.network.transfer_penalty_s;
    for (const auto& [ka, a] : frt_node) {
      for (const auto& [kb, b] : frt_node) {
        if (ka.first == kb.first) continue;
        const Node& na = street.node(ka.second);
        const Node& nb = street.node(kb.second);
        const bool colocated = ka.second == kb.second || std::hypot(na.x - nb.x, na.y - nb.y) <= radius;
        if (colocated) sn.links_.push_back({a, b, 0.0, penalty, LinkType::FrtTransfer, -1, false, penalty});
      }
    }
  }

  // Microtransit layer.
  if (scenario.has_micro()) {
    sn.micro_layer_ = true;
    sn.micro_service_ = scenario.fleet_size > 0;
    for (const auto& l : street.links()) {
      sn.links_.push_back({sn.micro_node(l.from), sn.micro_node(l.to), l.length_mi, l.time_s * detour_ratio,
                           LinkType::MicroRide, -1, false, l.time_s});
    }
    const auto k = static_cast<std::size_t>(std::ceil(scenario.virtual_stop_coverage * static_cast<double>(n) - 1e-9));
    for (std::size_t s : detail::sample_indices(n, k, derive_seed(scenario.master_seed, "virtual_stops"))) {
      sn.virtual_stops_.push_back(sn.micro_node(s));
      sn.links_.push_back({sn.walk_node(s), sn.micro_node(s), 0.0, mean_wait_s, LinkType::MicroWait, -1, true, 0.0});
      sn.links_.push_back({sn.micro_node(s), sn.walk_node(s), 0.0, 0.0, LinkType::MicroWait, -1, false, 0.0});
    }
  }
  sn.service_.mean_wait_s = mean_wait_s;
  sn.service_.detour_ratio = detour_ratio;
  sn.service_.period_wait_s.assign(sn.periods_.size(), mean_wait_s);
  sn.index();
  return sn;
}

// Restricts microtransit rides to stay within one zone: every MicroRide link
// whose endpoints lie in different zones is removed. Other layers are kept.
inline Supernetwork apply_zonal_partition(const Supernetwork& supernet, const std::map<NodeId, int>& zone_map) {
  const StreetNetwork& street = supernet.street();
  std::vector<int> zone(street.size(), 0);
  for (std::size_t i = 0; i < street.size(); ++i) {
    auto it = zone_map.find(street.node(i).id);
    if (it == zone_map.end())
      throw ValidationError("node " + std::to_string(street.node(i).id) + " missing from zone map");
    zone[i] = it->second;
  }
  Supernetwork out = supernet;
  std::erase_if(out.links_, [&](const SuperLink& l) {
    return l.type == LinkType::MicroRide && zone[out.nodes_[l.from].street] != zone[out.nodes_[l.to].street];
  });
  out.partition_ = std::move(zone);
  out.index();
  return out;
}

}  // namespace fixflex
