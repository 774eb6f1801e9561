#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "fixflex/common.hpp"

namespace fixflex {

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

struct ShortestPathTree {
  std::size_t source = kNoIndex;
  std::vector<double> dist;
  std::vector<std::size_t> pred_node;
  std::vector<std::size_t> pred_edge;

  bool reached(std::size_t v) const { return dist[v] < kInf; }

  // Edge indices from source to `target`, in travel order. Empty when
  // unreachable or target == source.
  std::vector<std::size_t> edges_to(std::size_t target) const {
    std::vector<std::size_t> out;
    if (!reached(target)) return out;
    for (std::size_t v = target; v != source; v = pred_node[v]) out.push_back(pred_edge[v]);
    return {out.rbegin(), out.rend()};
  }
};

// Label-setting search with a binary heap. `for_each_out(u, relax)` must call
// relax(v, edge_index, weight) for every usable out-edge of u; weights must
// be non-negative. Ties on distance settle the lower node index first, and a
// label is only replaced by a strictly smaller one, so trees are
// reproducible. Nodes beyond `bound` are left unsettled.
template <class ForEachOut>
ShortestPathTree dijkstra(std::size_t n, std::size_t source, ForEachOut&& for_each_out,
                          double bound = kInf) {
  ShortestPathTree tree;
  tree.source = source;
  tree.dist.assign(n, kInf);
  tree.pred_node.assign(n, kNoIndex);
  tree.pred_edge.assign(n, kNoIndex);
  std::vector<char> settled(n, 0);

  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  tree.dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [d, u] = heap.top();
    heap.pop();
    if (settled[u] || d > tree.dist[u]) continue;
    settled[u] = 1;
    for_each_out(u, [&](std::size_t v, std::size_t edge, double w) {
      const double nd = d + w;
      if (nd > bound || settled[v]) return;
      if (nd < tree.dist[v]) {
        tree.dist[v] = nd;
        tree.pred_node[v] = u;
        tree.pred_edge[v] = edge;
        heap.emplace(nd, v);
      }
    });
  }
  return tree;
}

}  // namespace fixflex
