// Copyright 2026 The Chronolink Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Greedy constrained pruning of an affinity graph into clusters.
//
// A cluster must (1) hold at most one entity, (2) only use edges whose weight
// is at most lambda and (3) be connected. Edges above lambda are dropped
// first. The remaining edges are visited from most to least dissimilar:
//
//   * an edge whose source component (undirected, current edge set) holds
//     more than one entity is removed;
//   * otherwise, if that component holds an entity and the target is still
//     reachable from an entity along directed edges without this edge, the
//     edge is removed as redundant;
//   * otherwise it is kept.
//
// Clusters are the connected components of the kept edges. Equal weights are
// visited in (source id, target id) order.

#ifndef CHRONOLINK_CLUSTERING_HPP_
#define CHRONOLINK_CLUSTERING_HPP_

#include <algorithm>
#include <cstddef>
#include <deque>
#include <numeric>
#include <string>
#include <vector>

#include "chronolink/graph.hpp"

namespace chronolink {

struct PruneResult {
  Partition partition;
  std::vector<std::size_t> retained_edges;  // ascending edge indices
  // Mentions left in a cluster without an entity; linked by fallback.
  std::vector<std::size_t> entityless_mentions;
};

namespace internal {

class EdgeView {
 public:
  explicit EdgeView(const AffinityGraph& graph)
      : graph_(graph),
        alive_(graph.num_edges(), false),
        out_(graph.num_nodes()),
        adj_(graph.num_nodes()) {
    for (std::size_t e = 0; e < graph.num_edges(); ++e) {
      const WeightedEdge& edge = graph.edges()[e];
      out_[edge.source].push_back(e);
      adj_[edge.source].push_back(e);
      adj_[edge.target].push_back(e);
    }
  }

  void set_alive(std::size_t e, bool alive) { alive_[e] = alive; }
  bool alive(std::size_t e) const { return alive_[e]; }

  // Nodes of the undirected component containing `start`.
  std::vector<std::size_t> Component(std::size_t start) const {
    std::vector<bool> seen(graph_.num_nodes(), false);
    std::vector<std::size_t> members{start};
    seen[start] = true;
    for (std::size_t head = 0; head < members.size(); ++head) {
      const std::size_t u = members[head];
      for (std::size_t e : adj_[u]) {
        if (!alive_[e]) continue;
        const WeightedEdge& edge = graph_.edges()[e];
        const std::size_t w = edge.source == u ? edge.target : edge.source;
        if (!seen[w]) {
          seen[w] = true;
          members.push_back(w);
        }
      }
    }
    return members;
  }

  // True when `target` is reachable from any of `sources` along live directed
  // edges, skipping edge `skip`.
  bool Reachable(const std::vector<std::size_t>& sources, std::size_t target,
                 std::size_t skip) const {
    std::vector<bool> seen(graph_.num_nodes(), false);
    std::deque<std::size_t> queue;
    for (std::size_t s : sources) {
      if (s == target) return true;
      seen[s] = true;
      queue.push_back(s);
    }
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t e : out_[u]) {
        if (e == skip || !alive_[e]) continue;
        const std::size_t w = graph_.edges()[e].target;
        if (w == target) return true;
        if (!seen[w]) {
          seen[w] = true;
          queue.push_back(w);
        }
      }
    }
    return false;
  }

 private:
  const AffinityGraph& graph_;
  std::vector<bool> alive_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> adj_;
};

inline Partition ComponentsOf(const AffinityGraph& graph, const EdgeView& view) {
  Partition partition;
  constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
  partition.cluster_of.assign(graph.num_nodes(), kUnset);
  for (std::size_t n = 0; n < graph.num_nodes(); ++n) {
    if (partition.cluster_of[n] != kUnset) continue;
    Cluster cluster;
    cluster.nodes = view.Component(n);
    std::sort(cluster.nodes.begin(), cluster.nodes.end());
    for (std::size_t m : cluster.nodes) {
      partition.cluster_of[m] = partition.clusters.size();
      if (graph.node(m).kind == NodeKind::kEntity && !cluster.entity) {
        cluster.entity = m;
      }
    }
    partition.clusters.push_back(std::move(cluster));
  }
  return partition;
}

}  // namespace internal

// Visit order: weight descending, then (source id, target id) ascending.
inline std::vector<std::size_t> PruneOrder(const AffinityGraph& graph,
                                           const std::vector<std::size_t>& edges) {
  std::vector<std::size_t> order = edges;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const WeightedEdge& ea = graph.edges()[a];
    const WeightedEdge& eb = graph.edges()[b];
    if (ea.weight != eb.weight) return ea.weight > eb.weight;
    const AffinityNode& sa = graph.node(ea.source);
    const AffinityNode& sb = graph.node(eb.source);
    if (sa != sb) return sa < sb;
    return graph.node(ea.target) < graph.node(eb.target);
  });
  return order;
}

inline PruneResult PruneAndCluster(const AffinityGraph& graph, double lambda) {
  internal::EdgeView view(graph);
  std::vector<std::size_t> candidates;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    if (graph.edges()[e].weight <= lambda) {
      view.set_alive(e, true);
      candidates.push_back(e);
    }
  }

  for (std::size_t e : PruneOrder(graph, candidates)) {
    const WeightedEdge& edge = graph.edges()[e];
    const std::vector<std::size_t> component = view.Component(edge.source);
    std::vector<std::size_t> entities;
    for (std::size_t n : component) {
      if (graph.node(n).kind == NodeKind::kEntity) entities.push_back(n);
    }
    if (entities.size() > 1) {
      view.set_alive(e, false);
      continue;
    }
    if (entities.size() == 1 && view.Reachable(entities, edge.target, e)) {
      view.set_alive(e, false);
    }
  }

  PruneResult result;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    if (view.alive(e)) result.retained_edges.push_back(e);
  }
  result.partition = internal::ComponentsOf(graph, view);
  for (const Cluster& c : result.partition.clusters) {
    if (c.entity) continue;
    for (std::size_t n : c.nodes) {
      if (graph.node(n).kind == NodeKind::kMention) {
        result.entityless_mentions.push_back(n);
      }
    }
  }
  std::sort(result.entityless_mentions.begin(), result.entityless_mentions.end());
  return result;
}

}  // namespace chronolink

#endif  // CHRONOLINK_CLUSTERING_HPP_
