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

// Directed affinity graphs over entity and mention nodes, and their
// partitions into entity-anchored clusters.

#ifndef CHRONOLINK_GRAPH_HPP_
#define CHRONOLINK_GRAPH_HPP_

#include <cmath>
#include <compare>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "chronolink/util/strings.hpp"
#include "chronolink/embedding.hpp"
#include "chronolink/util/jsonl.hpp"

namespace chronolink {

struct AffinityNode {
  NodeKind kind = NodeKind::kMention;
  std::string id;

  bool operator==(const AffinityNode&) const = default;
  auto operator<=>(const AffinityNode& o) const {
    return std::tie(id, kind) <=> std::tie(o.id, o.kind);
  }
};

// Edge weights are dissimilarities (negated affinities). Targets are always
// mentions.
struct WeightedEdge {
  std::size_t source = 0;
  std::size_t target = 0;
  double weight = 0.0;

  bool operator==(const WeightedEdge&) const = default;
};

class AffinityGraph {
 public:
  // Returns the index of the (kind, id) node, adding it when new.
  std::size_t AddNode(NodeKind kind, std::string_view id) {
    AffinityNode node{kind, std::string(id)};
    auto it = index_.find(node);
    if (it != index_.end()) return it->second;
    const std::size_t idx = nodes_.size();
    index_.emplace(node, idx);
    nodes_.push_back(std::move(node));
    return idx;
  }

  std::optional<std::size_t> FindNode(NodeKind kind, std::string_view id) const {
    auto it = index_.find(AffinityNode{kind, std::string(id)});
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  absl::Status AddEdge(std::size_t source, std::size_t target, double weight) {
    if (source >= nodes_.size() || target >= nodes_.size()) {
      return absl::OutOfRangeError("edge endpoint out of range");
    }
    if (source == target) {
      return absl::InvalidArgumentError(
          StrCat("self edge on ", nodes_[source].id));
    }
    if (nodes_[target].kind != NodeKind::kMention) {
      return absl::InvalidArgumentError(
          StrCat("edge target ", nodes_[target].id, " is not a mention"));
    }
    if (!std::isfinite(weight)) {
      return absl::InvalidArgumentError("non-finite edge weight");
    }
    if (!edge_keys_.emplace(source, target).second) {
      return absl::AlreadyExistsError(
          StrCat("duplicate edge ", nodes_[source].id, " -> ",
                       nodes_[target].id));
    }
    edges_.push_back({source, target, weight});
    return absl::OkStatus();
  }

  bool HasEdge(std::size_t source, std::size_t target) const {
    return edge_keys_.count({source, target}) > 0;
  }

  const std::vector<AffinityNode>& nodes() const { return nodes_; }
  const std::vector<WeightedEdge>& edges() const { return edges_; }
  const AffinityNode& node(std::size_t i) const { return nodes_[i]; }
  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  double lambda() const { return lambda_; }
  void set_lambda(double lambda) { lambda_ = lambda; }

  // One edge per line: "source_id\ttarget_id\tweight".
  std::string DumpEdges() const {
    std::ostringstream out;
    out.precision(17);
    for (const WeightedEdge& e : edges_) {
      out << nodes_[e.source].id << '\t' << nodes_[e.target].id << '\t'
          << e.weight << '\n';
    }
    return out.str();
  }

 private:
  std::vector<AffinityNode> nodes_;
  std::map<AffinityNode, std::size_t> index_;
  std::vector<WeightedEdge> edges_;
  std::set<std::pair<std::size_t, std::size_t>> edge_keys_;
  double lambda_ = std::numeric_limits<double>::infinity();
};

struct Cluster {
  std::optional<std::size_t> entity;  // node index of the anchoring entity
  std::vector<std::size_t> nodes;     // ascending node indices
};

// Disjoint clusters covering every node, ordered by smallest member index.
struct Partition {
  std::vector<Cluster> clusters;
  std::vector<std::size_t> cluster_of;  // node index -> cluster index

  // Clusters as sets of (kind, id), for comparisons across graphs.
  std::set<std::set<AffinityNode>> AsNodeSets(const AffinityGraph& graph) const {
    std::set<std::set<AffinityNode>> out;
    for (const Cluster& c : clusters) {
      std::set<AffinityNode> members;
      for (std::size_t n : c.nodes) members.insert(graph.node(n));
      out.insert(std::move(members));
    }
    return out;
  }

  // {"<cluster_index>": {"entity": id|null, "mentions": [ids]}}
  Json ToJson(const AffinityGraph& graph) const {
    Json out = Json::object();
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      Json mentions = Json::array();
      for (std::size_t n : clusters[i].nodes) {
        if (graph.node(n).kind == NodeKind::kMention) {
          mentions.push_back(graph.node(n).id);
        }
      }
      out[std::to_string(i)] = {
          {"entity", clusters[i].entity ? Json(graph.node(*clusters[i].entity).id)
                                        : Json(nullptr)},
          {"mentions", mentions}};
    }
    return out;
  }
};

}  // namespace chronolink

#endif  // CHRONOLINK_GRAPH_HPP_
