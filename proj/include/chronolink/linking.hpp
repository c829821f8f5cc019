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

// Turning clusters into per-mention entity decisions and ranked candidates.

#ifndef CHRONOLINK_LINKING_HPP_
#define CHRONOLINK_LINKING_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/util/strings.hpp"
#include "chronolink/affinity.hpp"
#include "chronolink/clustering.hpp"
#include "chronolink/graph_builders.hpp"
#include "chronolink/util/status_macros.hpp"

namespace chronolink {

// Entities by descending phi against their cluster representation, ties by
// id, truncated to n.
inline absl::StatusOr<std::vector<ScoredId>> RankCandidates(
    const EmbeddingVector& mention_emb, const ClusterState& states,
    std::size_t n) {
  if (n < 1) return absl::InvalidArgumentError("n must be >= 1");
  std::vector<ScoredId> scored;
  scored.reserve(states.size());
  for (const auto& [entity, cluster] : states.clusters()) {
    ASSIGN_OR_RETURN(double phi,
                     AffinityEntityMention(cluster.cached_rep, mention_emb));
    scored.push_back({entity, phi});
  }
  TopK(scored, n);
  return scored;
}

struct LinkDecision {
  std::string entity;
  bool from_cluster = false;  // false: argmax fallback
};

// Mentions sharing a cluster with entity e link to e; mentions in
// entity-less clusters take the argmax-phi entity.
inline absl::StatusOr<std::map<std::string, LinkDecision>> ResolveSegment(
    const AffinityGraph& graph, const Partition& partition,
    const ClusterState& states, const EmbeddingStore& vectors,
    const std::vector<std::string>& mentions) {
  if (states.size() == 0) {
    return absl::FailedPreconditionError("empty entity catalog");
  }
  std::map<std::string, LinkDecision> out;
  for (const std::string& m : mentions) {
    auto node = graph.FindNode(NodeKind::kMention, m);
    if (node && *node < partition.cluster_of.size()) {
      const Cluster& c = partition.clusters[partition.cluster_of[*node]];
      if (c.entity) {
        out[m] = {graph.node(*c.entity).id, true};
        continue;
      }
    }
    ASSIGN_OR_RETURN(const EmbeddingVector* v,
                     vectors.Lookup(NodeKind::kMention, m));
    ASSIGN_OR_RETURN(std::vector<ScoredId> best, RankCandidates(*v, states, 1));
    out[m] = {best.front().id, false};
  }
  return out;
}

// Ranked list for evaluation: the resolved entity first, then the remaining
// candidates in RankCandidates order, n entries at most.
inline absl::StatusOr<std::vector<std::string>> RankedPrediction(
    const std::string& resolved, const EmbeddingVector& mention_emb,
    const ClusterState& states, std::size_t n) {
  ASSIGN_OR_RETURN(std::vector<ScoredId> ranking,
                   RankCandidates(mention_emb, states, n));
  std::vector<std::string> out{resolved};
  for (const ScoredId& s : ranking) {
    if (out.size() >= n) break;
    if (s.id != resolved) out.push_back(s.id);
  }
  return out;
}

}  // namespace chronolink

#endif  // CHRONOLINK_LINKING_HPP_
