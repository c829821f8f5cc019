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

#ifndef CHRONOLINK_TRAINER_SAMPLING_HPP_
#define CHRONOLINK_TRAINER_SAMPLING_HPP_

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "chronolink/clustering.hpp"
#include "chronolink/graph_builders.hpp"
#include "chronolink/trainer/loss.hpp"
#include "chronolink/util/status_macros.hpp"

namespace chronolink {

// Edges retained by pruning, labelled 1.
inline std::vector<LabeledEdge> PositiveEdges(const AffinityGraph& graph,
                                              double lambda) {
  std::vector<LabeledEdge> out;
  for (std::size_t e : PruneAndCluster(graph, lambda).retained_edges) {
    const WeightedEdge& edge = graph.edges()[e];
    const AffinityNode& s = graph.node(edge.source);
    out.push_back({s.kind, s.id, graph.node(edge.target).id, 1});
  }
  return out;
}

// The floor(k/2) highest-affinity non-gold entities and floor(k/2)
// highest-affinity non-coreferent mentions among `mention_pool`, as edges
// into `mention` labelled 0. Entity affinities use cached representations.
inline absl::StatusOr<std::vector<LabeledEdge>> NegativeEdges(
    const std::string& mention, const std::string& gold_entity,
    const std::set<std::string>& coref_set,
    const std::vector<std::string>& mention_pool, const ClusterState& state,
    const ParameterSet& params, int k) {
  if (k < 2) return absl::InvalidArgumentError("k must be >= 2");
  const std::size_t half = static_cast<std::size_t>(k / 2);
  ASSIGN_OR_RETURN(const EmbeddingVector* v, params.Lookup(NodeKind::kMention, mention));

  std::vector<ScoredId> entities;
  for (const auto& [entity, cluster] : state.clusters()) {
    if (entity == gold_entity) continue;
    ASSIGN_OR_RETURN(double phi, AffinityEntityMention(cluster.cached_rep, *v));
    entities.push_back({entity, phi});
  }
  TopK(entities, half);

  std::vector<ScoredId> mentions;
  for (const std::string& other : mention_pool) {
    if (other == mention || coref_set.count(other)) continue;
    ASSIGN_OR_RETURN(const EmbeddingVector* w, params.Lookup(NodeKind::kMention, other));
    ASSIGN_OR_RETURN(double psi, AffinityMentionMention(*w, *v));
    mentions.push_back({other, psi});
  }
  TopK(mentions, half);

  std::vector<LabeledEdge> out;
  for (const ScoredId& s : entities) out.push_back({NodeKind::kEntity, s.id, mention, 0});
  for (const ScoredId& s : mentions) out.push_back({NodeKind::kMention, s.id, mention, 0});
  return out;
}

}  // namespace chronolink

#endif  // CHRONOLINK_TRAINER_SAMPLING_HPP_
