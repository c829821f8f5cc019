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

// Builders for the two graph shapes: the gold-restricted training batch
// graph and the kNN inference graph over one segment.

#ifndef CHRONOLINK_GRAPH_BUILDERS_HPP_
#define CHRONOLINK_GRAPH_BUILDERS_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/util/strings.hpp"
#include "chronolink/affinity.hpp"
#include "chronolink/graph.hpp"
#include "chronolink/util/status_macros.hpp"

namespace chronolink {

inline constexpr std::size_t kDefaultEntityFanIn = 16;
inline constexpr std::size_t kDefaultMentionFanIn = 4;

namespace internal {

inline absl::StatusOr<const EmbeddingVector*> ClusterRep(
    const ClusterState& states, const std::string& entity) {
  const ClusterEntry* c = states.Find(entity);
  if (c == nullptr) {
    return absl::NotFoundError(
        StrCat("missing cluster representation for ", entity));
  }
  return &c->cached_rep;
}

}  // namespace internal

// For every gold entity e* of the batch with coreference set S: edges
// (e*, m) for m in S and (m_k, m_l) for distinct m_k, m_l in S.
inline absl::StatusOr<AffinityGraph> BuildBatchGraph(
    const std::vector<std::string>& batch_mentions,
    const std::map<std::string, std::string>& gold_links,
    const std::map<std::string, std::set<std::string>>& coref_sets,
    const ClusterState& states, const EmbeddingStore& vectors) {
  std::set<std::string> gold_entities;
  for (const std::string& m : batch_mentions) {
    auto it = gold_links.find(m);
    if (it == gold_links.end()) {
      return absl::FailedPreconditionError(
          StrCat("missing gold link for mention ", m));
    }
    auto coref = coref_sets.find(it->second);
    if (coref == coref_sets.end() || !coref->second.count(m)) {
      return absl::FailedPreconditionError(
          StrCat("coreference set of ", it->second,
                       " does not contain its gold mention ", m));
    }
    gold_entities.insert(it->second);
  }

  AffinityGraph graph;
  for (const std::string& entity : gold_entities) {
    ASSIGN_OR_RETURN(const EmbeddingVector* rep,
                     internal::ClusterRep(states, entity));
    const std::set<std::string>& coref = coref_sets.at(entity);
    std::vector<std::pair<std::size_t, const EmbeddingVector*>> members;
    const std::size_t e_node = graph.AddNode(NodeKind::kEntity, entity);
    for (const std::string& m : coref) {
      ASSIGN_OR_RETURN(const EmbeddingVector* v,
                       vectors.Lookup(NodeKind::kMention, m));
      members.emplace_back(graph.AddNode(NodeKind::kMention, m), v);
    }
    for (const auto& [node, v] : members) {
      ASSIGN_OR_RETURN(double phi, AffinityEntityMention(*rep, *v));
      RETURN_IF_ERROR(graph.AddEdge(e_node, node, EdgeWeight(phi)));
    }
    for (const auto& [a, va] : members) {
      for (const auto& [b, vb] : members) {
        if (a == b) continue;
        ASSIGN_OR_RETURN(double psi, AffinityMentionMention(*va, *vb));
        RETURN_IF_ERROR(graph.AddEdge(a, b, EdgeWeight(psi)));
      }
    }
  }
  return graph;
}

struct ScoredId {
  std::string id;
  double score = 0.0;

  bool operator==(const ScoredId&) const = default;
};

// Descending score, ascending id on ties.
inline void SortByScore(std::vector<ScoredId>& items) {
  std::sort(items.begin(), items.end(), [](const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
}

inline void TopK(std::vector<ScoredId>& items, std::size_t k) {
  if (items.size() > k) {
    std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(k),
                      items.end(), [](const ScoredId& a, const ScoredId& b) {
                        if (a.score != b.score) return a.score > b.score;
                        return a.id < b.id;
                      });
    items.resize(k);
  } else {
    SortByScore(items);
  }
}

// Each mention receives edges from its k_ent best entity clusters and its
// k_men nearest mentions of the same segment.
inline absl::StatusOr<AffinityGraph> BuildInferenceGraph(
    const std::vector<std::string>& segment_mentions, const ClusterState& states,
    const EmbeddingStore& vectors, std::size_t k_ent = kDefaultEntityFanIn,
    std::size_t k_men = kDefaultMentionFanIn) {
  if (k_ent < 1) return absl::InvalidArgumentError("k_ent must be >= 1");
  if (states.size() == 0) return absl::FailedPreconditionError("no entities");

  std::vector<const EmbeddingVector*> mention_vecs;
  mention_vecs.reserve(segment_mentions.size());
  for (const std::string& m : segment_mentions) {
    ASSIGN_OR_RETURN(const EmbeddingVector* v,
                     vectors.Lookup(NodeKind::kMention, m));
    mention_vecs.push_back(v);
  }

  AffinityGraph graph;
  std::vector<std::size_t> mention_nodes;
  for (const std::string& m : segment_mentions) {
    mention_nodes.push_back(graph.AddNode(NodeKind::kMention, m));
  }
  for (std::size_t i = 0; i < segment_mentions.size(); ++i) {
    const EmbeddingVector& v = *mention_vecs[i];
    std::vector<ScoredId> entities;
    entities.reserve(states.size());
    for (const auto& [entity, cluster] : states.clusters()) {
      ASSIGN_OR_RETURN(double phi, AffinityEntityMention(cluster.cached_rep, v));
      entities.push_back({entity, phi});
    }
    TopK(entities, k_ent);
    for (const ScoredId& s : entities) {
      RETURN_IF_ERROR(graph.AddEdge(graph.AddNode(NodeKind::kEntity, s.id),
                                    mention_nodes[i], EdgeWeight(s.score)));
    }
    if (k_men == 0) continue;
    std::vector<ScoredId> neighbours;
    std::map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < segment_mentions.size(); ++j) {
      if (j == i) continue;
      ASSIGN_OR_RETURN(double psi, AffinityMentionMention(*mention_vecs[j], v));
      neighbours.push_back({segment_mentions[j], psi});
      index[segment_mentions[j]] = j;
    }
    TopK(neighbours, k_men);
    for (const ScoredId& s : neighbours) {
      RETURN_IF_ERROR(graph.AddEdge(mention_nodes[index[s.id]], mention_nodes[i],
                                    EdgeWeight(s.score)));
    }
  }
  return graph;
}

}  // namespace chronolink

#endif  // CHRONOLINK_GRAPH_BUILDERS_HPP_
