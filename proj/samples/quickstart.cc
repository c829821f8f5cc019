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

// Links three mentions against two entities: builds the inference graph,
// prunes it into clusters and resolves each mention.

#include <iostream>
#include <limits>

#include "chronolink/affinity.hpp"
#include "chronolink/clustering.hpp"
#include "chronolink/graph_builders.hpp"
#include "chronolink/linking.hpp"

int main() {
  using namespace chronolink;
  EmbeddingStore store;
  const auto add = [&](NodeKind kind, const char* id,
                       std::initializer_list<double> v) {
    absl::Status s = store.Insert(kind, id, EmbeddingVector(v));
    if (!s.ok()) std::cerr << s << "\n";
  };
  add(NodeKind::kEntity, "Manchester_United", {1.0, 0.1});
  add(NodeKind::kEntity, "Manchester_City", {0.1, 1.0});
  add(NodeKind::kMention, "m1", {0.9, 0.2});   // "the Red Devils"
  add(NodeKind::kMention, "m2", {0.8, 0.3});   // "United"
  add(NodeKind::kMention, "m3", {0.2, 0.95});  // "the Citizens"
  store.Freeze();

  absl::StatusOr<ClusterState> state = ClusterState::Initialize(store, 0.8);
  if (!state.ok()) {
    std::cerr << state.status() << "\n";
    return 1;
  }
  const std::vector<std::string> mentions = {"m1", "m2", "m3"};
  absl::StatusOr<AffinityGraph> graph =
      BuildInferenceGraph(mentions, *state, store, /*k_ent=*/1, /*k_men=*/1);
  if (!graph.ok()) {
    std::cerr << graph.status() << "\n";
    return 1;
  }
  const PruneResult pruned =
      PruneAndCluster(*graph, std::numeric_limits<double>::infinity());
  std::cout << "clusters: " << pruned.partition.ToJson(*graph).dump() << "\n";
  absl::StatusOr<std::map<std::string, LinkDecision>> links = ResolveSegment(
      *graph, pruned.partition, *state, store, mentions);
  if (!links.ok()) {
    std::cerr << links.status() << "\n";
    return 1;
  }
  for (const auto& [mention, decision] : *links) {
    std::cout << mention << " -> " << decision.entity
              << (decision.from_cluster ? " (cluster)" : " (argmax)") << "\n";
  }
  return 0;
}
