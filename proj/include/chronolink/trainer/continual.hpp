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

// Timeline loop: train segments fit parameters and then adopt gold
// memberships; test segments link through the inference graph and adopt the
// predicted memberships.

#ifndef CHRONOLINK_TRAINER_CONTINUAL_HPP_
#define CHRONOLINK_TRAINER_CONTINUAL_HPP_

#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "chronolink/clustering.hpp"
#include "chronolink/graph_builders.hpp"
#include "chronolink/linking.hpp"
#include "chronolink/records.hpp"
#include "chronolink/trainer/trainer.hpp"
#include "chronolink/util/jsonl.hpp"
#include "chronolink/util/sha256.hpp"
#include "chronolink/util/status_macros.hpp"

namespace chronolink {

struct SegmentOutcome {
  TimeSegment segment;
  std::string state_digest;  // ClusterState entering the segment
  std::optional<TrainStats> training;
  std::map<std::string, LinkDecision> decisions;         // test segments
  std::map<std::string, std::vector<std::string>> ranked;  // test segments
};

struct ContinualResult {
  std::vector<SegmentOutcome> segments;
  ClusterState final_state;
  ParameterSet params;
};

inline std::string StateDigest(const ClusterState& state) {
  std::string buf;
  char num[32];
  for (const auto& [entity, c] : state.clusters()) {
    buf += entity;
    buf += '|';
    for (const std::string& m : c.sampled) {
      buf += m;
      buf += ',';
    }
    buf += '|';
    for (double x : c.cached_rep.values()) {
      std::snprintf(num, sizeof(num), "%.17g,", x);
      buf += num;
    }
    buf += '\n';
  }
  return Sha256Hex(buf);
}

inline absl::Status WriteCheckpoint(const std::string& dir, const std::string& segment,
                                    std::int64_t step, std::optional<double> loss,
                                    const TrainerConfig& config,
                                    const ParameterSet& params) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) return absl::InternalError(StrCat("cannot create ", dir, ": ", ec.message()));
  const std::string base = (std::filesystem::path(dir) / segment).string();
  RETURN_IF_ERROR(WriteEmbeddingsBinary(params, NodeKind::kEntity, base + ".entities.temb"));
  RETURN_IF_ERROR(WriteEmbeddingsBinary(params, NodeKind::kMention, base + ".mentions.temb"));
  Json manifest{{"segment", segment},
                {"step", step},
                {"loss", loss ? Json(*loss) : Json(nullptr)},
                {"seed", config.seed},
                {"config_hash", config.Hash()}};
  return WriteTextFile(base + ".manifest.json", manifest.dump(2) + "\n");
}

inline absl::StatusOr<ContinualResult> RunContinual(
    const CorpusSnapshot& corpus, const ParameterSet& initial,
    const TrainerConfig& config, const std::string& checkpoint_dir = "") {
  RETURN_IF_ERROR(config.Validate());
  ContinualResult result;
  result.params = initial.Thawed();
  ParameterSet& params = result.params;
  ASSIGN_OR_RETURN(ClusterState state,
                   ClusterState::Initialize(params, config.alpha, config.mention_cap,
                                            config.seed));
  std::map<std::string, std::set<std::string>> membership;
  std::int64_t step = 0;

  for (const TimeSegment& segment : corpus.segments) {
    SegmentOutcome outcome;
    outcome.segment = segment;
    outcome.state_digest = StateDigest(state);
    std::vector<std::string> mentions;
    for (const MentionRecord* m : corpus.MentionsIn(segment.label)) {
      mentions.push_back(m->mention_id);
    }
    std::optional<double> loss;

    if (segment.phase == Phase::kTrain) {
      SegmentTrainingData data;
      data.mentions = mentions;
      for (const MentionRecord* m : corpus.MentionsIn(segment.label)) {
        if (m->gold_entity) data.gold_links[m->mention_id] = *m->gold_entity;
      }
      TrainerConfig seg_config = config;
      seg_config.seed = config.seed ^ (static_cast<std::uint64_t>(segment.ordinal) + 1) *
                                          0x9E3779B97F4A7C15ull;
      ASSIGN_OR_RETURN(TrainStats stats, TrainSegment(seg_config, data, state, params));
      step += stats.steps;
      loss = stats.final_loss;
      outcome.training = std::move(stats);
      for (const auto& [m, e] : data.gold_links) membership[e].insert(m);
    } else {
      RETURN_IF_ERROR(state.Recompute(params));
      ASSIGN_OR_RETURN(AffinityGraph graph,
                       BuildInferenceGraph(mentions, state, params, config.k_ent,
                                           config.k_men));
      const PruneResult pruned = PruneAndCluster(graph, config.inference_lambda);
      ASSIGN_OR_RETURN(outcome.decisions,
                       ResolveSegment(graph, pruned.partition, state, params, mentions));
      for (const std::string& m : mentions) {
        ASSIGN_OR_RETURN(const EmbeddingVector* v, params.Lookup(NodeKind::kMention, m));
        ASSIGN_OR_RETURN(outcome.ranked[m],
                         RankedPrediction(outcome.decisions.at(m).entity, *v, state,
                                          config.ranked_n));
      }
      for (const auto& [m, d] : outcome.decisions) membership[d.entity].insert(m);
    }
    RETURN_IF_ERROR(state.AssignMembers(membership, params,
                                        static_cast<std::uint64_t>(segment.ordinal)));
    if (!checkpoint_dir.empty()) {
      RETURN_IF_ERROR(
          WriteCheckpoint(checkpoint_dir, segment.label, step, loss, config, params));
    }
    result.segments.push_back(std::move(outcome));
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace chronolink

#endif  // CHRONOLINK_TRAINER_CONTINUAL_HPP_
