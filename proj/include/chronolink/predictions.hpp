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

#ifndef CHRONOLINK_PREDICTIONS_HPP_
#define CHRONOLINK_PREDICTIONS_HPP_

#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "chronolink/metrics/report.hpp"
#include "chronolink/records.hpp"
#include "chronolink/trainer/continual.hpp"
#include "chronolink/util/jsonl.hpp"
#include "chronolink/util/status_macros.hpp"

namespace chronolink {

// Records for every test-segment mention that has a gold entity. The Jaccard
// score compares the surface with the gold entity's name.
inline absl::StatusOr<std::vector<PredictionRecord>> BuildPredictionRecords(
    const CorpusSnapshot& corpus, const EntityCatalog& catalog,
    const ContinualResult& result, JaccardMode mode = JaccardMode::kCharSet) {
  std::map<std::string, const MentionRecord*> by_id;
  for (const MentionRecord& m : corpus.mentions) by_id[m.mention_id] = &m;
  std::vector<PredictionRecord> out;
  for (const SegmentOutcome& s : result.segments) {
    for (const auto& [mention_id, ranked] : s.ranked) {
      const MentionRecord* m = by_id.at(mention_id);
      if (!m->gold_entity) continue;
      const EntityRecord* gold = catalog.Find(*m->gold_entity);
      if (gold == nullptr) {
        return absl::NotFoundError(
            StrCat("gold entity ", *m->gold_entity, " of ", mention_id, " not in KB"));
      }
      ASSIGN_OR_RETURN(double j, JaccardChar(m->surface, gold->name, mode));
      out.push_back({mention_id, ranked, *m->gold_entity, s.segment.label, j});
    }
  }
  return out;
}

// One JSON object per test-segment mention, in segment then id order.
inline std::string PredictionsJsonl(const ContinualResult& result) {
  std::string out;
  for (const SegmentOutcome& s : result.segments) {
    for (const auto& [mention_id, decision] : s.decisions) {
      Json j{{"mention_id", mention_id},
             {"segment", s.segment.label},
             {"entity", decision.entity},
             {"from_cluster", decision.from_cluster},
             {"ranked", s.ranked.at(mention_id)}};
      out += j.dump();
      out += '\n';
    }
  }
  return out;
}

inline absl::StatusOr<std::vector<PredictionRecord>> LoadPredictionRecords(
    const std::string& path) {
  std::vector<PredictionRecord> out;
  RETURN_IF_ERROR(ForEachJsonLine(path, [&](std::size_t line, const Json& j) -> absl::Status {
    PredictionRecord r;
    ASSIGN_OR_RETURN(r.mention_id, RequiredField<std::string>(j, "mention_id", line));
    ASSIGN_OR_RETURN(r.ranked, RequiredField<std::vector<std::string>>(j, "ranked", line));
    ASSIGN_OR_RETURN(r.gold, RequiredField<std::string>(j, "gold", line));
    ASSIGN_OR_RETURN(r.segment, RequiredField<std::string>(j, "segment", line));
    ASSIGN_OR_RETURN(r.jaccard, RequiredField<double>(j, "jaccard", line));
    RETURN_IF_ERROR(r.Validate());
    out.push_back(std::move(r));
    return absl::OkStatus();
  }));
  return out;
}

inline std::string PredictionRecordsJsonl(const std::vector<PredictionRecord>& records) {
  std::string out;
  for (const PredictionRecord& r : records) {
    out += Json{{"mention_id", r.mention_id},
                {"ranked", r.ranked},
                {"gold", r.gold},
                {"segment", r.segment},
                {"jaccard", r.jaccard}}
               .dump();
    out += '\n';
  }
  return out;
}

}  // namespace chronolink

#endif  // CHRONOLINK_PREDICTIONS_HPP_
