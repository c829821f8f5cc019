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

// Domain records shared by every stage: knowledge-base entities, documents,
// mention spans, time segments and QA pairs.

#ifndef CHRONOLINK_RECORDS_HPP_
#define CHRONOLINK_RECORDS_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "chronolink/util/strings.hpp"

namespace chronolink {

enum class Phase { kTrain, kTest };

inline std::string_view PhaseName(Phase phase) {
  return phase == Phase::kTrain ? "train" : "test";
}

struct EntityRecord {
  std::string entity_id;
  std::string name;
  std::string description;
  std::optional<std::string> revision_time;
  // Set when the description is empty; such entities are accepted.
  bool degenerate = false;

  bool operator==(const EntityRecord&) const = default;
};

// Offsets are code-point offsets into the owning document's text.
struct MentionRecord {
  std::string mention_id;
  std::string doc_id;
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;
  std::string left_context;
  std::string right_context;
  std::optional<std::string> gold_entity;
  std::string segment;

  bool operator==(const MentionRecord&) const = default;
};

struct TimeSegment {
  std::string label;
  int ordinal = 0;
  Phase phase = Phase::kTrain;

  bool operator==(const TimeSegment&) const = default;
};

struct Document {
  std::string doc_id;
  std::string text;
  std::string date;  // YYYY-MM-DD, may be empty when the segment is explicit
  std::string segment;

  bool operator==(const Document&) const = default;
};

struct CorpusSnapshot {
  std::map<std::string, Document> documents;
  std::vector<MentionRecord> mentions;
  std::vector<TimeSegment> segments;

  bool operator==(const CorpusSnapshot&) const = default;

  const TimeSegment* FindSegment(std::string_view label) const {
    for (const TimeSegment& s : segments) {
      if (s.label == label) return &s;
    }
    return nullptr;
  }

  std::vector<const MentionRecord*> MentionsIn(std::string_view label) const {
    std::vector<const MentionRecord*> out;
    for (const MentionRecord& m : mentions) {
      if (m.segment == label) out.push_back(&m);
    }
    return out;
  }
};

class EntityCatalog {
 public:
  absl::Status Add(EntityRecord entity) {
    if (entity.name.empty()) {
      return absl::InvalidArgumentError(
          StrCat("entity ", entity.entity_id, ": empty name"));
    }
    entity.degenerate = entity.description.empty();
    const std::string id = entity.entity_id;
    if (!entities_.emplace(id, std::move(entity)).second) {
      return absl::AlreadyExistsError(
          StrCat("duplicate entity_id ", id));
    }
    return absl::OkStatus();
  }

  const EntityRecord* Find(std::string_view id) const {
    auto it = entities_.find(std::string(id));
    return it == entities_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return entities_.size(); }
  bool empty() const { return entities_.empty(); }

  // Sorted ascending.
  std::vector<std::string> Ids() const {
    std::vector<std::string> ids;
    ids.reserve(entities_.size());
    for (const auto& [id, _] : entities_) ids.push_back(id);
    return ids;
  }

  const std::map<std::string, EntityRecord>& entities() const {
    return entities_;
  }

 private:
  std::map<std::string, EntityRecord> entities_;
};

struct QAPair {
  std::string qa_id;
  std::string question;  // mention-substituted
  std::string mention;
  std::string gold_entity;
  std::string answer;
  std::string segment;
  // Document holding the annotated evidence text, when known.
  std::optional<std::string> evidence_doc;

  bool operator==(const QAPair&) const = default;
};

}  // namespace chronolink

#endif  // CHRONOLINK_RECORDS_HPP_
