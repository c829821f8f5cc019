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

// Line-delimited JSON ingestion and validation for corpora, knowledge bases
// and QA pairs.
//
// Corpus lines:
//   {"kind":"doc","doc_id","text","date"[,"segment"]}
//   {"kind":"mention","mention_id","doc_id","start","end","surface"
//    [,"gold_entity"][,"segment"]}
// KB lines:  {"entity_id","name","description"[,"revision_time"]}
// QA lines:  {"qa_id","question","mention","gold_entity","answer","segment"
//             [,"evidence_doc"]}

#ifndef CHRONOLINK_CORPUS_IO_HPP_
#define CHRONOLINK_CORPUS_IO_HPP_

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/util/strings.hpp"
#include "chronolink/records.hpp"
#include "chronolink/timeline.hpp"
#include "chronolink/util/jsonl.hpp"
#include "chronolink/util/status_macros.hpp"
#include "chronolink/util/utf8.hpp"

namespace chronolink {

inline constexpr std::string_view kCorpusSchemaV1 = "chronolink.corpus.v1";

struct Violation {
  enum class Kind {
    kUnknownDocument,
    kEmptySpan,
    kSpanOutOfRange,
    kSurfaceMismatch,
    kContextMismatch,
    kDuplicateId,
    kUnknownSegment,
    kBadSegmentOrder,
    kDegenerateEntity,
  };
  Kind kind;
  std::string record_id;
  std::string message;
};

inline std::string_view ViolationKindName(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::kUnknownDocument: return "unknown_document";
    case Violation::Kind::kEmptySpan: return "empty_span";
    case Violation::Kind::kSpanOutOfRange: return "span_out_of_range";
    case Violation::Kind::kSurfaceMismatch: return "span_mismatch";
    case Violation::Kind::kContextMismatch: return "context_mismatch";
    case Violation::Kind::kDuplicateId: return "duplicate_id";
    case Violation::Kind::kUnknownSegment: return "unknown_segment";
    case Violation::Kind::kBadSegmentOrder: return "bad_segment_order";
    case Violation::Kind::kDegenerateEntity: return "degenerate_entity";
  }
  return "unknown";
}

struct ValidationReport {
  std::vector<Violation> violations;

  bool empty() const { return violations.empty(); }
  std::size_t size() const { return violations.size(); }

  std::string Summary() const {
    std::vector<std::string> parts;
    for (const Violation& v : violations) {
      parts.push_back(StrCat(ViolationKindName(v.kind), "(", v.record_id,
                                   "): ", v.message));
    }
    return StrJoin(parts, "; ");
  }

  Json ToJson() const {
    Json arr = Json::array();
    for (const Violation& v : violations) {
      arr.push_back({{"kind", ViolationKindName(v.kind)},
                     {"record_id", v.record_id},
                     {"message", v.message}});
    }
    return arr;
  }
};

// Lists every invariant violation in `snapshot`. Pure; never fails.
inline ValidationReport ValidateMentionSpans(const CorpusSnapshot& snapshot) {
  ValidationReport report;
  auto add = [&](Violation::Kind kind, std::string id, std::string msg) {
    report.violations.push_back({kind, std::move(id), std::move(msg)});
  };

  for (std::size_t i = 0; i < snapshot.segments.size(); ++i) {
    const TimeSegment& s = snapshot.segments[i];
    if (s.ordinal != static_cast<int>(i)) {
      add(Violation::Kind::kBadSegmentOrder, s.label,
          StrCat("ordinal ", s.ordinal, " at position ", i));
    }
    if (i > 0 && snapshot.segments[i - 1].phase == Phase::kTest &&
        s.phase == Phase::kTrain) {
      add(Violation::Kind::kBadSegmentOrder, s.label,
          "train segment follows a test segment");
    }
  }
  for (const auto& [doc_id, doc] : snapshot.documents) {
    if (snapshot.FindSegment(doc.segment) == nullptr) {
      add(Violation::Kind::kUnknownSegment, doc_id,
          StrCat("document segment \"", doc.segment, "\" not in timeline"));
    }
  }

  std::set<std::string> seen;
  for (const MentionRecord& m : snapshot.mentions) {
    if (!seen.insert(m.mention_id).second) {
      add(Violation::Kind::kDuplicateId, m.mention_id, "duplicate mention_id");
    }
    if (snapshot.FindSegment(m.segment) == nullptr) {
      add(Violation::Kind::kUnknownSegment, m.mention_id,
          StrCat("segment \"", m.segment, "\" not in timeline"));
    }
    auto doc_it = snapshot.documents.find(m.doc_id);
    if (doc_it == snapshot.documents.end()) {
      add(Violation::Kind::kUnknownDocument, m.mention_id,
          StrCat("doc_id \"", m.doc_id, "\" not in corpus"));
      continue;
    }
    if (doc_it->second.segment != m.segment) {
      add(Violation::Kind::kUnknownSegment, m.mention_id,
          StrCat("segment \"", m.segment, "\" differs from document's \"",
                       doc_it->second.segment, "\""));
    }
    if (m.start >= m.end) {
      add(Violation::Kind::kEmptySpan, m.mention_id,
          StrCat("start ", m.start, " >= end ", m.end));
      continue;
    }
    const std::u32string text = utf8::Decode(doc_it->second.text);
    if (m.end > text.size()) {
      add(Violation::Kind::kSpanOutOfRange, m.mention_id,
          StrCat("end ", m.end, " beyond document length ", text.size()));
      continue;
    }
    if (utf8::Substr(text, m.start, m.end) != m.surface) {
      add(Violation::Kind::kSurfaceMismatch, m.mention_id,
          StrCat("surface \"", m.surface, "\" != document text \"",
                       utf8::Substr(text, m.start, m.end), "\""));
    }
    const std::u32string left = utf8::Decode(m.left_context);
    const std::u32string right = utf8::Decode(m.right_context);
    const bool left_ok =
        left.size() <= m.start &&
        text.compare(m.start - left.size(), left.size(), left) == 0;
    const bool right_ok =
        m.end + right.size() <= text.size() &&
        text.compare(m.end, right.size(), right) == 0;
    if (!left_ok || !right_ok) {
      add(Violation::Kind::kContextMismatch, m.mention_id,
          "context is not the text adjacent to the span");
    }
  }
  return report;
}

inline ValidationReport ValidateCatalog(const EntityCatalog& catalog) {
  ValidationReport report;
  for (const auto& [id, entity] : catalog.entities()) {
    if (entity.degenerate) {
      report.violations.push_back(
          {Violation::Kind::kDegenerateEntity, id, "empty description"});
    }
  }
  return report;
}

struct CorpusOptions {
  SegmentRule rule;
  // Character budget for each side's context, taken adjacent to the span.
  std::size_t context_chars = 512;
};

// Fills left/right context from the document text.
inline void AttachContexts(const std::u32string& text, std::size_t budget,
                           MentionRecord& m) {
  if (m.start > text.size() || m.end > text.size() || m.start > m.end) return;
  const std::size_t left_begin = m.start > budget ? m.start - budget : 0;
  m.left_context = utf8::Substr(text, left_begin, m.start);
  m.right_context = utf8::Substr(text, m.end, m.end + budget);
}

inline absl::StatusOr<CorpusSnapshot> LoadCorpus(
    const std::string& path, const CorpusOptions& options = {},
    std::string_view schema = kCorpusSchemaV1) {
  if (schema != kCorpusSchemaV1) {
    return absl::InvalidArgumentError(
        StrCat("unknown corpus schema \"", schema, "\""));
  }
  ASSIGN_OR_RETURN(std::vector<SegmentWindow> windows,
                   BuildSegmentWindows(options.rule));

  CorpusSnapshot snapshot;
  for (const SegmentWindow& w : windows) snapshot.segments.push_back(w.segment);

  struct PendingMention {
    MentionRecord record;
    std::optional<std::string> declared_segment;
    std::size_t line_no;
  };
  std::vector<PendingMention> pending;
  std::vector<std::pair<std::string, std::string>> dated_docs;
  std::set<std::string> mention_ids;

  RETURN_IF_ERROR(ForEachJsonLine(
      path, [&](std::size_t line_no, const Json& rec) -> absl::Status {
        ASSIGN_OR_RETURN(std::string kind,
                         RequiredField<std::string>(rec, "kind", line_no));
        if (kind == "doc") {
          Document doc;
          ASSIGN_OR_RETURN(doc.doc_id,
                           RequiredField<std::string>(rec, "doc_id", line_no));
          ASSIGN_OR_RETURN(doc.text,
                           RequiredField<std::string>(rec, "text", line_no));
          ASSIGN_OR_RETURN(auto date,
                           OptionalField<std::string>(rec, "date", line_no));
          ASSIGN_OR_RETURN(auto segment,
                           OptionalField<std::string>(rec, "segment", line_no));
          if (!date && !segment) {
            return absl::InvalidArgumentError(StrCat(
                "line ", line_no, ": malformed record: document ", doc.doc_id,
                " needs a date or a segment"));
          }
          doc.date = date.value_or("");
          if (segment) {
            if (snapshot.FindSegment(*segment) == nullptr) {
              return absl::InvalidArgumentError(
                  StrCat("line ", line_no, ": unknown segment label \"",
                               *segment, "\""));
            }
            doc.segment = *segment;
          } else {
            dated_docs.emplace_back(doc.doc_id, doc.date);
          }
          const std::string id = doc.doc_id;
          if (!snapshot.documents.emplace(id, std::move(doc)).second) {
            return absl::AlreadyExistsError(
                StrCat("line ", line_no, ": duplicate doc_id ", id));
          }
          return absl::OkStatus();
        }
        if (kind == "mention") {
          PendingMention p{{}, std::nullopt, line_no};
          MentionRecord& m = p.record;
          ASSIGN_OR_RETURN(m.mention_id, RequiredField<std::string>(
                                             rec, "mention_id", line_no));
          ASSIGN_OR_RETURN(m.doc_id,
                           RequiredField<std::string>(rec, "doc_id", line_no));
          ASSIGN_OR_RETURN(m.start,
                           RequiredField<std::size_t>(rec, "start", line_no));
          ASSIGN_OR_RETURN(m.end,
                           RequiredField<std::size_t>(rec, "end", line_no));
          ASSIGN_OR_RETURN(m.surface,
                           RequiredField<std::string>(rec, "surface", line_no));
          ASSIGN_OR_RETURN(m.gold_entity, OptionalField<std::string>(
                                              rec, "gold_entity", line_no));
          ASSIGN_OR_RETURN(p.declared_segment,
                           OptionalField<std::string>(rec, "segment", line_no));
          if (!mention_ids.insert(m.mention_id).second) {
            return absl::AlreadyExistsError(StrCat(
                "line ", line_no, ": duplicate mention_id ", m.mention_id));
          }
          pending.push_back(std::move(p));
          return absl::OkStatus();
        }
        return absl::InvalidArgumentError(StrCat(
            "line ", line_no, ": malformed record: unknown kind \"", kind, "\""));
      }));

  ASSIGN_OR_RETURN(TimelineAssignment assignment,
                   SegmentTimeline(dated_docs, options.rule));
  for (const auto& [doc_id, label] : assignment.doc_segment) {
    snapshot.documents[doc_id].segment = label;
  }

  std::map<std::string, std::u32string> decoded;
  for (PendingMention& p : pending) {
    MentionRecord& m = p.record;
    auto doc_it = snapshot.documents.find(m.doc_id);
    if (doc_it == snapshot.documents.end()) {
      return absl::InvalidArgumentError(
          StrCat("line ", p.line_no, ": mention ", m.mention_id,
                       " references unknown doc_id ", m.doc_id));
    }
    m.segment = doc_it->second.segment;
    if (p.declared_segment && *p.declared_segment != m.segment) {
      return absl::InvalidArgumentError(StrCat(
          "line ", p.line_no, ": unknown segment label \"",
          *p.declared_segment, "\" for mention ", m.mention_id));
    }
    auto [it, inserted] = decoded.try_emplace(m.doc_id);
    if (inserted) it->second = utf8::Decode(doc_it->second.text);
    AttachContexts(it->second, options.context_chars, m);
    snapshot.mentions.push_back(std::move(m));
  }

  ValidationReport report = ValidateMentionSpans(snapshot);
  if (!report.empty()) {
    return absl::InvalidArgumentError(
        StrCat(path, ": ", report.Summary()));
  }
  return snapshot;
}

// Inverse of LoadCorpus: documents (sorted by id) then mentions in order.
inline absl::Status WriteCorpus(const CorpusSnapshot& snapshot,
                                const std::string& path) {
  std::string out;
  for (const auto& [doc_id, doc] : snapshot.documents) {
    Json rec = {{"kind", "doc"}, {"doc_id", doc_id}, {"text", doc.text}};
    if (!doc.date.empty()) rec["date"] = doc.date;
    rec["segment"] = doc.segment;
    out += rec.dump();
    out += '\n';
  }
  for (const MentionRecord& m : snapshot.mentions) {
    Json rec = {{"kind", "mention"}, {"mention_id", m.mention_id},
                {"doc_id", m.doc_id},  {"start", m.start},
                {"end", m.end},        {"surface", m.surface}};
    if (m.gold_entity) rec["gold_entity"] = *m.gold_entity;
    out += rec.dump();
    out += '\n';
  }
  return WriteTextFile(path, out);
}

inline absl::StatusOr<EntityCatalog> LoadKb(const std::string& path) {
  EntityCatalog catalog;
  RETURN_IF_ERROR(ForEachJsonLine(
      path, [&](std::size_t line_no, const Json& rec) -> absl::Status {
        EntityRecord e;
        ASSIGN_OR_RETURN(e.entity_id,
                         RequiredField<std::string>(rec, "entity_id", line_no));
        ASSIGN_OR_RETURN(e.name,
                         RequiredField<std::string>(rec, "name", line_no));
        ASSIGN_OR_RETURN(auto description, OptionalField<std::string>(
                                               rec, "description", line_no));
        e.description = description.value_or("");
        ASSIGN_OR_RETURN(e.revision_time, OptionalField<std::string>(
                                              rec, "revision_time", line_no));
        absl::Status added = catalog.Add(std::move(e));
        if (!added.ok()) {
          return absl::Status(added.code(), StrCat("line ", line_no, ": ",
                                                         added.message()));
        }
        return absl::OkStatus();
      }));
  return catalog;
}

inline absl::Status WriteKb(const EntityCatalog& catalog,
                            const std::string& path) {
  std::string out;
  for (const auto& [id, e] : catalog.entities()) {
    Json rec = {{"entity_id", id},
                {"name", e.name},
                {"description", e.description}};
    if (e.revision_time) rec["revision_time"] = *e.revision_time;
    out += rec.dump();
    out += '\n';
  }
  return WriteTextFile(path, out);
}

inline std::size_t CountOccurrences(std::string_view haystack,
                                    std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + 1)) {
    ++count;
  }
  return count;
}

inline absl::StatusOr<std::vector<QAPair>> LoadQaPairs(
    const std::string& path) {
  std::vector<QAPair> pairs;
  std::set<std::string> ids;
  RETURN_IF_ERROR(ForEachJsonLine(
      path, [&](std::size_t line_no, const Json& rec) -> absl::Status {
        QAPair qa;
        ASSIGN_OR_RETURN(qa.qa_id,
                         RequiredField<std::string>(rec, "qa_id", line_no));
        ASSIGN_OR_RETURN(qa.question,
                         RequiredField<std::string>(rec, "question", line_no));
        ASSIGN_OR_RETURN(qa.mention,
                         RequiredField<std::string>(rec, "mention", line_no));
        ASSIGN_OR_RETURN(qa.gold_entity, RequiredField<std::string>(
                                             rec, "gold_entity", line_no));
        ASSIGN_OR_RETURN(qa.answer,
                         RequiredField<std::string>(rec, "answer", line_no));
        ASSIGN_OR_RETURN(qa.segment,
                         RequiredField<std::string>(rec, "segment", line_no));
        ASSIGN_OR_RETURN(qa.evidence_doc, OptionalField<std::string>(
                                              rec, "evidence_doc", line_no));
        if (CountOccurrences(qa.question, qa.mention) != 1) {
          return absl::InvalidArgumentError(
              StrCat("line ", line_no, ": qa ", qa.qa_id,
                           ": question must contain the mention exactly once"));
        }
        if (!ids.insert(qa.qa_id).second) {
          return absl::AlreadyExistsError(
              StrCat("line ", line_no, ": duplicate qa_id ", qa.qa_id));
        }
        pairs.push_back(std::move(qa));
        return absl::OkStatus();
      }));
  return pairs;
}

inline absl::Status WriteQaPairs(const std::vector<QAPair>& pairs,
                                 const std::string& path) {
  std::string out;
  for (const QAPair& qa : pairs) {
    Json rec = {{"qa_id", qa.qa_id},         {"question", qa.question},
                {"mention", qa.mention},     {"gold_entity", qa.gold_entity},
                {"answer", qa.answer},       {"segment", qa.segment}};
    if (qa.evidence_doc) rec["evidence_doc"] = *qa.evidence_doc;
    out += rec.dump();
    out += '\n';
  }
  return WriteTextFile(path, out);
}

}  // namespace chronolink

#endif  // CHRONOLINK_CORPUS_IO_HPP_
