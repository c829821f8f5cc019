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

// Entity-centric QA runs: retrieval, resolution, prompting, generation and
// scoring, one record per QA pair.

#ifndef CHRONOLINK_RAG_QA_HPP_
#define CHRONOLINK_RAG_QA_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/affinity.hpp"
#include "chronolink/linking.hpp"
#include "chronolink/metrics/report.hpp"
#include "chronolink/metrics/text_metrics.hpp"
#include "chronolink/rag/chunking.hpp"
#include "chronolink/rag/clients.hpp"
#include "chronolink/rag/index.hpp"
#include "chronolink/rag/prompts.hpp"
#include "chronolink/records.hpp"
#include "chronolink/util/jsonl.hpp"
#include "chronolink/util/sha256.hpp"
#include "chronolink/util/status_macros.hpp"
#include "chronolink/util/strings.hpp"

namespace chronolink {

struct CotResult {
  std::string first_prompt;
  std::string first_answer;  // verbatim
  std::string second_prompt;
  std::string answer;
};

inline absl::StatusOr<CotResult> RunCot(
    const std::string& question, const std::string& mention,
    const std::vector<std::string>& context, const GenerationClient& client,
    double temperature = kAnswerTemperature,
    int max_new_tokens = kAnswerMaxTokens) {
  CotResult out;
  const PromptInputs in{question, mention, std::nullopt, context};
  ASSIGN_OR_RETURN(out.first_prompt, BuildPrompt(PromptVariant::kRalmCot, in));
  absl::StatusOr<std::string> first = client.Generate(
      {out.first_prompt, kCotFirstTemperature, kCotFirstMaxTokens});
  if (!first.ok()) {
    return absl::Status(first.status().code(),
                        StrCat("cot stage 1: ", first.status().message()));
  }
  out.first_answer = *std::move(first);
  ASSIGN_OR_RETURN(out.second_prompt,
                   BuildCotSecondPrompt(in, out.first_answer));
  absl::StatusOr<std::string> second =
      client.Generate({out.second_prompt, temperature, max_new_tokens});
  if (!second.ok()) {
    return absl::Status(second.status().code(),
                        StrCat("cot stage 2: ", second.status().message()));
  }
  out.answer = *std::move(second);
  return out;
}

// Maps the mention of a QA pair to an entity id.
class MentionResolver {
 public:
  virtual ~MentionResolver() = default;
  virtual absl::StatusOr<std::string> Resolve(const QAPair& qa) const = 0;
};

class TableResolver : public MentionResolver {
 public:
  explicit TableResolver(std::map<std::string, std::string> by_qa_id)
      : by_qa_id_(std::move(by_qa_id)) {}

  absl::StatusOr<std::string> Resolve(const QAPair& qa) const override {
    auto it = by_qa_id_.find(qa.qa_id);
    if (it == by_qa_id_.end()) {
      return absl::NotFoundError(StrCat("no resolution for qa ", qa.qa_id));
    }
    return it->second;
  }

 private:
  std::map<std::string, std::string> by_qa_id_;
};

// Top-1 entity by phi against the cluster representations. QA mention
// vectors are mention entries keyed by qa_id.
class ClusterStateResolver : public MentionResolver {
 public:
  ClusterStateResolver(const ClusterState* state,
                       const EmbeddingStore* qa_vectors)
      : state_(state), qa_vectors_(qa_vectors) {}

  absl::StatusOr<std::string> Resolve(const QAPair& qa) const override {
    ASSIGN_OR_RETURN(const EmbeddingVector* v,
                     qa_vectors_->Lookup(NodeKind::kMention, qa.qa_id));
    ASSIGN_OR_RETURN(std::vector<ScoredId> best,
                     RankCandidates(*v, *state_, 1));
    return best.front().id;
  }

 private:
  const ClusterState* state_;
  const EmbeddingStore* qa_vectors_;
};

struct QaPrediction {
  std::string qa_id;
  std::string segment;
  std::string variant;
  std::string prompt;  // final prompt sent to the generator
  std::string prompt_sha256;
  std::string prediction;
  double f1 = 0.0;
  std::optional<bool> hit;
  std::optional<bool> resolution_ok;
  std::optional<std::string> resolved_entity;
  std::optional<std::string> cot_first_answer;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct QaDependencies {
  const GenerationClient* generator = nullptr;
  const EmbeddingClient* embedder = nullptr;  // RAG variants
  const VectorIndex* index = nullptr;         // RAG variants
  const std::map<ChunkId, std::string>* chunk_text = nullptr;
  const MentionResolver* resolver = nullptr;  // ER variants
  const EntityCatalog* catalog = nullptr;     // entity names for ER prompts
};

struct QaOptions {
  std::size_t k = 3;
  std::size_t parallelism = 4;
  double temperature = kAnswerTemperature;
  int max_new_tokens = kAnswerMaxTokens;
};

inline std::map<ChunkId, std::string> ChunkTextMap(
    const std::vector<DocumentChunk>& chunks) {
  std::map<ChunkId, std::string> out;
  for (const DocumentChunk& c : chunks) out[c.id] = c.text;
  return out;
}

inline absl::StatusOr<VectorIndex> BuildChunkIndex(
    const std::vector<DocumentChunk>& chunks, const EmbeddingClient& embedder) {
  VectorIndex index;
  for (const DocumentChunk& c : chunks) {
    ASSIGN_OR_RETURN(EmbeddingVector v, embedder.Embed(c.text));
    RETURN_IF_ERROR(index.Add(c.id, std::move(v)));
  }
  index.Freeze();
  return index;
}

namespace internal {

inline absl::Status RunOnePair(const QAPair& qa, PromptVariant variant,
                               const QaDependencies& deps,
                               const QaOptions& opt, QaPrediction& out) {
  PromptInputs in{qa.question, qa.mention, std::nullopt, std::nullopt};
  if (UsesRetrieval(variant)) {
    ASSIGN_OR_RETURN(EmbeddingVector q, deps.embedder->Embed(qa.question));
    ASSIGN_OR_RETURN(std::vector<RetrievedChunk> top,
                     deps.index->Retrieve(q, opt.k));
    std::vector<std::string> context;
    bool hit = false;
    for (const RetrievedChunk& r : top) {
      auto it = deps.chunk_text->find(r.id);
      if (it == deps.chunk_text->end()) {
        return absl::NotFoundError(
            StrCat("no text for chunk ", r.id.ToString()));
      }
      context.push_back(it->second);
      if (qa.evidence_doc && r.id.doc_id == *qa.evidence_doc) hit = true;
    }
    if (qa.evidence_doc) out.hit = hit;
    in.context_chunks = std::move(context);
  }
  if (UsesResolution(variant)) {
    ASSIGN_OR_RETURN(std::string entity, deps.resolver->Resolve(qa));
    out.resolved_entity = entity;
    out.resolution_ok = entity == qa.gold_entity;
    const EntityRecord* rec =
        deps.catalog ? deps.catalog->Find(entity) : nullptr;
    in.entity = rec ? rec->name : entity;
  }
  if (variant == PromptVariant::kRalmCot) {
    ASSIGN_OR_RETURN(CotResult cot,
                     RunCot(qa.question, qa.mention, *in.context_chunks,
                            *deps.generator, opt.temperature,
                            opt.max_new_tokens));
    out.prompt = std::move(cot.second_prompt);
    out.cot_first_answer = std::move(cot.first_answer);
    out.prediction = std::move(cot.answer);
  } else {
    ASSIGN_OR_RETURN(out.prompt, BuildPrompt(variant, in));
    ASSIGN_OR_RETURN(out.prediction,
                     deps.generator->Generate(
                         {out.prompt, opt.temperature, opt.max_new_tokens}));
  }
  out.prompt_sha256 = Sha256Hex(out.prompt);
  out.f1 = QaF1(out.prediction, qa.answer);
  return absl::OkStatus();
}

}  // namespace internal

// Per-pair failures land in QaPrediction::error; only missing dependencies
// fail the whole run. Output order follows the input.
inline absl::StatusOr<std::vector<QaPrediction>> RunQa(
    const std::vector<QAPair>& pairs, PromptVariant variant,
    const QaDependencies& deps, const QaOptions& opt = {}) {
  if (deps.generator == nullptr) {
    return absl::InvalidArgumentError("QA run needs a generation client");
  }
  if (UsesRetrieval(variant) &&
      (deps.embedder == nullptr || deps.index == nullptr ||
       deps.chunk_text == nullptr)) {
    return absl::InvalidArgumentError(StrCat(
        VariantName(variant), " needs an embedder, an index and chunk text"));
  }
  if (UsesResolution(variant) && deps.resolver == nullptr) {
    return absl::InvalidArgumentError(
        StrCat(VariantName(variant), " needs a mention resolver"));
  }
  if (opt.k == 0) return absl::InvalidArgumentError("k must be at least 1");
  std::vector<QaPrediction> out(pairs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < pairs.size(); i = next++) {
      QaPrediction& p = out[i];
      p.qa_id = pairs[i].qa_id;
      p.segment = pairs[i].segment;
      p.variant = std::string(VariantName(variant));
      const absl::Status s =
          internal::RunOnePair(pairs[i], variant, deps, opt, p);
      if (!s.ok()) {
        p.error = s.ToString();
        p.f1 = 0.0;
      }
    }
  };
  const std::size_t n_threads =
      std::max<std::size_t>(1, std::min(opt.parallelism, pairs.size()));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < n_threads; ++t) threads.emplace_back(worker);
  worker();
  for (std::thread& t : threads) t.join();
  return out;
}

inline Json QaPredictionToJson(const QaPrediction& p) {
  Json j = {{"qa_id", p.qa_id},
            {"variant", p.variant},
            {"prompt_sha256", p.prompt_sha256},
            {"prediction", p.prediction},
            {"f1", p.f1},
            {"hit", p.hit ? Json(*p.hit) : Json(nullptr)},
            {"resolution_ok",
             p.resolution_ok ? Json(*p.resolution_ok) : Json(nullptr)},
            {"segment", p.segment}};
  if (p.resolved_entity) j["resolved_entity"] = *p.resolved_entity;
  if (p.cot_first_answer) j["cot_first_answer"] = *p.cot_first_answer;
  if (!p.ok()) j["error"] = p.error;
  return j;
}

inline std::string QaPredictionsJsonl(const std::vector<QaPrediction>& preds) {
  std::string out;
  for (const QaPrediction& p : preds) {
    out += QaPredictionToJson(p).dump();
    out += '\n';
  }
  return out;
}

inline absl::StatusOr<std::vector<QaPrediction>> LoadQaPredictions(
    const std::string& path) {
  std::vector<QaPrediction> out;
  RETURN_IF_ERROR(ForEachJsonLine(
      path, [&](std::size_t line_no, const Json& rec) -> absl::Status {
        QaPrediction p;
        ASSIGN_OR_RETURN(p.qa_id,
                         RequiredField<std::string>(rec, "qa_id", line_no));
        ASSIGN_OR_RETURN(p.variant,
                         RequiredField<std::string>(rec, "variant", line_no));
        ASSIGN_OR_RETURN(p.prompt_sha256, RequiredField<std::string>(
                                              rec, "prompt_sha256", line_no));
        ASSIGN_OR_RETURN(p.prediction, RequiredField<std::string>(
                                           rec, "prediction", line_no));
        ASSIGN_OR_RETURN(p.f1, RequiredField<double>(rec, "f1", line_no));
        ASSIGN_OR_RETURN(p.hit, OptionalField<bool>(rec, "hit", line_no));
        ASSIGN_OR_RETURN(p.resolution_ok,
                         OptionalField<bool>(rec, "resolution_ok", line_no));
        ASSIGN_OR_RETURN(std::optional<std::string> seg,
                         OptionalField<std::string>(rec, "segment", line_no));
        p.segment = seg.value_or("");
        ASSIGN_OR_RETURN(std::optional<std::string> err,
                         OptionalField<std::string>(rec, "error", line_no));
        p.error = err.value_or("");
        out.push_back(std::move(p));
        return absl::OkStatus();
      }));
  return out;
}

// Mean F1 over successful pairs, for every (segment, variant, split,
// resolution) cell that holds at least one pair. Segment "all" pools
// segments; hit/miss and success/failure cells exist only where the flag
// is known.
inline std::vector<QaRow> AggregateQa(const std::vector<QaPrediction>& preds) {
  std::map<std::tuple<std::string, std::string, std::string, std::string>,
           std::pair<double, std::int64_t>>
      cells;
  for (const QaPrediction& p : preds) {
    if (!p.ok()) continue;
    std::vector<std::string> segs{"all"};
    if (!p.segment.empty()) segs.push_back(p.segment);
    std::vector<std::string> splits{"all"};
    if (p.hit) splits.push_back(*p.hit ? "hit" : "miss");
    std::vector<std::string> res{"all"};
    if (p.resolution_ok) res.push_back(*p.resolution_ok ? "success" : "failure");
    for (const auto& s : segs) {
      for (const auto& sp : splits) {
        for (const auto& r : res) {
          auto& cell = cells[{s, p.variant, sp, r}];
          cell.first += p.f1;
          ++cell.second;
        }
      }
    }
  }
  std::vector<QaRow> rows;
  for (const auto& [key, cell] : cells) {
    const auto& [seg, variant, split, resolution] = key;
    rows.push_back({seg, variant, split, resolution,
                    cell.first / static_cast<double>(cell.second),
                    cell.second});
  }
  return rows;
}

}  // namespace chronolink

#endif  // CHRONOLINK_RAG_QA_HPP_
