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

// Command-line front end. Dispatch() is the whole program minus main().

#ifndef CHRONOLINK_CLI_DISPATCH_HPP_
#define CHRONOLINK_CLI_DISPATCH_HPP_

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/config.hpp"
#include "chronolink/corpus_io.hpp"
#include "chronolink/embedding.hpp"
#include "chronolink/metrics/report.hpp"
#include "chronolink/predictions.hpp"
#include "chronolink/rag/chunking.hpp"
#include "chronolink/rag/clients.hpp"
#include "chronolink/rag/http_clients.hpp"
#include "chronolink/rag/qa.hpp"
#include "chronolink/synthetic.hpp"
#include "chronolink/trainer/continual.hpp"
#include "chronolink/util/jsonl.hpp"
#include "chronolink/util/sha256.hpp"
#include "chronolink/util/status_macros.hpp"
#include "chronolink/util/strings.hpp"

namespace chronolink::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Flag name -> config key.
inline constexpr std::pair<std::string_view, std::string_view> kFlagKeys[] = {
    {"--corpus", "paths.corpus"},
    {"--kb", "paths.kb"},
    {"--embeddings", "paths.embeddings"},
    {"--qa", "paths.qa"},
    {"--qa-embeddings", "paths.qa_embeddings"},
    {"--qa-resolutions", "paths.qa_resolutions"},
    {"--predictions", "paths.predictions"},
    {"--qa-predictions", "paths.qa_predictions"},
    {"--report", "paths.report"},
    {"--out", "paths.out"},
    {"--seed", "seed"},
    {"--alpha", "trainer.alpha"},
    {"--lambda", "trainer.lambda"},
    {"--epochs", "trainer.epochs"},
    {"--lr", "trainer.learning_rate"},
    {"--variants", "qa.variants"},
    {"--format", "metrics.format"},
    {"--generator", "generator.backend"},
    {"--embedder", "embedder.backend"},
};

struct Invocation {
  std::string command;
  RunConfig config;
  std::ostream* out;
};

namespace internal {

inline std::string_view StatusCodeName(absl::StatusCode code) {
  switch (code) {
    case absl::StatusCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case absl::StatusCode::kNotFound: return "NOT_FOUND";
    case absl::StatusCode::kAlreadyExists: return "ALREADY_EXISTS";
    case absl::StatusCode::kFailedPrecondition: return "FAILED_PRECONDITION";
    case absl::StatusCode::kUnavailable: return "UNAVAILABLE";
    case absl::StatusCode::kDataLoss: return "DATA_LOSS";
    case absl::StatusCode::kInternal: return "INTERNAL";
    default: return "UNKNOWN";
  }
}

inline void EmitError(std::ostream& err, std::string_view command,
                      std::string_view code, std::string_view message) {
  err << Json{{"error",
               {{"command", command}, {"code", code}, {"message", message}}}}
             .dump()
      << "\n";
}

inline std::string OutPath(const RunConfig& cfg, std::string_view name) {
  return (std::filesystem::path(cfg.Get("paths.out")) / std::string(name))
      .string();
}

inline absl::Status EnsureOutDir(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.Get("paths.out"), ec);
  if (ec) {
    return absl::InternalError(
        StrCat("cannot create ", cfg.Get("paths.out"), ": ", ec.message()));
  }
  return absl::OkStatus();
}

// Missing or absent paths are configuration errors.
inline absl::Status RequirePaths(const RunConfig& cfg,
                                 std::initializer_list<std::string_view> keys) {
  for (std::string_view key : keys) {
    const std::string& p = cfg.Get(key);
    if (p.empty()) {
      return absl::InvalidArgumentError(StrCat(key, " is required"));
    }
    if (!std::filesystem::exists(p)) {
      return absl::InvalidArgumentError(StrCat(key, ": no such path ", p));
    }
  }
  return absl::OkStatus();
}

inline absl::Status CheckOptionalPath(const RunConfig& cfg,
                                      std::string_view key) {
  const std::string& p = cfg.Get(key);
  if (!p.empty() && !std::filesystem::exists(p)) {
    return absl::InvalidArgumentError(StrCat(key, ": no such path ", p));
  }
  return absl::OkStatus();
}

inline std::string FileDigest(const std::string& path) {
  if (std::filesystem::is_directory(path)) {
    std::string buf;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(path)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      buf += StrCat(f.filename().string(), ":", FileDigest(f.string()), "\n");
    }
    return Sha256Hex(buf);
  }
  absl::StatusOr<std::string> text = ReadTextFile(path);
  return text.ok() ? Sha256Hex(*text) : "";
}

// <command>.manifest.json: config hash, seed, versions, input digests and
// output names. The output directory itself is left out.
inline absl::Status WriteManifest(const Invocation& inv,
                                  const std::vector<std::string>& outputs,
                                  Json extra = Json::object()) {
  Json inputs = Json::object();
  for (const auto& [key, value] : inv.config.values()) {
    if (key.rfind("paths.", 0) == 0 && key != "paths.out" && !value.empty()) {
      inputs[key] = {{"path", value}, {"sha256", FileDigest(value)}};
    }
  }
  ASSIGN_OR_RETURN(std::uint64_t seed, inv.config.Seed());
  Json config = Json::object();
  for (const auto& [key, value] : inv.config.values()) {
    if (key != "paths.out") config[key] = value;
  }
  std::vector<std::string> sorted = outputs;
  std::sort(sorted.begin(), sorted.end());
  Json m{{"command", inv.command},
         {"config_hash", inv.config.Hash()},
         {"seed", seed},
         {"versions",
          {{"chronolink", kChronolinkVersion},
           {"corpus_schema", kCorpusSchemaV1},
           {"prompts", "v1"}}},
         {"config", config},
         {"inputs", inputs},
         {"outputs", sorted}};
  if (!extra.empty()) m["details"] = std::move(extra);
  return WriteTextFile(OutPath(inv.config, StrCat(inv.command, ".manifest.json")),
                       m.dump(2) + "\n");
}

inline absl::StatusOr<EmbeddingStore> LoadVectors(const std::string& path) {
  if (std::filesystem::is_directory(path)) {
    EmbeddingStore store;
    const std::filesystem::path dir(path);
    RETURN_IF_ERROR(LoadEmbeddingsBinary((dir / "entities.temb").string(),
                                         NodeKind::kEntity, store));
    const auto mentions = dir / "mentions.temb";
    if (std::filesystem::exists(mentions)) {
      RETURN_IF_ERROR(
          LoadEmbeddingsBinary(mentions.string(), NodeKind::kMention, store));
    }
    store.Freeze();
    return store;
  }
  return LoadEmbeddingsJsonl(path);
}

struct Inputs {
  CorpusSnapshot corpus;
  EntityCatalog catalog;
  EmbeddingStore vectors;
};

inline absl::StatusOr<Inputs> LoadLinkInputs(const RunConfig& cfg) {
  RETURN_IF_ERROR(RequirePaths(cfg, {"paths.corpus", "paths.kb",
                                     "paths.embeddings"}));
  Inputs in;
  ASSIGN_OR_RETURN(CorpusOptions opts, cfg.Corpus());
  ASSIGN_OR_RETURN(in.corpus, LoadCorpus(cfg.Get("paths.corpus"), opts));
  ASSIGN_OR_RETURN(in.catalog, LoadKb(cfg.Get("paths.kb")));
  ASSIGN_OR_RETURN(in.vectors, LoadVectors(cfg.Get("paths.embeddings")));
  for (const auto& [id, _] : in.catalog.entities()) {
    if (in.vectors.Find(NodeKind::kEntity, id) == nullptr) {
      return absl::NotFoundError(StrCat("no vector for entity ", id));
    }
  }
  for (const MentionRecord& m : in.corpus.mentions) {
    if (in.vectors.Find(NodeKind::kMention, m.mention_id) == nullptr) {
      return absl::NotFoundError(StrCat("no vector for mention ", m.mention_id));
    }
  }
  return in;
}

inline CorpusSnapshot TrainingPart(const CorpusSnapshot& corpus) {
  CorpusSnapshot out;
  out.documents = corpus.documents;
  std::set<std::string> keep;
  for (const TimeSegment& s : corpus.segments) {
    if (s.phase == Phase::kTrain) {
      out.segments.push_back(s);
      keep.insert(s.label);
    }
  }
  for (const MentionRecord& m : corpus.mentions) {
    if (keep.count(m.segment)) out.mentions.push_back(m);
  }
  return out;
}

inline Json TrainingSummary(const ContinualResult& result) {
  Json segs = Json::array();
  for (const SegmentOutcome& s : result.segments) {
    Json j{{"segment", s.segment.label},
           {"phase", PhaseName(s.segment.phase)},
           {"state_digest", s.state_digest}};
    if (s.training) {
      j["steps"] = s.training->steps;
      j["final_loss"] = s.training->final_loss;
    }
    segs.push_back(std::move(j));
  }
  return segs;
}

// ---------------------------------------------------------------- commands

inline absl::Status RunIngest(const Invocation& inv) {
  const RunConfig& cfg = inv.config;
  RETURN_IF_ERROR(RequirePaths(cfg, {"paths.corpus", "paths.kb"}));
  RETURN_IF_ERROR(CheckOptionalPath(cfg, "paths.qa"));
  ASSIGN_OR_RETURN(CorpusOptions opts, cfg.Corpus());
  ASSIGN_OR_RETURN(CorpusSnapshot corpus,
                   LoadCorpus(cfg.Get("paths.corpus"), opts));
  ASSIGN_OR_RETURN(EntityCatalog catalog, LoadKb(cfg.Get("paths.kb")));
  ValidationReport report = ValidateMentionSpans(corpus);
  const ValidationReport kb_report = ValidateCatalog(catalog);
  report.violations.insert(report.violations.end(),
                           kb_report.violations.begin(),
                           kb_report.violations.end());
  for (const MentionRecord& m : corpus.mentions) {
    if (m.gold_entity && catalog.Find(*m.gold_entity) == nullptr) {
      return absl::NotFoundError(StrCat("mention ", m.mention_id,
                                        ": gold entity ", *m.gold_entity,
                                        " not in KB"));
    }
  }
  RETURN_IF_ERROR(EnsureOutDir(cfg));
  std::vector<std::string> outputs = {"corpus.jsonl", "kb.jsonl",
                                      "validation.json"};
  RETURN_IF_ERROR(WriteCorpus(corpus, OutPath(cfg, "corpus.jsonl")));
  RETURN_IF_ERROR(WriteKb(catalog, OutPath(cfg, "kb.jsonl")));
  std::size_t n_qa = 0;
  if (!cfg.Get("paths.qa").empty()) {
    ASSIGN_OR_RETURN(std::vector<QAPair> qa, LoadQaPairs(cfg.Get("paths.qa")));
    for (const QAPair& p : qa) {
      if (catalog.Find(p.gold_entity) == nullptr) {
        return absl::NotFoundError(StrCat("qa ", p.qa_id, ": gold entity ",
                                          p.gold_entity, " not in KB"));
      }
    }
    n_qa = qa.size();
    RETURN_IF_ERROR(WriteQaPairs(qa, OutPath(cfg, "qa.jsonl")));
    outputs.push_back("qa.jsonl");
  }
  RETURN_IF_ERROR(WriteTextFile(OutPath(cfg, "validation.json"),
                                report.ToJson().dump(2) + "\n"));
  Json counts{{"documents", corpus.documents.size()},
              {"mentions", corpus.mentions.size()},
              {"segments", corpus.segments.size()},
              {"entities", catalog.size()},
              {"qa_pairs", n_qa},
              {"violations", report.size()}};
  *inv.out << counts.dump() << "\n";
  return WriteManifest(inv, outputs, counts);
}

inline absl::Status RunEmbedImport(const Invocation& inv) {
  const RunConfig& cfg = inv.config;
  RETURN_IF_ERROR(RequirePaths(cfg, {"paths.embeddings"}));
  RETURN_IF_ERROR(CheckOptionalPath(cfg, "paths.corpus"));
  RETURN_IF_ERROR(CheckOptionalPath(cfg, "paths.kb"));
  ASSIGN_OR_RETURN(EmbeddingStore store,
                   LoadVectors(cfg.Get("paths.embeddings")));
  std::size_t missing = 0;
  std::string first_missing;
  auto note = [&](const std::string& id) {
    if (missing++ == 0) first_missing = id;
  };
  if (!cfg.Get("paths.kb").empty()) {
    ASSIGN_OR_RETURN(EntityCatalog catalog, LoadKb(cfg.Get("paths.kb")));
    for (const auto& [id, _] : catalog.entities()) {
      if (!store.Find(NodeKind::kEntity, id)) note(id);
    }
  }
  if (!cfg.Get("paths.corpus").empty()) {
    ASSIGN_OR_RETURN(CorpusOptions opts, cfg.Corpus());
    ASSIGN_OR_RETURN(CorpusSnapshot corpus,
                     LoadCorpus(cfg.Get("paths.corpus"), opts));
    for (const MentionRecord& m : corpus.mentions) {
      if (!store.Find(NodeKind::kMention, m.mention_id)) note(m.mention_id);
    }
  }
  if (missing > 0) {
    return absl::NotFoundError(StrCat(missing, " ids lack vectors, first ",
                                      first_missing));
  }
  RETURN_IF_ERROR(EnsureOutDir(cfg));
  RETURN_IF_ERROR(WriteEmbeddingsBinary(store, NodeKind::kEntity,
                                        OutPath(cfg, "entities.temb")));
  RETURN_IF_ERROR(WriteEmbeddingsBinary(store, NodeKind::kMention,
                                        OutPath(cfg, "mentions.temb")));
  Json counts{{"dim", store.dim()},
              {"entities", store.size(NodeKind::kEntity)},
              {"mentions", store.size(NodeKind::kMention)}};
  *inv.out << counts.dump() << "\n";
  return WriteManifest(inv, {"entities.temb", "mentions.temb"}, counts);
}

inline absl::Status RunTrain(const Invocation& inv) {
  const RunConfig& cfg = inv.config;
  ASSIGN_OR_RETURN(TrainerConfig trainer, cfg.Trainer());
  ASSIGN_OR_RETURN(Inputs in, LoadLinkInputs(cfg));
  RETURN_IF_ERROR(EnsureOutDir(cfg));
  ASSIGN_OR_RETURN(ContinualResult result,
                   RunContinual(TrainingPart(in.corpus), in.vectors, trainer,
                                OutPath(cfg, "checkpoints")));
  const std::filesystem::path params_dir = OutPath(cfg, "params");
  std::filesystem::create_directories(params_dir);
  RETURN_IF_ERROR(WriteEmbeddingsBinary(
      result.params, NodeKind::kEntity, (params_dir / "entities.temb").string()));
  RETURN_IF_ERROR(WriteEmbeddingsBinary(
      result.params, NodeKind::kMention, (params_dir / "mentions.temb").string()));
  const Json summary = TrainingSummary(result);
  RETURN_IF_ERROR(WriteTextFile(OutPath(cfg, "training.json"),
                                summary.dump(2) + "\n"));
  *inv.out << Json{{"segments", result.segments.size()},
                   {"trainer_hash", trainer.Hash()}}.dump() << "\n";
  return WriteManifest(inv, {"checkpoints", "params", "training.json"},
                       {{"trainer", trainer.ToJson()}});
}

inline absl::Status RunLink(const Invocation& inv) {
  const RunConfig& cfg = inv.config;
  ASSIGN_OR_RETURN(TrainerConfig trainer, cfg.Trainer());
  ASSIGN_OR_RETURN(JaccardMode jaccard, cfg.Jaccard());
  RETURN_IF_ERROR(CheckOptionalPath(cfg, "paths.qa"));
  RETURN_IF_ERROR(CheckOptionalPath(cfg, "paths.qa_embeddings"));
  ASSIGN_OR_RETURN(Inputs in, LoadLinkInputs(cfg));
  ASSIGN_OR_RETURN(ContinualResult result,
                   RunContinual(in.corpus, in.vectors, trainer));
  ASSIGN_OR_RETURN(std::vector<PredictionRecord> records,
                   BuildPredictionRecords(in.corpus, in.catalog, result,
                                          jaccard));
  RETURN_IF_ERROR(EnsureOutDir(cfg));
  std::vector<std::string> outputs = {"predictions.jsonl", "records.jsonl",
                                      "segments.json"};
  RETURN_IF_ERROR(WriteTextFile(OutPath(cfg, "predictions.jsonl"),
                                PredictionsJsonl(result)));
  RETURN_IF_ERROR(WriteTextFile(OutPath(cfg, "records.jsonl"),
                                PredictionRecordsJsonl(records)));
  RETURN_IF_ERROR(WriteTextFile(OutPath(cfg, "segments.json"),
                                TrainingSummary(result).dump(2) + "\n"));
  const bool with_qa =
      !cfg.Get("paths.qa").empty() && !cfg.Get("paths.qa_embeddings").empty();
  if (with_qa) {
    ASSIGN_OR_RETURN(std::vector<QAPair> qa, LoadQaPairs(cfg.Get("paths.qa")));
    ASSIGN_OR_RETURN(EmbeddingStore qa_vectors,
                     LoadEmbeddingsJsonl(cfg.Get("paths.qa_embeddings")));
    const ClusterStateResolver resolver(&result.final_state, &qa_vectors);
    std::string lines;
    for (const QAPair& p : qa) {
      ASSIGN_OR_RETURN(std::string entity, resolver.Resolve(p));
      lines += Json{{"qa_id", p.qa_id}, {"entity", entity}}.dump() + "\n";
    }
    RETURN_IF_ERROR(WriteTextFile(OutPath(cfg, "qa_resolutions.jsonl"), lines));
    outputs.push_back("qa_resolutions.jsonl");
  }
  std::size_t correct = 0;
  for (const PredictionRecord& r : records) correct += r.ranked[0] == r.gold;
  *inv.out << Json{{"test_mentions", records.size()},
                   {"top1_correct", correct}}.dump() << "\n";
  return WriteManifest(inv, outputs, {{"trainer", trainer.ToJson()}});
}

inline absl::Status RunEval(const Invocation& inv) {
  const RunConfig& cfg = inv.config;
  RETURN_IF_ERROR(CheckOptionalPath(cfg, "paths.predictions"));
  RETURN_IF_ERROR(CheckOptionalPath(cfg, "paths.qa_predictions"));
  if (cfg.Get("paths.predictions").empty() &&
      cfg.Get("paths.qa_predictions").empty()) {
    return absl::InvalidArgumentError(
        "eval needs paths.predictions or paths.qa_predictions");
  }
  ASSIGN_OR_RETURN(std::vector<int> ns, cfg.RecallNs());
  ASSIGN_OR_RETURN(ReportFormat format, cfg.Format());
  MetricsReport report;
  if (!cfg.Get("paths.predictions").empty()) {
    ASSIGN_OR_RETURN(std::vector<PredictionRecord> records,
                     LoadPredictionRecords(cfg.Get("paths.predictions")));
    if (records.empty()) {
      return absl::InvalidArgumentError("prediction file has no records");
    }
    ASSIGN_OR_RETURN(report, BuildLinkingReport(records, ns));
  }
  if (!cfg.Get("paths.qa_predictions").empty()) {
    ASSIGN_OR_RETURN(std::vector<QaPrediction> preds,
                     LoadQaPredictions(cfg.Get("paths.qa_predictions")));
    report.qa = AggregateQa(preds);
  }
  RETURN_IF_ERROR(EnsureOutDir(cfg));
  const bool csv = format == ReportFormat::kCsv;
  const std::string name = csv ? "report.csv" : "report.json";
  RETURN_IF_ERROR(EmitReport(report, format, OutPath(cfg, name)));
  std::vector<std::string> outputs = {name};
  if (csv) {
    outputs.push_back("report.recall.csv");
    outputs.push_back("report.qa.csv");
    // The JSON form is what `report` reads back.
    RETURN_IF_ERROR(EmitReport(report, ReportFormat::kJson,
                               OutPath(cfg, "report.json")));
    outputs.push_back("report.json");
  }
  if (const AccuracyRow* all = report.FindAccuracy(kAllGroup, 0)) {
    *inv.out << Json{{"accuracy", all->accuracy},
                     {"n_mentions", all->n_mentions}}.dump() << "\n";
  }
  return WriteManifest(inv, outputs);
}

inline absl::StatusOr<std::unique_ptr<GenerationClient>> MakeGenerator(
    const RunConfig& cfg, const std::vector<QAPair>& pairs) {
  const std::string& backend = cfg.Get("generator.backend");
  if (backend == "gold-echo") return std::make_unique<GoldEchoClient>(pairs);
  if (backend == "http") {
    ASSIGN_OR_RETURN(ClientConfig c, cfg.Client("generator"));
    return std::make_unique<HttpGenerationClient>(c);
  }
  return absl::InvalidArgumentError(
      StrCat("generator.backend: expected gold-echo or http, got ", backend));
}

inline absl::StatusOr<std::unique_ptr<EmbeddingClient>> MakeEmbedder(
    const RunConfig& cfg) {
  const std::string& backend = cfg.Get("embedder.backend");
  if (backend == "hashing") {
    ASSIGN_OR_RETURN(std::size_t dim, cfg.GetCount("embedder.dim"));
    if (dim == 0) return absl::InvalidArgumentError("embedder.dim must be > 0");
    return std::make_unique<HashingEmbedder>(dim);
  }
  if (backend == "http") {
    ASSIGN_OR_RETURN(ClientConfig c, cfg.Client("embedder"));
    return std::make_unique<HttpEmbeddingClient>(c);
  }
  return absl::InvalidArgumentError(
      StrCat("embedder.backend: expected hashing or http, got ", backend));
}

inline absl::Status RunQaCommand(const Invocation& inv) {
  const RunConfig& cfg = inv.config;
  RETURN_IF_ERROR(RequirePaths(cfg, {"paths.qa"}));
  ASSIGN_OR_RETURN(std::vector<PromptVariant> variants, cfg.Variants());
  bool need_docs = false;
  bool need_resolver = false;
  for (PromptVariant v : variants) {
    need_docs |= UsesRetrieval(v);
    need_resolver |= UsesResolution(v);
  }
  if (need_docs) RETURN_IF_ERROR(RequirePaths(cfg, {"paths.corpus"}));
  if (need_resolver) RETURN_IF_ERROR(RequirePaths(cfg, {"paths.qa_resolutions"}));
  RETURN_IF_ERROR(CheckOptionalPath(cfg, "paths.kb"));

  QaOptions opt;
  ASSIGN_OR_RETURN(opt.k, cfg.GetCount("qa.k"));
  ASSIGN_OR_RETURN(opt.parallelism, cfg.GetCount("qa.parallelism"));
  ASSIGN_OR_RETURN(opt.temperature, cfg.GetReal("generator.temperature"));
  ASSIGN_OR_RETURN(std::int64_t tokens, cfg.GetInt("generator.max_new_tokens"));
  opt.max_new_tokens = static_cast<int>(tokens);
  ASSIGN_OR_RETURN(std::size_t chunk_chars, cfg.GetCount("qa.chunk_chars"));
  ASSIGN_OR_RETURN(std::size_t overlap, cfg.GetCount("qa.chunk_overlap"));

  ASSIGN_OR_RETURN(std::vector<QAPair> pairs, LoadQaPairs(cfg.Get("paths.qa")));
  ASSIGN_OR_RETURN(std::unique_ptr<GenerationClient> generator,
                   MakeGenerator(cfg, pairs));
  QaDependencies deps;
  deps.generator = generator.get();

  std::unique_ptr<EmbeddingClient> embedder;
  VectorIndex index;
  std::map<ChunkId, std::string> chunk_text;
  if (need_docs) {
    ASSIGN_OR_RETURN(CorpusOptions copts, cfg.Corpus());
    ASSIGN_OR_RETURN(CorpusSnapshot corpus,
                     LoadCorpus(cfg.Get("paths.corpus"), copts));
    ASSIGN_OR_RETURN(std::vector<DocumentChunk> chunks,
                     ChunkDocuments(corpus.documents, chunk_chars, overlap));
    ASSIGN_OR_RETURN(embedder, MakeEmbedder(cfg));
    ASSIGN_OR_RETURN(index, BuildChunkIndex(chunks, *embedder));
    chunk_text = ChunkTextMap(chunks);
    deps.embedder = embedder.get();
    deps.index = &index;
    deps.chunk_text = &chunk_text;
  }
  std::unique_ptr<TableResolver> resolver;
  if (need_resolver) {
    std::map<std::string, std::string> table;
    RETURN_IF_ERROR(ForEachJsonLine(
        cfg.Get("paths.qa_resolutions"),
        [&](std::size_t line_no, const Json& rec) -> absl::Status {
          ASSIGN_OR_RETURN(std::string id,
                           RequiredField<std::string>(rec, "qa_id", line_no));
          ASSIGN_OR_RETURN(std::string e,
                           RequiredField<std::string>(rec, "entity", line_no));
          table[id] = e;
          return absl::OkStatus();
        }));
    resolver = std::make_unique<TableResolver>(std::move(table));
    deps.resolver = resolver.get();
  }
  EntityCatalog catalog;
  if (!cfg.Get("paths.kb").empty()) {
    ASSIGN_OR_RETURN(catalog, LoadKb(cfg.Get("paths.kb")));
    deps.catalog = &catalog;
  }

  std::vector<QaPrediction> all;
  std::size_t failures = 0;
  for (PromptVariant v : variants) {
    ASSIGN_OR_RETURN(std::vector<QaPrediction> preds,
                     RunQa(pairs, v, deps, opt));
    for (QaPrediction& p : preds) {
      failures += !p.ok();
      all.push_back(std::move(p));
    }
  }
  RETURN_IF_ERROR(EnsureOutDir(cfg));
  RETURN_IF_ERROR(WriteTextFile(OutPath(cfg, "qa_predictions.jsonl"),
                                QaPredictionsJsonl(all)));
  Json summary = Json::array();
  for (const QaRow& r : AggregateQa(all)) {
    if (r.segment == kAllGroup && r.split == "all" && r.resolution == "all") {
      summary.push_back(
          {{"variant", r.variant}, {"mean_f1", r.mean_f1}, {"count", r.count}});
    }
  }
  *inv.out << Json{{"qa", summary}, {"failures", failures}}.dump() << "\n";
  return WriteManifest(inv, {"qa_predictions.jsonl"},
                       {{"failures", failures}, {"pairs", pairs.size()}});
}

inline void PrintReport(const MetricsReport& report, std::ostream& out) {
  out << "segment\tbin\tn_mentions\taccuracy\n";
  for (const AccuracyRow& r : report.accuracy) {
    out << r.segment << "\t" << (r.bin == 0 ? std::string("all")
                                            : std::to_string(r.bin))
        << "\t" << r.n_mentions << "\t" << FormatReal(r.accuracy) << "\n";
  }
  if (!report.recall.empty()) {
    out << "\nsegment\tn\trecall\n";
    for (const RecallRow& r : report.recall) {
      out << r.segment << "\t" << r.n << "\t" << FormatReal(r.recall) << "\n";
    }
  }
  if (!report.qa.empty()) {
    out << "\nsegment\tvariant\tsplit\tresolution\tmean_f1\tcount\n";
    for (const QaRow& r : report.qa) {
      out << r.segment << "\t" << r.variant << "\t" << r.split << "\t"
          << r.resolution << "\t" << FormatReal(r.mean_f1) << "\t" << r.count
          << "\n";
    }
  }
}

inline absl::Status RunReport(const Invocation& inv) {
  const RunConfig& cfg = inv.config;
  RETURN_IF_ERROR(RequirePaths(cfg, {"paths.report"}));
  ASSIGN_OR_RETURN(ReportFormat format, cfg.Format());
  ASSIGN_OR_RETURN(MetricsReport report, ParseReport(cfg.Get("paths.report")));
  PrintReport(report, *inv.out);
  RETURN_IF_ERROR(EnsureOutDir(cfg));
  const std::string name =
      format == ReportFormat::kCsv ? "report.csv" : "report.json";
  RETURN_IF_ERROR(EmitReport(report, format, OutPath(cfg, name)));
  std::vector<std::string> outputs = {name};
  if (format == ReportFormat::kCsv) {
    outputs.push_back("report.recall.csv");
    outputs.push_back("report.qa.csv");
  }
  return WriteManifest(inv, outputs);
}

// Per-bin accuracy for the adaptive and static runs.
inline Json BinTable(const std::vector<PredictionRecord>& records) {
  Json out = Json::object();
  absl::StatusOr<std::map<std::string, Accuracy>> bins =
      LinkingAccuracy(records, GroupBy::kBin);
  if (!bins.ok()) return out;
  for (const auto& [bin, acc] : *bins) {
    out[bin] = {{"n", acc.total}, {"accuracy", acc.Percent()}};
  }
  return out;
}

inline absl::Status RunSynth(const Invocation& inv) {
  const RunConfig& cfg = inv.config;
  ASSIGN_OR_RETURN(SynthBenchConfig bench, cfg.SynthBench());
  ASSIGN_OR_RETURN(SynthBenchResult result, RunSynthBench(bench));
  RETURN_IF_ERROR(EnsureOutDir(cfg));
  Json per_seed = Json::array();
  for (std::size_t i = 0; i < bench.seeds.size(); ++i) {
    per_seed.push_back({{"seed", bench.seeds[i]},
                        {"adaptive", result.adaptive_accuracy[i]},
                        {"static", result.static_accuracy[i]}});
  }
  Json report{{"adaptive_alpha", bench.adaptive_alpha},
              {"static_alpha", bench.static_alpha},
              {"per_seed", per_seed},
              {"mean_adaptive", result.mean_adaptive},
              {"mean_static", result.mean_static},
              {"gain", result.gain},
              {"bins_adaptive", BinTable(result.adaptive_records)},
              {"bins_static", BinTable(result.static_records)}};
  RETURN_IF_ERROR(WriteTextFile(OutPath(cfg, "synth_report.json"),
                                report.dump(2) + "\n"));
  RETURN_IF_ERROR(EmitReport(result.report, ReportFormat::kJson,
                             OutPath(cfg, "report.json")));
  char line[160];
  std::snprintf(line, sizeof(line),
                "adaptive %.2f%%  static %.2f%%  gain %+.2fpp  (%zu seeds, "
                "%.1fs)\n",
                result.mean_adaptive, result.mean_static, result.gain,
                bench.seeds.size(), result.seconds);
  *inv.out << line;
  return WriteManifest(inv, {"report.json", "synth_report.json"});
}

inline const std::map<std::string,
                      std::pair<std::string, absl::Status (*)(const Invocation&)>>&
Commands() {
  static const auto* commands = new std::map<
      std::string, std::pair<std::string, absl::Status (*)(const Invocation&)>>{
      {"ingest", {"Validate and normalize corpus, KB and QA files", &RunIngest}},
      {"embed-import",
       {"Check vector coverage and convert to the binary format",
        &RunEmbedImport}},
      {"train", {"Train over the training segments with checkpoints", &RunTrain}},
      {"link", {"Train, then link every test-segment mention", &RunLink}},
      {"eval", {"Score link and qa outputs into a metrics report", &RunEval}},
      {"qa", {"Run the QA variants", &RunQaCommand}},
      {"report", {"Print and re-emit a metrics report", &RunReport}},
      {"synth-bench",
       {"Adaptive vs static linking on synthetic drifting data", &RunSynth}},
  };
  return *commands;
}

}  // namespace internal

// argv[0] is the program name. Returns the process exit code.
inline int Dispatch(const std::vector<std::string>& argv, std::ostream& out,
                    std::ostream& err) {
  CLI::App app{"chronolink: temporal entity linking and entity-centric QA"};
  app.name(argv.empty() ? "chronolink" : argv[0]);
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", std::string(kChronolinkVersion));

  struct Options {
    std::string config;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;
  };
  std::map<std::string, Options> options;
  for (const auto& [name, entry] : internal::Commands()) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    Options& o = options[name];
    sub->add_option("--config", o.config, "Config file (key = value)");
    sub->add_option("--set", o.sets, "Override: key=value (repeatable)");
    for (const auto& [flag, key] : kFlagKeys) {
      sub->add_option_function<std::string>(
          std::string(flag),
          [&o, key = std::string(key)](const std::string& v) {
            o.flags[key] = v;
          },
          StrCat("Sets ", key));
    }
  }

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1),
                                argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kChronolinkVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    CLI::App* failed = &app;
    for (CLI::App* sub : app.get_subcommands()) failed = sub;
    err << failed->help();
    internal::EmitError(err, failed == &app ? "" : failed->get_name(),
                        "USAGE", e.what());
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  const Options& o = options[command];
  std::vector<ConfigMap> layers;
  if (!o.config.empty()) {
    absl::StatusOr<std::string> text = ReadTextFile(o.config);
    absl::StatusOr<ConfigMap> file =
        text.ok() ? ParseConfigText(*text) : text.status();
    if (!file.ok()) {
      internal::EmitError(err, command, "INVALID_CONFIG",
                          StrCat(o.config, ": ", file.status().message()));
      return kExitUsage;
    }
    // Relative paths in a config file are relative to that file.
    const std::filesystem::path base =
        std::filesystem::path(o.config).parent_path();
    for (auto& [key, value] : *file) {
      if (key.rfind("paths.", 0) == 0 && !value.empty() &&
          std::filesystem::path(value).is_relative()) {
        value = (base / value).lexically_normal().string();
      }
    }
    layers.push_back(*std::move(file));
  }
  ConfigMap overrides;
  for (const std::string& s : o.sets) {
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) {
      internal::EmitError(err, command, "INVALID_CONFIG",
                          StrCat("--set expects key=value, got ", s));
      return kExitUsage;
    }
    overrides[s.substr(0, eq)] = s.substr(eq + 1);
  }
  for (const auto& [key, value] : o.flags) overrides[key] = value;
  layers.push_back(std::move(overrides));
  absl::StatusOr<ConfigMap> resolved = ResolveConfig(layers);
  if (!resolved.ok()) {
    internal::EmitError(err, command, "INVALID_CONFIG",
                        std::string(resolved.status().message()));
    return kExitUsage;
  }
  const Invocation inv{command, RunConfig(*std::move(resolved)),
                                 &out};
  absl::Status status;
  try {
    status = internal::Commands().at(command).second(inv);
  } catch (const std::exception& e) {
    status = absl::InternalError(e.what());
  }
  if (!status.ok()) {
    internal::EmitError(err, command,
                        internal::StatusCodeName(status.code()),
                        std::string(status.message()));
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace chronolink::cli

#endif  // CHRONOLINK_CLI_DISPATCH_HPP_
