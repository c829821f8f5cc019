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

// Declarative run configuration: a TOML subset ([section] headers and
// key = value lines) resolved over built-in defaults, with flag overrides.

#ifndef CHRONOLINK_CONFIG_HPP_
#define CHRONOLINK_CONFIG_HPP_

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/corpus_io.hpp"
#include "chronolink/metrics/text_metrics.hpp"
#include "chronolink/rag/http_clients.hpp"
#include "chronolink/rag/prompts.hpp"
#include "chronolink/synthetic.hpp"
#include "chronolink/trainer/trainer.hpp"
#include "chronolink/util/jsonl.hpp"
#include "chronolink/util/sha256.hpp"
#include "chronolink/util/status_macros.hpp"
#include "chronolink/util/strings.hpp"

namespace chronolink {

inline constexpr std::string_view kChronolinkVersion = "0.1.0";

using ConfigMap = std::map<std::string, std::string, std::less<>>;

struct ConfigKey {
  std::string_view key;
  std::string_view default_value;
  std::string_view help;
};

inline constexpr ConfigKey kConfigKeys[] = {
    {"seed", "0", "run seed"},
    {"paths.corpus", "", "corpus JSONL"},
    {"paths.kb", "", "knowledge-base JSONL"},
    {"paths.embeddings", "",
     "embeddings JSONL, or a directory with entities.temb and mentions.temb"},
    {"paths.qa", "", "QA pairs JSONL"},
    {"paths.qa_embeddings", "", "QA mention vectors keyed by qa_id"},
    {"paths.qa_resolutions", "", "JSONL {qa_id, entity} for ER variants"},
    {"paths.predictions", "", "prediction records JSONL (from link)"},
    {"paths.qa_predictions", "", "QA predictions JSONL (from qa)"},
    {"paths.report", "", "metrics report JSON (from eval)"},
    {"paths.out", "out", "output directory"},
    {"corpus.window_start", "2023-05-01", "first day of the timeline"},
    {"corpus.window_end", "2024-04-30", "last day of the timeline"},
    {"corpus.months_per_segment", "2", "segment width in months"},
    {"corpus.num_train", "3", "leading training segments"},
    {"corpus.context_chars", "512", "context budget per side"},
    {"trainer.lambda", "inf", "training prune threshold"},
    {"trainer.k", "64", "negatives per mention"},
    {"trainer.alpha", "0.8", "entity weight in the cluster representation"},
    {"trainer.batch_size", "32", "mentions per batch"},
    {"trainer.learning_rate", "3e-5", "step size"},
    {"trainer.epochs", "5", "epochs per training segment"},
    {"trainer.mention_cap", "30", "sampled members per cluster"},
    {"trainer.optimizer", "gd", "gd or adam"},
    {"trainer.loss_link", "affinity", "affinity or weight"},
    {"graph.lambda", "inf", "inference prune threshold"},
    {"graph.k_ent", "16", "entity fan-in per mention"},
    {"graph.k_men", "4", "mention fan-in per mention"},
    {"metrics.ranked_n", "64", "ranked list length"},
    {"metrics.jaccard", "charset", "charset or bigram"},
    {"metrics.recall_ns", "1,2,4,8,16,32,64", "Recall@n cut-offs"},
    {"metrics.format", "json", "json or csv"},
    {"qa.variants", "LLM,LLM-ER,RaLM,RaLM-CoT,RaLM-ER", "variants to run"},
    {"qa.k", "3", "retrieved chunks"},
    {"qa.parallelism", "4", "concurrent pairs"},
    {"qa.chunk_chars", "1500", "chunk length"},
    {"qa.chunk_overlap", "10", "chunk overlap"},
    {"generator.backend", "gold-echo", "gold-echo or http"},
    {"generator.endpoint", "", "completions URL"},
    {"generator.model", "", "model id"},
    {"generator.temperature", "0.3", "answer temperature"},
    {"generator.max_new_tokens", "30", "answer token budget"},
    {"generator.timeout_ms", "30000", "per-call timeout"},
    {"generator.retries", "2", "retries per call"},
    {"generator.api_key_env", "OPENAI_API_KEY", "env var holding the key"},
    {"embedder.backend", "hashing", "hashing or http"},
    {"embedder.dim", "256", "hashing embedder dimension"},
    {"embedder.endpoint", "", "embeddings URL"},
    {"embedder.model", "", "model id"},
    {"embedder.timeout_ms", "30000", "per-call timeout"},
    {"embedder.retries", "2", "retries per call"},
    {"embedder.api_key_env", "OPENAI_API_KEY", "env var holding the key"},
    {"synth.num_entities", "20", "planted entities"},
    {"synth.num_segments", "4", "segments"},
    {"synth.num_train", "2", "training segments"},
    {"synth.mentions_per_segment", "100", "mentions per segment"},
    {"synth.dim", "16", "vector dimension"},
    {"synth.drift", "1.8", "mean drift per segment"},
    {"synth.noise", "0.3", "base mention scatter"},
    {"synth.spread", "2.0", "scatter growth with difficulty"},
    {"synth.num_seeds", "10", "consecutive seeds from the run seed"},
};

inline const ConfigKey* FindConfigKey(std::string_view key) {
  for (const ConfigKey& k : kConfigKeys) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

namespace internal {

inline std::string_view Trim(std::string_view s) {
  while (!s.empty() && IsAsciiSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsAsciiSpace(s.back())) s.remove_suffix(1);
  return s;
}

inline absl::StatusOr<std::string> ParseConfigValue(std::string_view raw,
                                                    std::size_t line_no) {
  if (raw.empty()) {
    return absl::InvalidArgumentError(StrCat("line ", line_no, ": empty value"));
  }
  if (raw.front() != '"') {
    const std::size_t hash = raw.find('#');
    return std::string(Trim(raw.substr(0, hash)));
  }
  std::string out;
  for (std::size_t i = 1; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c == '"') {
      const std::string_view rest = Trim(raw.substr(i + 1));
      if (!rest.empty() && rest.front() != '#') {
        return absl::InvalidArgumentError(
            StrCat("line ", line_no, ": trailing text after string"));
      }
      return out;
    }
    if (c == '\\' && i + 1 < raw.size()) {
      const char e = raw[++i];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default:
          return absl::InvalidArgumentError(
              StrCat("line ", line_no, ": unknown escape \\", e));
      }
      continue;
    }
    out += c;
  }
  return absl::InvalidArgumentError(
      StrCat("line ", line_no, ": unterminated string"));
}

}  // namespace internal

// Keys are validated against kConfigKeys.
inline absl::StatusOr<ConfigMap> ParseConfigText(std::string_view text) {
  ConfigMap out;
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = internal::Trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? "" : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      const std::size_t close = line.find(']');
      if (close == std::string_view::npos ||
          !internal::Trim(line.substr(close + 1)).empty() &&
              internal::Trim(line.substr(close + 1)).front() != '#') {
        return absl::InvalidArgumentError(
            StrCat("line ", line_no, ": bad section header"));
      }
      section = std::string(internal::Trim(line.substr(1, close - 1)));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      return absl::InvalidArgumentError(
          StrCat("line ", line_no, ": expected key = value"));
    }
    const std::string_view bare = internal::Trim(line.substr(0, eq));
    const std::string key =
        section.empty() ? std::string(bare) : StrCat(section, ".", bare);
    if (FindConfigKey(key) == nullptr) {
      return absl::InvalidArgumentError(
          StrCat("line ", line_no, ": unknown config key ", key));
    }
    ASSIGN_OR_RETURN(std::string value,
                     internal::ParseConfigValue(
                         internal::Trim(line.substr(eq + 1)), line_no));
    if (!out.emplace(key, std::move(value)).second) {
      return absl::InvalidArgumentError(
          StrCat("line ", line_no, ": duplicate key ", key));
    }
  }
  return out;
}

// Later layers win: defaults, then each map in order.
inline absl::StatusOr<ConfigMap> ResolveConfig(
    const std::vector<ConfigMap>& layers) {
  ConfigMap out;
  for (const ConfigKey& k : kConfigKeys) {
    out.emplace(std::string(k.key), std::string(k.default_value));
  }
  for (const ConfigMap& layer : layers) {
    for (const auto& [key, value] : layer) {
      if (FindConfigKey(key) == nullptr) {
        return absl::InvalidArgumentError(StrCat("unknown config key ", key));
      }
      out[key] = value;
    }
  }
  return out;
}

// Output locations do not enter the hash.
inline std::string ConfigHash(const ConfigMap& config) {
  Json j = Json::object();
  for (const auto& [key, value] : config) {
    if (key != "paths.out") j[key] = value;
  }
  return Sha256Hex(j.dump());
}

// Typed access to a resolved ConfigMap.
class RunConfig {
 public:
  explicit RunConfig(ConfigMap values) : values_(std::move(values)) {}

  const ConfigMap& values() const { return values_; }
  std::string Hash() const { return ConfigHash(values_); }

  const std::string& Get(std::string_view key) const {
    auto it = values_.find(key);
    static const std::string kEmpty;
    return it == values_.end() ? kEmpty : it->second;
  }

  absl::StatusOr<double> GetReal(std::string_view key) const {
    const std::string& v = Get(key);
    if (v == "inf" || v == "+inf") {
      return std::numeric_limits<double>::infinity();
    }
    if (v == "-inf") return -std::numeric_limits<double>::infinity();
    double x = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size() || std::isnan(x)) {
      return absl::InvalidArgumentError(
          StrCat(key, ": expected a real number, got \"", v, "\""));
    }
    return x;
  }

  absl::StatusOr<std::int64_t> GetInt(std::string_view key) const {
    const std::string& v = Get(key);
    std::int64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) {
      return absl::InvalidArgumentError(
          StrCat(key, ": expected an integer, got \"", v, "\""));
    }
    return x;
  }

  absl::StatusOr<std::size_t> GetCount(std::string_view key) const {
    ASSIGN_OR_RETURN(std::int64_t x, GetInt(key));
    if (x < 0) {
      return absl::InvalidArgumentError(StrCat(key, " must be >= 0"));
    }
    return static_cast<std::size_t>(x);
  }

  absl::StatusOr<std::vector<std::string>> GetList(std::string_view key) const {
    std::vector<std::string> out;
    std::string_view v = Get(key);
    while (!v.empty()) {
      const std::size_t comma = v.find(',');
      const std::string_view item = internal::Trim(v.substr(0, comma));
      if (item.empty()) {
        return absl::InvalidArgumentError(StrCat(key, ": empty list item"));
      }
      out.emplace_back(item);
      v = comma == std::string_view::npos ? "" : v.substr(comma + 1);
    }
    return out;
  }

  absl::StatusOr<std::uint64_t> Seed() const {
    ASSIGN_OR_RETURN(std::int64_t s, GetInt("seed"));
    if (s < 0) return absl::InvalidArgumentError("seed must be >= 0");
    return static_cast<std::uint64_t>(s);
  }

  absl::StatusOr<CorpusOptions> Corpus() const {
    CorpusOptions o;
    ASSIGN_OR_RETURN(o.rule.window_start, ParseDate(Get("corpus.window_start")));
    ASSIGN_OR_RETURN(o.rule.window_end, ParseDate(Get("corpus.window_end")));
    ASSIGN_OR_RETURN(std::int64_t months, GetInt("corpus.months_per_segment"));
    ASSIGN_OR_RETURN(std::int64_t train, GetInt("corpus.num_train"));
    o.rule.months_per_segment = static_cast<int>(months);
    o.rule.num_train = static_cast<int>(train);
    ASSIGN_OR_RETURN(o.context_chars, GetCount("corpus.context_chars"));
    return o;
  }

  absl::StatusOr<TrainerConfig> Trainer() const {
    TrainerConfig t;
    ASSIGN_OR_RETURN(t.lambda, GetReal("trainer.lambda"));
    ASSIGN_OR_RETURN(std::int64_t k, GetInt("trainer.k"));
    t.k = static_cast<int>(k);
    ASSIGN_OR_RETURN(t.alpha, GetReal("trainer.alpha"));
    ASSIGN_OR_RETURN(std::int64_t batch, GetInt("trainer.batch_size"));
    t.batch_size = static_cast<int>(batch);
    ASSIGN_OR_RETURN(t.learning_rate, GetReal("trainer.learning_rate"));
    ASSIGN_OR_RETURN(std::int64_t epochs, GetInt("trainer.epochs"));
    t.epochs = static_cast<int>(epochs);
    ASSIGN_OR_RETURN(t.mention_cap, GetCount("trainer.mention_cap"));
    ASSIGN_OR_RETURN(t.seed, Seed());
    const std::string& opt = Get("trainer.optimizer");
    if (opt == "gd") {
      t.optimizer = Optimizer::kGradientDescent;
    } else if (opt == "adam") {
      t.optimizer = Optimizer::kAdam;
    } else {
      return absl::InvalidArgumentError(
          StrCat("trainer.optimizer: expected gd or adam, got ", opt));
    }
    const std::string& link = Get("trainer.loss_link");
    if (link == "affinity") {
      t.loss_link = LossLink::kAffinity;
    } else if (link == "weight") {
      t.loss_link = LossLink::kWeight;
    } else {
      return absl::InvalidArgumentError(
          StrCat("trainer.loss_link: expected affinity or weight, got ", link));
    }
    ASSIGN_OR_RETURN(t.inference_lambda, GetReal("graph.lambda"));
    ASSIGN_OR_RETURN(t.k_ent, GetCount("graph.k_ent"));
    ASSIGN_OR_RETURN(t.k_men, GetCount("graph.k_men"));
    ASSIGN_OR_RETURN(t.ranked_n, GetCount("metrics.ranked_n"));
    RETURN_IF_ERROR(t.Validate());
    return t;
  }

  absl::StatusOr<JaccardMode> Jaccard() const {
    const std::string& v = Get("metrics.jaccard");
    if (v == "charset") return JaccardMode::kCharSet;
    if (v == "bigram") return JaccardMode::kBigram;
    return absl::InvalidArgumentError(
        StrCat("metrics.jaccard: expected charset or bigram, got ", v));
  }

  absl::StatusOr<ReportFormat> Format() const {
    const std::string& v = Get("metrics.format");
    if (v == "json") return ReportFormat::kJson;
    if (v == "csv") return ReportFormat::kCsv;
    return absl::InvalidArgumentError(
        StrCat("metrics.format: expected json or csv, got ", v));
  }

  absl::StatusOr<std::vector<int>> RecallNs() const {
    ASSIGN_OR_RETURN(std::vector<std::string> items,
                     GetList("metrics.recall_ns"));
    std::vector<int> ns;
    for (const std::string& item : items) {
      int n = 0;
      const auto [p, ec] =
          std::from_chars(item.data(), item.data() + item.size(), n);
      if (ec != std::errc() || p != item.data() + item.size() || n < 1) {
        return absl::InvalidArgumentError(
            StrCat("metrics.recall_ns: bad entry \"", item, "\""));
      }
      ns.push_back(n);
    }
    if (ns.empty()) {
      return absl::InvalidArgumentError("metrics.recall_ns is empty");
    }
    return ns;
  }

  absl::StatusOr<std::vector<PromptVariant>> Variants() const {
    ASSIGN_OR_RETURN(std::vector<std::string> items, GetList("qa.variants"));
    std::vector<PromptVariant> out;
    for (const std::string& item : items) {
      ASSIGN_OR_RETURN(PromptVariant v, ParseVariant(item));
      out.push_back(v);
    }
    if (out.empty()) return absl::InvalidArgumentError("qa.variants is empty");
    return out;
  }

  // prefix is "generator" or "embedder".
  absl::StatusOr<ClientConfig> Client(std::string_view prefix) const {
    ClientConfig c;
    c.endpoint = Get(StrCat(prefix, ".endpoint"));
    c.model = Get(StrCat(prefix, ".model"));
    c.api_key_env = Get(StrCat(prefix, ".api_key_env"));
    ASSIGN_OR_RETURN(std::int64_t timeout, GetInt(StrCat(prefix, ".timeout_ms")));
    ASSIGN_OR_RETURN(std::int64_t retries, GetInt(StrCat(prefix, ".retries")));
    c.timeout_ms = static_cast<int>(timeout);
    c.retries = static_cast<int>(retries);
    if (prefix == "generator") {
      ASSIGN_OR_RETURN(c.temperature, GetReal("generator.temperature"));
      ASSIGN_OR_RETURN(std::int64_t tokens, GetInt("generator.max_new_tokens"));
      c.max_new_tokens = static_cast<int>(tokens);
    }
    RETURN_IF_ERROR(c.Validate());
    return c;
  }

  absl::StatusOr<SynthBenchConfig> SynthBench() const {
    SynthBenchConfig b;
    ASSIGN_OR_RETURN(std::int64_t ne, GetInt("synth.num_entities"));
    ASSIGN_OR_RETURN(std::int64_t ns, GetInt("synth.num_segments"));
    ASSIGN_OR_RETURN(std::int64_t nt, GetInt("synth.num_train"));
    ASSIGN_OR_RETURN(std::int64_t mps, GetInt("synth.mentions_per_segment"));
    ASSIGN_OR_RETURN(std::int64_t dim, GetInt("synth.dim"));
    b.corpus.num_entities = static_cast<int>(ne);
    b.corpus.num_segments = static_cast<int>(ns);
    b.corpus.num_train = static_cast<int>(nt);
    b.corpus.mentions_per_segment = static_cast<int>(mps);
    b.corpus.dim = static_cast<int>(dim);
    ASSIGN_OR_RETURN(b.corpus.drift, GetReal("synth.drift"));
    ASSIGN_OR_RETURN(b.corpus.noise, GetReal("synth.noise"));
    ASSIGN_OR_RETURN(b.corpus.spread, GetReal("synth.spread"));
    ASSIGN_OR_RETURN(b.trainer, Trainer());
    b.adaptive_alpha = b.trainer.alpha;
    ASSIGN_OR_RETURN(std::uint64_t seed, Seed());
    ASSIGN_OR_RETURN(std::int64_t n, GetInt("synth.num_seeds"));
    if (n < 1) return absl::InvalidArgumentError("synth.num_seeds must be >= 1");
    b.seeds.clear();
    for (std::int64_t i = 0; i < n; ++i) b.seeds.push_back(seed + i);
    return b;
  }

 private:
  ConfigMap values_;
};

}  // namespace chronolink

#endif  // CHRONOLINK_CONFIG_HPP_
