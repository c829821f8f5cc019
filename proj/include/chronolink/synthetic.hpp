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

// Planted-cluster corpus whose entity centers drift between segments, plus
// the benchmark comparing continual cluster representations with static
// entity embeddings on it.

#ifndef CHRONOLINK_SYNTHETIC_HPP_
#define CHRONOLINK_SYNTHETIC_HPP_

#include <chrono>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "chronolink/embedding.hpp"
#include "chronolink/metrics/report.hpp"
#include "chronolink/predictions.hpp"
#include "chronolink/records.hpp"
#include "chronolink/trainer/continual.hpp"
#include "chronolink/util/status_macros.hpp"

namespace chronolink {

struct SynthConfig {
  int num_entities = 20;
  int num_segments = 4;
  int num_train = 2;
  int mentions_per_segment = 100;
  int dim = 16;
  double drift = 1.8;        // mean per-segment std of each center coordinate
  bool uniform_drift = false;  // otherwise each entity's rate is U(0, 2 drift)
  // Mentions sit between the entity's original and current center, weighted
  // by difficulty: canonical surfaces stay anchored, noisy aliases drift.
  bool anchor_by_difficulty = true;
  double noise = 0.3;        // base std of mention scatter
  double spread = 2.0;       // scatter growth with mention difficulty
  std::uint64_t seed = 0;
};

struct SynthData {
  CorpusSnapshot corpus;
  EntityCatalog catalog;
  ParameterSet embeddings;
};

namespace internal {

inline constexpr std::string_view kNameAlphabet = "abcdefghijklm";
inline constexpr std::string_view kNoiseAlphabet = "nopqrstuvwxyz0123456789";

inline char Pick(std::mt19937_64& rng, std::string_view alphabet) {
  return alphabet[UniformBelow(rng, alphabet.size())];
}

}  // namespace internal

// Each mention draws a difficulty u in [0, 1) that both widens its embedding
// scatter and replaces each surface character with probability u by one
// outside the name alphabet, so lexical overlap tracks embedding quality.
inline absl::StatusOr<SynthData> MakeSyntheticCorpus(const SynthConfig& config) {
  if (config.num_entities < 1 || config.num_segments < 1 || config.dim < 1 ||
      config.num_train < 0 || config.num_train > config.num_segments ||
      config.mentions_per_segment < 0) {
    return absl::InvalidArgumentError("invalid synthetic corpus shape");
  }
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SynthData data;

  std::vector<std::vector<double>> centers(config.num_entities);
  std::vector<std::vector<double>> origins;
  std::vector<double> rates(config.num_entities, config.drift);
  std::vector<std::string> names;
  std::set<std::string> used;
  for (int e = 0; e < config.num_entities; ++e) {
    std::string name;
    do {
      name.clear();
      for (int i = 0; i < 8; ++i) name.push_back(internal::Pick(rng, internal::kNameAlphabet));
    } while (!used.insert(name).second);
    names.push_back(name);
    if (!config.uniform_drift) rates[e] = 2.0 * config.drift * unit(rng);
    centers[e].resize(config.dim);
    for (double& x : centers[e]) x = normal(rng);
    const std::string id = StrCat("E", e < 10 ? "0" : "", e);
    RETURN_IF_ERROR(data.catalog.Add({id, name, StrCat("planted entity ", name), {}, false}));
    RETURN_IF_ERROR(data.embeddings.Insert(NodeKind::kEntity, id, EmbeddingVector(centers[e])));
  }

  origins = centers;
  for (int t = 0; t < config.num_segments; ++t) {
    const std::string label = StrCat("s", t + 1);
    data.corpus.segments.push_back(
        {label, t, t < config.num_train ? Phase::kTrain : Phase::kTest});
    // The catalog predates the timeline, so centers move before every
    // segment including the first.
    for (int e = 0; e < config.num_entities; ++e) {
      for (double& x : centers[e]) x += rates[e] * normal(rng);
    }
    for (int i = 0; i < config.mentions_per_segment; ++i) {
      const int e = static_cast<int>(UniformBelow(rng, config.num_entities));
      const double u = unit(rng);
      std::vector<double> v(config.dim);
      const double sigma = config.noise * (0.25 + config.spread * u);
      const double pull = config.anchor_by_difficulty ? u : 1.0;
      for (int d = 0; d < config.dim; ++d) {
        v[d] = origins[e][d] + pull * (centers[e][d] - origins[e][d]) + sigma * normal(rng);
      }
      std::string surface = names[e];
      for (char& c : surface) {
        if (unit(rng) < u) c = internal::Pick(rng, internal::kNoiseAlphabet);
      }
      const std::string suffix = StrCat(label, "-", i < 100 ? (i < 10 ? "00" : "0") : "", i);
      const std::string doc_id = StrCat("d", suffix);
      const std::string mention_id = StrCat("m", suffix);
      const std::string left = "news about ";
      const std::string right = " today.";
      data.corpus.documents[doc_id] = {doc_id, left + surface + right, "", label};
      MentionRecord m;
      m.mention_id = mention_id;
      m.doc_id = doc_id;
      m.surface = surface;
      m.start = left.size();
      m.end = left.size() + surface.size();
      m.left_context = left;
      m.right_context = right;
      m.gold_entity = StrCat("E", e < 10 ? "0" : "", e);
      m.segment = label;
      data.corpus.mentions.push_back(std::move(m));
      RETURN_IF_ERROR(data.embeddings.Insert(NodeKind::kMention, mention_id,
                                             EmbeddingVector(std::move(v)), label));
    }
  }
  data.embeddings.Freeze();
  return data;
}

struct SynthBenchConfig {
  SynthConfig corpus;
  TrainerConfig trainer;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  double adaptive_alpha = kDefaultAlpha;
  double static_alpha = 1.0;
};

struct SynthBenchResult {
  std::vector<double> adaptive_accuracy;  // percent, per seed
  std::vector<double> static_accuracy;
  double mean_adaptive = 0.0;
  double mean_static = 0.0;
  double gain = 0.0;  // percentage points
  double seconds = 0.0;
  std::vector<PredictionRecord> adaptive_records;  // all seeds, for binning
  std::vector<PredictionRecord> static_records;
  MetricsReport report;  // adaptive run
};

inline double TopOneAccuracy(const std::vector<PredictionRecord>& records) {
  if (records.empty()) return 0.0;
  std::size_t ok = 0;
  for (const PredictionRecord& r : records) ok += r.ranked.front() == r.gold;
  return 100.0 * static_cast<double>(ok) / static_cast<double>(records.size());
}

inline absl::StatusOr<SynthBenchResult> RunSynthBench(const SynthBenchConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  SynthBenchResult result;
  for (std::uint64_t seed : config.seeds) {
    SynthConfig corpus_config = config.corpus;
    corpus_config.seed = seed;
    ASSIGN_OR_RETURN(SynthData data, MakeSyntheticCorpus(corpus_config));
    for (const bool adaptive : {true, false}) {
      TrainerConfig trainer = config.trainer;
      trainer.seed = seed;
      trainer.alpha = adaptive ? config.adaptive_alpha : config.static_alpha;
      ASSIGN_OR_RETURN(ContinualResult run, RunContinual(data.corpus, data.embeddings, trainer));
      ASSIGN_OR_RETURN(std::vector<PredictionRecord> records,
                       BuildPredictionRecords(data.corpus, data.catalog, run));
      for (PredictionRecord& r : records) r.mention_id = StrCat(seed, ":", r.mention_id);
      (adaptive ? result.adaptive_accuracy : result.static_accuracy)
          .push_back(TopOneAccuracy(records));
      auto& all = adaptive ? result.adaptive_records : result.static_records;
      all.insert(all.end(), records.begin(), records.end());
    }
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  result.mean_adaptive = mean(result.adaptive_accuracy);
  result.mean_static = mean(result.static_accuracy);
  result.gain = result.mean_adaptive - result.mean_static;
  ASSIGN_OR_RETURN(result.report, BuildLinkingReport(result.adaptive_records));
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace chronolink

#endif  // CHRONOLINK_SYNTHETIC_HPP_
