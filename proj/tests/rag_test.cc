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

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "chronolink/rag/chunking.hpp"
#include "chronolink/rag/clients.hpp"
#include "chronolink/rag/http_clients.hpp"
#include "chronolink/rag/index.hpp"
#include "chronolink/rag/prompts.hpp"
#include "chronolink/rag/qa.hpp"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace chronolink {
namespace {

using ::chronolink::testing::Slurp;
using ::testing::HasSubstr;

// ---------------------------------------------------------------- prompts

TEST(PromptTest, LlmTemplate) {
  auto p = BuildPrompt(PromptVariant::kLlm, {"Who won?"});
  CHRONOLINK_ASSERT_OK(p);
  EXPECT_EQ(*p,
            "Given a question, please provide a short answer.\n"
            "Question: Who won?\nAnswer:");
}

TEST(PromptTest, RalmErTemplateOrder) {
  PromptInputs in{"Where did the Red Devils play?", "the Red Devils",
                  "Manchester United F.C.",
                  std::vector<std::string>{"c1", "c2", "c3"}};
  auto p = BuildPrompt(PromptVariant::kRalmEr, in);
  CHRONOLINK_ASSERT_OK(p);
  EXPECT_EQ(*p,
            "Context: c1\nc2\nc3\n"
            "The mention the Red Devils may also be referred to as "
            "Manchester United F.C.. Given a question, please provide a "
            "short answer.\n"
            "Question: Where did the Red Devils play?\nAnswer:");
}

TEST(PromptTest, OtherVariants) {
  PromptInputs in{"Q?", "M", "E", std::vector<std::string>{"a", "b"}};
  EXPECT_EQ(*BuildPrompt(PromptVariant::kLlmEr, in),
            "The mention M may also be referred to as E. Given a question, "
            "please provide a short answer.\nQuestion: Q?\nAnswer:");
  EXPECT_EQ(*BuildPrompt(PromptVariant::kRalm, in),
            "Context: a\nb\nGiven a question, please provide a short "
            "answer.\nQuestion: Q?\nAnswer:");
  EXPECT_EQ(*BuildPrompt(PromptVariant::kRalmCot, in),
            "Context: a\nb\nQuestion: Q? M is");
  EXPECT_EQ(*BuildCotSecondPrompt(in, "E"),
            "Context: a\nb\nQuestion: Q? M is E.\nAnswer:");
}

TEST(PromptTest, MissingFieldsAreErrors) {
  PromptInputs no_entity{"Q?", "M", std::nullopt, std::nullopt};
  EXPECT_EQ(BuildPrompt(PromptVariant::kLlmEr, no_entity).status().code(),
            absl::StatusCode::kInvalidArgument);
  PromptInputs no_context{"Q?", "M", "E", std::nullopt};
  EXPECT_FALSE(BuildPrompt(PromptVariant::kRalm, no_context).ok());
  EXPECT_FALSE(BuildPrompt(PromptVariant::kRalmEr, no_context).ok());
  PromptInputs no_mention{"Q?", std::nullopt, std::nullopt,
                          std::vector<std::string>{"c"}};
  EXPECT_FALSE(BuildPrompt(PromptVariant::kRalmCot, no_mention).ok());
  EXPECT_FALSE(FillTemplate("{nope}", {}).ok());
}

TEST(PromptTest, SubstitutionIsSinglePass) {
  PromptInputs in{"What is {entity}?", "{question}", "E", std::nullopt};
  EXPECT_EQ(*BuildPrompt(PromptVariant::kLlmEr, in),
            "The mention {question} may also be referred to as E. Given a "
            "question, please provide a short answer.\nQuestion: What is "
            "{entity}?\nAnswer:");
}

TEST(PromptTest, ConstantsMatchAssetFiles) {
  for (const TemplateAsset& a : kTemplateAssets) {
    const std::string path =
        StrCat(CHRONOLINK_PROMPT_ASSET_DIR, "/", a.file);
    EXPECT_EQ(Slurp(path), a.text) << path;
  }
}

TEST(PromptTest, DatasetPrompts) {
  auto gen = BuildGenerateQaPrompt("Lionel_Messi", "ctx");
  CHRONOLINK_ASSERT_OK(gen);
  EXPECT_THAT(*gen, HasSubstr("Generate a Q&A pair about [Lionel_Messi]"));
  EXPECT_THAT(*gen, HasSubstr("format: {Question}{Answer}\n"));
  EXPECT_THAT(*gen, HasSubstr("{Where was [Lionel_Messi] born?}{Lionel Messi "
                              "was born in Rosario, Argentina.}"));
  auto filt = BuildFilterAmbiguousPrompt({"Man Utd", "United"},
                                         "Manchester_United_F.C.");
  CHRONOLINK_ASSERT_OK(filt);
  EXPECT_THAT(*filt, HasSubstr("Provided List: [“Man Utd”, “United”]\n"));
  EXPECT_THAT(*filt, HasSubstr("unambiguously refer to  without context."));
  auto ver = BuildVerifyMentionPrompt("Man Utd", "Manchester_United_F.C.");
  CHRONOLINK_ASSERT_OK(ver);
  EXPECT_EQ(*ver,
            "The provided mention Man Utd refers to Manchester_United_F.C. in "
            "the text.\nPlease determine whether the mention unambiguously "
            "refer to Manchester_United_F.C. without context.");
}

TEST(PromptPropertyTest, InjectiveAndStable) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> words = {"a", "b", "ab", "a b", " ", ""};
  auto pick = [&] { return words[rng() % words.size()]; };
  for (PromptVariant v : kAllPromptVariants) {
    std::map<std::string, std::tuple<std::string, std::string, std::string>>
        seen;
    for (int i = 0; i < 400; ++i) {
      // Fixed-width tags keep triples separable by the templates.
      const std::string q = "Q" + pick() + "?";
      const std::string m = "M" + pick() + "#";
      const std::string e = "E" + pick() + "#";
      PromptInputs in{q, m, e, std::vector<std::string>{"ctx"}};
      auto p1 = BuildPrompt(v, in);
      auto p2 = BuildPrompt(v, in);
      CHRONOLINK_ASSERT_OK(p1);
      ASSERT_EQ(*p1, *p2);
      auto key = std::make_tuple(q, UsesResolution(v) ||
                                            v == PromptVariant::kRalmCot
                                        ? m
                                        : "",
                                 UsesResolution(v) ? e : "");
      auto [it, inserted] = seen.emplace(*p1, key);
      if (!inserted) EXPECT_EQ(it->second, key) << VariantName(v);
    }
  }
}

TEST(PromptTest, VariantNamesRoundTrip) {
  for (PromptVariant v : kAllPromptVariants) {
    EXPECT_EQ(*ParseVariant(VariantName(v)), v);
  }
  EXPECT_FALSE(ParseVariant("GPT").ok());
}

// ------------------------------------------------------------ QA parsing

TEST(ParseQaGenTest, SampleReply) {
  auto r = ParseQaGen(
      "{Where was [Lionel_Messi] born?}{Lionel Messi was born in Rosario, "
      "Argentina.}");
  CHRONOLINK_ASSERT_OK(r);
  EXPECT_EQ(r->question, "Where was [Lionel_Messi] born?");
  EXPECT_EQ(r->answer, "Lionel Messi was born in Rosario, Argentina.");
  EXPECT_TRUE(r->warnings.empty());
}

TEST(ParseQaGenTest, Failures) {
  EXPECT_FALSE(ParseQaGen("no braces").ok());
  EXPECT_FALSE(ParseQaGen("{only one}").ok());
  EXPECT_FALSE(ParseQaGen("{a {b}}{c}").ok());
  EXPECT_FALSE(ParseQaGen("{a}{b").ok());
  EXPECT_FALSE(ParseQaGen("a}{b}{c}").ok());
}

TEST(ParseQaGenTest, ExtraGroupsWarn) {
  auto r = ParseQaGen("Sure! {q}\n{a} {extra}");
  CHRONOLINK_ASSERT_OK(r);
  EXPECT_EQ(r->question, "q");
  EXPECT_EQ(r->answer, "a");
  EXPECT_EQ(r->warnings.size(), 1u);
}

TEST(SubstituteMentionTest, ReplacesBracketedName) {
  EXPECT_EQ(*SubstituteMention("Where was [Lionel_Messi] born?", "La Pulga"),
            "Where was La Pulga born?");
  EXPECT_FALSE(SubstituteMention("no brackets", "x").ok());
  EXPECT_FALSE(SubstituteMention("[a] and [b]", "x").ok());
}

// -------------------------------------------------------------- chunking

std::vector<std::pair<std::size_t, std::size_t>> Ranges(
    const std::vector<DocumentChunk>& chunks) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const DocumentChunk& c : chunks) out.emplace_back(c.begin, c.end);
  return out;
}

TEST(ChunkTest, StrideArithmetic) {
  auto c = ChunkText("d", std::string(3000, 'x'));
  CHRONOLINK_ASSERT_OK(c);
  EXPECT_EQ(Ranges(*c),
            (std::vector<std::pair<std::size_t, std::size_t>>{
                {0, 1500}, {1490, 2990}, {2980, 3000}}));
  EXPECT_EQ((*c)[2].id, (ChunkId{"d", 2}));
  EXPECT_EQ(ChunkText("d", std::string(1500, 'x'))->size(), 1u);
  EXPECT_TRUE(ChunkText("d", "")->empty());
  EXPECT_FALSE(ChunkText("d", "abc", 10, 10).ok());
  EXPECT_FALSE(ChunkText("d", "abc", 10, 11).ok());
}

TEST(ChunkPropertyTest, ReconstructsDocument) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> alphabet = {"a", "b", " ", "é", "日", "🙂"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string doc;
    const std::size_t len = rng() % 200;
    for (std::size_t i = 0; i < len; ++i) doc += alphabet[rng() % 6];
    const std::size_t max = 1 + rng() % 40;
    const std::size_t overlap = rng() % max;
    auto chunks = ChunkText("d", doc, max, overlap);
    CHRONOLINK_ASSERT_OK(chunks);
    std::u32string rebuilt;
    for (std::size_t i = 0; i < chunks->size(); ++i) {
      const std::u32string cps = utf8::Decode((*chunks)[i].text);
      ASSERT_LE(cps.size(), max);
      ASSERT_EQ(cps.size(), (*chunks)[i].end - (*chunks)[i].begin);
      if (i + 1 < chunks->size()) {
        ASSERT_EQ(cps.size(), max);
        ASSERT_EQ((*chunks)[i].end - (*chunks)[i + 1].begin, overlap);
      }
      rebuilt += i == 0 ? cps : cps.substr(std::min(overlap, cps.size()));
    }
    ASSERT_EQ(utf8::Encode(rebuilt), doc) << "max=" << max << " ov=" << overlap;
  }
}

// ----------------------------------------------------------------- index

std::vector<ChunkId> BruteForceTopK(
    const std::vector<std::pair<ChunkId, EmbeddingVector>>& entries,
    const EmbeddingVector& q, std::size_t k) {
  std::vector<std::pair<double, ChunkId>> all;
  for (const auto& [id, v] : entries) {
    double s = 0;
    for (std::size_t i = 0; i < q.dim(); ++i) s += q[i] * v[i];
    all.push_back({-s, id});
  }
  std::sort(all.begin(), all.end());
  std::vector<ChunkId> out;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) {
    out.push_back(all[i].second);
  }
  return out;
}

TEST(VectorIndexTest, Basics) {
  VectorIndex empty;
  EXPECT_EQ(empty.Retrieve(EmbeddingVector{1.0}).status().code(),
            absl::StatusCode::kFailedPrecondition);

  VectorIndex one;
  CHRONOLINK_ASSERT_OK(one.Add({"d", 0}, EmbeddingVector{1.0, 0.0}));
  one.Freeze();
  auto r = one.Retrieve(EmbeddingVector{0.0, 1.0}, 5);
  CHRONOLINK_ASSERT_OK(r);
  ASSERT_EQ(r->size(), 1u);
  EXPECT_EQ((*r)[0].id, (ChunkId{"d", 0}));
  EXPECT_FALSE(one.Add({"d", 1}, EmbeddingVector{1.0, 0.0}).ok());
  EXPECT_FALSE(one.Retrieve(EmbeddingVector{1.0}).ok());
  EXPECT_FALSE(one.Retrieve(EmbeddingVector{1.0, 0.0}, 0).ok());
}

TEST(VectorIndexTest, OrthogonalQueryTiesById) {
  VectorIndex index;
  CHRONOLINK_ASSERT_OK(index.Add({"b", 0}, EmbeddingVector{1.0, 0.0}));
  CHRONOLINK_ASSERT_OK(index.Add({"a", 1}, EmbeddingVector{2.0, 0.0}));
  CHRONOLINK_ASSERT_OK(index.Add({"a", 0}, EmbeddingVector{3.0, 0.0}));
  EXPECT_FALSE(index.Add({"a", 0}, EmbeddingVector{3.0, 0.0}).ok());
  EXPECT_FALSE(index.Add({"c", 0}, EmbeddingVector{3.0}).ok());
  auto r = index.Retrieve(EmbeddingVector{0.0, 1.0}, 3);
  CHRONOLINK_ASSERT_OK(r);
  EXPECT_EQ((*r)[0].id, (ChunkId{"a", 0}));
  EXPECT_EQ((*r)[1].id, (ChunkId{"a", 1}));
  EXPECT_EQ((*r)[2].id, (ChunkId{"b", 0}));
  for (const auto& x : *r) EXPECT_EQ(x.score, 0.0);
}

TEST(VectorIndexPropertyTest, MatchesBruteForceScan) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 60;
    const std::size_t dim = 1 + rng() % 8;
    const bool coarse = trial % 2 == 0;  // small integer grid forces ties
    std::vector<std::pair<ChunkId, EmbeddingVector>> entries;
    VectorIndex index;
    for (std::size_t i = 0; i < n; ++i) {
      EmbeddingVector v(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        v[d] = coarse ? static_cast<double>(rng() % 3) : normal(rng);
      }
      ChunkId id{StrCat("doc", rng() % 7), i};
      entries.emplace_back(id, v);
      CHRONOLINK_ASSERT_OK(index.Add(id, v));
    }
    index.Freeze();
    const std::size_t planted = rng() % n;
    EmbeddingVector q = coarse ? entries[planted].second : entries[planted].second;
    for (std::size_t k : {std::size_t{1}, std::size_t{3}, n + 2}) {
      auto got = index.Retrieve(q, k);
      CHRONOLINK_ASSERT_OK(got);
      std::vector<ChunkId> ids;
      for (const auto& r : *got) ids.push_back(r.id);
      ASSERT_EQ(ids, BruteForceTopK(entries, q, k)) << "trial " << trial;
      for (std::size_t i = 1; i < got->size(); ++i) {
        ASSERT_GE((*got)[i - 1].score, (*got)[i].score);
      }
    }
  }
}

TEST(VectorIndexTest, PlantedNearestRanksFirst) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  VectorIndex index;
  std::vector<EmbeddingVector> vs;
  for (std::size_t i = 0; i < 50; ++i) {
    EmbeddingVector v(16);
    for (std::size_t d = 0; d < 16; ++d) v[d] = normal(rng);
    v = L2Normalized(v);
    vs.push_back(v);
    CHRONOLINK_ASSERT_OK(index.Add({"d", i}, v));
  }
  for (std::size_t i = 0; i < 50; ++i) {
    auto r = index.Retrieve(vs[i], 3);
    CHRONOLINK_ASSERT_OK(r);
    EXPECT_EQ((*r)[0].id.index, i);
  }
}

TEST(HashingEmbedderTest, DeterministicAndNormalized) {
  HashingEmbedder e(64);
  auto a = e.Embed("Red Devils win");
  auto b = e.Embed("red devils WIN");
  CHRONOLINK_ASSERT_OK(a);
  EXPECT_EQ(*a, *b);
  EXPECT_NEAR(a->Norm(), 1.0, 1e-12);
  EXPECT_EQ(e.Embed("")->Norm(), 0.0);
}

// ------------------------------------------------------------------- CoT

class RecordingClient : public GenerationClient {
 public:
  explicit RecordingClient(std::vector<std::string> replies)
      : replies_(std::move(replies)) {}
  absl::StatusOr<std::string> Generate(
      const GenerationRequest& r) const override {
    std::lock_guard<std::mutex> lock(mu_);
    calls_.push_back(r);
    if (calls_.size() > replies_.size()) {
      return absl::UnavailableError("out of replies");
    }
    return replies_[calls_.size() - 1];
  }
  std::vector<GenerationRequest> calls() const {
    std::lock_guard<std::mutex> lock(mu_);
    return calls_;
  }

 private:
  std::vector<std::string> replies_;
  mutable std::mutex mu_;
  mutable std::vector<GenerationRequest> calls_;
};

TEST(RunCotTest, SplicesFirstAnswer) {
  RecordingClient client({"X", "final"});
  auto r = RunCot("Who?", "the club", {"ctx"}, client);
  CHRONOLINK_ASSERT_OK(r);
  EXPECT_THAT(r->second_prompt, HasSubstr("the club is X."));
  EXPECT_EQ(r->answer, "final");
  const auto calls = client.calls();
  ASSERT_EQ(calls.size(), 2u);
  EXPECT_EQ(calls[0].temperature, 0.1);
  EXPECT_EQ(calls[0].max_new_tokens, 10);
  EXPECT_EQ(calls[1].temperature, 0.3);
  EXPECT_EQ(calls[1].max_new_tokens, 30);
  EXPECT_EQ(calls[0].prompt, r->first_prompt);
}

TEST(RunCotTest, EmptyFirstAnswerStaysWellFormed) {
  RecordingClient client({"", "a"});
  auto r = RunCot("Who?", "M", {"ctx"}, client);
  CHRONOLINK_ASSERT_OK(r);
  EXPECT_EQ(r->second_prompt, "Context: ctx\nQuestion: Who? M is .\nAnswer:");
}

TEST(RunCotTest, ErrorsCarryStage) {
  RecordingClient none({});
  auto r = RunCot("Q", "M", {"c"}, none);
  EXPECT_THAT(std::string(r.status().message()), HasSubstr("stage 1"));
  RecordingClient one({"x"});
  r = RunCot("Q", "M", {"c"}, one);
  EXPECT_THAT(std::string(r.status().message()), HasSubstr("stage 2"));
}

// --------------------------------------------------------------- run_qa

struct QaFixture {
  std::vector<QAPair> pairs;
  std::vector<DocumentChunk> chunks;
  std::map<ChunkId, std::string> text;
  VectorIndex index;
  HashingEmbedder embedder{128};
  EntityCatalog catalog;
  std::unique_ptr<TableResolver> resolver;

  QaFixture() {
    std::map<std::string, Document> docs;
    for (int d = 0; d < 6; ++d) {
      const std::string id = StrCat("doc", d);
      docs[id] = {id, StrCat("team", d, " won the cup in year ", 2000 + d,
                             " after a long season"),
                  "", "s1"};
    }
    chunks = *ChunkDocuments(docs, 40, 10);
    text = ChunkTextMap(chunks);
    index = *BuildChunkIndex(chunks, embedder);
    std::map<std::string, std::string> table;
    for (int i = 0; i < 6; ++i) {
      const std::string e = StrCat("E", i);
      (void)catalog.Add({e, StrCat("Team ", i), "desc", std::nullopt});
      QAPair qa{StrCat("q", i), StrCat("When did team", i, " win the cup?"),
                StrCat("team", i), e, StrCat(2000 + i),
                i < 3 ? "s1" : "s2", StrCat("doc", i)};
      pairs.push_back(qa);
      table[qa.qa_id] = i % 2 == 0 ? e : "E0";
    }
    pairs[5].evidence_doc = "missing_doc";
    resolver = std::make_unique<TableResolver>(table);
  }

  QaDependencies Deps(const GenerationClient* g) const {
    return {g, &embedder, &index, &text, resolver.get(), &catalog};
  }
};

TEST(RunQaTest, GoldEchoScoresPerfectlyForEveryVariant) {
  QaFixture fx;
  GoldEchoClient gold(fx.pairs);
  for (PromptVariant v : kAllPromptVariants) {
    auto preds = RunQa(fx.pairs, v, fx.Deps(&gold));
    CHRONOLINK_ASSERT_OK(preds);
    for (const QaPrediction& p : *preds) {
      EXPECT_TRUE(p.ok()) << p.error;
      EXPECT_EQ(p.f1, 1.0);
      EXPECT_EQ(p.prompt_sha256, Sha256Hex(p.prompt));
    }
    for (const QaRow& row : AggregateQa(*preds)) EXPECT_EQ(row.mean_f1, 1.0);
  }
}

TEST(RunQaTest, HitAndResolutionFlags) {
  QaFixture fx;
  GoldEchoClient gold(fx.pairs);
  auto preds = RunQa(fx.pairs, PromptVariant::kRalmEr, fx.Deps(&gold));
  CHRONOLINK_ASSERT_OK(preds);
  EXPECT_EQ((*preds)[5].hit, false);
  EXPECT_EQ((*preds)[0].resolution_ok, true);
  EXPECT_EQ((*preds)[1].resolution_ok, false);
  EXPECT_EQ((*preds)[2].resolution_ok, true);
  EXPECT_EQ((*preds)[1].resolved_entity, "E0");
  EXPECT_THAT((*preds)[1].prompt,
              HasSubstr("may also be referred to as Team 0."));

  auto llm = RunQa(fx.pairs, PromptVariant::kLlm, fx.Deps(&gold));
  EXPECT_FALSE((*llm)[0].hit.has_value());
  EXPECT_FALSE((*llm)[0].resolution_ok.has_value());
}

TEST(RunQaTest, HitMatchesBruteForceRetrieval) {
  QaFixture fx;
  GoldEchoClient gold(fx.pairs);
  auto preds = RunQa(fx.pairs, PromptVariant::kRalm, fx.Deps(&gold));
  CHRONOLINK_ASSERT_OK(preds);
  for (std::size_t i = 0; i < fx.pairs.size(); ++i) {
    auto q = fx.embedder.Embed(fx.pairs[i].question);
    auto top = fx.index.Retrieve(*q, 3);
    bool hit = false;
    for (const auto& r : *top) hit |= r.id.doc_id == fx.pairs[i].evidence_doc;
    EXPECT_EQ((*preds)[i].hit, hit) << i;
  }
}

TEST(RunQaTest, MissingDependenciesFailTheRun) {
  QaFixture fx;
  GoldEchoClient gold(fx.pairs);
  QaDependencies deps = fx.Deps(&gold);
  deps.resolver = nullptr;
  EXPECT_FALSE(RunQa(fx.pairs, PromptVariant::kLlmEr, deps).ok());
  EXPECT_TRUE(RunQa(fx.pairs, PromptVariant::kRalm, deps).ok());
  deps.index = nullptr;
  EXPECT_FALSE(RunQa(fx.pairs, PromptVariant::kRalm, deps).ok());
  EXPECT_FALSE(RunQa(fx.pairs, PromptVariant::kLlm, QaDependencies{}).ok());
}

TEST(RunQaTest, PerPairFailuresAreRecorded) {
  QaFixture fx;
  RecordingClient flaky({"2000", "2001"});
  QaOptions opt;
  opt.parallelism = 1;
  auto preds = RunQa(fx.pairs, PromptVariant::kLlm, fx.Deps(&flaky), opt);
  CHRONOLINK_ASSERT_OK(preds);
  EXPECT_TRUE((*preds)[0].ok());
  EXPECT_EQ((*preds)[0].f1, 1.0);
  EXPECT_FALSE((*preds)[2].ok());
  EXPECT_THAT(QaPredictionToJson((*preds)[2]).dump(), HasSubstr("\"error\""));
  auto rows = AggregateQa(*preds);
  for (const QaRow& r : rows) EXPECT_EQ(r.count <= 2, true);
}

TEST(RunQaTest, ParallelismDoesNotChangeOutput) {
  QaFixture fx;
  GoldEchoClient gold(fx.pairs);
  QaOptions serial;
  serial.parallelism = 1;
  QaOptions wide;
  wide.parallelism = 8;
  auto a = RunQa(fx.pairs, PromptVariant::kRalmCot, fx.Deps(&gold), serial);
  auto b = RunQa(fx.pairs, PromptVariant::kRalmCot, fx.Deps(&gold), wide);
  EXPECT_EQ(QaPredictionsJsonl(*a), QaPredictionsJsonl(*b));
}

TEST(RunQaTest, JsonlRoundTripAndAggregation) {
  QaFixture fx;
  FixedTextClient fixed("2001. And more.");
  auto preds = RunQa(fx.pairs, PromptVariant::kRalmEr, fx.Deps(&fixed));
  CHRONOLINK_ASSERT_OK(preds);
  testing::TempDir dir;
  const std::string path = dir.Write("qa.jsonl", QaPredictionsJsonl(*preds));
  auto loaded = LoadQaPredictions(path);
  CHRONOLINK_ASSERT_OK(loaded);
  EXPECT_EQ(AggregateQa(*loaded), AggregateQa(*preds));
  const Json first = QaPredictionToJson((*preds)[0]);
  for (const char* key : {"qa_id", "variant", "prompt_sha256", "prediction",
                          "f1", "hit", "resolution_ok"}) {
    EXPECT_TRUE(first.contains(key)) << key;
  }
  // Only pair q1 answers 2001.
  double all = -1;
  std::int64_t count = 0;
  for (const QaRow& r : AggregateQa(*preds)) {
    if (r.segment == "all" && r.split == "all" && r.resolution == "all") {
      all = r.mean_f1;
      count = r.count;
    }
  }
  EXPECT_EQ(count, 6);
  EXPECT_NEAR(all, 1.0 / 6.0, 1e-12);
}

TEST(ClusterStateResolverTest, PicksArgmaxEntity) {
  EmbeddingStore store;
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kEntity, "A", {1.0, 0.0}));
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kEntity, "B", {0.0, 1.0}));
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kMention, "q1", {0.2, 0.9}));
  auto state = ClusterState::Initialize(store, 0.8);
  CHRONOLINK_ASSERT_OK(state);
  ClusterStateResolver resolver(&*state, &store);
  QAPair qa;
  qa.qa_id = "q1";
  EXPECT_EQ(*resolver.Resolve(qa), "B");
  qa.qa_id = "q2";
  EXPECT_FALSE(resolver.Resolve(qa).ok());
}

// ------------------------------------------------------------------ HTTP

class FakeServer {
 public:
  FakeServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string Url(std::string_view path) const {
    return StrCat("http://127.0.0.1:", port_, path);
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpClientTest, CompletionRoundTripWithRetries) {
  std::atomic<int> hits{0};
  std::string seen_auth;
  Json seen_body;
  FakeServer fake;
  fake.server().Post("/v1/completions", [&](const httplib::Request& req,
                                            httplib::Response& res) {
    if (hits++ == 0) {
      res.status = 503;
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    seen_body = Json::parse(req.body);
    res.set_content(R"({"choices":[{"text":" Rosario"}]})",
                    "application/json");
  });
  ::setenv("CHRONOLINK_TEST_KEY", "sekret", 1);
  ClientConfig cfg;
  cfg.endpoint = fake.Url("/v1/completions");
  cfg.model = "m1";
  cfg.retries = 1;
  cfg.timeout_ms = 2000;
  cfg.api_key_env = "CHRONOLINK_TEST_KEY";
  HttpGenerationClient client(cfg);
  auto text = client.Generate({"P", 0.1, 10});
  CHRONOLINK_ASSERT_OK(text);
  EXPECT_EQ(*text, " Rosario");
  EXPECT_EQ(hits.load(), 2);
  EXPECT_EQ(seen_auth, "Bearer sekret");
  EXPECT_EQ(seen_body["model"], "m1");
  EXPECT_EQ(seen_body["prompt"], "P");
  EXPECT_EQ(seen_body["max_tokens"], 10);
  EXPECT_DOUBLE_EQ(seen_body["temperature"].get<double>(), 0.1);
}

TEST(HttpClientTest, ClientErrorsAreNotRetried) {
  std::atomic<int> hits{0};
  FakeServer fake;
  fake.server().Post("/gen", [&](const httplib::Request&,
                                 httplib::Response& res) {
    ++hits;
    res.status = 400;
  });
  ClientConfig cfg;
  cfg.endpoint = fake.Url("/gen");
  cfg.retries = 3;
  HttpGenerationClient client(cfg);
  EXPECT_EQ(client.Generate({"P"}).status().code(),
            absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(hits.load(), 1);
}

TEST(HttpClientTest, EmbeddingsAndMalformedReplies) {
  FakeServer fake;
  fake.server().Post("/emb", [](const httplib::Request&,
                                httplib::Response& res) {
    res.set_content(R"({"data":[{"embedding":[0.5,-1,2]}]})",
                    "application/json");
  });
  fake.server().Post("/bad", [](const httplib::Request&,
                                httplib::Response& res) {
    res.set_content("{not json", "application/json");
  });
  ClientConfig cfg;
  cfg.endpoint = fake.Url("/emb");
  auto v = HttpEmbeddingClient(cfg).Embed("text");
  CHRONOLINK_ASSERT_OK(v);
  EXPECT_EQ(*v, (EmbeddingVector{0.5, -1.0, 2.0}));
  cfg.endpoint = fake.Url("/bad");
  EXPECT_FALSE(HttpEmbeddingClient(cfg).Embed("t").ok());
  EXPECT_FALSE(HttpGenerationClient(cfg).Generate({"p"}).ok());
}

TEST(HttpClientTest, UnreachableEndpointAndBadUrls) {
  ClientConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1/x";
  cfg.retries = 0;
  cfg.timeout_ms = 500;
  EXPECT_EQ(HttpGenerationClient(cfg).Generate({"p"}).status().code(),
            absl::StatusCode::kUnavailable);
  EXPECT_FALSE(ParseUrl("localhost:80/x").ok());
  EXPECT_FALSE(ParseUrl("ftp://h/x").ok());
  auto u = ParseUrl("https://api.example.com/v1/completions");
  CHRONOLINK_ASSERT_OK(u);
  EXPECT_EQ(u->origin, "https://api.example.com");
  EXPECT_EQ(u->path, "/v1/completions");
}

}  // namespace
}  // namespace chronolink
