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
#include <cmath>
#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "chronolink/linking.hpp"
#include "chronolink/synthetic.hpp"
#include "chronolink/trainer/continual.hpp"
#include "chronolink/trainer/loss.hpp"
#include "chronolink/trainer/sampling.hpp"
#include "chronolink/trainer/trainer.hpp"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "gradient_check.hpp"
#include "test_util.hpp"

namespace chronolink {
namespace {

using ::chronolink::testing::TempDir;
using ::testing::UnorderedElementsAre;

LabeledEdge Edge(NodeKind kind, std::string s, std::string t, int label) {
  return {kind, std::move(s), std::move(t), label};
}

TEST(PositiveEdgesTest, RetainedEdgesOfTheTraceGraph) {
  AffinityGraph g;
  const std::size_t e = g.AddNode(NodeKind::kEntity, "E");
  const std::size_t m1 = g.AddNode(NodeKind::kMention, "m1");
  const std::size_t m2 = g.AddNode(NodeKind::kMention, "m2");
  CHRONOLINK_ASSERT_OK(g.AddEdge(e, m1, -5));
  CHRONOLINK_ASSERT_OK(g.AddEdge(e, m2, -4));
  CHRONOLINK_ASSERT_OK(g.AddEdge(m1, m2, -3));
  EXPECT_THAT(PositiveEdges(g, 0.0),
              UnorderedElementsAre(Edge(NodeKind::kEntity, "E", "m1", 1),
                                   Edge(NodeKind::kEntity, "E", "m2", 1)));
  EXPECT_TRUE(PositiveEdges(g, -10.0).empty());

  AffinityGraph single;
  CHRONOLINK_ASSERT_OK(single.AddEdge(single.AddNode(NodeKind::kEntity, "E"),
                                      single.AddNode(NodeKind::kMention, "m"), -1));
  EXPECT_THAT(PositiveEdges(single, 0.0),
              UnorderedElementsAre(Edge(NodeKind::kEntity, "E", "m", 1)));
}

class NegativeEdgesTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ASSERT_TRUE(params_.Insert(NodeKind::kEntity, "G", {1, 0}).ok());
    ASSERT_TRUE(params_.Insert(NodeKind::kEntity, "X", {0.5, 0}).ok());
    ASSERT_TRUE(params_.Insert(NodeKind::kEntity, "Y", {0.9, 0}).ok());
    ASSERT_TRUE(params_.Insert(NodeKind::kMention, "m", {1, 1}).ok());
    ASSERT_TRUE(params_.Insert(NodeKind::kMention, "c", {5, 5}).ok());
    ASSERT_TRUE(params_.Insert(NodeKind::kMention, "n1", {0, 0.2}).ok());
    ASSERT_TRUE(params_.Insert(NodeKind::kMention, "n2", {0, 0.7}).ok());
    state_ = *ClusterState::Initialize(params_, 0.8);
  }
  ParameterSet params_;
  ClusterState state_;
};

TEST_F(NegativeEdgesTest, HardestFromEachPool) {
  auto neg = NegativeEdges("m", "G", {"m", "c"}, {"m", "c", "n1", "n2"}, state_, params_, 2);
  CHRONOLINK_ASSERT_OK(neg);
  // Brute force: non-gold entity scores X=0.5, Y=0.9; non-coreferent mention
  // scores n1=0.2, n2=0.7.
  EXPECT_THAT(*neg, UnorderedElementsAre(Edge(NodeKind::kEntity, "Y", "m", 0),
                                         Edge(NodeKind::kMention, "n2", "m", 0)));
  auto odd = NegativeEdges("m", "G", {"m", "c"}, {"m", "c", "n1", "n2"}, state_, params_, 3);
  EXPECT_EQ(*odd, *neg);
}

TEST_F(NegativeEdgesTest, SmallPoolsTakenWhole) {
  auto neg = NegativeEdges("m", "G", {"m", "c"}, {"m", "c", "n1", "n2"}, state_, params_, 64);
  CHRONOLINK_ASSERT_OK(neg);
  EXPECT_EQ(neg->size(), 4);
  EXPECT_FALSE(NegativeEdges("m", "G", {"m"}, {}, state_, params_, 1).ok());
}

class LossTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ASSERT_TRUE(params_.Insert(NodeKind::kMention, "t", {1, 0}).ok());
    ASSERT_TRUE(params_.Insert(NodeKind::kMention, "zero", {0, 1}).ok());
    ASSERT_TRUE(params_.Insert(NodeKind::kMention, "pos", {2, 0}).ok());
    ASSERT_TRUE(params_.Insert(NodeKind::kMention, "neg", {-2, 0}).ok());
  }
  ParameterSet params_;
  ClusterState state_{0.8};
};

TEST_F(LossTest, LogisticExamples) {
  EXPECT_NEAR(*BatchLoss({Edge(NodeKind::kMention, "zero", "t", 1)}, {"t"}, state_, params_),
              std::log(2.0), 1e-12);
  EXPECT_NEAR(*BatchLoss({Edge(NodeKind::kMention, "zero", "t", 0)}, {"t"}, state_, params_),
              0.6931471805599453, 1e-12);
  const double expected = 2.0 * std::log1p(std::exp(-2.0));
  EXPECT_NEAR(expected, 0.2538560220, 1e-9);
  EXPECT_NEAR(*BatchLoss({Edge(NodeKind::kMention, "pos", "t", 1),
                          Edge(NodeKind::kMention, "neg", "t", 0)},
                         {"t"}, state_, params_),
              expected, 1e-12);
}

TEST_F(LossTest, AveragedOverBatchMentions) {
  const std::vector<LabeledEdge> edges = {Edge(NodeKind::kMention, "zero", "t", 1)};
  EXPECT_NEAR(*BatchLoss(edges, {"t", "pos"}, state_, params_), std::log(2.0) / 2, 1e-12);
  EXPECT_EQ(*BatchLoss(edges, {"pos"}, state_, params_), 0.0);
}

TEST_F(LossTest, WeightLinkFlipsTheSign) {
  const std::vector<LabeledEdge> edges = {Edge(NodeKind::kMention, "pos", "t", 1)};
  EXPECT_NEAR(*BatchLoss(edges, {"t"}, state_, params_, LossLink::kWeight),
              std::log1p(std::exp(2.0)), 1e-12);
}

TEST(LossGradientTest, PositiveEdgeFromZeroVector) {
  ParameterSet params;
  CHRONOLINK_ASSERT_OK(params.Insert(NodeKind::kMention, "u", {1, 0}));
  CHRONOLINK_ASSERT_OK(params.Insert(NodeKind::kMention, "v", {0, 0}));
  auto lg = ComputeLoss({Edge(NodeKind::kMention, "u", "v", 1)}, {"v"}, ClusterState(0.8), params);
  CHRONOLINK_ASSERT_OK(lg);
  const auto& dv = lg->gradient.at({NodeKind::kMention, "v"});
  EXPECT_NEAR(dv[0], -0.5, 1e-15);
  EXPECT_EQ(dv[1], 0.0);
  const auto fd = testing::FiniteDifferenceGradient(
      {Edge(NodeKind::kMention, "u", "v", 1)}, {"v"}, ClusterState(0.8), params,
      LossLink::kAffinity, 1e-6);
  EXPECT_NEAR(fd.at({NodeKind::kMention, "v"})[0], -0.5, 1e-8);
}

TEST(LossGradientTest, EmptyEdgeListHasZeroGradient) {
  ParameterSet params;
  CHRONOLINK_ASSERT_OK(params.Insert(NodeKind::kMention, "v", {0, 0}));
  auto lg = ComputeLoss({}, {"v"}, ClusterState(0.8), params);
  CHRONOLINK_ASSERT_OK(lg);
  EXPECT_EQ(lg->loss, 0.0);
  EXPECT_TRUE(lg->gradient.empty());
}

TEST(LossGradientTest, ZeroAffinityPairNormRatio) {
  ParameterSet params;
  CHRONOLINK_ASSERT_OK(params.Insert(NodeKind::kMention, "u", {3, 0}));
  CHRONOLINK_ASSERT_OK(params.Insert(NodeKind::kMention, "v", {0, 0.5}));
  auto lg = ComputeLoss({Edge(NodeKind::kMention, "u", "v", 1)}, {"v"}, ClusterState(0.8), params);
  CHRONOLINK_ASSERT_OK(lg);
  auto norm = [](const std::vector<double>& x) { return std::hypot(x[0], x[1]); };
  const double du = norm(lg->gradient.at({NodeKind::kMention, "u"}));
  const double dv = norm(lg->gradient.at({NodeKind::kMention, "v"}));
  EXPECT_NEAR(du, dv * 0.5 / 3.0, 1e-15);
}

TEST(LossGradientTest, MatchesCentralDifferences) {
  for (LossLink link : {LossLink::kAffinity, LossLink::kWeight}) {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
      const testing::GradientCase c = testing::MakeGradientCase(seed);
      auto lg = ComputeLoss(c.edges, c.batch, c.state, c.params, link);
      CHRONOLINK_ASSERT_OK(lg);
      const auto fd = testing::FiniteDifferenceGradient(c.edges, c.batch, c.state, c.params,
                                                        link, 1e-6);
      EXPECT_LT(testing::MaxRelativeError(lg->gradient, fd), 1e-4) << "seed " << seed;
    }
  }
}

SegmentTrainingData TwoMentionSegment(ParameterSet& params) {
  EXPECT_TRUE(params.Insert(NodeKind::kEntity, "E", {0.1, 0.2, -0.1}).ok());
  EXPECT_TRUE(params.Insert(NodeKind::kMention, "m1", {0.3, -0.2, 0.1}).ok());
  EXPECT_TRUE(params.Insert(NodeKind::kMention, "m2", {-0.1, 0.2, 0.4}).ok());
  return {{"m1", "m2"}, {{"m1", "E"}, {"m2", "E"}}};
}

TEST(TrainSegmentTest, LossDecreasesMonotonically) {
  for (Optimizer opt : {Optimizer::kGradientDescent, Optimizer::kAdam}) {
    ParameterSet params;
    const SegmentTrainingData data = TwoMentionSegment(params);
    TrainerConfig config;
    config.epochs = 50;
    config.batch_size = 2;
    config.learning_rate = opt == Optimizer::kAdam ? 0.01 : 0.1;
    config.optimizer = opt;
    auto stats = TrainSegment(config, data, *ClusterState::Initialize(params, 0.8), params);
    CHRONOLINK_ASSERT_OK(stats);
    ASSERT_EQ(stats->losses.size(), 50);
    for (std::size_t i = 1; i < stats->losses.size(); ++i) {
      EXPECT_LT(stats->losses[i], stats->losses[i - 1] + 1e-9) << "step " << i;
    }
    EXPECT_LT(stats->losses.back(), stats->losses.front());
  }
}

TEST(TrainSegmentTest, ZeroLearningRateLeavesParameters) {
  ParameterSet params;
  const SegmentTrainingData data = TwoMentionSegment(params);
  const ParameterSet before = params;
  TrainerConfig config;
  config.learning_rate = 0.0;
  CHRONOLINK_ASSERT_OK(TrainSegment(config, data, *ClusterState::Initialize(params, 0.8), params));
  EXPECT_EQ(params, before);
}

TEST(TrainSegmentTest, DefaultsAndErrors) {
  TrainerConfig config;
  EXPECT_EQ(config.batch_size, 32);
  EXPECT_EQ(config.learning_rate, 3e-5);
  EXPECT_EQ(config.epochs, 5);
  EXPECT_EQ(config.k, 64);
  EXPECT_EQ(config.mention_cap, 30);
  EXPECT_EQ(config.alpha, 0.8);
  CHRONOLINK_EXPECT_OK(config.Validate());
  config.k = 1;
  EXPECT_FALSE(config.Validate().ok());

  ParameterSet params;
  SegmentTrainingData data = TwoMentionSegment(params);
  data.gold_links.erase("m2");
  EXPECT_FALSE(TrainSegment(TrainerConfig{}, data, *ClusterState::Initialize(params, 0.8), params).ok());
}

SynthData SmallCorpus(std::uint64_t seed, int segments = 4, int train = 2) {
  SynthConfig c;
  c.num_entities = 6;
  c.num_segments = segments;
  c.num_train = train;
  c.mentions_per_segment = 30;
  c.dim = 8;
  c.seed = seed;
  return *MakeSyntheticCorpus(c);
}

TEST(RunContinualTest, SingleTrainSegmentAdoptsGoldMembership) {
  SynthData data = SmallCorpus(3, 1, 1);
  TrainerConfig config;
  config.learning_rate = 0.01;
  auto run = RunContinual(data.corpus, data.embeddings, config);
  CHRONOLINK_ASSERT_OK(run);
  std::map<std::string, std::set<std::string>> gold;
  for (const MentionRecord& m : data.corpus.mentions) gold[*m.gold_entity].insert(m.mention_id);
  for (const auto& [entity, cluster] : run->final_state.clusters()) {
    EXPECT_EQ(cluster.resolved, gold[entity]) << entity;
    std::vector<const EmbeddingVector*> members;
    for (const std::string& m : cluster.sampled) members.push_back(run->params.Find(NodeKind::kMention, m));
    EXPECT_EQ(cluster.cached_rep,
              *ClusterRepresentation(*run->params.Find(NodeKind::kEntity, entity), members, 0.8));
  }
  EXPECT_NE(run->params, data.embeddings.Thawed());
}

TEST(RunContinualTest, AlphaOneMatchesStaticBaseline) {
  SynthData data = SmallCorpus(5);
  TrainerConfig config;
  config.alpha = 1.0;
  config.epochs = 0;
  auto run = RunContinual(data.corpus, data.embeddings, config);
  CHRONOLINK_ASSERT_OK(run);
  const ClusterState fixed = *ClusterState::Initialize(data.embeddings, 1.0);
  for (const SegmentOutcome& s : run->segments) {
    if (s.segment.phase != Phase::kTest) continue;
    std::vector<std::string> mentions;
    for (const MentionRecord* m : data.corpus.MentionsIn(s.segment.label)) {
      mentions.push_back(m->mention_id);
    }
    auto graph = BuildInferenceGraph(mentions, fixed, data.embeddings);
    CHRONOLINK_ASSERT_OK(graph);
    auto links = ResolveSegment(*graph, PruneAndCluster(*graph, config.inference_lambda).partition,
                                fixed, data.embeddings, mentions);
    CHRONOLINK_ASSERT_OK(links);
    for (const std::string& m : mentions) {
      EXPECT_EQ(s.decisions.at(m).entity, links->at(m).entity) << m;
      auto baseline = RankedPrediction(links->at(m).entity,
                                       *data.embeddings.Find(NodeKind::kMention, m), fixed,
                                       config.ranked_n);
      EXPECT_EQ(s.ranked.at(m), *baseline) << m;
    }
  }
}

TEST(RunContinualTest, DeterministicPredictions) {
  SynthData data = SmallCorpus(8);
  TrainerConfig config;
  config.learning_rate = 0.01;
  auto a = RunContinual(data.corpus, data.embeddings, config);
  auto b = RunContinual(data.corpus, data.embeddings, config);
  CHRONOLINK_ASSERT_OK(a);
  CHRONOLINK_ASSERT_OK(b);
  EXPECT_EQ(PredictionsJsonl(*a), PredictionsJsonl(*b));
  EXPECT_FALSE(PredictionsJsonl(*a).empty());
}

TEST(RunContinualTest, StateDependsOnlyOnEarlierSegments) {
  SynthData data = SmallCorpus(9);
  TrainerConfig config;
  config.learning_rate = 0.01;
  auto base = RunContinual(data.corpus, data.embeddings, config);
  CHRONOLINK_ASSERT_OK(base);
  for (std::size_t t = 1; t < data.corpus.segments.size(); ++t) {
    // Rewrite the vectors and order of every mention from segment t on.
    SynthData changed = data;
    ParameterSet params;
    std::mt19937_64 rng(t);
    std::normal_distribution<double> normal;
    std::set<std::string> future;
    for (const auto& s : data.corpus.segments) {
      if (s.ordinal >= static_cast<int>(t)) {
        for (const MentionRecord* m : data.corpus.MentionsIn(s.label)) future.insert(m->mention_id);
      }
    }
    for (NodeKind kind : {NodeKind::kEntity, NodeKind::kMention}) {
      for (const auto& [id, entry] : data.embeddings.entries(kind)) {
        EmbeddingVector v = entry.vector;
        if (kind == NodeKind::kMention && future.count(id)) {
          for (double& x : v.mutable_values()) x = normal(rng);
        }
        CHRONOLINK_ASSERT_OK(params.Insert(kind, id, v, entry.segment));
      }
    }
    changed.embeddings = params;
    // Reverse the order of the future mentions; earlier ones keep their slots.
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < changed.corpus.mentions.size(); ++i) {
      if (future.count(changed.corpus.mentions[i].mention_id)) slots.push_back(i);
    }
    for (std::size_t a = 0, b = slots.size(); a + 1 < b; ++a, --b) {
      std::swap(changed.corpus.mentions[slots[a]], changed.corpus.mentions[slots[b - 1]]);
    }
    auto run = RunContinual(changed.corpus, changed.embeddings, config);
    CHRONOLINK_ASSERT_OK(run);
    EXPECT_EQ(run->segments[t].state_digest, base->segments[t].state_digest) << t;
  }
}

TEST(RunContinualTest, WritesCheckpointsPerSegment) {
  SynthData data = SmallCorpus(2);
  TempDir dir;
  TrainerConfig config;
  CHRONOLINK_ASSERT_OK(RunContinual(data.corpus, data.embeddings, config, dir.File("ckpt")));
  for (const TimeSegment& s : data.corpus.segments) {
    const std::string base = dir.File("ckpt/" + s.label);
    EmbeddingStore loaded;
    CHRONOLINK_EXPECT_OK(LoadEmbeddingsBinary(base + ".entities.temb", NodeKind::kEntity, loaded));
    CHRONOLINK_EXPECT_OK(LoadEmbeddingsBinary(base + ".mentions.temb", NodeKind::kMention, loaded));
    const Json manifest = Json::parse(testing::Slurp(base + ".manifest.json"));
    EXPECT_EQ(manifest["segment"], s.label);
    EXPECT_EQ(manifest["config_hash"], config.Hash());
    EXPECT_EQ(manifest["loss"].is_null(), s.phase == Phase::kTest);
  }
}

}  // namespace
}  // namespace chronolink
