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

#include <random>
#include <string>
#include <vector>

#include "chronolink/clustering.hpp"
#include "chronolink/linking.hpp"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace chronolink {
namespace {

using ::testing::ElementsAre;

ClusterState StaticState(const EmbeddingStore& store) {
  return *ClusterState::Initialize(store, 1.0);
}

TEST(RankCandidatesTest, DescendingAndTruncated) {
  EmbeddingStore store;
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kEntity, "A", {0.9}));
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kEntity, "B", {0.5}));
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kEntity, "C", {0.1}));
  ClusterState state = StaticState(store);
  auto top2 = RankCandidates({1.0}, state, 2);
  CHRONOLINK_ASSERT_OK(top2);
  ASSERT_EQ(top2->size(), 2);
  EXPECT_EQ((*top2)[0].id, "A");
  EXPECT_EQ((*top2)[1].id, "B");
  EXPECT_EQ(RankCandidates({1.0}, state, 10)->size(), 3);
  EXPECT_FALSE(RankCandidates({1.0}, state, 0).ok());
}

TEST(ResolveSegmentTest, ClusterMembersTakeTheirEntity) {
  EmbeddingStore store;
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kEntity, "E", {1, 0}));
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kEntity, "F", {0, 1}));
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kMention, "m1", {0, 1}));
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kMention, "m2", {0, 1}));
  ClusterState state = StaticState(store);
  AffinityGraph g;
  const std::size_t e = g.AddNode(NodeKind::kEntity, "E");
  const std::size_t m1 = g.AddNode(NodeKind::kMention, "m1");
  const std::size_t m2 = g.AddNode(NodeKind::kMention, "m2");
  CHRONOLINK_ASSERT_OK(g.AddEdge(e, m1, -5));
  CHRONOLINK_ASSERT_OK(g.AddEdge(m1, m2, -4));
  PruneResult r = PruneAndCluster(g, 0.0);
  auto links = ResolveSegment(g, r.partition, state, store, {"m1", "m2"});
  CHRONOLINK_ASSERT_OK(links);
  EXPECT_EQ(links->at("m1").entity, "E");
  EXPECT_EQ(links->at("m2").entity, "E");
  EXPECT_TRUE(links->at("m2").from_cluster);
}

TEST(ResolveSegmentTest, SingletonFallsBackToArgmaxWithIdTies) {
  EmbeddingStore store;
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kEntity, "B", {0.5, 0}));
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kEntity, "A", {0.9, 0}));
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kEntity, "C", {0.9, 0}));
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kMention, "m", {1, 0}));
  ClusterState state = StaticState(store);
  AffinityGraph g;
  g.AddNode(NodeKind::kMention, "m");
  PruneResult r = PruneAndCluster(g, 0.0);
  auto links = ResolveSegment(g, r.partition, state, store, {"m"});
  CHRONOLINK_ASSERT_OK(links);
  EXPECT_EQ(links->at("m").entity, "A");
  EXPECT_FALSE(links->at("m").from_cluster);

  EmbeddingStore empty;
  ClusterState none(0.8, 30, 0);
  EXPECT_FALSE(ResolveSegment(g, r.partition, none, store, {"m"}).ok());
}

TEST(RankedPredictionTest, ResolvedEntityFirst) {
  EmbeddingStore store;
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kEntity, "A", {0.9}));
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kEntity, "B", {0.5}));
  CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kEntity, "C", {0.1}));
  ClusterState state = StaticState(store);
  EXPECT_THAT(*RankedPrediction("C", {1.0}, state, 2), ElementsAre("C", "A"));
  EXPECT_THAT(*RankedPrediction("A", {1.0}, state, 3), ElementsAre("A", "B", "C"));
}

TEST(RankCandidatesTest, TopOneIsTheFallbackArgmax) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 50; ++trial) {
    EmbeddingStore store;
    for (int i = 0; i < 12; ++i) {
      CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kEntity, "E" + std::to_string(i),
                                        {normal(rng), normal(rng), normal(rng)}));
    }
    CHRONOLINK_ASSERT_OK(store.Insert(NodeKind::kMention, "m",
                                      {normal(rng), normal(rng), normal(rng)}));
    ClusterState state = StaticState(store);
    AffinityGraph g;
    g.AddNode(NodeKind::kMention, "m");
    auto links = ResolveSegment(g, PruneAndCluster(g, 0).partition, state, store, {"m"});
    auto top = RankCandidates(*store.Find(NodeKind::kMention, "m"), state, 1);
    EXPECT_EQ(links->at("m").entity, top->front().id);
  }
}

}  // namespace
}  // namespace chronolink
