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

#include "chronolink/tokens.hpp"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace chronolink {
namespace {

using ::testing::ElementsAre;

EntityRecord Entity(std::string name, std::string description) {
  EntityRecord e;
  e.entity_id = name;
  e.name = std::move(name);
  e.description = std::move(description);
  return e;
}

MentionRecord Mention(std::string left, std::string surface, std::string right) {
  MentionRecord m;
  m.mention_id = "m";
  m.left_context = std::move(left);
  m.surface = std::move(surface);
  m.right_context = std::move(right);
  return m;
}

TEST(EntityTokensTest, NameMarkerSeparatesDescription) {
  auto seq = EntityTokens(Entity("Messi", "Argentine forward…"), 128);
  CHRONOLINK_ASSERT_OK(seq);
  EXPECT_EQ(seq->ToString(), "[CLS] Messi [NAME] Argentine forward… [SEP]");
  EXPECT_TRUE(ConformsToEntityPattern(*seq));
}

TEST(EntityTokensTest, EmptyDescription) {
  auto seq = EntityTokens(Entity("Lionel Messi", ""), 128);
  CHRONOLINK_ASSERT_OK(seq);
  EXPECT_EQ(seq->ToString(), "[CLS] Lionel Messi [NAME] [SEP]");
}

TEST(EntityTokensTest, BudgetTooSmall) {
  EXPECT_FALSE(EntityTokens(Entity("Messi", "x"), 4).ok());
  EXPECT_FALSE(EntityTokens(Entity("   ", "x"), 32).ok());
}

TEST(EntityTokensTest, DescriptionTruncatedFromTheRight) {
  auto seq = EntityTokens(Entity("Messi", "a b c d e f g h i j"), 8);
  CHRONOLINK_ASSERT_OK(seq);
  EXPECT_EQ(seq->ToString(), "[CLS] Messi [NAME] a b c d [SEP]");
  EXPECT_EQ(seq->size(), 8);
}

TEST(EntityTokensTest, LiteralMarkerTextIsAWord) {
  auto seq = EntityTokens(Entity("Messi", "uses [NAME] literally"), 32);
  CHRONOLINK_ASSERT_OK(seq);
  EXPECT_EQ(seq->CountMarker(Marker::kName), 1);
  EXPECT_TRUE(ConformsToEntityPattern(*seq));
}

TEST(MentionTokensTest, MarkersWrapSurface) {
  auto seq = MentionTokens(Mention("…beat", "the Red Devils", "today…"), 128);
  CHRONOLINK_ASSERT_OK(seq);
  EXPECT_EQ(seq->ToString(),
            "[CLS] …beat [START] the Red Devils [END] today… [SEP]");
  EXPECT_TRUE(ConformsToMentionPattern(*seq));
}

TEST(MentionTokensTest, EmptyContexts) {
  auto seq = MentionTokens(Mention("", "Messi", ""), 16);
  CHRONOLINK_ASSERT_OK(seq);
  EXPECT_EQ(seq->ToString(), "[CLS] [START] Messi [END] [SEP]");
}

TEST(MentionTokensTest, LongContextsTruncatedOutwardIn) {
  // 12 left words, 3 surface words, 12 right words; budget 16 leaves 9 context
  // slots: 5 nearest on the left, 4 nearest on the right.
  auto seq = MentionTokens(
      Mention("l12 l11 l10 l9 l8 l7 l6 l5 l4 l3 l2 l1", "the Red Devils",
              "r1 r2 r3 r4 r5 r6 r7 r8 r9 r10 r11 r12"),
      16);
  CHRONOLINK_ASSERT_OK(seq);
  EXPECT_EQ(seq->size(), 16);
  EXPECT_EQ(seq->ToString(),
            "[CLS] l5 l4 l3 l2 l1 [START] the Red Devils [END] r1 r2 r3 r4 [SEP]");
}

TEST(MentionTokensTest, ShortSideDonatesBudget) {
  auto seq = MentionTokens(Mention("l1", "x", "r1 r2 r3 r4 r5 r6 r7 r8"), 10);
  CHRONOLINK_ASSERT_OK(seq);
  EXPECT_EQ(seq->ToString(), "[CLS] l1 [START] x [END] r1 r2 r3 r4 [SEP]");
}

TEST(MentionTokensTest, SurfaceTooLongForBudget) {
  EXPECT_FALSE(MentionTokens(Mention("", "a b c d e", ""), 8).ok());
  EXPECT_FALSE(MentionTokens(Mention("", "a", ""), 4).ok());
}

TEST(TokenPatternTest, RandomRecordsConformAndRegenerateIdentically) {
  std::mt19937 rng(5);
  auto words = [&](int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += "w" + std::to_string(rng() % 50) + " ";
    return s;
  };
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t budget = 8 + rng() % 40;
    MentionRecord m = Mention(words(rng() % 30), words(1 + rng() % 3),
                              words(rng() % 30));
    auto a = MentionTokens(m, budget);
    auto b = MentionTokens(m, budget);
    CHRONOLINK_ASSERT_OK(a);
    EXPECT_EQ(*a, *b);
    EXPECT_TRUE(ConformsToMentionPattern(*a));
    EXPECT_LE(a->size(), budget);

    EntityRecord e = Entity("n" + words(rng() % 3), words(rng() % 60));
    auto ea = EntityTokens(e, budget);
    CHRONOLINK_ASSERT_OK(ea);
    EXPECT_TRUE(ConformsToEntityPattern(*ea));
    EXPECT_LE(ea->size(), budget);
  }
}

}  // namespace
}  // namespace chronolink
