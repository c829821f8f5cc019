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

// Marker-delimited encoder inputs for entities and mentions:
//
//   entity:  [CLS] name [NAME] description [SEP]
//   mention: [CLS] left-context [START] surface [END] right-context [SEP]
//
// Tokens are whitespace-separated words; the budget counts every token,
// markers included.

#ifndef CHRONOLINK_TOKENS_HPP_
#define CHRONOLINK_TOKENS_HPP_

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/util/strings.hpp"
#include "chronolink/records.hpp"

namespace chronolink {

enum class Marker { kCls, kSep, kName, kStart, kEnd };

inline std::string_view MarkerText(Marker marker) {
  static constexpr std::array<std::string_view, 5> kText = {
      "[CLS]", "[SEP]", "[NAME]", "[START]", "[END]"};
  return kText[static_cast<std::size_t>(marker)];
}

inline constexpr std::size_t kMinTokenBudget = 8;

struct Token {
  bool is_marker = false;
  Marker marker = Marker::kCls;  // valid when is_marker
  std::string text;

  static Token Of(Marker m) { return {true, m, std::string(MarkerText(m))}; }
  static Token Word(std::string w) { return {false, Marker::kCls, std::move(w)}; }

  bool operator==(const Token&) const = default;
};

class TokenSequence {
 public:
  void Push(Token t) { tokens_.push_back(std::move(t)); }
  void Append(const std::vector<std::string>& words) {
    for (const std::string& w : words) tokens_.push_back(Token::Word(w));
  }

  const std::vector<Token>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }

  std::vector<std::string> Strings() const {
    std::vector<std::string> out;
    out.reserve(tokens_.size());
    for (const Token& t : tokens_) out.push_back(t.text);
    return out;
  }

  std::string ToString() const { return StrJoin(Strings(), " "); }

  std::size_t CountMarker(Marker m) const {
    return static_cast<std::size_t>(
        std::count_if(tokens_.begin(), tokens_.end(), [m](const Token& t) {
          return t.is_marker && t.marker == m;
        }));
  }

  // Position of the single occurrence of `m`, or size() when absent.
  std::size_t IndexOf(Marker m) const {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (tokens_[i].is_marker && tokens_[i].marker == m) return i;
    }
    return tokens_.size();
  }

  bool operator==(const TokenSequence&) const = default;

 private:
  std::vector<Token> tokens_;
};

inline absl::StatusOr<TokenSequence> EntityTokens(const EntityRecord& entity,
                                                  std::size_t budget) {
  if (budget < kMinTokenBudget) {
    return absl::InvalidArgumentError(StrCat(
        "token budget ", budget, " too small; need at least ", kMinTokenBudget));
  }
  std::vector<std::string> name = SplitWords(entity.name);
  if (name.empty()) {
    return absl::InvalidArgumentError(
        StrCat("entity ", entity.entity_id, ": name has no tokens"));
  }
  std::vector<std::string> description = SplitWords(entity.description);
  const std::size_t room = budget - 3;
  if (name.size() > room) name.resize(room);
  const std::size_t desc_room = room - name.size();
  if (description.size() > desc_room) description.resize(desc_room);

  TokenSequence seq;
  seq.Push(Token::Of(Marker::kCls));
  seq.Append(name);
  seq.Push(Token::Of(Marker::kName));
  seq.Append(description);
  seq.Push(Token::Of(Marker::kSep));
  return seq;
}

// Contexts are trimmed from their far ends, alternating sides so the kept
// windows stay balanced around the span; the left side gets an odd leftover.
inline absl::StatusOr<TokenSequence> MentionTokens(const MentionRecord& record,
                                                   std::size_t budget) {
  if (budget < kMinTokenBudget) {
    return absl::InvalidArgumentError(StrCat(
        "token budget ", budget, " too small; need at least ", kMinTokenBudget));
  }
  const std::vector<std::string> surface = SplitWords(record.surface);
  if (surface.empty()) {
    return absl::InvalidArgumentError(
        StrCat("mention ", record.mention_id, ": empty surface"));
  }
  if (surface.size() + 4 > budget) {
    return absl::InvalidArgumentError(
        StrCat("mention ", record.mention_id, ": budget ", budget,
                     " cannot hold markers plus ", surface.size(),
                     " surface tokens"));
  }
  const std::vector<std::string> left = SplitWords(record.left_context);
  const std::vector<std::string> right = SplitWords(record.right_context);
  const std::size_t room = budget - 4 - surface.size();
  std::size_t take_left = std::min(left.size(), (room + 1) / 2);
  const std::size_t take_right = std::min(right.size(), room - take_left);
  take_left = std::min(left.size(), room - take_right);

  TokenSequence seq;
  seq.Push(Token::Of(Marker::kCls));
  seq.Append({left.end() - static_cast<std::ptrdiff_t>(take_left), left.end()});
  seq.Push(Token::Of(Marker::kStart));
  seq.Append(surface);
  seq.Push(Token::Of(Marker::kEnd));
  seq.Append({right.begin(),
              right.begin() + static_cast<std::ptrdiff_t>(take_right)});
  seq.Push(Token::Of(Marker::kSep));
  return seq;
}

inline bool ConformsToEntityPattern(const TokenSequence& seq) {
  const std::size_t n = seq.size();
  if (n < 4) return false;
  for (Marker m : {Marker::kCls, Marker::kName, Marker::kSep}) {
    if (seq.CountMarker(m) != 1) return false;
  }
  if (seq.CountMarker(Marker::kStart) != 0 || seq.CountMarker(Marker::kEnd) != 0)
    return false;
  const std::size_t name = seq.IndexOf(Marker::kName);
  return seq.IndexOf(Marker::kCls) == 0 && seq.IndexOf(Marker::kSep) == n - 1 &&
         name >= 2;
}

inline bool ConformsToMentionPattern(const TokenSequence& seq) {
  const std::size_t n = seq.size();
  if (n < 5) return false;
  for (Marker m : {Marker::kCls, Marker::kStart, Marker::kEnd, Marker::kSep}) {
    if (seq.CountMarker(m) != 1) return false;
  }
  if (seq.CountMarker(Marker::kName) != 0) return false;
  const std::size_t start = seq.IndexOf(Marker::kStart);
  const std::size_t end = seq.IndexOf(Marker::kEnd);
  return seq.IndexOf(Marker::kCls) == 0 && seq.IndexOf(Marker::kSep) == n - 1 &&
         end > start + 1;
}

}  // namespace chronolink

#endif  // CHRONOLINK_TOKENS_HPP_
