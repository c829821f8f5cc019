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

#ifndef CHRONOLINK_METRICS_TEXT_METRICS_HPP_
#define CHRONOLINK_METRICS_TEXT_METRICS_HPP_

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "chronolink/util/strings.hpp"
#include "chronolink/util/utf8.hpp"

namespace chronolink {

enum class JaccardMode { kCharSet, kBigram };

namespace internal {

inline bool IsUnicodeSpace(char32_t c) {
  return c == U' ' || (c >= U'\t' && c <= U'\r') || c == 0x85 || c == 0xA0 ||
         c == 0x1680 || (c >= 0x2000 && c <= 0x200A) || c == 0x2028 ||
         c == 0x2029 || c == 0x202F || c == 0x205F || c == 0x3000;
}

inline std::u32string FoldForJaccard(std::string_view text) {
  std::u32string out;
  for (char32_t c : utf8::Decode(text)) {
    if (IsUnicodeSpace(c)) continue;
    if (c >= U'A' && c <= U'Z') c = c - U'A' + U'a';
    out.push_back(c);
  }
  return out;
}

inline std::set<std::u32string> JaccardUnits(const std::u32string& s, JaccardMode mode) {
  std::set<std::u32string> out;
  if (mode == JaccardMode::kCharSet || s.size() < 2) {
    for (char32_t c : s) out.insert(std::u32string(1, c));
  } else {
    for (std::size_t i = 0; i + 1 < s.size(); ++i) out.insert(s.substr(i, 2));
  }
  return out;
}

}  // namespace internal

// |A & B| / |A | B| over distinct characters (or character bigrams) after
// ASCII lowercasing and whitespace removal.
inline absl::StatusOr<double> JaccardChar(std::string_view mention_surface,
                                          std::string_view entity_name,
                                          JaccardMode mode = JaccardMode::kCharSet) {
  const std::u32string a = internal::FoldForJaccard(mention_surface);
  const std::u32string b = internal::FoldForJaccard(entity_name);
  if (a.empty() || b.empty()) {
    return absl::InvalidArgumentError("jaccard input empty after normalization");
  }
  const auto sa = internal::JaccardUnits(a, mode);
  const auto sb = internal::JaccardUnits(b, mode);
  std::size_t common = 0;
  for (const auto& u : sa) common += sb.count(u);
  return static_cast<double>(common) /
         static_cast<double>(sa.size() + sb.size() - common);
}

// Bins 1..5 of width 0.2, half-open, the last closed at 1.0.
inline int JaccardBin(double j) {
  if (j < 0.2) return 1;
  if (j < 0.4) return 2;
  if (j < 0.6) return 3;
  if (j < 0.8) return 4;
  return 5;
}

inline bool IsSentenceTerminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Prefix through the first terminator whose run of terminators is followed
// by whitespace or the end of the text; the whole text if there is none.
inline std::string FirstSentence(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (!IsSentenceTerminator(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && IsSentenceTerminator(text[j])) ++j;
    if (j == text.size() || IsAsciiSpace(text[j])) return std::string(text.substr(0, i + 1));
    i = j;
  }
  return std::string(text);
}

inline bool IsAsciiPunctuation(char c) {
  return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
         (c >= '{' && c <= '~');
}

// Lowercase, strip punctuation, drop articles, split on whitespace.
inline std::vector<std::string> NormalizeAnswerTokens(std::string_view text) {
  std::string s;
  s.reserve(text.size());
  for (char c : text) {
    if (IsAsciiPunctuation(c)) continue;
    s.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
  }
  std::vector<std::string> out;
  for (std::string& w : SplitWords(s)) {
    if (w == "a" || w == "an" || w == "the") continue;
    out.push_back(std::move(w));
  }
  return out;
}

inline std::string NormalizeAnswer(std::string_view text) {
  return StrJoin(NormalizeAnswerTokens(text), " ");
}

// Token F1 of first_sentence(prediction) against gold.
inline double QaF1(std::string_view prediction, std::string_view gold) {
  const auto p = NormalizeAnswerTokens(FirstSentence(prediction));
  const auto g = NormalizeAnswerTokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::map<std::string, int> counts;
  for (const auto& t : g) ++counts[t];
  int common = 0;
  for (const auto& t : p) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(p.size());
  const double recall = static_cast<double>(common) / static_cast<double>(g.size());
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace chronolink

#endif  // CHRONOLINK_METRICS_TEXT_METRICS_HPP_
