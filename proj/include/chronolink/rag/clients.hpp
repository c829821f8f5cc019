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

// Generation and embedding client interfaces with offline implementations.

#ifndef CHRONOLINK_RAG_CLIENTS_HPP_
#define CHRONOLINK_RAG_CLIENTS_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/affinity.hpp"
#include "chronolink/embedding.hpp"
#include "chronolink/records.hpp"
#include "chronolink/util/strings.hpp"

namespace chronolink {

struct GenerationRequest {
  std::string prompt;
  double temperature = 0.3;
  int max_new_tokens = 30;
};

inline constexpr double kAnswerTemperature = 0.3;
inline constexpr int kAnswerMaxTokens = 30;
inline constexpr double kCotFirstTemperature = 0.1;
inline constexpr int kCotFirstMaxTokens = 10;

// Implementations must be safe to call from several threads at once.
class GenerationClient {
 public:
  virtual ~GenerationClient() = default;
  virtual absl::StatusOr<std::string> Generate(
      const GenerationRequest& request) const = 0;
};

class EmbeddingClient {
 public:
  virtual ~EmbeddingClient() = default;
  virtual absl::StatusOr<EmbeddingVector> Embed(std::string_view text) const = 0;
};

// Answers each prompt with the gold answer of the QA pair whose question it
// carries. The longest matching question wins.
class GoldEchoClient : public GenerationClient {
 public:
  explicit GoldEchoClient(const std::vector<QAPair>& pairs) {
    for (const QAPair& qa : pairs) {
      qa_.emplace_back(StrCat("Question: ", qa.question), qa.answer);
    }
  }

  absl::StatusOr<std::string> Generate(
      const GenerationRequest& request) const override {
    const std::pair<std::string, std::string>* best = nullptr;
    for (const auto& entry : qa_) {
      if (request.prompt.find(entry.first) == std::string::npos) continue;
      if (best == nullptr || entry.first.size() > best->first.size()) {
        best = &entry;
      }
    }
    if (best == nullptr) {
      return absl::NotFoundError("prompt matches no known question");
    }
    return best->second;
  }

 private:
  std::vector<std::pair<std::string, std::string>> qa_;
};

class FixedTextClient : public GenerationClient {
 public:
  explicit FixedTextClient(std::string text) : text_(std::move(text)) {}
  absl::StatusOr<std::string> Generate(const GenerationRequest&) const override {
    return text_;
  }

 private:
  std::string text_;
};

// Signed feature hashing of lowercased whitespace tokens, L2-normalized.
class HashingEmbedder : public EmbeddingClient {
 public:
  explicit HashingEmbedder(std::size_t dim = 256) : dim_(dim) {}

  absl::StatusOr<EmbeddingVector> Embed(std::string_view text) const override {
    if (dim_ == 0) return absl::InvalidArgumentError("embedder dim is 0");
    EmbeddingVector v(dim_);
    for (std::string word : SplitWords(text)) {
      for (char& c : word) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
      const std::uint64_t h = Fnv1a(word);
      v[h % dim_] += (h >> 63) ? -1.0 : 1.0;
    }
    return v.Norm() > 0.0 ? L2Normalized(v) : v;
  }

 private:
  std::size_t dim_;
};

}  // namespace chronolink

#endif  // CHRONOLINK_RAG_CLIENTS_HPP_
