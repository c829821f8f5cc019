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

#ifndef CHRONOLINK_RAG_INDEX_HPP_
#define CHRONOLINK_RAG_INDEX_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/embedding.hpp"
#include "chronolink/rag/chunking.hpp"
#include "chronolink/util/strings.hpp"

namespace chronolink {

struct RetrievedChunk {
  ChunkId id;
  double score = 0.0;
};

// Inner-product index over chunk vectors. Build, Freeze, then query.
class VectorIndex {
 public:
  absl::Status Add(ChunkId id, EmbeddingVector vector) {
    if (frozen_) {
      return absl::FailedPreconditionError("vector index is frozen");
    }
    if (vector.dim() == 0 || !vector.AllFinite()) {
      return absl::InvalidArgumentError(
          StrCat("invalid vector for chunk ", id.ToString()));
    }
    if (!entries_.empty() && vector.dim() != dim_) {
      return absl::InvalidArgumentError(
          StrCat("dimension mismatch for chunk ", id.ToString(), ": ",
                 vector.dim(), " vs ", dim_));
    }
    dim_ = vector.dim();
    if (!ids_.emplace(id, entries_.size()).second) {
      return absl::AlreadyExistsError(
          StrCat("duplicate chunk ", id.ToString()));
    }
    entries_.emplace_back(std::move(id), std::move(vector));
    return absl::OkStatus();
  }

  void Freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t dim() const { return dim_; }

  // Highest inner product first; equal scores in ascending chunk id.
  absl::StatusOr<std::vector<RetrievedChunk>> Retrieve(
      const EmbeddingVector& query, std::size_t k = 3) const {
    if (entries_.empty()) {
      return absl::FailedPreconditionError("vector index is empty");
    }
    if (k == 0) return absl::InvalidArgumentError("k must be at least 1");
    if (query.dim() != dim_) {
      return absl::InvalidArgumentError(
          StrCat("query dimension ", query.dim(), " vs index ", dim_));
    }
    std::vector<RetrievedChunk> scored;
    scored.reserve(entries_.size());
    for (const auto& [id, v] : entries_) {
      double s = 0.0;
      for (std::size_t i = 0; i < dim_; ++i) s += v[i] * query[i];
      scored.push_back({id, s});
    }
    const auto better = [](const RetrievedChunk& a, const RetrievedChunk& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.id < b.id;
    };
    k = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + k, scored.end(),
                      better);
    scored.resize(k);
    return scored;
  }

 private:
  bool frozen_ = false;
  std::size_t dim_ = 0;
  std::map<ChunkId, std::size_t> ids_;
  std::vector<std::pair<ChunkId, EmbeddingVector>> entries_;
};

}  // namespace chronolink

#endif  // CHRONOLINK_RAG_INDEX_HPP_
