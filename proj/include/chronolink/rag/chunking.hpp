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

#ifndef CHRONOLINK_RAG_CHUNKING_HPP_
#define CHRONOLINK_RAG_CHUNKING_HPP_

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "absl/status/statusor.h"
#include "chronolink/records.hpp"
#include "chronolink/util/status_macros.hpp"
#include "chronolink/util/strings.hpp"
#include "chronolink/util/utf8.hpp"

namespace chronolink {

inline constexpr std::size_t kDefaultChunkChars = 1500;
inline constexpr std::size_t kDefaultChunkOverlap = 10;

struct ChunkId {
  std::string doc_id;
  std::size_t index = 0;

  auto operator<=>(const ChunkId&) const = default;
  std::string ToString() const { return StrCat(doc_id, "#", index); }
};

// Ranges are code-point offsets, half-open.
struct DocumentChunk {
  ChunkId id;
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string text;

  bool operator==(const DocumentChunk&) const = default;
};

inline absl::StatusOr<std::vector<DocumentChunk>> ChunkText(
    const std::string& doc_id, std::string_view text,
    std::size_t max_chars = kDefaultChunkChars,
    std::size_t overlap = kDefaultChunkOverlap) {
  if (max_chars == 0 || overlap >= max_chars) {
    return absl::InvalidArgumentError(
        StrCat("chunk overlap ", overlap, " must be below max_chars ",
               max_chars));
  }
  const std::u32string cps = utf8::Decode(text);
  const std::size_t stride = max_chars - overlap;
  std::vector<DocumentChunk> chunks;
  for (std::size_t i = 0; i * stride < cps.size(); ++i) {
    const std::size_t begin = i * stride;
    const std::size_t end = std::min(cps.size(), begin + max_chars);
    chunks.push_back({{doc_id, i}, begin, end,
                      utf8::Substr(cps, begin, end)});
    if (end == cps.size()) break;
  }
  return chunks;
}

inline absl::StatusOr<std::vector<DocumentChunk>> ChunkDocuments(
    const std::map<std::string, Document>& docs,
    std::size_t max_chars = kDefaultChunkChars,
    std::size_t overlap = kDefaultChunkOverlap) {
  std::vector<DocumentChunk> all;
  for (const auto& [id, doc] : docs) {
    ASSIGN_OR_RETURN(std::vector<DocumentChunk> chunks,
                     ChunkText(id, doc.text, max_chars, overlap));
    for (DocumentChunk& c : chunks) all.push_back(std::move(c));
  }
  return all;
}

}  // namespace chronolink

#endif  // CHRONOLINK_RAG_CHUNKING_HPP_
