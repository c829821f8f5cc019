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

#ifndef CHRONOLINK_EMBEDDING_HPP_
#define CHRONOLINK_EMBEDDING_HPP_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/util/strings.hpp"
#include "chronolink/util/jsonl.hpp"
#include "chronolink/util/status_macros.hpp"

namespace chronolink {

enum class NodeKind { kEntity, kMention };

inline std::string_view NodeKindName(NodeKind kind) {
  return kind == NodeKind::kEntity ? "entity" : "mention";
}

// Dense real vector; double precision inside the engine.
class EmbeddingVector {
 public:
  EmbeddingVector() = default;
  explicit EmbeddingVector(std::size_t dim, double fill = 0.0)
      : values_(dim, fill) {}
  explicit EmbeddingVector(std::vector<double> values)
      : values_(std::move(values)) {}
  EmbeddingVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t dim() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const { return values_; }
  std::span<double> mutable_values() { return values_; }
  const std::vector<double>& vector() const { return values_; }

  bool AllFinite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  double Norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return std::sqrt(s);
  }

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

// Id-keyed vectors for entities and mentions. Entity and mention ids live in
// separate namespaces. Once frozen the store rejects further inserts.
class EmbeddingStore {
 public:
  struct Entry {
    EmbeddingVector vector;
    std::string segment;

    bool operator==(const Entry&) const = default;
  };

  explicit EmbeddingStore(std::string segment = "")
      : segment_(std::move(segment)) {}

  absl::Status Insert(NodeKind kind, std::string id, EmbeddingVector vector,
                      std::string segment = "") {
    if (frozen_) {
      return absl::FailedPreconditionError(
          StrCat("embedding store is frozen; cannot insert ", id));
    }
    if (vector.dim() == 0) {
      return absl::InvalidArgumentError(StrCat("empty vector for ", id));
    }
    if (!vector.AllFinite()) {
      return absl::InvalidArgumentError(
          StrCat("non-finite component in vector for ", id));
    }
    if (dim_ == 0) dim_ = vector.dim();
    if (vector.dim() != dim_) {
      return absl::InvalidArgumentError(
          StrCat("dimension mismatch for ", id, ": ", vector.dim(),
                       " vs store dimension ", dim_));
    }
    auto& table = Table(kind);
    if (!table.emplace(id, Entry{std::move(vector), std::move(segment)})
             .second) {
      return absl::AlreadyExistsError(StrCat(
          "duplicate ", NodeKindName(kind), " embedding id ", id));
    }
    return absl::OkStatus();
  }

  void Freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  const EmbeddingVector* Find(NodeKind kind, std::string_view id) const {
    const auto& table = Table(kind);
    auto it = table.find(std::string(id));
    return it == table.end() ? nullptr : &it->second.vector;
  }

  absl::StatusOr<const EmbeddingVector*> Lookup(NodeKind kind,
                                                std::string_view id) const {
    const EmbeddingVector* v = Find(kind, id);
    if (v == nullptr) {
      return absl::NotFoundError(StrCat("missing ", NodeKindName(kind),
                                              " embedding for ", id));
    }
    return v;
  }

  bool operator==(const EmbeddingStore&) const = default;

  // Null when frozen or absent.
  EmbeddingVector* FindMutable(NodeKind kind, std::string_view id) {
    if (frozen_) return nullptr;
    auto& table = Table(kind);
    auto it = table.find(std::string(id));
    return it == table.end() ? nullptr : &it->second.vector;
  }

  // Mutable copy, e.g. to seed a trainable parameter table.
  EmbeddingStore Thawed() const {
    EmbeddingStore copy = *this;
    copy.frozen_ = false;
    return copy;
  }

  std::size_t dim() const { return dim_; }
  const std::string& segment() const { return segment_; }
  std::size_t size(NodeKind kind) const { return Table(kind).size(); }
  const std::map<std::string, Entry>& entries(NodeKind kind) const {
    return Table(kind);
  }

 private:
  std::map<std::string, Entry>& Table(NodeKind kind) {
    return kind == NodeKind::kEntity ? entities_ : mentions_;
  }
  const std::map<std::string, Entry>& Table(NodeKind kind) const {
    return kind == NodeKind::kEntity ? entities_ : mentions_;
  }

  std::string segment_;
  std::size_t dim_ = 0;
  bool frozen_ = false;
  std::map<std::string, Entry> entities_;
  std::map<std::string, Entry> mentions_;
};

inline EmbeddingVector L2Normalized(const EmbeddingVector& v) {
  const double norm = v.Norm();
  if (norm == 0.0) return v;
  EmbeddingVector out = v;
  for (double& x : out.mutable_values()) x /= norm;
  return out;
}

struct EmbeddingLoadOptions {
  bool l2_normalize = false;
  bool freeze = true;
};

// JSON lines: {"id","kind":"entity"|"mention","segment","vector":[...]}.
// Components are read as single precision and widened.
inline absl::Status LoadEmbeddingsJsonl(const std::string& path,
                                        EmbeddingStore& store,
                                        bool l2_normalize = false) {
  return ForEachJsonLine(
      path, [&](std::size_t line_no, const Json& rec) -> absl::Status {
        ASSIGN_OR_RETURN(std::string id,
                         RequiredField<std::string>(rec, "id", line_no));
        ASSIGN_OR_RETURN(std::string kind_name,
                         RequiredField<std::string>(rec, "kind", line_no));
        ASSIGN_OR_RETURN(auto segment,
                         OptionalField<std::string>(rec, "segment", line_no));
        ASSIGN_OR_RETURN(std::vector<float> floats,
                         RequiredField<std::vector<float>>(rec, "vector", line_no));
        NodeKind kind;
        if (kind_name == "entity") {
          kind = NodeKind::kEntity;
        } else if (kind_name == "mention") {
          kind = NodeKind::kMention;
        } else {
          return absl::InvalidArgumentError(StrCat(
              "line ", line_no, ": unknown embedding kind \"", kind_name, "\""));
        }
        EmbeddingVector v(std::vector<double>(floats.begin(), floats.end()));
        if (l2_normalize) v = L2Normalized(v);
        absl::Status st =
            store.Insert(kind, std::move(id), std::move(v), segment.value_or(""));
        if (!st.ok()) {
          return absl::Status(st.code(),
                              StrCat("line ", line_no, ": ", st.message()));
        }
        return absl::OkStatus();
      });
}

inline absl::StatusOr<EmbeddingStore> LoadEmbeddingsJsonl(
    const std::string& path, const EmbeddingLoadOptions& options = {}) {
  EmbeddingStore store;
  RETURN_IF_ERROR(LoadEmbeddingsJsonl(path, store, options.l2_normalize));
  if (options.freeze) store.Freeze();
  return store;
}

inline absl::Status WriteEmbeddingsJsonl(const EmbeddingStore& store,
                                         const std::string& path) {
  std::string out;
  for (NodeKind kind : {NodeKind::kEntity, NodeKind::kMention}) {
    for (const auto& [id, entry] : store.entries(kind)) {
      std::vector<float> floats(entry.vector.vector().begin(),
                                entry.vector.vector().end());
      Json rec = {{"id", id},
                  {"kind", NodeKindName(kind)},
                  {"segment", entry.segment},
                  {"vector", floats}};
      out += rec.dump();
      out += '\n';
    }
  }
  return WriteTextFile(path, out);
}

// Binary layout, little-endian throughout:
//   header  "TEMB" | u32 dim | u32 count | u32 reserved (0)
//   record  u32 id_length | id bytes | dim x f32
// One file holds one node kind.
namespace temb {

inline constexpr char kMagic[4] = {'T', 'E', 'M', 'B'};

inline void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t GetU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void PutF32(std::string& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  PutU32(out, bits);
}

inline float GetF32(const unsigned char* p) {
  const std::uint32_t bits = GetU32(p);
  float f;
  std::memcpy(&f, &bits, sizeof(f));
  return f;
}

}  // namespace temb

inline std::string EncodeEmbeddingsBinary(
    const std::map<std::string, EmbeddingVector>& vectors, std::size_t dim) {
  std::string out(temb::kMagic, 4);
  temb::PutU32(out, static_cast<std::uint32_t>(dim));
  temb::PutU32(out, static_cast<std::uint32_t>(vectors.size()));
  temb::PutU32(out, 0);
  for (const auto& [id, v] : vectors) {
    temb::PutU32(out, static_cast<std::uint32_t>(id.size()));
    out += id;
    for (double x : v.values()) temb::PutF32(out, static_cast<float>(x));
  }
  return out;
}

inline absl::Status WriteEmbeddingsBinary(const EmbeddingStore& store,
                                          NodeKind kind,
                                          const std::string& path) {
  std::map<std::string, EmbeddingVector> vectors;
  for (const auto& [id, entry] : store.entries(kind)) vectors[id] = entry.vector;
  return WriteTextFile(path, EncodeEmbeddingsBinary(vectors, store.dim()));
}

inline absl::StatusOr<std::map<std::string, EmbeddingVector>>
DecodeEmbeddingsBinary(std::string_view bytes) {
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  if (n < 16 || std::memcmp(p, temb::kMagic, 4) != 0) {
    return absl::InvalidArgumentError("not a TEMB vector file");
  }
  const std::uint32_t dim = temb::GetU32(p + 4);
  const std::uint32_t count = temb::GetU32(p + 8);
  std::size_t pos = 16;
  std::map<std::string, EmbeddingVector> out;
  for (std::uint32_t r = 0; r < count; ++r) {
    if (pos + 4 > n) return absl::DataLossError("truncated TEMB record header");
    const std::uint32_t id_len = temb::GetU32(p + pos);
    pos += 4;
    if (pos + id_len + 4ull * dim > n) {
      return absl::DataLossError("truncated TEMB record");
    }
    std::string id(bytes.substr(pos, id_len));
    pos += id_len;
    std::vector<double> values(dim);
    for (std::uint32_t k = 0; k < dim; ++k, pos += 4) {
      values[k] = temb::GetF32(p + pos);
    }
    if (!out.emplace(id, EmbeddingVector(std::move(values))).second) {
      return absl::InvalidArgumentError(
          StrCat("duplicate id in TEMB file: ", id));
    }
  }
  if (pos != n) return absl::InvalidArgumentError("trailing bytes in TEMB file");
  return out;
}

inline absl::Status LoadEmbeddingsBinary(const std::string& path, NodeKind kind,
                                         EmbeddingStore& store,
                                         std::string segment = "") {
  ASSIGN_OR_RETURN(std::string bytes, ReadTextFile(path));
  ASSIGN_OR_RETURN(auto vectors, DecodeEmbeddingsBinary(bytes));
  for (auto& [id, v] : vectors) {
    RETURN_IF_ERROR(store.Insert(kind, id, std::move(v), segment));
  }
  return absl::OkStatus();
}

}  // namespace chronolink

#endif  // CHRONOLINK_EMBEDDING_HPP_
