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

// Inner-product affinities, edge weights and the blended cluster
// representation
//
//   u_C(e) = alpha * Enc_E(e) + (1 - alpha) * mean_{m in C(e)} Enc_M(m)
//
// where C(e) holds mentions resolved to e in the most recent prior segment.

#ifndef CHRONOLINK_AFFINITY_HPP_
#define CHRONOLINK_AFFINITY_HPP_

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "chronolink/util/strings.hpp"
#include "chronolink/embedding.hpp"
#include "chronolink/util/status_macros.hpp"

namespace chronolink {

inline constexpr double kDefaultAlpha = 0.8;
inline constexpr std::size_t kDefaultMentionCap = 30;

// Caller guarantees equal dimensions.
inline double DotUnchecked(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline absl::StatusOr<double> Dot(const EmbeddingVector& a,
                                  const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    return absl::InvalidArgumentError(
        StrCat("dimension mismatch: ", a.dim(), " vs ", b.dim()));
  }
  return DotUnchecked(a.values(), b.values());
}

// phi: entity-cluster to mention affinity.
inline absl::StatusOr<double> AffinityEntityMention(
    const EmbeddingVector& cluster_rep, const EmbeddingVector& mention) {
  return Dot(cluster_rep, mention);
}

// psi: mention to mention affinity; symmetric.
inline absl::StatusOr<double> AffinityMentionMention(const EmbeddingVector& a,
                                                     const EmbeddingVector& b) {
  return Dot(a, b);
}

// Edges carry dissimilarity.
inline double EdgeWeight(double affinity) { return -affinity; }

inline absl::Status CheckAlpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    return absl::InvalidArgumentError(
        StrCat("alpha ", alpha, " outside [0, 1]"));
  }
  return absl::OkStatus();
}

// An empty member list yields the entity embedding unchanged.
inline absl::StatusOr<EmbeddingVector> ClusterRepresentation(
    const EmbeddingVector& entity_emb,
    std::span<const EmbeddingVector* const> members, double alpha) {
  RETURN_IF_ERROR(CheckAlpha(alpha));
  if (members.empty()) return entity_emb;
  const std::size_t d = entity_emb.dim();
  std::vector<double> mean(d, 0.0);
  for (const EmbeddingVector* m : members) {
    if (m->dim() != d) {
      return absl::InvalidArgumentError(
          StrCat("dimension mismatch: member ", m->dim(), " vs entity ", d));
    }
    for (std::size_t i = 0; i < d; ++i) mean[i] += (*m)[i];
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  std::vector<double> rep(d);
  for (std::size_t i = 0; i < d; ++i) {
    rep[i] = alpha * entity_emb[i] + (1.0 - alpha) * (mean[i] * inv);
  }
  return EmbeddingVector(std::move(rep));
}

inline absl::StatusOr<EmbeddingVector> ClusterRepresentation(
    const EmbeddingVector& entity_emb,
    const std::vector<EmbeddingVector>& members, double alpha) {
  std::vector<const EmbeddingVector*> ptrs;
  ptrs.reserve(members.size());
  for (const EmbeddingVector& m : members) ptrs.push_back(&m);
  return ClusterRepresentation(entity_emb, ptrs, alpha);
}

// 64-bit FNV-1a; stable across platforms, used to derive per-key seeds.
inline std::uint64_t Fnv1a(std::string_view text,
                           std::uint64_t seed = 1469598103934665603ull) {
  std::uint64_t h = seed;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Uniform integer in [0, bound) by rejection; independent of the standard
// library's distribution implementation.
inline std::uint64_t UniformBelow(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

// Uniform sample without replacement of min(|members|, cap) ids, returned in
// sorted order. Deterministic in (members, cap, seed).
inline std::vector<std::string> SampleClusterMentions(
    const std::set<std::string>& members, std::size_t cap, std::uint64_t seed) {
  std::vector<std::string> pool(members.begin(), members.end());
  if (cap == 0) cap = 1;
  if (pool.size() <= cap) return pool;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t j = i + UniformBelow(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(cap);
  std::sort(pool.begin(), pool.end());
  return pool;
}

struct ClusterEntry {
  std::set<std::string> resolved;   // all mentions resolved last segment
  std::vector<std::string> sampled;  // capped subset feeding the representation
  EmbeddingVector cached_rep;
};

// Per-entity clusters carried across segments. Representations are cached and
// must be refreshed (Recompute) whenever the underlying vectors change.
class ClusterState {
 public:
  ClusterState() = default;
  explicit ClusterState(double alpha, std::size_t mention_cap = kDefaultMentionCap,
                        std::uint64_t seed = 0)
      : alpha_(alpha), mention_cap_(mention_cap), seed_(seed) {}

  // Every entity in `vectors` becomes a singleton cluster.
  static absl::StatusOr<ClusterState> Initialize(
      const EmbeddingStore& vectors, double alpha,
      std::size_t mention_cap = kDefaultMentionCap, std::uint64_t seed = 0) {
    RETURN_IF_ERROR(CheckAlpha(alpha));
    ClusterState state(alpha, mention_cap, seed);
    for (const auto& [id, entry] : vectors.entries(NodeKind::kEntity)) {
      state.clusters_[id].cached_rep = entry.vector;
    }
    return state;
  }

  double alpha() const { return alpha_; }
  std::size_t mention_cap() const { return mention_cap_; }
  std::uint64_t seed() const { return seed_; }

  // Replaces C(e) for every entity: entities absent from `resolved` get an
  // empty membership. `round` decorrelates successive samples.
  absl::Status AssignMembers(
      const std::map<std::string, std::set<std::string>>& resolved,
      const EmbeddingStore& vectors, std::uint64_t round = 0) {
    for (const auto& [entity, _] : resolved) {
      if (!clusters_.count(entity)) {
        return absl::NotFoundError(
            StrCat("membership for unknown entity ", entity));
      }
    }
    for (auto& [entity, cluster] : clusters_) {
      auto it = resolved.find(entity);
      cluster.resolved =
          it == resolved.end() ? std::set<std::string>() : it->second;
      cluster.sampled = SampleClusterMentions(
          cluster.resolved, mention_cap_,
          Fnv1a(entity, seed_ ^ (round * 0x9E3779B97F4A7C15ull)));
    }
    return Recompute(vectors);
  }

  // Recomputes every cached representation from the current vectors.
  absl::Status Recompute(const EmbeddingStore& vectors) {
    for (auto& [entity, cluster] : clusters_) {
      ASSIGN_OR_RETURN(const EmbeddingVector* e,
                       vectors.Lookup(NodeKind::kEntity, entity));
      std::vector<const EmbeddingVector*> members;
      members.reserve(cluster.sampled.size());
      for (const std::string& m : cluster.sampled) {
        ASSIGN_OR_RETURN(const EmbeddingVector* v,
                         vectors.Lookup(NodeKind::kMention, m));
        members.push_back(v);
      }
      ASSIGN_OR_RETURN(cluster.cached_rep,
                       ClusterRepresentation(*e, members, alpha_));
    }
    return absl::OkStatus();
  }

  const ClusterEntry* Find(std::string_view entity) const {
    auto it = clusters_.find(std::string(entity));
    return it == clusters_.end() ? nullptr : &it->second;
  }

  const std::map<std::string, ClusterEntry>& clusters() const {
    return clusters_;
  }
  std::size_t size() const { return clusters_.size(); }

 private:
  double alpha_ = kDefaultAlpha;
  std::size_t mention_cap_ = kDefaultMentionCap;
  std::uint64_t seed_ = 0;
  std::map<std::string, ClusterEntry> clusters_;
};

}  // namespace chronolink

#endif  // CHRONOLINK_AFFINITY_HPP_
