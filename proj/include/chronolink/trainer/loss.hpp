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

// Edge-level logistic loss over learnable embedding tables and its exact
// gradient, including the path through cluster representations.

#ifndef CHRONOLINK_TRAINER_LOSS_HPP_
#define CHRONOLINK_TRAINER_LOSS_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "chronolink/affinity.hpp"
#include "chronolink/embedding.hpp"
#include "chronolink/util/status_macros.hpp"

namespace chronolink {

// Parameters are a thawed embedding store.
using ParameterSet = EmbeddingStore;

struct LabeledEdge {
  NodeKind source_kind = NodeKind::kMention;
  std::string source;
  std::string target;  // always a mention
  int label = 0;       // 1 for a retained edge

  bool operator==(const LabeledEdge&) const = default;
  auto operator<=>(const LabeledEdge&) const = default;
};

// kAffinity applies the logistic to the affinity; kWeight applies it to the
// edge weight (negated affinity).
enum class LossLink { kAffinity, kWeight };

inline constexpr double kProbabilityEpsilon = 1e-12;

using ParamKey = std::pair<NodeKind, std::string>;

struct LossAndGradient {
  double loss = 0.0;
  std::map<ParamKey, std::vector<double>> gradient;
};

inline double Logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double ez = std::exp(z);
  return ez / (1.0 + ez);
}

namespace internal {

struct RepTerms {
  EmbeddingVector rep;
  // Coefficient of each contributing parameter in the representation.
  std::vector<std::pair<ParamKey, double>> parts;
};

inline absl::StatusOr<RepTerms> EntityRep(const std::string& entity,
                                          const ClusterState& state,
                                          const ParameterSet& params) {
  RepTerms out;
  ASSIGN_OR_RETURN(const EmbeddingVector* e, params.Lookup(NodeKind::kEntity, entity));
  const ClusterEntry* cluster = state.Find(entity);
  std::vector<const EmbeddingVector*> members;
  if (cluster != nullptr) {
    for (const std::string& m : cluster->sampled) {
      ASSIGN_OR_RETURN(const EmbeddingVector* v, params.Lookup(NodeKind::kMention, m));
      members.push_back(v);
    }
  }
  ASSIGN_OR_RETURN(out.rep, ClusterRepresentation(*e, members, state.alpha()));
  if (members.empty()) {
    out.parts.push_back({{NodeKind::kEntity, entity}, 1.0});
  } else {
    out.parts.push_back({{NodeKind::kEntity, entity}, state.alpha()});
    const double share = (1.0 - state.alpha()) / static_cast<double>(members.size());
    for (const std::string& m : cluster->sampled) {
      out.parts.push_back({{NodeKind::kMention, m}, share});
    }
  }
  return out;
}

inline void AddScaled(std::vector<double>& acc, std::span<const double> v, double c,
                      std::size_t dim) {
  if (acc.empty()) acc.assign(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) acc[i] += c * v[i];
}

}  // namespace internal

// Mean over the batch mentions of
//   -sum_p [ I log s(z) + (1 - I) log(1 - s(z)) ],
// z the affinity (or weight) of edge (p, m). Edges into mentions outside the
// batch are ignored. Probabilities are clamped to [eps, 1 - eps], where the
// gradient is zero.
inline absl::StatusOr<LossAndGradient> ComputeLoss(
    const std::vector<LabeledEdge>& edges,
    const std::vector<std::string>& batch_mentions, const ClusterState& state,
    const ParameterSet& params, LossLink link = LossLink::kAffinity,
    bool with_gradient = true) {
  LossAndGradient out;
  if (batch_mentions.empty()) return out;
  const std::set<std::string> batch(batch_mentions.begin(), batch_mentions.end());
  const double scale = 1.0 / static_cast<double>(batch.size());
  const double sign = link == LossLink::kAffinity ? 1.0 : -1.0;
  const std::size_t dim = params.dim();

  std::map<std::string, internal::RepTerms> reps;
  for (const LabeledEdge& edge : edges) {
    if (!batch.count(edge.target)) continue;
    if (edge.label != 0 && edge.label != 1) {
      return absl::InvalidArgumentError("edge label must be 0 or 1");
    }
    ASSIGN_OR_RETURN(const EmbeddingVector* v,
                     params.Lookup(NodeKind::kMention, edge.target));
    const EmbeddingVector* u = nullptr;
    const internal::RepTerms* terms = nullptr;
    if (edge.source_kind == NodeKind::kEntity) {
      auto it = reps.find(edge.source);
      if (it == reps.end()) {
        ASSIGN_OR_RETURN(internal::RepTerms t,
                         internal::EntityRep(edge.source, state, params));
        it = reps.emplace(edge.source, std::move(t)).first;
      }
      terms = &it->second;
      u = &terms->rep;
    } else {
      ASSIGN_OR_RETURN(u, params.Lookup(NodeKind::kMention, edge.source));
    }
    ASSIGN_OR_RETURN(const double a, Dot(*u, *v));
    const double s = Logistic(sign * a);
    const double p = std::clamp(s, kProbabilityEpsilon, 1.0 - kProbabilityEpsilon);
    out.loss += scale * (edge.label == 1 ? -std::log(p) : -std::log1p(-p));
    if (!with_gradient || p != s) continue;

    const double g = scale * sign * (s - edge.label);
    internal::AddScaled(out.gradient[{NodeKind::kMention, edge.target}], u->values(), g, dim);
    if (terms != nullptr) {
      for (const auto& [key, coef] : terms->parts) {
        internal::AddScaled(out.gradient[key], v->values(), g * coef, dim);
      }
    } else {
      internal::AddScaled(out.gradient[{NodeKind::kMention, edge.source}], v->values(), g, dim);
    }
  }
  return out;
}

inline absl::StatusOr<double> BatchLoss(const std::vector<LabeledEdge>& edges,
                                        const std::vector<std::string>& batch_mentions,
                                        const ClusterState& state,
                                        const ParameterSet& params,
                                        LossLink link = LossLink::kAffinity) {
  ASSIGN_OR_RETURN(LossAndGradient r,
                   ComputeLoss(edges, batch_mentions, state, params, link, false));
  return r.loss;
}

}  // namespace chronolink

#endif  // CHRONOLINK_TRAINER_LOSS_HPP_
