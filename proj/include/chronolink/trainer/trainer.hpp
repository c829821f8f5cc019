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

#ifndef CHRONOLINK_TRAINER_TRAINER_HPP_
#define CHRONOLINK_TRAINER_TRAINER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "chronolink/graph_builders.hpp"
#include "chronolink/trainer/loss.hpp"
#include "chronolink/trainer/sampling.hpp"
#include "chronolink/util/jsonl.hpp"
#include "chronolink/util/sha256.hpp"
#include "chronolink/util/status_macros.hpp"
#include "chronolink/util/strings.hpp"

namespace chronolink {

enum class Optimizer { kGradientDescent, kAdam };

inline std::string_view OptimizerName(Optimizer o) {
  return o == Optimizer::kAdam ? "adam" : "gd";
}

struct TrainerConfig {
  double lambda = std::numeric_limits<double>::infinity();
  int k = 64;
  double alpha = kDefaultAlpha;
  int batch_size = 32;
  double learning_rate = 3e-5;
  int epochs = 5;
  std::size_t mention_cap = kDefaultMentionCap;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::kGradientDescent;
  LossLink loss_link = LossLink::kAffinity;
  // Inference graph and evaluation settings.
  double inference_lambda = std::numeric_limits<double>::infinity();
  std::size_t k_ent = kDefaultEntityFanIn;
  std::size_t k_men = kDefaultMentionFanIn;
  std::size_t ranked_n = 64;

  absl::Status Validate() const {
    if (k < 2) return absl::InvalidArgumentError("k must be >= 2");
    if (batch_size < 1) return absl::InvalidArgumentError("batch_size must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
      return absl::InvalidArgumentError("learning_rate must be finite and >= 0");
    }
    if (epochs < 0) return absl::InvalidArgumentError("epochs must be >= 0");
    if (mention_cap < 1) return absl::InvalidArgumentError("mention_cap must be >= 1");
    if (k_ent < 1) return absl::InvalidArgumentError("k_ent must be >= 1");
    if (ranked_n < 1) return absl::InvalidArgumentError("ranked_n must be >= 1");
    if (std::isnan(lambda) || std::isnan(inference_lambda)) {
      return absl::InvalidArgumentError("lambda must not be NaN");
    }
    return CheckAlpha(alpha);
  }

  Json ToJson() const {
    auto real = [](double x) -> Json {
      if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
      return x;
    };
    return Json{{"lambda", real(lambda)},
                {"k", k},
                {"alpha", alpha},
                {"batch_size", batch_size},
                {"learning_rate", learning_rate},
                {"epochs", epochs},
                {"mention_cap", mention_cap},
                {"seed", seed},
                {"optimizer", OptimizerName(optimizer)},
                {"loss_link", loss_link == LossLink::kAffinity ? "affinity" : "weight"},
                {"inference_lambda", real(inference_lambda)},
                {"k_ent", k_ent},
                {"k_men", k_men},
                {"ranked_n", ranked_n}};
  }

  // Keys are emitted sorted, so equal configs hash equally.
  std::string Hash() const { return Sha256Hex(ToJson().dump()); }
};

// Plain gradient descent or Adam (beta1 0.9, beta2 0.999, eps 1e-8).
class ParameterOptimizer {
 public:
  ParameterOptimizer(Optimizer kind, double learning_rate)
      : kind_(kind), lr_(learning_rate) {}

  absl::Status Apply(const std::map<ParamKey, std::vector<double>>& gradient,
                     ParameterSet& params) {
    ++t_;
    for (const auto& [key, g] : gradient) {
      EmbeddingVector* p = params.FindMutable(key.first, key.second);
      if (p == nullptr) {
        return absl::FailedPreconditionError(
            StrCat("parameter ", key.second, " missing or frozen"));
      }
      std::span<double> x = p->mutable_values();
      if (kind_ == Optimizer::kGradientDescent) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] -= lr_ * g[i];
      } else {
        Moments& mo = moments_[key];
        if (mo.m.empty()) {
          mo.m.assign(x.size(), 0.0);
          mo.v.assign(x.size(), 0.0);
        }
        const double c1 = 1.0 - std::pow(0.9, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(0.999, static_cast<double>(t_));
        for (std::size_t i = 0; i < x.size(); ++i) {
          mo.m[i] = 0.9 * mo.m[i] + 0.1 * g[i];
          mo.v[i] = 0.999 * mo.v[i] + 0.001 * g[i] * g[i];
          x[i] -= lr_ * (mo.m[i] / c1) / (std::sqrt(mo.v[i] / c2) + 1e-8);
        }
      }
      if (!p->AllFinite()) {
        return absl::InternalError(StrCat("non-finite parameter ", key.second));
      }
    }
    return absl::OkStatus();
  }

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  Optimizer kind_;
  double lr_;
  std::int64_t t_ = 0;
  std::map<ParamKey, Moments> moments_;
};

struct SegmentTrainingData {
  std::vector<std::string> mentions;              // segment mentions in order
  std::map<std::string, std::string> gold_links;  // mention -> entity
};

struct TrainStats {
  std::int64_t steps = 0;
  std::vector<double> losses;  // batch loss before each step
  double final_loss = 0.0;     // mean loss of the last epoch
};

// One batch: positives from the pruned batch graph plus sampled negatives.
inline absl::StatusOr<std::vector<LabeledEdge>> LabelBatch(
    const TrainerConfig& config, const std::vector<std::string>& batch,
    const SegmentTrainingData& data,
    const std::map<std::string, std::set<std::string>>& coref_sets,
    const ClusterState& state, const ParameterSet& params) {
  ASSIGN_OR_RETURN(AffinityGraph graph,
                   BuildBatchGraph(batch, data.gold_links, coref_sets, state, params));
  std::vector<LabeledEdge> edges = PositiveEdges(graph, config.lambda);
  for (const std::string& m : batch) {
    const std::string& gold = data.gold_links.at(m);
    ASSIGN_OR_RETURN(std::vector<LabeledEdge> negatives,
                     NegativeEdges(m, gold, coref_sets.at(gold), data.mentions, state,
                                   params, config.k));
    edges.insert(edges.end(), negatives.begin(), negatives.end());
  }
  return edges;
}

// Gradient steps over shuffled batches of the segment. Cluster memberships
// stay those of `prev_states`; representations follow the parameters.
inline absl::StatusOr<TrainStats> TrainSegment(const TrainerConfig& config,
                                               const SegmentTrainingData& data,
                                               const ClusterState& prev_states,
                                               ParameterSet& params) {
  RETURN_IF_ERROR(config.Validate());
  std::map<std::string, std::set<std::string>> coref_sets;
  for (const std::string& m : data.mentions) {
    auto it = data.gold_links.find(m);
    if (it == data.gold_links.end()) {
      return absl::FailedPreconditionError(
          StrCat("missing gold link for training mention ", m));
    }
    if (prev_states.Find(it->second) == nullptr) {
      return absl::NotFoundError(
          StrCat("gold entity ", it->second, " of ", m, " not in catalog"));
    }
    coref_sets[it->second].insert(m);
  }

  ClusterState state = prev_states;
  ParameterOptimizer optimizer(config.optimizer, config.learning_rate);
  std::mt19937_64 rng(config.seed);
  std::vector<std::string> order = data.mentions;
  TrainStats stats;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const std::vector<std::string> batch(order.begin() + start, order.begin() + end);
      RETURN_IF_ERROR(state.Recompute(params));
      ASSIGN_OR_RETURN(std::vector<LabeledEdge> edges,
                       LabelBatch(config, batch, data, coref_sets, state, params));
      ASSIGN_OR_RETURN(LossAndGradient lg,
                       ComputeLoss(edges, batch, state, params, config.loss_link));
      stats.losses.push_back(lg.loss);
      epoch_loss += lg.loss;
      ++batches;
      if (config.learning_rate > 0.0) {
        RETURN_IF_ERROR(optimizer.Apply(lg.gradient, params));
      }
      ++stats.steps;
    }
    if (batches > 0) stats.final_loss = epoch_loss / batches;
  }
  return stats;
}

}  // namespace chronolink

#endif  // CHRONOLINK_TRAINER_TRAINER_HPP_
