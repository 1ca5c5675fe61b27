// Copyright 2026 The Authors.
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

// ListNet with an exponential transformation and a linear scoring function.
//
// The top-one probability of candidate i under scores s is
//
//   P_s(i) = exp(s_i) / sum_k exp(s_k)
//
// and the per-query loss is the cross entropy between the distribution
// induced by the training judgments and the one induced by <w, x>:
//
//   L(y, s) = -sum_i P_y(i) log P_s(i)
//
// Its gradient with respect to w is sum_i (P_s(i) - P_y(i)) x_i.
// All softmax computations shift by the maximum score first.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deltr/dataset.hpp"
#include "deltr/error.hpp"

namespace deltr {

// Linear model weights; every entry is finite.
class Weights {
 public:
  Weights() = default;
  explicit Weights(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_) {
      if (!std::isfinite(v)) throw Error("weights must be finite");
    }
  }
  static Weights zeros(std::size_t dim) { return Weights(std::vector<double>(dim, 0.0)); }

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }

  friend bool operator==(const Weights&, const Weights&) = default;

 private:
  std::vector<double> values_;
};

struct TopOneDistribution {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
};

inline double score(const Weights& omega, std::span<const double> features) {
  if (omega.size() != features.size()) {
    throw Error("dimension mismatch: weights have " + std::to_string(omega.size()) +
                " entries, features have " + std::to_string(features.size()));
  }
  double s = 0.0;
  for (std::size_t j = 0; j < features.size(); ++j) s += omega[j] * features[j];
  return s;
}

inline std::vector<double> scores(const Weights& omega, const QueryList& query) {
  std::vector<double> out;
  out.reserve(query.size());
  for (const auto& c : query.candidates) out.push_back(score(omega, c.features));
  return out;
}

namespace detail {

inline void check_scores(std::span<const double> s) {
  if (s.size() < 2) throw Error("top-one probabilities need at least 2 scores");
  for (double v : s) {
    if (!std::isfinite(v)) throw Error("non-finite score");
  }
}

// log(sum_k exp(s_k)), shifted by the maximum.
inline double log_sum_exp(std::span<const double> s) {
  const double hi = *std::max_element(s.begin(), s.end());
  double sum = 0.0;
  for (double v : s) sum += std::exp(v - hi);
  return hi + std::log(sum);
}

}  // namespace detail

// Softmax of the scores. Entries that would underflow are floored at the
// smallest normal double so every probability stays strictly positive.
inline TopOneDistribution top_one_probabilities(std::span<const double> scores) {
  detail::check_scores(scores);
  const double hi = *std::max_element(scores.begin(), scores.end());
  TopOneDistribution dist;
  dist.probs.resize(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    dist.probs[i] = std::exp(scores[i] - hi);
    sum += dist.probs[i];
  }
  constexpr double kFloor = std::numeric_limits<double>::min();
  for (double& p : dist.probs) p = std::max(p / sum, kFloor);
  return dist;
}

inline double cross_entropy_loss(const TopOneDistribution& train_dist,
                                 const TopOneDistribution& pred_dist) {
  if (train_dist.size() != pred_dist.size()) {
    throw Error("cross entropy: distributions differ in length");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < train_dist.size(); ++i) {
    if (!(pred_dist[i] > 0.0)) throw Error("cross entropy: non-positive prediction");
    loss -= train_dist[i] * std::log(pred_dist[i]);
  }
  return loss;
}

// Evaluated through log-softmax so that the loss stays finite even when
// some predicted probabilities underflow.
inline double query_loss(const Weights& omega, const QueryList& query) {
  const auto target = top_one_probabilities(query.judgments());
  const auto s = scores(omega, query);
  detail::check_scores(s);
  const double lse = detail::log_sum_exp(s);
  double loss = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) loss -= target[i] * (s[i] - lse);
  return loss;
}

// dP_s(i)/dw = P_s(i) * (x_i - sum_k P_s(k) x_k), the shift-invariant form of
// [e_i x_i sum_k e_k - e_i sum_k e_k x_k] / (sum_k e_k)^2.
inline std::vector<double> top_one_probability_gradient(const Weights& omega,
                                                        const QueryList& query,
                                                        std::size_t i) {
  if (i >= query.size()) throw Error("candidate index out of range");
  const auto dist = top_one_probabilities(scores(omega, query));
  std::vector<double> grad(omega.size(), 0.0);
  for (std::size_t k = 0; k < query.size(); ++k) {
    const auto& x = query.candidates[k].features;
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] -= dist[k] * x[j];
  }
  const auto& xi = query.candidates[i].features;
  for (std::size_t j = 0; j < grad.size(); ++j) grad[j] = dist[i] * (xi[j] + grad[j]);
  return grad;
}

// Gradient of query_loss with respect to the weights, added into `grad`.
inline void accumulate_query_loss_gradient(const TopOneDistribution& target,
                                           const TopOneDistribution& predicted,
                                           const QueryList& query,
                                           std::span<double> grad) {
  for (std::size_t i = 0; i < query.size(); ++i) {
    const double coef = predicted[i] - target[i];
    const auto& x = query.candidates[i].features;
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += coef * x[j];
  }
}

inline std::vector<double> query_loss_gradient(const Weights& omega,
                                               const QueryList& query) {
  const auto target = top_one_probabilities(query.judgments());
  const auto predicted = top_one_probabilities(scores(omega, query));
  std::vector<double> grad(omega.size(), 0.0);
  accumulate_query_loss_gradient(target, predicted, query, grad);
  return grad;
}

}  // namespace deltr
