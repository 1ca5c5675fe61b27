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

// Full-batch gradient descent on
//
//   L_total(w) = sum_q [ L(y_q, <w, x_q>) + gamma * U_q(w) ]
//
// With gamma = 0 this is plain ListNet and the exposure term is never
// evaluated for the update. Queries that contain only one group contribute
// U_q = 0; they are reported through the optional warnings sink.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deltr/dataset.hpp"
#include "deltr/error.hpp"
#include "deltr/exposure.hpp"
#include "deltr/listnet.hpp"

namespace deltr {

struct Hyperparams {
  double gamma = 0.0;
  double learning_rate = 1e-3;
  long long iterations = 3000;
  double init_stddev = 0.01;
  std::uint64_t seed = 0;
  bool standardize = true;
  bool include_protected_feature = false;

  void validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw Error("gamma must be >= 0");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw Error("learning_rate must be > 0");
    }
    if (iterations < 1) throw Error("iterations must be >= 1");
    if (!(init_stddev >= 0.0) || !std::isfinite(init_stddev)) {
      throw Error("init_stddev must be >= 0");
    }
  }

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

struct LossCheckpoint {
  long long iteration = 0;
  double loss = 0.0;                // sum_q L
  double disparate_exposure = 0.0;  // sum_q U, unweighted

  friend bool operator==(const LossCheckpoint&, const LossCheckpoint&) = default;
};

struct Model {
  Weights omega;
  std::vector<std::string> feature_names;
  std::optional<ScalingParams> scaling;
  Hyperparams hyperparams;
  std::vector<LossCheckpoint> loss_trace;

  bool uses_protected_feature() const {
    return !feature_names.empty() && feature_names.back() == kProtectedFeatureName;
  }
};

struct CombinedLoss {
  double total = 0.0;
  double accuracy = 0.0;  // sum_q L
  double exposure = 0.0;  // sum_q U, before weighting by gamma
};

namespace detail {

// Per-dataset state shared by the loss and gradient evaluations.
class Objective {
 public:
  explicit Objective(const Dataset& dataset) : dataset_(dataset) {
    if (dataset.queries.empty()) throw Error("dataset has no queries");
    targets_.reserve(dataset.queries.size());
    both_groups_.reserve(dataset.queries.size());
    for (const auto& q : dataset.queries) {
      targets_.push_back(top_one_probabilities(q.judgments()));
      both_groups_.push_back(q.has_both_groups());
    }
  }

  std::size_t single_group_queries() const {
    return static_cast<std::size_t>(std::count(both_groups_.begin(), both_groups_.end(), false));
  }

  CombinedLoss loss(const Weights& omega, double gamma) const {
    check_dimension(omega);
    CombinedLoss out;
    for (std::size_t qi = 0; qi < dataset_.queries.size(); ++qi) {
      const auto& q = dataset_.queries[qi];
      const auto s = scores(omega, q);
      const double lse = log_sum_exp(s);
      for (std::size_t i = 0; i < s.size(); ++i) out.accuracy -= targets_[qi][i] * (s[i] - lse);
      if (both_groups_[qi]) {
        out.exposure +=
            disparate_exposure(group_exposures(top_one_probabilities(s), q.protected_flags()));
      }
    }
    out.total = out.accuracy + gamma * out.exposure;
    return out;
  }

  // Summed in query order so that results are reproducible bit for bit.
  std::vector<double> gradient(const Weights& omega, double gamma) const {
    check_dimension(omega);
    std::vector<double> grad(omega.size(), 0.0);
    for (std::size_t qi = 0; qi < dataset_.queries.size(); ++qi) {
      const auto& q = dataset_.queries[qi];
      const auto predicted = top_one_probabilities(scores(omega, q));
      accumulate_query_loss_gradient(targets_[qi], predicted, q, grad);
      if (gamma > 0.0 && both_groups_[qi]) {
        accumulate_disparate_exposure_gradient(predicted, q, gamma, grad);
      }
    }
    return grad;
  }

 private:
  void check_dimension(const Weights& omega) const {
    if (omega.size() != dataset_.dimension()) {
      throw Error("dimension mismatch: weights have " + std::to_string(omega.size()) +
                  " entries, dataset has " + std::to_string(dataset_.dimension()) +
                  " features");
    }
  }

  const Dataset& dataset_;
  std::vector<TopOneDistribution> targets_;
  std::vector<bool> both_groups_;
};

inline bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace detail

inline CombinedLoss combined_loss(const Weights& omega, const Dataset& dataset, double gamma) {
  return detail::Objective(dataset).loss(omega, gamma);
}

inline std::vector<double> combined_loss_gradient(const Weights& omega, const Dataset& dataset,
                                                  double gamma) {
  return detail::Objective(dataset).gradient(omega, gamma);
}

// The training set as the optimizer sees it: protected column removed unless
// requested, then standardized when enabled.
struct PreparedData {
  Dataset dataset;
  std::optional<ScalingParams> scaling;
};

inline PreparedData prepare_training_data(const Dataset& dataset, const Hyperparams& hp) {
  validate(dataset);
  PreparedData out{dataset, std::nullopt};
  if (!hp.include_protected_feature) {
    if (out.dataset.protected_feature_index) out.dataset = mask_protected_feature(out.dataset);
  } else if (!out.dataset.protected_feature_index) {
    throw Error("include_protected_feature set but the dataset has no protected column");
  }
  if (out.dataset.dimension() == 0) throw Error("dataset has no features to train on");
  if (out.dataset.queries.empty()) throw Error("dataset has no queries");
  if (hp.standardize) {
    auto [scaled, params] = standardize(out.dataset);
    out.dataset = std::move(scaled);
    out.scaling = std::move(params);
  }
  return out;
}

inline Weights initial_weights(std::size_t dim, const Hyperparams& hp) {
  std::vector<double> w(dim, 0.0);
  if (hp.init_stddev > 0.0) {
    std::mt19937_64 rng(hp.seed);
    std::normal_distribution<double> normal(0.0, hp.init_stddev);
    for (double& v : w) v = normal(rng);
  }
  return Weights(std::move(w));
}

// Scale of both objective terms at the initial weights. A gamma near
// loss / disparate_exposure makes the two terms comparable; a tenth of that
// leans towards accuracy.
struct GammaScale {
  double loss = 0.0;
  double disparate_exposure = 0.0;

  std::optional<double> comparable_gamma() const {
    if (!(disparate_exposure > 0.0)) return std::nullopt;
    return loss / disparate_exposure;
  }
};

inline GammaScale gamma_scale(const Dataset& dataset, const Hyperparams& hp) {
  hp.validate();
  const auto prepared = prepare_training_data(dataset, hp);
  const auto loss = combined_loss(initial_weights(prepared.dataset.dimension(), hp),
                                  prepared.dataset, hp.gamma);
  return {loss.accuracy, loss.exposure};
}

inline Model train(const Dataset& dataset, const Hyperparams& hp,
                   std::vector<std::string>* warnings = nullptr) {
  hp.validate();
  auto prepared = prepare_training_data(dataset, hp);
  const Dataset& data = prepared.dataset;
  const detail::Objective objective(data);
  if (warnings != nullptr && objective.single_group_queries() > 0) {
    warnings->push_back(std::to_string(objective.single_group_queries()) +
                        " training queries contain a single group; their disparate exposure "
                        "is treated as 0");
  }

  Weights omega = initial_weights(data.dimension(), hp);
  const long long stride = std::max(1LL, hp.iterations / 100);
  std::vector<LossCheckpoint> trace;

  const auto diverged = [](const std::string& what, long long iteration) {
    return TrainingAborted(what + " at iteration " + std::to_string(iteration) +
                           " (learning rate too large?)");
  };
  // Scores overflow before the weights do when the step size is far too large.
  const auto guarded = [&](long long iteration, auto&& body) {
    try {
      return body();
    } catch (const TrainingAborted&) {
      throw;
    } catch (const Error& e) {
      throw diverged(e.what(), iteration);
    }
  };

  const auto checkpoint = [&](long long iteration) {
    const auto loss = guarded(iteration, [&] { return objective.loss(omega, hp.gamma); });
    if (!std::isfinite(loss.accuracy) || !std::isfinite(loss.exposure)) {
      throw diverged("non-finite loss", iteration);
    }
    trace.push_back({iteration, loss.accuracy, loss.exposure});
  };

  checkpoint(0);
  std::vector<double> next(data.dimension());
  for (long long t = 1; t <= hp.iterations; ++t) {
    const auto grad = guarded(t, [&] { return objective.gradient(omega, hp.gamma); });
    if (!detail::all_finite(grad)) {
      throw diverged("non-finite gradient", t);
    }
    for (std::size_t j = 0; j < next.size(); ++j) {
      next[j] = omega[j] - hp.learning_rate * grad[j];
    }
    if (!detail::all_finite(next)) {
      throw diverged("non-finite weights", t);
    }
    omega = Weights(next);
    if (t % stride == 0 || t == hp.iterations) checkpoint(t);
  }

  return Model{std::move(omega), data.feature_names, std::move(prepared.scaling), hp,
               std::move(trace)};
}

}  // namespace deltr
