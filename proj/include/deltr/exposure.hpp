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

// Group exposure under top-one probabilities and the disparate-exposure
// penalty
//
//   U = max(0, Exposure(G0) - Exposure(G1))^2
//
// where G1 is the protected group and Exposure(G) is the mean of
// P(i) * v_1 over the members of G. The penalty is one-sided: a protected
// group that is MORE exposed than the non-protected one is not penalized.

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "deltr/dataset.hpp"
#include "deltr/error.hpp"
#include "deltr/listnet.hpp"

namespace deltr {

struct GroupExposure {
  double exposure_nonprotected = 0.0;
  double exposure_protected = 0.0;
  std::size_t count_nonprotected = 0;
  std::size_t count_protected = 0;

  // Exposure(G0) - Exposure(G1).
  double gap() const { return exposure_nonprotected - exposure_protected; }
};

// v_j = 1 / ln(1 + j).
inline double position_bias(long long j) {
  if (j < 1) throw Error("position must be >= 1, got " + std::to_string(j));
  return 1.0 / std::log1p(static_cast<double>(j));
}

inline double document_exposure(double prob_top_one) {
  if (!(prob_top_one > 0.0 && prob_top_one <= 1.0)) {
    throw Error("top-one probability must lie in (0, 1]");
  }
  return prob_top_one * position_bias(1);
}

inline GroupExposure group_exposures(const TopOneDistribution& dist,
                                     const std::vector<bool>& flags) {
  if (dist.size() != flags.size()) {
    throw Error("group exposure: distribution and flags differ in length");
  }
  GroupExposure ge;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const double e = document_exposure(dist[i]);
    if (flags[i]) {
      ge.exposure_protected += e;
      ++ge.count_protected;
    } else {
      ge.exposure_nonprotected += e;
      ++ge.count_nonprotected;
    }
  }
  if (ge.count_protected == 0) throw EmptyGroupError("protected group (G1) is empty");
  if (ge.count_nonprotected == 0) {
    throw EmptyGroupError("non-protected group (G0) is empty");
  }
  ge.exposure_protected /= static_cast<double>(ge.count_protected);
  ge.exposure_nonprotected /= static_cast<double>(ge.count_nonprotected);
  return ge;
}

inline double disparate_exposure(const GroupExposure& ge) {
  const double gap = ge.gap();
  return gap > 0.0 ? gap * gap : 0.0;
}

// U for one query under the linear model.
inline double query_disparate_exposure(const Weights& omega, const QueryList& query) {
  return disparate_exposure(
      group_exposures(top_one_probabilities(scores(omega, query)), query.protected_flags()));
}

// dU/dw given the query's predicted distribution, added into `grad` scaled by
// `weight`. Nothing is added while the hinge is inactive.
inline void accumulate_disparate_exposure_gradient(const TopOneDistribution& predicted,
                                                   const QueryList& query, double weight,
                                                   std::span<double> grad) {
  const auto ge = group_exposures(predicted, query.protected_flags());
  const double gap = ge.gap();
  if (!(gap > 0.0)) return;

  // mean dP/dw per group; dP_i/dw = P_i (x_i - xbar) with xbar = sum_k P_k x_k.
  const std::size_t dim = grad.size();
  std::vector<double> xbar(dim, 0.0);
  for (std::size_t k = 0; k < query.size(); ++k) {
    const auto& x = query.candidates[k].features;
    for (std::size_t j = 0; j < dim; ++j) xbar[j] += predicted[k] * x[j];
  }
  const double inv0 = 1.0 / static_cast<double>(ge.count_nonprotected);
  const double inv1 = 1.0 / static_cast<double>(ge.count_protected);
  std::vector<double> diff(dim, 0.0);
  for (std::size_t i = 0; i < query.size(); ++i) {
    const auto& c = query.candidates[i];
    const double coef = predicted[i] * (c.is_protected ? -inv1 : inv0);
    for (std::size_t j = 0; j < dim; ++j) diff[j] += coef * (c.features[j] - xbar[j]);
  }
  const double v1 = position_bias(1);
  const double scale = weight * 2.0 * gap * v1;
  for (std::size_t j = 0; j < dim; ++j) grad[j] += scale * diff[j];
}

inline std::vector<double> disparate_exposure_gradient(const Weights& omega,
                                                       const QueryList& query) {
  std::vector<double> grad(omega.size(), 0.0);
  accumulate_disparate_exposure_gradient(top_one_probabilities(scores(omega, query)), query,
                                         1.0, grad);
  return grad;
}

}  // namespace deltr
