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

// Generators and independent oracles shared by the test suites. Nothing in
// here calls into the code paths it is used to check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "deltr/dataset.hpp"
#include "deltr/listnet.hpp"

namespace deltr::testing {

inline QueryList random_query(std::mt19937_64& rng, std::size_t n, std::size_t dim,
                              bool both_groups = true, const std::string& id = "q") {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> judgment(0.0, 3.0);
  std::bernoulli_distribution coin(0.4);
  QueryList q{id, {}};
  for (std::size_t i = 0; i < n; ++i) {
    Candidate c{"d" + std::to_string(i), coin(rng), {}, judgment(rng)};
    for (std::size_t j = 0; j < dim; ++j) c.features.push_back(normal(rng));
    q.candidates.push_back(std::move(c));
  }
  if (both_groups) {
    q.candidates[0].is_protected = true;
    q.candidates[1].is_protected = false;
  }
  return q;
}

inline Dataset random_dataset(std::mt19937_64& rng, std::size_t queries, std::size_t min_n,
                              std::size_t max_n, std::size_t dim) {
  std::uniform_int_distribution<std::size_t> size(min_n, max_n);
  Dataset d;
  for (std::size_t j = 0; j < dim; ++j) d.feature_names.push_back("f" + std::to_string(j));
  for (std::size_t qi = 0; qi < queries; ++qi) {
    d.queries.push_back(random_query(rng, size(rng), dim, true, "q" + std::to_string(qi)));
  }
  return d;
}

inline Weights random_weights(std::mt19937_64& rng, std::size_t dim, double stddev = 1.0) {
  std::normal_distribution<double> normal(0.0, stddev);
  std::vector<double> w(dim);
  for (double& v : w) v = normal(rng);
  return Weights(std::move(w));
}

// Unshifted softmax in extended precision.
inline std::vector<long double> softmax_oracle(const std::vector<double>& s) {
  long double sum = 0.0L;
  for (double v : s) sum += std::exp(static_cast<long double>(v));
  std::vector<long double> out;
  for (double v : s) out.push_back(std::exp(static_cast<long double>(v)) / sum);
  return out;
}

inline long double cross_entropy_oracle(const std::vector<long double>& p,
                                        const std::vector<long double>& q) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) total += -p[i] * std::log(q[i]);
  return total;
}

// Plain dot products, no shared helpers.
inline std::vector<double> scores_oracle(const Weights& w, const QueryList& q) {
  std::vector<double> out;
  for (const auto& c : q.candidates) {
    long double s = 0.0L;
    for (std::size_t j = 0; j < c.features.size(); ++j) s += w[j] * c.features[j];
    out.push_back(static_cast<double>(s));
  }
  return out;
}

struct GroupMeans {
  long double nonprotected;
  long double protected_;
};

// Per-group mean of P * v_1 with v_1 = 1 / ln 2.
inline GroupMeans group_exposure_oracle(const std::vector<long double>& p,
                                        const std::vector<bool>& flags) {
  const long double v1 = 1.0L / std::log(2.0L);
  long double s0 = 0, s1 = 0;
  int n0 = 0, n1 = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (flags[i]) {
      s1 += p[i] * v1;
      ++n1;
    } else {
      s0 += p[i] * v1;
      ++n0;
    }
  }
  return {s0 / n0, s1 / n1};
}

inline long double disparate_exposure_oracle(const GroupMeans& g) {
  const long double gap = g.nonprotected - g.protected_;
  return gap > 0 ? gap * gap : 0.0L;
}

// Central finite differences of f at w.
inline std::vector<double> finite_difference(const std::function<double(const Weights&)>& f,
                                             const Weights& w, double step = 1e-5) {
  std::vector<double> grad(w.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    std::vector<double> plus(w.values().begin(), w.values().end());
    std::vector<double> minus = plus;
    plus[j] += step;
    minus[j] -= step;
    grad[j] = (f(Weights(plus)) - f(Weights(minus))) / (2.0 * step);
  }
  return grad;
}

// ||a - b||_inf / ||b||_inf, with an absolute floor for vanishing gradients.
inline double relative_error(const std::vector<double>& analytic,
                             const std::vector<double>& numeric, double floor = 1e-10) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t j = 0; j < analytic.size(); ++j) {
    diff = std::max(diff, std::abs(analytic[j] - numeric[j]));
    scale = std::max(scale, std::abs(numeric[j]));
  }
  return diff / std::max(scale, floor);
}

}  // namespace deltr::testing
