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

// Synthetic expert-search training data with a bias injected against the
// protected group. Every list is ordered
//
//   1. non-protected experts, 2. protected experts,
//   3. non-protected non-experts, 4. protected non-experts
//
// so expertise is judged correctly but protected candidates sit below
// non-protected candidates of the same expertise. Features carry no bias:
// "relevance" is expertise plus Gaussian noise and "distractor" is noise.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "deltr/dataset.hpp"
#include "deltr/error.hpp"

namespace deltr {

enum class JudgmentMode {
  // Experts 1, non-experts 0; the biased order is carried by position only.
  kBinary,
  // Experts in (1, 2), non-experts in (0, 1), decreasing with the position
  // inside each expertise stratum, so the biased order is visible in the
  // judgments themselves.
  kGraded,
};

struct SynthConfig {
  std::size_t num_queries = 60;
  std::size_t list_size = 200;
  double protected_fraction = 0.105;
  double expert_fraction = 0.07;
  double feature_noise_stddev = 0.5;
  std::uint64_t seed = 1;
  JudgmentMode judgments = JudgmentMode::kGraded;
  bool include_protected_feature = true;

  void validate() const {
    if (num_queries < 1) throw Error("num_queries must be >= 1");
    if (list_size < 2) throw Error("list_size must be >= 2");
    if (!(protected_fraction > 0.0 && protected_fraction < 1.0)) {
      throw Error("protected_fraction must lie in (0, 1)");
    }
    if (!(expert_fraction > 0.0 && expert_fraction < 1.0)) {
      throw Error("expert_fraction must lie in (0, 1)");
    }
    if (!(feature_noise_stddev >= 0.0)) throw Error("feature_noise_stddev must be >= 0");
    const double n = static_cast<double>(list_size);
    if (n * protected_fraction < 1.0 || n * (1.0 - protected_fraction) < 1.0 ||
        n * expert_fraction < 1.0 || n * (1.0 - expert_fraction) < 1.0) {
      throw Error("configuration leaves a candidate block empty in expectation");
    }
  }
};

namespace detail {

inline std::string padded(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

}  // namespace detail

inline Dataset generate(const SynthConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::bernoulli_distribution draw_expert(config.expert_fraction);
  std::bernoulli_distribution draw_protected(config.protected_fraction);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset dataset;
  dataset.feature_names = {"relevance", "distractor"};
  if (config.include_protected_feature) {
    dataset.feature_names.emplace_back(kProtectedFeatureName);
    dataset.protected_feature_index = 2;
  }
  const std::size_t qwidth = std::to_string(config.num_queries).size();
  const std::size_t dwidth = std::to_string(config.list_size - 1).size();

  for (std::size_t qi = 0; qi < config.num_queries; ++qi) {
    struct Draw {
      Candidate candidate;
      bool expert;
    };
    std::vector<Draw> draws;
    draws.reserve(config.list_size);
    for (std::size_t i = 0; i < config.list_size; ++i) {
      const bool expert = draw_expert(rng);
      const bool is_protected = draw_protected(rng);
      const double relevance = (expert ? 1.0 : 0.0) + config.feature_noise_stddev * noise(rng);
      const double distractor = noise(rng);
      Candidate c{"d" + detail::padded(i, dwidth), is_protected, {relevance, distractor}, 0.0};
      if (config.include_protected_feature) c.features.push_back(is_protected ? 1.0 : 0.0);
      draws.push_back({std::move(c), expert});
    }

    QueryList q{"q" + detail::padded(qi + 1, qwidth), {}};
    q.candidates.reserve(config.list_size);
    for (const bool expert : {true, false}) {
      const std::size_t stratum_start = q.candidates.size();
      for (const bool is_protected : {false, true}) {
        for (const auto& d : draws) {
          if (d.expert == expert && d.candidate.is_protected == is_protected) {
            q.candidates.push_back(d.candidate);
          }
        }
      }
      const std::size_t stratum = q.candidates.size() - stratum_start;
      for (std::size_t r = 0; r < stratum; ++r) {
        double& y = q.candidates[stratum_start + r].judgment;
        const double base = expert ? 1.0 : 0.0;
        y = config.judgments == JudgmentMode::kBinary
                ? base
                : base + static_cast<double>(stratum - r) / static_cast<double>(stratum + 1);
      }
    }
    dataset.queries.push_back(std::move(q));
  }
  return dataset;
}

}  // namespace deltr
