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

// Data model for list-wise ranking: candidates grouped per query, CSV
// ingestion, feature standardization and cross-validation splits.
//
// CSV layout (header mandatory):
//
//   query_id,doc_id,protected,<f1>,...,<fk>,judgment
//
// When the protected attribute is used as a training feature it is appended
// as the LAST feature column, named "protected".

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "deltr/detail/text.hpp"
#include "deltr/error.hpp"

namespace deltr {

inline constexpr std::string_view kProtectedFeatureName = "protected";

struct Candidate {
  std::string doc_id;
  bool is_protected = false;
  std::vector<double> features;
  double judgment = 0.0;
};

struct QueryList {
  std::string query_id;
  std::vector<Candidate> candidates;

  std::size_t size() const { return candidates.size(); }

  std::vector<double> judgments() const {
    std::vector<double> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) out.push_back(c.judgment);
    return out;
  }

  std::vector<bool> protected_flags() const {
    std::vector<bool> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) out.push_back(c.is_protected);
    return out;
  }

  bool has_both_groups() const {
    bool any_protected = false;
    bool any_other = false;
    for (const auto& c : candidates) {
      (c.is_protected ? any_protected : any_other) = true;
    }
    return any_protected && any_other;
  }
};

struct Dataset {
  std::vector<QueryList> queries;
  std::vector<std::string> feature_names;
  std::optional<std::size_t> protected_feature_index;

  std::size_t dimension() const { return feature_names.size(); }

  std::size_t num_candidates() const {
    std::size_t n = 0;
    for (const auto& q : queries) n += q.size();
    return n;
  }

  // Share of protected candidates over all queries.
  double protected_fraction() const {
    std::size_t n = 0;
    std::size_t p = 0;
    for (const auto& q : queries) {
      for (const auto& c : q.candidates) {
        ++n;
        if (c.is_protected) ++p;
      }
    }
    return n == 0 ? 0.0 : static_cast<double>(p) / static_cast<double>(n);
  }
};

struct ScalingParams {
  std::vector<double> means;
  std::vector<double> stddevs;

  std::size_t size() const { return means.size(); }
  bool is_constant(std::size_t column) const { return stddevs.at(column) == 0.0; }
};

// Throws Error when a structural invariant of Dataset does not hold.
inline void validate(const Dataset& dataset) {
  std::unordered_set<std::string> query_ids;
  for (const auto& q : dataset.queries) {
    if (!query_ids.insert(q.query_id).second) {
      throw Error("duplicate query_id '" + q.query_id + "'");
    }
    if (q.size() < 2) {
      throw Error("query '" + q.query_id + "' has fewer than 2 candidates");
    }
    std::unordered_set<std::string> doc_ids;
    for (const auto& c : q.candidates) {
      if (!doc_ids.insert(c.doc_id).second) {
        throw Error("duplicate doc_id '" + c.doc_id + "' in query '" +
                    q.query_id + "'");
      }
      if (c.features.size() != dataset.dimension()) {
        throw Error("candidate '" + c.doc_id + "' in query '" + q.query_id +
                    "' has " + std::to_string(c.features.size()) +
                    " features, expected " +
                    std::to_string(dataset.dimension()));
      }
      if (!(c.judgment >= 0.0) || !std::isfinite(c.judgment)) {
        throw Error("candidate '" + c.doc_id + "' in query '" + q.query_id +
                    "' has an invalid judgment");
      }
    }
  }
  if (dataset.protected_feature_index &&
      *dataset.protected_feature_index >= dataset.dimension()) {
    throw Error("protected_feature_index out of range");
  }
}

// Parses the ranking CSV. When `append_protected_feature` is set the
// protected flag is additionally exposed as a trailing 0/1 feature column.
inline Dataset parse_dataset(std::string_view csv_text,
                             bool append_protected_feature) {
  const auto rows = detail::lines(csv_text);
  if (rows.empty() || detail::trim(rows.front()).empty()) {
    throw ParseError("missing header row");
  }
  const auto header = detail::split(rows.front(), ',');
  if (header.size() < 4 || detail::trim(header[0]) != "query_id" ||
      detail::trim(header[1]) != "doc_id" ||
      detail::trim(header[2]) != "protected" ||
      detail::trim(header.back()) != "judgment") {
    throw ParseError(
        "header must be query_id,doc_id,protected,<features...>,judgment");
  }

  Dataset dataset;
  for (std::size_t i = 3; i + 1 < header.size(); ++i) {
    const std::string name(detail::trim(header[i]));
    if (append_protected_feature && name == kProtectedFeatureName) {
      throw ParseError("feature column may not be named 'protected'");
    }
    dataset.feature_names.push_back(name);
  }
  const std::size_t raw_dim = dataset.feature_names.size();
  if (append_protected_feature) {
    dataset.feature_names.emplace_back(kProtectedFeatureName);
    dataset.protected_feature_index = raw_dim;
  }

  std::unordered_map<std::string, std::size_t> query_index;
  std::vector<std::unordered_set<std::string>> seen_docs;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t line_no = r + 1;
    const auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
    if (detail::trim(rows[r]).empty()) continue;
    const auto fields = detail::split(rows[r], ',');
    if (fields.size() != header.size()) {
      throw ParseError(where() + "expected " + std::to_string(header.size()) +
                       " fields, found " + std::to_string(fields.size()));
    }
    Candidate c;
    const std::string query_id(detail::trim(fields[0]));
    c.doc_id = std::string(detail::trim(fields[1]));
    if (query_id.empty() || c.doc_id.empty()) {
      throw ParseError(where() + "empty query_id or doc_id");
    }
    const auto flag = detail::trim(fields[2]);
    if (flag == "1") {
      c.is_protected = true;
    } else if (flag != "0") {
      throw ParseError(where() + "protected must be 0 or 1");
    }
    c.features.reserve(dataset.feature_names.size());
    for (std::size_t i = 3; i + 1 < fields.size(); ++i) {
      const auto value = detail::parse_real(fields[i]);
      if (!value) {
        throw ParseError(where() + "feature '" + dataset.feature_names[i - 3] +
                         "' is not a finite real");
      }
      c.features.push_back(*value);
    }
    if (append_protected_feature) {
      c.features.push_back(c.is_protected ? 1.0 : 0.0);
    }
    const auto judgment = detail::parse_real(fields.back());
    if (!judgment) throw ParseError(where() + "judgment is not a finite real");
    if (*judgment < 0.0) throw ParseError(where() + "negative judgment");
    c.judgment = *judgment;

    auto [it, inserted] = query_index.try_emplace(query_id, dataset.queries.size());
    if (inserted) {
      dataset.queries.push_back(QueryList{query_id, {}});
      seen_docs.emplace_back();
    }
    if (!seen_docs[it->second].insert(c.doc_id).second) {
      throw ParseError(where() + "duplicate doc_id '" + c.doc_id +
                       "' for query '" + query_id + "'");
    }
    dataset.queries[it->second].candidates.push_back(std::move(c));
  }
  for (const auto& q : dataset.queries) {
    if (q.size() < 2) {
      throw ParseError("query '" + q.query_id + "' has fewer than 2 candidates");
    }
  }
  return dataset;
}

// Inverse of parse_dataset. The protected feature column, if present, is not
// written: it is re-derived from the `protected` column when parsing.
inline std::string write_dataset_csv(const Dataset& dataset) {
  std::string out = "query_id,doc_id,protected";
  for (std::size_t i = 0; i < dataset.dimension(); ++i) {
    if (dataset.protected_feature_index == i) continue;
    out += ',';
    out += dataset.feature_names[i];
  }
  out += ",judgment\n";
  for (const auto& q : dataset.queries) {
    for (const auto& c : q.candidates) {
      out += q.query_id;
      out += ',';
      out += c.doc_id;
      out += c.is_protected ? ",1" : ",0";
      for (std::size_t i = 0; i < c.features.size(); ++i) {
        if (dataset.protected_feature_index == i) continue;
        out += ',';
        out += detail::format_real(c.features[i]);
      }
      out += ',';
      out += detail::format_real(c.judgment);
      out += '\n';
    }
  }
  return out;
}

// Population mean and standard deviation of every feature column over all
// candidates of all queries. A column whose values are all identical gets
// stddev 0 and is treated as constant.
inline ScalingParams fit_scaling(const Dataset& dataset) {
  const std::size_t dim = dataset.dimension();
  const std::size_t n = dataset.num_candidates();
  if (n == 0) throw Error("cannot standardize an empty dataset");

  ScalingParams params{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (std::size_t j = 0; j < dim; ++j) {
    const double first = dataset.queries.front().candidates.front().features[j];
    bool constant = true;
    double sum = 0.0;
    for (const auto& q : dataset.queries) {
      for (const auto& c : q.candidates) {
        sum += c.features[j];
        constant = constant && c.features[j] == first;
      }
    }
    if (constant) {
      params.means[j] = first;
      continue;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& q : dataset.queries) {
      for (const auto& c : q.candidates) {
        const double d = c.features[j] - mean;
        ss += d * d;
      }
    }
    params.means[j] = mean;
    params.stddevs[j] = std::sqrt(ss / static_cast<double>(n));
  }
  return params;
}

inline void apply_scaling(std::span<double> features, const ScalingParams& params) {
  if (features.size() != params.size()) {
    throw Error("scaling has " + std::to_string(params.size()) +
                " columns, features have " + std::to_string(features.size()));
  }
  for (std::size_t j = 0; j < features.size(); ++j) {
    features[j] = params.is_constant(j)
                      ? 0.0
                      : (features[j] - params.means[j]) / params.stddevs[j];
  }
}

inline Dataset apply_scaling(Dataset dataset, const ScalingParams& params) {
  for (auto& q : dataset.queries) {
    for (auto& c : q.candidates) apply_scaling(c.features, params);
  }
  return dataset;
}

inline std::pair<Dataset, ScalingParams> standardize(const Dataset& dataset) {
  ScalingParams params = fit_scaling(dataset);
  return {apply_scaling(dataset, params), std::move(params)};
}

// Drops the protected feature column while keeping the per-candidate flag.
inline Dataset mask_protected_feature(const Dataset& dataset) {
  if (!dataset.protected_feature_index) {
    throw Error("dataset has no protected feature column to mask");
  }
  const std::size_t col = *dataset.protected_feature_index;
  Dataset out = dataset;
  out.feature_names.erase(out.feature_names.begin() + static_cast<std::ptrdiff_t>(col));
  for (auto& q : out.queries) {
    for (auto& c : q.candidates) {
      c.features.erase(c.features.begin() + static_cast<std::ptrdiff_t>(col));
    }
  }
  out.protected_feature_index.reset();
  return out;
}

struct Fold {
  Dataset train;
  Dataset test;
};

// Seeded shuffle of the queries into `num_folds` near-equal groups; fold i
// tests on group i and trains on the rest.
inline std::vector<Fold> split_folds(const Dataset& dataset, std::size_t num_folds,
                                     std::uint64_t seed) {
  const std::size_t m = dataset.queries.size();
  if (num_folds < 2) throw Error("num_folds must be at least 2");
  if (num_folds > m) {
    throw Error("num_folds (" + std::to_string(num_folds) +
                ") exceeds the number of queries (" + std::to_string(m) + ")");
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  // group[i] = queries at shuffled positions [m*i/k, m*(i+1)/k)
  std::vector<std::size_t> group_of(m);
  for (std::size_t g = 0; g < num_folds; ++g) {
    for (std::size_t pos = m * g / num_folds; pos < m * (g + 1) / num_folds; ++pos) {
      group_of[order[pos]] = g;
    }
  }

  std::vector<Fold> folds(num_folds);
  for (std::size_t g = 0; g < num_folds; ++g) {
    auto& fold = folds[g];
    for (Dataset* part : {&fold.train, &fold.test}) {
      part->feature_names = dataset.feature_names;
      part->protected_feature_index = dataset.protected_feature_index;
    }
    // Queries keep their original relative order inside each part.
    for (std::size_t qi = 0; qi < m; ++qi) {
      (group_of[qi] == g ? fold.test : fold.train).queries.push_back(dataset.queries[qi]);
    }
  }
  return folds;
}

}  // namespace deltr
