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

#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "deltr/dataset.hpp"
#include "deltr/detail/text.hpp"
#include "deltr/error.hpp"
#include "deltr/listnet.hpp"
#include "deltr/trainer.hpp"

namespace deltr {

struct RankedEntry {
  std::string doc_id;
  double score = 0.0;
  bool is_protected = false;

  friend bool operator==(const RankedEntry&, const RankedEntry&) = default;
};

// Entries in rank order. predict() emits them by descending score with ties
// broken by ascending doc_id; re-rankers may reorder them.
struct Ranking {
  std::string query_id;
  std::vector<RankedEntry> entries;

  std::size_t size() const { return entries.size(); }
  friend bool operator==(const Ranking&, const Ranking&) = default;
};

inline void sort_by_score(Ranking& ranking) {
  std::sort(ranking.entries.begin(), ranking.entries.end(),
            [](const RankedEntry& a, const RankedEntry& b) {
              if (a.score != b.score) return a.score > b.score;
              return a.doc_id < b.doc_id;
            });
}

namespace detail {

// For each model feature, the input column that feeds it. The only input
// column a model may ignore is the protected column of a model trained
// without it.
inline std::vector<std::size_t> map_columns(const Model& model,
                                            std::span<const std::string> input_names) {
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < input_names.size(); ++i) position.emplace(input_names[i], i);

  std::vector<std::string> missing;
  std::vector<std::size_t> columns;
  for (const auto& name : model.feature_names) {
    const auto it = position.find(name);
    if (it == position.end()) {
      missing.push_back(name);
    } else {
      columns.push_back(it->second);
    }
  }
  std::vector<std::string> extra;
  for (const auto& name : input_names) {
    if (std::find(model.feature_names.begin(), model.feature_names.end(), name) !=
        model.feature_names.end()) {
      continue;
    }
    if (name == kProtectedFeatureName && !model.uses_protected_feature()) continue;
    extra.push_back(name);
  }
  if (!missing.empty() || !extra.empty()) {
    std::string msg = "feature mismatch between model and input;";
    const auto list = [&msg](const char* label, const std::vector<std::string>& names) {
      if (names.empty()) return;
      msg += std::string(" ") + label + ":";
      for (const auto& n : names) msg += " " + n;
      msg += ";";
    };
    list("missing from input", missing);
    list("unknown to model", extra);
    throw Error(msg);
  }
  return columns;
}

}  // namespace detail

// Scores one query with the model's stored standardization applied.
inline Ranking predict(const Model& model, const QueryList& query,
                       std::span<const std::string> feature_names) {
  const auto columns = detail::map_columns(model, feature_names);
  Ranking ranking{query.query_id, {}};
  ranking.entries.reserve(query.size());
  std::vector<double> x(columns.size());
  for (const auto& c : query.candidates) {
    if (c.features.size() != feature_names.size()) {
      throw Error("candidate '" + c.doc_id + "' has the wrong feature dimension");
    }
    for (std::size_t j = 0; j < columns.size(); ++j) x[j] = c.features[columns[j]];
    if (model.scaling) apply_scaling(x, *model.scaling);
    ranking.entries.push_back({c.doc_id, score(model.omega, x), c.is_protected});
  }
  sort_by_score(ranking);
  return ranking;
}

inline std::vector<Ranking> predict(const Model& model, const Dataset& dataset) {
  std::vector<Ranking> out;
  out.reserve(dataset.queries.size());
  for (const auto& q : dataset.queries) out.push_back(predict(model, q, dataset.feature_names));
  return out;
}

inline std::string write_predictions_csv(std::span<const Ranking> rankings) {
  std::string out = "query_id,doc_id,rank,score,protected\n";
  for (const auto& r : rankings) {
    for (std::size_t i = 0; i < r.entries.size(); ++i) {
      const auto& e = r.entries[i];
      out += r.query_id + ',' + e.doc_id + ',' + std::to_string(i + 1) + ',' +
             detail::format_real(e.score) + (e.is_protected ? ",1\n" : ",0\n");
    }
  }
  return out;
}

// Queries come back in first-appearance order, entries sorted by rank.
inline std::vector<Ranking> parse_predictions_csv(std::string_view text) {
  const auto rows = detail::lines(text);
  if (rows.empty() || detail::trim(rows.front()) != "query_id,doc_id,rank,score,protected") {
    throw ParseError("predictions header must be query_id,doc_id,rank,score,protected");
  }
  std::vector<Ranking> out;
  std::vector<std::map<long long, RankedEntry>> by_rank;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (detail::trim(rows[r]).empty()) continue;
    const std::string where = "line " + std::to_string(r + 1) + ": ";
    const auto f = detail::split(rows[r], ',');
    if (f.size() != 5) throw ParseError(where + "expected 5 fields");
    const auto rank = detail::parse_real(f[2]);
    const auto sc = detail::parse_real(f[3]);
    const auto flag = detail::trim(f[4]);
    if (!rank || *rank < 1 || *rank != static_cast<double>(static_cast<long long>(*rank))) {
      throw ParseError(where + "rank must be a positive integer");
    }
    if (!sc) throw ParseError(where + "score is not a finite real");
    if (flag != "0" && flag != "1") throw ParseError(where + "protected must be 0 or 1");
    const std::string qid(detail::trim(f[0]));
    auto [it, inserted] = index.try_emplace(qid, out.size());
    if (inserted) {
      out.push_back(Ranking{qid, {}});
      by_rank.emplace_back();
    }
    RankedEntry e{std::string(detail::trim(f[1])), *sc, flag == "1"};
    if (!by_rank[it->second].emplace(static_cast<long long>(*rank), std::move(e)).second) {
      throw ParseError(where + "duplicate rank for query '" + qid + "'");
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    long long expected = 1;
    for (auto& [rank, e] : by_rank[i]) {
      if (rank != expected++) {
        throw ParseError("ranks of query '" + out[i].query_id + "' are not 1..n");
      }
      out[i].entries.push_back(std::move(e));
    }
  }
  return out;
}

}  // namespace deltr
