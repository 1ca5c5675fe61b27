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

// Evaluation of predicted rankings: precision@k, Kendall's tau-a and two
// exposure ratios (protected over non-protected), one over realized ranks
// and one over top-one probabilities of the model scores.

#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "deltr/dataset.hpp"
#include "deltr/detail/text.hpp"
#include "deltr/error.hpp"
#include "deltr/exposure.hpp"
#include "deltr/listnet.hpp"
#include "deltr/predictor.hpp"
#include "deltr/trainer.hpp"
#include "json.hpp"

namespace deltr {

inline double precision_at_k(const Ranking& ranking,
                             const std::unordered_set<std::string>& relevant, std::size_t k) {
  if (k < 1 || k > ranking.size()) {
    throw Error("precision@k: k=" + std::to_string(k) + " outside [1, " +
                std::to_string(ranking.size()) + "]");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += relevant.count(ranking.entries[i].doc_id);
  return static_cast<double>(hits) / static_cast<double>(k);
}

namespace detail {

// Number of pairs i < j with a[i] < a[j]; sorts `a` descending.
inline long long count_ascending_pairs(std::vector<double>& a, std::vector<double>& buf,
                                       std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  long long count = count_ascending_pairs(a, buf, lo, mid) + count_ascending_pairs(a, buf, mid, hi);
  std::size_t i = lo;
  std::size_t j = mid;
  std::size_t out = lo;
  while (i < mid && j < hi) {
    if (a[j] > a[i]) {
      count += static_cast<long long>(mid - i);
      buf[out++] = a[j++];
    } else {
      buf[out++] = a[i++];
    }
  }
  while (i < mid) buf[out++] = a[i++];
  while (j < hi) buf[out++] = a[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(hi),
            a.begin() + static_cast<std::ptrdiff_t>(lo));
  return count;
}

}  // namespace detail

// Tau-a between the predicted order and the truth judgments. Pairs tied in
// the truth count as neither concordant nor discordant but stay in the
// n(n-1)/2 denominator.
inline double kendall_tau(const Ranking& predicted, const QueryList& truth) {
  const std::size_t n = predicted.size();
  if (n != truth.size()) throw Error("kendall_tau: predicted and truth differ in size");
  if (n < 2) throw Error("kendall_tau: need at least 2 items");
  std::unordered_map<std::string, double> judgment;
  for (const auto& c : truth.candidates) judgment.emplace(c.doc_id, c.judgment);

  std::vector<double> seq;
  seq.reserve(n);
  for (const auto& e : predicted.entries) {
    const auto it = judgment.find(e.doc_id);
    if (it == judgment.end()) {
      throw Error("kendall_tau: doc_id '" + e.doc_id + "' missing from truth");
    }
    seq.push_back(it->second);
    judgment.erase(it);
  }
  std::vector<double> sorted = seq;
  std::sort(sorted.begin(), sorted.end());
  long long tied = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const auto run = static_cast<long long>(j - i);
    tied += run * (run - 1) / 2;
    i = j;
  }
  std::vector<double> buf(n);
  const long long discordant = detail::count_ascending_pairs(seq, buf, 0, n);
  const long long total = static_cast<long long>(n) * static_cast<long long>(n - 1) / 2;
  const long long concordant = total - tied - discordant;
  return static_cast<double>(concordant - discordant) / static_cast<double>(total);
}

// Tie-free truth given as an ordering of doc_ids, best first.
inline double kendall_tau(const Ranking& predicted, std::span<const std::string> truth_order) {
  QueryList truth{predicted.query_id, {}};
  for (std::size_t i = 0; i < truth_order.size(); ++i) {
    truth.candidates.push_back(
        {truth_order[i], false, {}, static_cast<double>(truth_order.size() - i)});
  }
  return kendall_tau(predicted, truth);
}

// Mean v_rank of the protected group over that of the non-protected group.
inline std::optional<double> exposure_ratio_realized(const Ranking& ranking) {
  double sum_protected = 0.0;
  double sum_other = 0.0;
  std::size_t n_protected = 0;
  std::size_t n_other = 0;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    const double v = position_bias(static_cast<long long>(i + 1));
    if (ranking.entries[i].is_protected) {
      sum_protected += v;
      ++n_protected;
    } else {
      sum_other += v;
      ++n_other;
    }
  }
  if (n_protected == 0 || n_other == 0) return std::nullopt;
  return (sum_protected / static_cast<double>(n_protected)) /
         (sum_other / static_cast<double>(n_other));
}

inline std::optional<double> exposure_ratio_topone(std::span<const double> scores,
                                                   const std::vector<bool>& flags) {
  if (scores.size() != flags.size()) throw Error("exposure ratio: size mismatch");
  const bool any_protected = std::find(flags.begin(), flags.end(), true) != flags.end();
  const bool any_other = std::find(flags.begin(), flags.end(), false) != flags.end();
  if (!any_protected || !any_other) return std::nullopt;
  const auto ge = group_exposures(top_one_probabilities(scores), flags);
  return ge.exposure_protected / ge.exposure_nonprotected;
}

struct QueryMetrics {
  std::string query_id;
  double precision_at_k = 0.0;
  double kendall_tau = 0.0;
  std::optional<double> exposure_ratio_realized;
  std::optional<double> exposure_ratio_topone;
};

struct AggregateMetrics {
  std::optional<double> precision_at_k;
  std::optional<double> kendall_tau;
  std::optional<double> exposure_ratio_realized;
  std::optional<double> exposure_ratio_topone;
};

struct EvalReport {
  std::size_t k = 10;
  double relevance_threshold = 1.0;
  std::vector<QueryMetrics> per_query;
  AggregateMetrics aggregate;
};

inline QueryMetrics evaluate_query(const Ranking& ranking, const QueryList& truth, std::size_t k,
                                   double relevance_threshold) {
  std::unordered_set<std::string> relevant;
  for (const auto& c : truth.candidates) {
    if (c.judgment >= relevance_threshold) relevant.insert(c.doc_id);
  }
  std::vector<double> s;
  std::vector<bool> flags;
  for (const auto& e : ranking.entries) {
    s.push_back(e.score);
    flags.push_back(e.is_protected);
  }
  return {ranking.query_id, precision_at_k(ranking, relevant, k), kendall_tau(ranking, truth),
          exposure_ratio_realized(ranking), exposure_ratio_topone(s, flags)};
}

// Query-weighted means over the queries where each metric is defined.
inline AggregateMetrics aggregate_metrics(std::span<const QueryMetrics> per_query) {
  const auto mean = [&](auto get) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& m : per_query) {
      if (const std::optional<double> v = get(m)) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  return {mean([](const QueryMetrics& m) { return std::optional<double>(m.precision_at_k); }),
          mean([](const QueryMetrics& m) { return std::optional<double>(m.kendall_tau); }),
          mean([](const QueryMetrics& m) { return m.exposure_ratio_realized; }),
          mean([](const QueryMetrics& m) { return m.exposure_ratio_topone; })};
}

// Evaluates rankings against the test queries they were produced for.
inline std::vector<QueryMetrics> evaluate_rankings(std::span<const Ranking> rankings,
                                                   const Dataset& truth, std::size_t k,
                                                   double relevance_threshold) {
  std::unordered_map<std::string, const QueryList*> by_id;
  for (const auto& q : truth.queries) by_id.emplace(q.query_id, &q);
  std::vector<QueryMetrics> out;
  out.reserve(rankings.size());
  for (const auto& r : rankings) {
    const auto it = by_id.find(r.query_id);
    if (it == by_id.end()) throw Error("no ground truth for query '" + r.query_id + "'");
    out.push_back(evaluate_query(r, *it->second, k, relevance_threshold));
  }
  return out;
}

inline EvalReport make_report(std::vector<QueryMetrics> per_query, std::size_t k,
                              double relevance_threshold) {
  EvalReport report{k, relevance_threshold, std::move(per_query), {}};
  report.aggregate = aggregate_metrics(report.per_query);
  return report;
}

struct FoldModel {
  const Model* model;
  const Dataset* test;
};

inline EvalReport evaluate_folds(std::span<const FoldModel> folds, std::size_t k,
                                 double relevance_threshold) {
  std::vector<QueryMetrics> all;
  for (const auto& fold : folds) {
    const auto rankings = predict(*fold.model, *fold.test);
    auto metrics = evaluate_rankings(rankings, *fold.test, k, relevance_threshold);
    all.insert(all.end(), metrics.begin(), metrics.end());
  }
  return make_report(std::move(all), k, relevance_threshold);
}

inline nlohmann::ordered_json report_to_json(const EvalReport& report) {
  using nlohmann::ordered_json;
  const auto opt = [](const std::optional<double>& v) -> ordered_json {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json j;
  j["config"] = {{"k", report.k},
                 {"relevance_threshold", report.relevance_threshold},
                 {"log_base_note", "natural log: v_j = 1 / ln(1 + j)"}};
  j["aggregate"] = {{"precision_at_k", opt(report.aggregate.precision_at_k)},
                    {"kendall_tau", opt(report.aggregate.kendall_tau)},
                    {"exposure_ratio_realized", opt(report.aggregate.exposure_ratio_realized)},
                    {"exposure_ratio_topone", opt(report.aggregate.exposure_ratio_topone)}};
  ordered_json per_query = ordered_json::object();
  for (const auto& m : report.per_query) {
    per_query[m.query_id] = {{"precision_at_k", m.precision_at_k},
                             {"kendall_tau", m.kendall_tau},
                             {"exposure_ratio_realized", opt(m.exposure_ratio_realized)},
                             {"exposure_ratio_topone", opt(m.exposure_ratio_topone)}};
  }
  j["per_query"] = std::move(per_query);
  return j;
}

// One row per query plus a final "aggregate" row; undefined values are empty.
inline std::string report_to_csv(const EvalReport& report) {
  const auto cell = [](const std::optional<double>& v) {
    return v ? detail::format_real(*v) : std::string();
  };
  std::string out =
      "query_id,precision_at_k,kendall_tau,exposure_ratio_realized,exposure_ratio_topone\n";
  for (const auto& m : report.per_query) {
    out += m.query_id + ',' + detail::format_real(m.precision_at_k) + ',' +
           detail::format_real(m.kendall_tau) + ',' + cell(m.exposure_ratio_realized) + ',' +
           cell(m.exposure_ratio_topone) + '\n';
  }
  const auto& a = report.aggregate;
  out += "aggregate," + cell(a.precision_at_k) + ',' + cell(a.kendall_tau) + ',' +
         cell(a.exposure_ratio_realized) + ',' + cell(a.exposure_ratio_topone) + '\n';
  return out;
}

}  // namespace deltr
