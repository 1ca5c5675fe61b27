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

// FA*IR-style fair top-k re-ranking.
//
// For a target protected proportion p and significance level alpha, the
// mtable holds, for every prefix length j <= k, the minimum number of
// protected candidates m[j] such that observing m[j] protected items among j
// draws of Binomial(j, p) is not rejected at level alpha:
//
//   m[j] = min { t : F(t; j, p) > alpha }
//
// The test is applied per position without multiple-testing adjustment.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "deltr/dataset.hpp"
#include "deltr/detail/text.hpp"
#include "deltr/error.hpp"
#include "deltr/predictor.hpp"

namespace deltr {

// P[X <= x] for X ~ Binomial(n, p), accumulated in log space so that large n
// does not underflow the leading terms.
inline double binomial_cdf(long long x, long long n, double p) {
  if (n < 0 || x < 0 || x > n) throw Error("binomial_cdf: need 0 <= x <= n");
  if (!(p > 0.0 && p < 1.0)) throw Error("binomial_cdf: p must lie in (0, 1)");
  if (x == n) return 1.0;
  const double log_q = std::log1p(-p);
  const double log_odds = std::log(p) - log_q;
  double log_term = static_cast<double>(n) * log_q;
  double log_acc = log_term;
  for (long long i = 0; i < x; ++i) {
    log_term += std::log(static_cast<double>(n - i) / static_cast<double>(i + 1)) + log_odds;
    const double hi = std::max(log_acc, log_term);
    log_acc = hi + std::log(std::exp(log_acc - hi) + std::exp(log_term - hi));
  }
  return std::min(1.0, std::exp(log_acc));
}

class MTable {
 public:
  MTable(double p, double alpha, std::vector<long long> minimums)
      : p_(p), alpha_(alpha), m_(std::move(minimums)) {}

  std::size_t k() const { return m_.size(); }
  double p() const { return p_; }
  double alpha() const { return alpha_; }

  // Minimum protected count in the top j, 1 <= j <= k.
  long long required(std::size_t j) const {
    if (j < 1 || j > m_.size()) throw Error("mtable position out of range");
    return m_[j - 1];
  }
  const std::vector<long long>& minimums() const { return m_; }

 private:
  double p_;
  double alpha_;
  std::vector<long long> m_;
};

inline MTable compute_mtable(std::size_t k, double p, double alpha) {
  if (k < 1) throw Error("mtable: k must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw Error("mtable: p must lie in (0, 1)");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("mtable: alpha must lie in (0, 1)");
  std::vector<long long> m(k);
  long long t = 0;  // m is non-decreasing, so each search resumes from the last value
  for (std::size_t j = 1; j <= k; ++j) {
    const auto n = static_cast<long long>(j);
    while (binomial_cdf(t, n, p) <= alpha) ++t;
    m[j - 1] = t;
  }
  return MTable(p, alpha, std::move(m));
}

// Longest prefix whose requirement the given number of protected candidates
// can satisfy.
inline std::size_t feasible_prefix(const MTable& table, std::size_t protected_count) {
  const auto& m = table.minimums();
  const auto it = std::upper_bound(m.begin(), m.end(), static_cast<long long>(protected_count));
  return static_cast<std::size_t>(it - m.begin());
}

// Greedy fill: at position j take the best remaining protected candidate
// when anything else would leave fewer than m[j] protected in the top j,
// otherwise the best remaining candidate overall. "Best" is earliest in the
// input order. Positions after k keep the input order.
inline Ranking rerank(const Ranking& ranking, const MTable& table) {
  const std::size_t k = table.k();
  if (k > ranking.size()) {
    throw Error("mtable k (" + std::to_string(k) + ") exceeds ranking length (" +
                std::to_string(ranking.size()) + ")");
  }
  std::deque<std::size_t> protected_queue;
  std::deque<std::size_t> other_queue;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    (ranking.entries[i].is_protected ? protected_queue : other_queue).push_back(i);
  }
  const auto needed = table.required(k);
  if (static_cast<long long>(protected_queue.size()) < needed) {
    throw InfeasibleError("query '" + ranking.query_id + "': mtable requires " +
                          std::to_string(needed) + " protected candidates in the top " +
                          std::to_string(k) + " but only " +
                          std::to_string(protected_queue.size()) + " exist (shortfall " +
                          std::to_string(needed - static_cast<long long>(protected_queue.size())) +
                          ")");
  }

  Ranking out{ranking.query_id, {}};
  out.entries.reserve(ranking.size());
  long long placed_protected = 0;
  const auto take = [&](std::deque<std::size_t>& queue) {
    const std::size_t i = queue.front();
    queue.pop_front();
    if (ranking.entries[i].is_protected) ++placed_protected;
    out.entries.push_back(ranking.entries[i]);
  };
  for (std::size_t j = 1; j <= ranking.size(); ++j) {
    const bool must_protect = j <= k && placed_protected < table.required(j);
    if (must_protect) {
      take(protected_queue);
    } else if (protected_queue.empty()) {
      take(other_queue);
    } else if (other_queue.empty()) {
      take(protected_queue);
    } else {
      take(protected_queue.front() < other_queue.front() ? protected_queue : other_queue);
    }
  }
  return out;
}

struct FairOptions {
  // Prefix length the constraints apply to; defaults to the list length.
  std::optional<std::size_t> k;
  // Shorten k per list to the longest satisfiable prefix instead of failing.
  bool truncate_to_feasible = false;
};

inline MTable mtable_for_list(std::size_t list_size, std::size_t protected_count, double p,
                              double alpha, const FairOptions& options) {
  const std::size_t k = std::min(list_size, options.k.value_or(list_size));
  MTable table = compute_mtable(std::max<std::size_t>(k, 1), p, alpha);
  if (!options.truncate_to_feasible) return table;
  const std::size_t usable = feasible_prefix(table, protected_count);
  if (usable == table.k()) return table;
  auto m = table.minimums();
  m.resize(std::max<std::size_t>(usable, 1));
  // A zero-length prefix has no requirement at all.
  if (usable == 0) m[0] = 0;
  return MTable(p, alpha, std::move(m));
}

inline Ranking fair_rerank(const Ranking& ranking, double p, double alpha,
                           const FairOptions& options = {}) {
  const auto protected_count = static_cast<std::size_t>(
      std::count_if(ranking.entries.begin(), ranking.entries.end(),
                    [](const RankedEntry& e) { return e.is_protected; }));
  return rerank(ranking,
                mtable_for_list(ranking.size(), protected_count, p, alpha, options));
}

// Makes the training lists fair before learning: each list, ordered by
// judgment (stable), is re-ranked, and judgments stay attached to positions,
// so the candidate now at position r receives the judgment formerly held at
// position r.
inline Dataset preprocess_training(const Dataset& dataset, double p, double alpha,
                                   const FairOptions& options = {}) {
  Dataset out = dataset;
  for (auto& q : out.queries) {
    std::vector<std::size_t> order(q.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&q](std::size_t a, std::size_t b) {
      return q.candidates[a].judgment > q.candidates[b].judgment;
    });

    // Entries carry their index in `order` as doc_id so the result maps back.
    Ranking ranking{q.query_id, {}};
    for (std::size_t r = 0; r < order.size(); ++r) {
      const auto& c = q.candidates[order[r]];
      ranking.entries.push_back({std::to_string(r), c.judgment, c.is_protected});
    }
    Ranking fair;
    try {
      fair = fair_rerank(ranking, p, alpha, options);
    } catch (const InfeasibleError& e) {
      throw InfeasibleError("pre-processing query '" + q.query_id + "': " + e.what());
    }

    bool identity = true;
    std::vector<Candidate> reordered;
    reordered.reserve(q.size());
    for (std::size_t r = 0; r < fair.size(); ++r) {
      const std::size_t src = std::stoul(fair.entries[r].doc_id);
      identity = identity && src == r;
      Candidate c = q.candidates[order[src]];
      c.judgment = q.candidates[order[r]].judgment;
      reordered.push_back(std::move(c));
    }
    if (!identity) q.candidates = std::move(reordered);
  }
  return out;
}

// Resolves a target proportion: a number, or p-minus / p-star / p-plus
// relative to the observed protected fraction (p* -/+ 0.1).
inline double resolve_p(std::string_view spec, double protected_fraction) {
  double p = 0.0;
  if (spec == "p-star") {
    p = protected_fraction;
  } else if (spec == "p-plus") {
    p = protected_fraction + 0.1;
  } else if (spec == "p-minus") {
    p = protected_fraction - 0.1;
  } else if (const auto v = detail::parse_real(spec)) {
    p = *v;
  } else {
    throw Error("invalid p '" + std::string(spec) +
                "': expected a number, p-minus, p-star or p-plus");
  }
  if (!(p > 0.0 && p < 1.0)) {
    throw InfeasibleError("p '" + std::string(spec) + "' resolves to " + detail::format_real(p) +
                          ", outside (0, 1)");
  }
  return p;
}

}  // namespace deltr
