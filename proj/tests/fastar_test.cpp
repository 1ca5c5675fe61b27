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

#include "deltr/fastar.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>

#include "test_util.hpp"

namespace deltr {
namespace {

Ranking make_ranking(const std::vector<bool>& flags) {
  Ranking r{"q", {}};
  for (std::size_t i = 0; i < flags.size(); ++i) {
    r.entries.push_back({"d" + std::to_string(i + 1), static_cast<double>(flags.size() - i),
                         flags[i]});
  }
  return r;
}

std::vector<std::string> doc_ids(const Ranking& r) {
  std::vector<std::string> out;
  for (const auto& e : r.entries) out.push_back(e.doc_id);
  return out;
}

// Binomial CDF by direct summation of C(n, i) p^i q^(n - i) in long double.
long double cdf_oracle(long long x, long long n, long double p) {
  long double total = 0;
  for (long long i = 0; i <= x; ++i) {
    long double c = 1;
    for (long long t = 0; t < i; ++t) c = c * static_cast<long double>(n - t) / (t + 1);
    total += c * std::pow(p, static_cast<long double>(i)) *
             std::pow(1 - p, static_cast<long double>(n - i));
  }
  return total;
}

// Smallest t with F(t; j, p) > alpha, by linear scan from zero.
std::vector<long long> mtable_oracle(std::size_t k, double p, double alpha) {
  std::vector<long long> m;
  for (std::size_t j = 1; j <= k; ++j) {
    long long t = 0;
    while (cdf_oracle(t, static_cast<long long>(j), p) <= alpha) ++t;
    m.push_back(t);
  }
  return m;
}

TEST(BinomialCdf, Examples) {
  for (double p : {0.01, 0.3, 0.5, 0.99}) EXPECT_EQ(binomial_cdf(7, 7, p), 1.0);
  EXPECT_NEAR(binomial_cdf(0, 4, 0.5), 0.0625, 1e-15);
  EXPECT_NEAR(binomial_cdf(1, 4, 0.5), 0.3125, 1e-15);
}

TEST(BinomialCdf, ExactRationalOracle) {
  // p = 3/10: F(3; 10, p) = sum_i C(10, i) 3^i 7^(10 - i) / 10^10, exactly in integers.
  std::uint64_t numerator = 0;
  std::uint64_t c = 1;
  for (std::uint64_t i = 0; i <= 3; ++i) {
    if (i > 0) c = c * (10 - i + 1) / i;
    std::uint64_t term = c;
    for (std::uint64_t t = 0; t < i; ++t) term *= 3;
    for (std::uint64_t t = 0; t < 10 - i; ++t) term *= 7;
    numerator += term;
  }
  EXPECT_EQ(numerator, 6496107184ull);
  EXPECT_NEAR(binomial_cdf(3, 10, 0.3), static_cast<double>(numerator) / 1e10, 1e-12);
}

TEST(BinomialCdf, MatchesSummationOracle) {
  for (long long n : {1, 5, 17, 60}) {
    for (double p : {0.05, 0.205, 0.5, 0.8}) {
      for (long long x = 0; x <= n; ++x) {
        EXPECT_NEAR(binomial_cdf(x, n, p), static_cast<double>(cdf_oracle(x, n, p)), 1e-12);
      }
    }
  }
}

TEST(BinomialCdf, LargeNDoesNotUnderflow) {
  const double f = binomial_cdf(500, 1000, 0.5);
  EXPECT_GT(f, 0.5);
  EXPECT_LT(f, 0.52);
}

TEST(BinomialCdf, RejectsBadArguments) {
  EXPECT_THROW(binomial_cdf(-1, 3, 0.5), Error);
  EXPECT_THROW(binomial_cdf(4, 3, 0.5), Error);
  EXPECT_THROW(binomial_cdf(1, 3, 0.0), Error);
  EXPECT_THROW(binomial_cdf(1, 3, 1.0), Error);
}

TEST(MTable, Examples) {
  const MTable t = compute_mtable(4, 0.5, 0.1);
  EXPECT_EQ(t.required(1), 0);
  EXPECT_EQ(t.required(4), 1);
  EXPECT_THROW(t.required(0), Error);
  EXPECT_THROW(t.required(5), Error);
  for (long long m : compute_mtable(200, 0.5, 1e-300).minimums()) EXPECT_EQ(m, 0);
  EXPECT_THROW(compute_mtable(0, 0.5, 0.1), Error);
  EXPECT_THROW(compute_mtable(3, 1.0, 0.1), Error);
  EXPECT_THROW(compute_mtable(3, 0.5, 0.0), Error);
}

TEST(MTable, MatchesOracleAndShapeInvariants) {
  for (double p : {0.05, 0.105, 0.205, 0.5, 0.7}) {
    for (double alpha : {0.01, 0.1, 0.3}) {
      const auto m = compute_mtable(50, p, alpha).minimums();
      EXPECT_EQ(m, mtable_oracle(50, p, alpha)) << "p " << p << " alpha " << alpha;
      for (std::size_t j = 0; j < m.size(); ++j) {
        EXPECT_LE(m[j], static_cast<long long>(j + 1));
        if (j > 0) {
          EXPECT_GE(m[j] - m[j - 1], 0);
          EXPECT_LE(m[j] - m[j - 1], 1);
        }
      }
    }
  }
}

TEST(MTable, MonotoneInP) {
  for (double alpha : {0.05, 0.1}) {
    std::vector<long long> previous(50, 0);
    for (int step = 1; step < 20; ++step) {
      const double p = step * 0.05;
      const auto m = mtable_oracle(50, p, alpha);
      for (std::size_t j = 0; j < m.size(); ++j) EXPECT_GE(m[j], previous[j]);
      for (std::size_t k = 1; k <= 50; ++k) {
        EXPECT_EQ(compute_mtable(k, p, alpha).minimums(),
                  std::vector<long long>(m.begin(), m.begin() + static_cast<std::ptrdiff_t>(k)));
      }
      previous = m;
    }
  }
}

TEST(Rerank, HandTracedExample) {
  Ranking r{"q", {{"d1", 9, false}, {"d2", 8, false}, {"d3", 7, true}, {"d4", 6, true}}};
  const MTable t(0.5, 0.1, {0, 1, 1, 2});
  EXPECT_EQ(doc_ids(rerank(r, t)), (std::vector<std::string>{"d1", "d3", "d2", "d4"}));
}

TEST(Rerank, IdentityCases) {
  std::mt19937_64 rng(61);
  std::bernoulli_distribution coin(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<bool> flags(30);
    for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = coin(rng);
    const Ranking r = make_ranking(flags);
    EXPECT_EQ(rerank(r, MTable(0.5, 0.1, std::vector<long long>(30, 0))), r);
    EXPECT_EQ(fair_rerank(r, 0.001, 0.1), r);
  }
  const Ranking all = make_ranking(std::vector<bool>(12, true));
  EXPECT_EQ(fair_rerank(all, 0.9, 0.1), all);
}

TEST(Rerank, Infeasible) {
  const Ranking r = make_ranking({false, false, true, false, false, false});
  try {
    rerank(r, MTable(0.5, 0.1, {0, 1, 1, 2, 2, 3}));
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("shortfall 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(rerank(r, compute_mtable(7, 0.5, 0.1)), Error);
}

TEST(Rerank, PropertiesOnRandomLists) {
  std::mt19937_64 rng(62);
  std::uniform_int_distribution<std::size_t> size(1, 60);
  std::uniform_real_distribution<double> pdist(0.05, 0.8);
  std::bernoulli_distribution coin(0.45);
  int changed = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = size(rng);
    std::vector<bool> flags(n);
    for (std::size_t i = 0; i < n; ++i) flags[i] = coin(rng);
    const Ranking r = make_ranking(flags);
    const double p = pdist(rng);
    const auto protected_count =
        static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
    const MTable table = mtable_for_list(n, protected_count, p, 0.1, {std::nullopt, true});
    const Ranking out = rerank(r, table);
    changed += out == r ? 0 : 1;

    auto a = doc_ids(r), b = doc_ids(out);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);

    long long seen = 0;
    for (std::size_t j = 1; j <= table.k(); ++j) {
      seen += out.entries[j - 1].is_protected ? 1 : 0;
      EXPECT_GE(seen, table.required(j)) << "prefix " << j;
    }
    for (bool group : {false, true}) {
      std::vector<double> scores;
      for (const auto& e : out.entries) {
        if (e.is_protected == group) scores.push_back(e.score);
      }
      EXPECT_TRUE(std::is_sorted(scores.rbegin(), scores.rend()));
    }
  }
  EXPECT_GT(changed, 0);
}

TEST(FairOptions, TruncatesToFeasiblePrefix) {
  std::vector<bool> flags(40, false);
  flags[35] = flags[36] = flags[37] = true;
  const Ranking r = make_ranking(flags);
  EXPECT_THROW(fair_rerank(r, 0.5, 0.1), InfeasibleError);
  const MTable t = mtable_for_list(40, 3, 0.5, 0.1, {std::nullopt, true});
  EXPECT_EQ(t.k(), feasible_prefix(compute_mtable(40, 0.5, 0.1), 3));
  EXPECT_EQ(t.required(t.k()), 3);
  const Ranking out = fair_rerank(r, 0.5, 0.1, {std::nullopt, true});
  EXPECT_NE(out, r);
  const MTable capped = mtable_for_list(40, 3, 0.5, 0.1, {5, false});
  EXPECT_EQ(capped.k(), 5u);
}

TEST(ResolveP, Conventions) {
  EXPECT_DOUBLE_EQ(resolve_p("p-star", 0.3), 0.3);
  EXPECT_DOUBLE_EQ(resolve_p("p-plus", 0.3), 0.4);
  EXPECT_DOUBLE_EQ(resolve_p("p-minus", 0.3), 0.3 - 0.1);
  EXPECT_DOUBLE_EQ(resolve_p("0.25", 0.3), 0.25);
  EXPECT_THROW(resolve_p("p-minus", 0.05), InfeasibleError);
  EXPECT_THROW(resolve_p("p-plus", 0.95), InfeasibleError);
  EXPECT_THROW(resolve_p("1.5", 0.3), InfeasibleError);
  EXPECT_THROW(resolve_p("half", 0.3), Error);
}

Dataset biased_list() {
  // Six protected among 20: male experts, female experts, male non-experts,
  // female non-experts; judgments strictly decreasing.
  const std::vector<std::pair<bool, bool>> blocks = {{true, false}, {true, true}, {false, false},
                                                     {false, true}};
  const std::vector<int> sizes = {8, 2, 6, 4};
  Dataset d;
  d.feature_names = {"f"};
  QueryList q{"q1", {}};
  int id = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (int i = 0; i < sizes[b]; ++i, ++id) {
      q.candidates.push_back({"c" + std::to_string(id), blocks[b].second,
                              {static_cast<double>(id)}, 20.0 - id});
    }
  }
  d.queries.push_back(std::move(q));
  return d;
}

TEST(Preprocess, BiasedListGivesProtectedTopJudgments) {
  const Dataset d = biased_list();
  const double p = resolve_p("p-plus", d.protected_fraction());
  const Dataset out = preprocess_training(d, p, 0.1);
  const auto& before = d.queries[0].candidates;
  const auto& after = out.queries[0].candidates;
  ASSERT_EQ(after.size(), before.size());
  for (std::size_t r = 0; r < after.size(); ++r) EXPECT_EQ(after[r].judgment, before[r].judgment);

  std::set<std::string> ids;
  for (const auto& c : after) ids.insert(c.doc_id);
  EXPECT_EQ(ids.size(), before.size());

  bool promoted = false;
  for (std::size_t r = 0; r < after.size(); ++r) {
    // Positions 0..7 held male experts before re-ranking.
    if (after[r].is_protected && !before[r].is_protected && r < 8) promoted = true;
  }
  EXPECT_TRUE(promoted);
  // Features travel with their candidate.
  for (const auto& c : after) {
    EXPECT_EQ(c.features[0], std::stod(c.doc_id.substr(1)));
  }
}

TEST(Preprocess, IdentityCases) {
  const Dataset d = biased_list();
  const Dataset tiny = preprocess_training(d, 0.001, 0.1);
  for (std::size_t i = 0; i < d.queries[0].size(); ++i) {
    EXPECT_EQ(tiny.queries[0].candidates[i].doc_id, d.queries[0].candidates[i].doc_id);
  }

  // Alternating list already satisfies the table for p = 0.5.
  Dataset fair;
  fair.feature_names = {"f"};
  QueryList q{"q", {}};
  for (int i = 0; i < 10; ++i) {
    q.candidates.push_back({"c" + std::to_string(i), i % 2 == 0, {0.0}, 10.0 - i});
  }
  fair.queries.push_back(q);
  const Dataset same = preprocess_training(fair, 0.5, 0.1);
  for (std::size_t i = 0; i < q.size(); ++i) {
    EXPECT_EQ(same.queries[0].candidates[i].doc_id, q.candidates[i].doc_id);
    EXPECT_EQ(same.queries[0].candidates[i].judgment, q.candidates[i].judgment);
  }
}

TEST(Preprocess, InfeasibleNamesTheQuery) {
  const Dataset d = biased_list();
  try {
    preprocess_training(d, 0.9, 0.1);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("q1"), std::string::npos);
  }
}

}  // namespace
}  // namespace deltr
