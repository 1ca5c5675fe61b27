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

#include "deltr/predictor.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "test_util.hpp"

namespace deltr {
namespace {

Model linear_model(std::vector<std::string> names, std::vector<double> omega) {
  Model m;
  m.feature_names = std::move(names);
  m.omega = Weights(std::move(omega));
  m.loss_trace.push_back({0, 0.0, 0.0});
  return m;
}

std::vector<std::string> doc_ids(const Ranking& r) {
  std::vector<std::string> out;
  for (const auto& e : r.entries) out.push_back(e.doc_id);
  return out;
}

TEST(Predict, ZeroWeightsOrderByDocId) {
  std::mt19937_64 rng(51);
  auto q = testing::random_query(rng, 12, 2);
  std::shuffle(q.candidates.begin(), q.candidates.end(), rng);
  const std::vector<std::string> names = {"f0", "f1"};
  const Ranking r = predict(linear_model(names, {0.0, 0.0}), q, names);
  auto ids = doc_ids(r);
  EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
  for (const auto& e : r.entries) EXPECT_EQ(e.score, 0.0);
}

TEST(Predict, SinglePositiveWeightSortsByThatFeature) {
  std::mt19937_64 rng(52);
  const auto q = testing::random_query(rng, 25, 3);
  const std::vector<std::string> names = {"f0", "f1", "f2"};
  const Ranking r = predict(linear_model(names, {0.0, 2.5, 0.0}), q, names);
  std::vector<std::pair<double, std::string>> expected;
  for (const auto& c : q.candidates) expected.emplace_back(c.features[1], c.doc_id);
  std::sort(expected.begin(), expected.end(), std::greater<>());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(r.entries[i].doc_id, expected[i].second);
  }
}

TEST(Predict, CarriesProtectedFlags) {
  std::mt19937_64 rng(53);
  const auto q = testing::random_query(rng, 10, 1);
  const std::vector<std::string> names = {"f0"};
  const Ranking r = predict(linear_model(names, {1.0}), q, names);
  for (const auto& e : r.entries) {
    const auto it = std::find_if(q.candidates.begin(), q.candidates.end(),
                                 [&](const Candidate& c) { return c.doc_id == e.doc_id; });
    EXPECT_EQ(e.is_protected, it->is_protected);
  }
}

TEST(Predict, StoredScalingEqualsPrestandardizedInput) {
  std::mt19937_64 rng(54);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = testing::random_dataset(rng, 4, 3, 10, 3);
    auto [scaled, params] = standardize(d);
    Model with = linear_model(d.feature_names, {0.3, -1.2, 0.8});
    with.scaling = params;
    const Model without = linear_model(d.feature_names, {0.3, -1.2, 0.8});
    const auto a = predict(with, d);
    const auto b = predict(without, scaled);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t q = 0; q < a.size(); ++q) {
      EXPECT_EQ(doc_ids(a[q]), doc_ids(b[q]));
      for (std::size_t i = 0; i < a[q].size(); ++i) {
        EXPECT_NEAR(a[q].entries[i].score, b[q].entries[i].score, 1e-12);
      }
    }
  }
}

TEST(Predict, OrderInvariantUnderPositiveAffineMaps) {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  std::uniform_real_distribution<double> offset(-50.0, 50.0);
  for (int trial = 0; trial < 50; ++trial) {
    Ranking r{"q", {}};
    std::uniform_int_distribution<int> coarse(0, 5);
    for (int i = 0; i < 30; ++i) {
      r.entries.push_back({"d" + std::to_string(i), static_cast<double>(coarse(rng)), i % 3 == 0});
    }
    Ranking mapped = r;
    const double a = scale(rng);
    const double b = offset(rng);
    for (auto& e : mapped.entries) e.score = a * e.score + b;
    sort_by_score(r);
    sort_by_score(mapped);
    EXPECT_EQ(doc_ids(r), doc_ids(mapped));
  }
}

TEST(Predict, ColumnsMatchedByName) {
  QueryList q{"q", {{"a", false, {1.0, 5.0, 1.0}, 0}, {"b", true, {2.0, -5.0, 0.0}, 0}}};
  const std::vector<std::string> names = {"y", "x", "protected"};
  const Model m = linear_model({"x", "y"}, {1.0, 0.0});
  const Ranking r = predict(m, q, names);
  EXPECT_EQ(doc_ids(r), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(r.entries[0].score, 5.0);
}

TEST(Predict, MismatchListsTheColumns) {
  QueryList q{"q", {{"a", false, {1.0, 2.0}, 0}, {"b", true, {2.0, 1.0}, 0}}};
  const Model m = linear_model({"x", "z"}, {1.0, 1.0});
  const std::vector<std::string> names = {"x", "w"};
  try {
    predict(m, q, names);
    FAIL() << "expected Error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("missing from input: z"), std::string::npos) << msg;
    EXPECT_NE(msg.find("unknown to model: w"), std::string::npos) << msg;
  }
  const Model standard = linear_model({"x", "protected"}, {1.0, 1.0});
  const std::vector<std::string> no_protected = {"x", "w"};
  EXPECT_THROW(predict(standard, q, no_protected), Error);
}

TEST(PredictionsCsv, RoundTrip) {
  std::mt19937_64 rng(56);
  const auto d = testing::random_dataset(rng, 3, 2, 7, 2);
  const auto rankings = predict(linear_model(d.feature_names, {0.7, -0.1}), d);
  const std::string csv = write_predictions_csv(rankings);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "query_id,doc_id,rank,score,protected");
  EXPECT_EQ(parse_predictions_csv(csv), rankings);
}

TEST(PredictionsCsv, RejectsMalformedInput) {
  const std::string header = "query_id,doc_id,rank,score,protected\n";
  EXPECT_THROW(parse_predictions_csv("q,d,1,0,0\n"), ParseError);
  EXPECT_THROW(parse_predictions_csv(header + "q,a,1,0,0\nq,b,1,0,1\n"), ParseError);
  EXPECT_THROW(parse_predictions_csv(header + "q,a,1,0,0\nq,b,3,0,1\n"), ParseError);
  EXPECT_THROW(parse_predictions_csv(header + "q,a,1.5,0,0\n"), ParseError);
  EXPECT_THROW(parse_predictions_csv(header + "q,a,1,x,0\n"), ParseError);
  EXPECT_THROW(parse_predictions_csv(header + "q,a,1,0,2\n"), ParseError);
  const auto r = parse_predictions_csv(header + "q,b,2,0.5,1\nq,a,1,1,0\n");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].entries[0].doc_id, "a");
}

}  // namespace
}  // namespace deltr
