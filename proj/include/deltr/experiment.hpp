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

// Cross-validated comparison of DELTR against its baselines.
//
// Results directory layout:
//
//   models/<method>_fold<i>.json
//   predictions/<method>_fold<i>.csv
//   reports/<method>.json, reports/<method>.csv
//   frontier.csv   (method, mean metrics; one row per method)

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "deltr/dataset.hpp"
#include "deltr/detail/text.hpp"
#include "deltr/error.hpp"
#include "deltr/fastar.hpp"
#include "deltr/metrics.hpp"
#include "deltr/model_io.hpp"
#include "deltr/predictor.hpp"
#include "deltr/trainer.hpp"

namespace deltr {

enum class Method { kColorblind, kStandard, kDeltrSmall, kDeltrLarge, kFairPre, kFairPost };

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::kColorblind: return "colorblind";
    case Method::kStandard: return "standard";
    case Method::kDeltrSmall: return "deltr_small";
    case Method::kDeltrLarge: return "deltr_large";
    case Method::kFairPre: return "fair_pre";
    case Method::kFairPost: return "fair_post";
  }
  return "unknown";
}

inline Method parse_method(std::string_view name) {
  for (Method m : {Method::kColorblind, Method::kStandard, Method::kDeltrSmall,
                   Method::kDeltrLarge, Method::kFairPre, Method::kFairPost}) {
    if (method_name(m) == name) return m;
  }
  throw Error("unknown method '" + std::string(name) + "'");
}

struct ExperimentGrid {
  std::vector<Method> methods = {Method::kColorblind, Method::kStandard, Method::kDeltrSmall,
                                 Method::kDeltrLarge, Method::kFairPre,  Method::kFairPost};
  std::optional<double> gamma_small;
  std::optional<double> gamma_large;
  // Numbers or p-minus / p-star / p-plus.
  std::vector<std::string> ps = {"p-star", "p-plus"};
  double alpha = 0.1;
  std::size_t folds = 6;
  std::uint64_t seed = 1;
  // learning_rate, iterations, init_stddev and standardize are taken from
  // here; gamma and include_protected_feature are set per method.
  Hyperparams training;
  std::size_t k = 10;
  double relevance_threshold = 1.0;
  // Constrained prefix for FA*IR; each list is cut to its feasible prefix.
  std::optional<std::size_t> fair_k;

  void validate() const {
    if (methods.empty()) throw Error("experiment grid has no methods");
    for (Method m : methods) {
      if (m == Method::kDeltrSmall && !gamma_small) {
        throw Error("method deltr_small requires gamma_small");
      }
      if (m == Method::kDeltrLarge && !gamma_large) {
        throw Error("method deltr_large requires gamma_large");
      }
      if ((m == Method::kFairPre || m == Method::kFairPost) && ps.empty()) {
        throw Error("method " + std::string(method_name(m)) + " requires at least one p");
      }
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("alpha must lie in (0, 1)");
  }
};

struct FrontierRow {
  std::string method;
  AggregateMetrics metrics;
};

struct ExperimentResult {
  std::vector<FrontierRow> frontier;
  std::map<std::string, EvalReport> reports;

  const EvalReport& report(const std::string& method) const {
    const auto it = reports.find(method);
    if (it == reports.end()) throw Error("no report for method '" + method + "'");
    return it->second;
  }
};

inline std::string frontier_csv(const std::vector<FrontierRow>& rows) {
  const auto cell = [](const std::optional<double>& v) {
    return v ? detail::format_real(*v) : std::string();
  };
  std::string out =
      "method,precision_at_k,kendall_tau,exposure_ratio_realized,exposure_ratio_topone\n";
  for (const auto& r : rows) {
    out += r.method + ',' + cell(r.metrics.precision_at_k) + ',' + cell(r.metrics.kendall_tau) +
           ',' + cell(r.metrics.exposure_ratio_realized) + ',' +
           cell(r.metrics.exposure_ratio_topone) + '\n';
  }
  return out;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path.string() + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw Error("failed writing '" + path.string() + "'");
}

inline std::string p_label(std::string_view spec) {
  std::string s(spec);
  for (char& c : s) {
    if (c == '-') c = '_';
  }
  return s;
}

template <typename F>
auto stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    throw Error("stage '" + name + "' failed: " + e.what());
  }
}

}  // namespace detail

// Runs every configured method on every fold. When `out_dir` is given the
// results directory is written there; outputs depend only on the inputs.
inline ExperimentResult run_experiment(const Dataset& dataset, const ExperimentGrid& grid,
                                       const std::optional<std::filesystem::path>& out_dir) {
  grid.validate();
  if (!dataset.protected_feature_index) {
    throw Error("experiment dataset must carry the protected feature column");
  }
  const auto folds =
      detail::stage("split folds", [&] { return split_folds(dataset, grid.folds, grid.seed); });
  const double fraction = dataset.protected_fraction();

  if (out_dir) {
    for (const char* sub : {"models", "predictions", "reports"}) {
      std::filesystem::create_directories(*out_dir / sub);
    }
  }

  const auto hyperparams = [&](double gamma, bool with_protected) {
    Hyperparams hp = grid.training;
    hp.gamma = gamma;
    hp.include_protected_feature = with_protected;
    return hp;
  };

  ExperimentResult result;
  std::vector<Model> standard_models;  // reused by post-processing

  const auto record = [&](const std::string& label, std::vector<QueryMetrics> metrics) {
    auto report = make_report(std::move(metrics), grid.k, grid.relevance_threshold);
    if (out_dir) {
      detail::write_text(*out_dir / "reports" / (label + ".json"), report_to_json(report).dump(2) + "\n");
      detail::write_text(*out_dir / "reports" / (label + ".csv"), report_to_csv(report));
    }
    result.frontier.push_back({label, report.aggregate});
    result.reports.emplace(label, std::move(report));
  };

  // Trains one model per fold on (possibly transformed) training data,
  // predicts the test queries, optionally post-processes the rankings.
  const auto run_method = [&](const std::string& label, const Hyperparams& hp,
                              const auto& transform_train, const auto& transform_rankings,
                              bool write_models, std::vector<Model>* keep) {
    std::vector<QueryMetrics> all;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const std::string tag = label + "_fold" + std::to_string(f + 1);
      Model model;
      if (keep != nullptr && keep->size() > f) {
        model = (*keep)[f];
      } else {
        const Dataset train_data =
            detail::stage("prepare " + tag, [&] { return transform_train(folds[f].train); });
        model = detail::stage("train " + tag, [&] { return train(train_data, hp); });
        if (keep != nullptr) keep->push_back(model);
      }
      auto rankings = detail::stage("predict " + tag, [&] {
        return transform_rankings(predict(model, folds[f].test));
      });
      auto metrics = detail::stage("evaluate " + tag, [&] {
        return evaluate_rankings(rankings, folds[f].test, grid.k, grid.relevance_threshold);
      });
      all.insert(all.end(), metrics.begin(), metrics.end());
      if (out_dir) {
        if (write_models) {
          detail::write_text(*out_dir / "models" / (tag + ".json"), save_model(model));
        }
        detail::write_text(*out_dir / "predictions" / (tag + ".csv"),
                           write_predictions_csv(rankings));
      }
    }
    record(label, std::move(all));
  };

  const auto same_data = [](const Dataset& d) { return d; };
  const auto same_rankings = [](std::vector<Ranking> r) { return r; };
  const FairOptions fair_options{grid.fair_k, true};

  for (Method m : grid.methods) {
    const std::string name(method_name(m));
    switch (m) {
      case Method::kColorblind:
        run_method(name, hyperparams(0.0, false), same_data, same_rankings, true, nullptr);
        break;
      case Method::kStandard:
        run_method(name, hyperparams(0.0, true), same_data, same_rankings, true,
                   &standard_models);
        break;
      case Method::kDeltrSmall:
        run_method(name, hyperparams(*grid.gamma_small, true), same_data, same_rankings, true,
                   nullptr);
        break;
      case Method::kDeltrLarge:
        run_method(name, hyperparams(*grid.gamma_large, true), same_data, same_rankings, true,
                   nullptr);
        break;
      case Method::kFairPre:
        for (const auto& spec : grid.ps) {
          const double p = detail::stage("resolve p", [&] { return resolve_p(spec, fraction); });
          const auto pre = [&](const Dataset& d) {
            return preprocess_training(d, p, grid.alpha, fair_options);
          };
          run_method(name + "_" + detail::p_label(spec), hyperparams(0.0, true), pre,
                     same_rankings, true, nullptr);
        }
        break;
      case Method::kFairPost:
        for (const auto& spec : grid.ps) {
          const double p = detail::stage("resolve p", [&] { return resolve_p(spec, fraction); });
          const auto post = [&](std::vector<Ranking> rankings) {
            for (auto& r : rankings) r = fair_rerank(r, p, grid.alpha, fair_options);
            return rankings;
          };
          // Re-ranks the standard model's predictions; no model files of its own.
          run_method(name + "_" + detail::p_label(spec), hyperparams(0.0, true), same_data, post,
                     false, &standard_models);
        }
        break;
    }
  }

  if (out_dir) detail::write_text(*out_dir / "frontier.csv", frontier_csv(result.frontier));
  return result;
}

}  // namespace deltr
