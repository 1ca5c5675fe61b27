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

// Command-line front end. Exit codes: 0 success, 1 runtime or domain
// failure, 2 usage error.

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "CLI11.hpp"
#include "deltr/dataset.hpp"
#include "deltr/error.hpp"
#include "deltr/experiment.hpp"
#include "deltr/fastar.hpp"
#include "deltr/metrics.hpp"
#include "deltr/model_io.hpp"
#include "deltr/predictor.hpp"
#include "deltr/synth.hpp"
#include "deltr/trainer.hpp"

namespace deltr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, std::string_view text) {
  detail::write_text(path, text);
}

struct GenerateArgs {
  SynthConfig config;
  std::string judgments = "graded";
  std::string out;
};

struct TrainArgs {
  std::string data;
  double gamma = 0.0;
  Hyperparams hp;
  bool no_standardize = false;
  std::string out;
};

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
};

struct FairArgs {
  std::string input;
  std::string p;
  double alpha = 0.1;
  std::optional<std::size_t> k;
  bool truncate = false;
  std::string out;
};

struct EvaluateArgs {
  std::string predictions;
  std::string data;
  std::size_t k = 10;
  double relevance_threshold = 1.0;
  std::string out_json;
  std::string out_csv;
};

struct ExperimentArgs {
  std::string data;
  std::string methods = "colorblind,standard,deltr_small,deltr_large,fair_pre,fair_post";
  std::optional<double> gamma_small;
  std::optional<double> gamma_large;
  std::vector<std::string> ps = {"p-star", "p-plus"};
  ExperimentGrid grid;
  bool no_standardize = false;
  std::string out;
};

inline void cmd_generate(const GenerateArgs& a, std::ostream& out) {
  SynthConfig config = a.config;
  config.judgments = a.judgments == "binary" ? JudgmentMode::kBinary : JudgmentMode::kGraded;
  const Dataset dataset = generate(config);
  write_file(a.out, write_dataset_csv(dataset));
  std::size_t protected_count = 0;
  std::size_t experts = 0;
  for (const auto& q : dataset.queries) {
    for (const auto& c : q.candidates) {
      protected_count += c.is_protected;
      experts += c.judgment >= 1.0;
    }
  }
  out << "wrote " << dataset.num_candidates() << " rows (" << dataset.queries.size()
      << " queries, " << protected_count << " protected, " << experts << " experts) to "
      << a.out << "\n";
}

inline void cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const Dataset dataset = parse_dataset(read_file(a.data), true);
  Hyperparams hp = a.hp;
  hp.gamma = a.gamma;
  hp.standardize = !a.no_standardize;

  const auto scale = gamma_scale(dataset, hp);
  out << "initial L = " << detail::format_real(scale.loss)
      << ", initial U = " << detail::format_real(scale.disparate_exposure);
  if (const auto g = scale.comparable_gamma()) {
    out << ", L/U = " << detail::format_real(*g);
  }
  out << "\n";

  std::vector<std::string> warnings;
  const Model model = train(dataset, hp, &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  write_file(a.out, save_model(model));
  const auto& last = model.loss_trace.back();
  out << "final L = " << detail::format_real(last.loss)
      << ", final U = " << detail::format_real(last.disparate_exposure) << "; model written to "
      << a.out << "\n";
}

inline void cmd_predict(const PredictArgs& a, std::ostream& out) {
  const Model model = load_model(read_file(a.model));
  const Dataset dataset = parse_dataset(read_file(a.data), model.uses_protected_feature());
  const auto rankings = predict(model, dataset);
  write_file(a.out, write_predictions_csv(rankings));
  out << "wrote predictions for " << rankings.size() << " queries to " << a.out << "\n";
}

inline double protected_fraction(const std::vector<Ranking>& rankings) {
  std::size_t n = 0;
  std::size_t p = 0;
  for (const auto& r : rankings) {
    for (const auto& e : r.entries) {
      ++n;
      p += e.is_protected;
    }
  }
  return n == 0 ? 0.0 : static_cast<double>(p) / static_cast<double>(n);
}

inline void cmd_rerank(const FairArgs& a, std::ostream& out) {
  auto rankings = parse_predictions_csv(read_file(a.input));
  const double p = resolve_p(a.p, protected_fraction(rankings));
  const FairOptions options{a.k, a.truncate};
  std::size_t changed = 0;
  for (auto& r : rankings) {
    Ranking fair = fair_rerank(r, p, a.alpha, options);
    changed += !(fair == r);
    r = std::move(fair);
  }
  write_file(a.out, write_predictions_csv(rankings));
  out << "p = " << detail::format_real(p) << "; re-ranked " << changed << " of "
      << rankings.size() << " queries; written to " << a.out << "\n";
}

inline void cmd_preprocess(const FairArgs& a, std::ostream& out) {
  const Dataset dataset = parse_dataset(read_file(a.input), false);
  const double p = resolve_p(a.p, dataset.protected_fraction());
  const Dataset fair = preprocess_training(dataset, p, a.alpha, FairOptions{a.k, a.truncate});
  write_file(a.out, write_dataset_csv(fair));
  out << "p = " << detail::format_real(p) << "; fair training data written to " << a.out
      << "\n";
}

inline void cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto rankings = parse_predictions_csv(read_file(a.predictions));
  const Dataset truth = parse_dataset(read_file(a.data), false);
  const auto report =
      make_report(evaluate_rankings(rankings, truth, a.k, a.relevance_threshold), a.k,
                  a.relevance_threshold);
  const std::string json = report_to_json(report).dump(2) + "\n";
  if (!a.out_json.empty()) write_file(a.out_json, json);
  if (!a.out_csv.empty()) write_file(a.out_csv, report_to_csv(report));
  if (a.out_json.empty() && a.out_csv.empty()) out << json;
}

inline void cmd_experiment(const ExperimentArgs& a, std::ostream& out) {
  const Dataset dataset = parse_dataset(read_file(a.data), true);
  ExperimentGrid grid = a.grid;
  grid.methods.clear();
  for (const auto& name : detail::split(a.methods, ',')) {
    grid.methods.push_back(parse_method(detail::trim(name)));
  }
  grid.gamma_small = a.gamma_small;
  grid.gamma_large = a.gamma_large;
  grid.ps = a.ps;
  grid.training.standardize = !a.no_standardize;
  const auto result = run_experiment(dataset, grid, std::filesystem::path(a.out));
  out << frontier_csv(result.frontier);
}

// Parses and dispatches one command line; never throws.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fair learning to rank with disparate-exposure regularization", "deltr"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "write a synthetic biased dataset CSV");
  generate_cmd->add_option("--queries", gen.config.num_queries, "number of queries")
      ->capture_default_str();
  generate_cmd->add_option("--list-size", gen.config.list_size, "candidates per query")
      ->capture_default_str();
  generate_cmd
      ->add_option("--protected-fraction", gen.config.protected_fraction,
                   "probability that a candidate is protected")
      ->capture_default_str();
  generate_cmd
      ->add_option("--expert-fraction", gen.config.expert_fraction,
                   "probability that a candidate is an expert")
      ->capture_default_str();
  generate_cmd
      ->add_option("--noise", gen.config.feature_noise_stddev,
                   "stddev of the noise on the relevance feature")
      ->capture_default_str();
  generate_cmd->add_option("--seed", gen.config.seed, "random seed")->capture_default_str();
  generate_cmd->add_option("--judgments", gen.judgments, "graded or binary")
      ->check(CLI::IsMember({"graded", "binary"}))
      ->capture_default_str();
  generate_cmd->add_option("--out", gen.out, "output CSV")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a model and write it as JSON");
  train_cmd->add_option("--data", tr.data, "training CSV")->required();
  train_cmd->add_option("--gamma", tr.gamma, "weight of the disparate-exposure term")
      ->required()
      ->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--lr", tr.hp.learning_rate, "learning rate")->capture_default_str();
  train_cmd->add_option("--iterations", tr.hp.iterations, "gradient steps")
      ->capture_default_str();
  train_cmd->add_option("--init-stddev", tr.hp.init_stddev, "stddev of initial weights")
      ->capture_default_str();
  train_cmd->add_option("--seed", tr.hp.seed, "initialization seed")->capture_default_str();
  train_cmd->add_flag("--include-protected-feature", tr.hp.include_protected_feature,
                      "train on the protected attribute as a feature");
  train_cmd->add_flag("--no-standardize", tr.no_standardize, "skip feature standardization");
  train_cmd->add_option("--out", tr.out, "output model JSON")->required();

  PredictArgs pr;
  auto* predict_cmd = app.add_subcommand("predict", "rank a dataset with a model");
  predict_cmd->add_option("--model", pr.model, "model JSON")->required();
  predict_cmd->add_option("--data", pr.data, "dataset CSV")->required();
  predict_cmd->add_option("--out", pr.out, "output predictions CSV")->required();

  FairArgs rr;
  auto* rerank_cmd = app.add_subcommand("rerank", "FA*IR re-ranking of predictions");
  FairArgs pp;
  auto* preprocess_cmd =
      app.add_subcommand("preprocess", "FA*IR re-ranking of training lists");
  for (auto [cmd, args, input_help] :
       {std::tuple{rerank_cmd, &rr, "predictions CSV"}, std::tuple{preprocess_cmd, &pp, "training CSV"}}) {
    cmd->add_option(cmd == rerank_cmd ? "--predictions" : "--data", args->input, input_help)
        ->required();
    cmd->add_option("--p", args->p, "target proportion: number, p-minus, p-star or p-plus")
        ->required();
    cmd->add_option("--alpha", args->alpha, "significance level")->capture_default_str();
    cmd->add_option("--k", args->k, "constrained prefix length (default: whole list)");
    cmd->add_flag("--truncate", args->truncate,
                  "shorten the prefix to what the protected candidates can satisfy");
    cmd->add_option("--out", args->out, "output CSV")->required();
  }

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score predictions against judgments");
  evaluate_cmd->add_option("--predictions", ev.predictions, "predictions CSV")->required();
  evaluate_cmd->add_option("--data", ev.data, "ground-truth dataset CSV")->required();
  evaluate_cmd->add_option("--k", ev.k, "precision cutoff")->capture_default_str();
  evaluate_cmd
      ->add_option("--relevance-threshold", ev.relevance_threshold,
                   "judgment at or above which a candidate is relevant")
      ->capture_default_str();
  evaluate_cmd->add_option("--out-json", ev.out_json, "report JSON (stdout if no output given)");
  evaluate_cmd->add_option("--out-csv", ev.out_csv, "report CSV");

  ExperimentArgs ex;
  auto* experiment_cmd =
      app.add_subcommand("experiment", "cross-validated comparison of all methods");
  experiment_cmd->add_option("--data", ex.data, "dataset CSV")->required();
  experiment_cmd->add_option("--methods", ex.methods, "comma-separated methods")
      ->capture_default_str();
  experiment_cmd->add_option("--gamma-small", ex.gamma_small, "gamma of deltr_small");
  experiment_cmd->add_option("--gamma-large", ex.gamma_large, "gamma of deltr_large");
  experiment_cmd->add_option("--p", ex.ps, "FA*IR target proportions (repeatable)")
      ->capture_default_str();
  experiment_cmd->add_option("--alpha", ex.grid.alpha, "FA*IR significance level")
      ->capture_default_str();
  experiment_cmd->add_option("--fair-k", ex.grid.fair_k, "FA*IR constrained prefix length");
  experiment_cmd->add_option("--folds", ex.grid.folds, "cross-validation folds")
      ->capture_default_str();
  experiment_cmd->add_option("--seed", ex.grid.seed, "fold and initialization seed")
      ->capture_default_str();
  experiment_cmd->add_option("--lr", ex.grid.training.learning_rate, "learning rate")
      ->capture_default_str();
  experiment_cmd->add_option("--iterations", ex.grid.training.iterations, "gradient steps")
      ->capture_default_str();
  experiment_cmd->add_option("--init-stddev", ex.grid.training.init_stddev,
                             "stddev of initial weights")
      ->capture_default_str();
  experiment_cmd->add_flag("--no-standardize", ex.no_standardize,
                           "skip feature standardization");
  experiment_cmd->add_option("--k", ex.grid.k, "precision cutoff")->capture_default_str();
  experiment_cmd
      ->add_option("--relevance-threshold", ex.grid.relevance_threshold,
                   "judgment at or above which a candidate is relevant")
      ->capture_default_str();
  experiment_cmd->add_option("--out", ex.out, "results directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*generate_cmd) {
      cmd_generate(gen, out);
    } else if (*train_cmd) {
      cmd_train(tr, out, err);
    } else if (*predict_cmd) {
      cmd_predict(pr, out);
    } else if (*rerank_cmd) {
      cmd_rerank(rr, out);
    } else if (*preprocess_cmd) {
      cmd_preprocess(pp, out);
    } else if (*evaluate_cmd) {
      cmd_evaluate(ev, out);
    } else if (*experiment_cmd) {
      ex.grid.training.seed = ex.grid.seed;
      cmd_experiment(ex, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"deltr"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace deltr::cli
