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

// JSON model files. Serialization is canonical: save(load(save(m))) is
// byte-identical to save(m), and doubles round-trip exactly.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "deltr/error.hpp"
#include "deltr/trainer.hpp"
#include "json.hpp"

namespace deltr {

inline constexpr int kModelFormatVersion = 1;

inline std::string save_model(const Model& model) {
  using nlohmann::ordered_json;
  if (model.feature_names.empty()) throw Error("cannot save a model with 0 features");
  if (model.omega.size() != model.feature_names.size()) {
    throw Error("model has " + std::to_string(model.omega.size()) + " weights for " +
                std::to_string(model.feature_names.size()) + " features");
  }
  if (model.loss_trace.empty()) throw Error("model has an empty loss trace");
  if (model.scaling && (model.scaling->means.size() != model.feature_names.size() ||
                        model.scaling->stddevs.size() != model.feature_names.size())) {
    throw Error("model scaling does not match its feature count");
  }

  ordered_json j;
  j["format_version"] = kModelFormatVersion;
  j["feature_names"] = model.feature_names;
  j["omega"] = std::vector<double>(model.omega.values().begin(), model.omega.values().end());
  if (model.scaling) {
    j["scaling"] = {{"means", model.scaling->means}, {"stddevs", model.scaling->stddevs}};
  } else {
    j["scaling"] = nullptr;
  }
  const auto& hp = model.hyperparams;
  j["hyperparams"] = {{"gamma", hp.gamma},
                      {"learning_rate", hp.learning_rate},
                      {"iterations", hp.iterations},
                      {"init_stddev", hp.init_stddev},
                      {"seed", hp.seed},
                      {"standardize", hp.standardize},
                      {"include_protected_feature", hp.include_protected_feature}};
  auto trace = ordered_json::array();
  for (const auto& c : model.loss_trace) {
    trace.push_back({{"iteration", c.iteration},
                     {"loss", c.loss},
                     {"disparate_exposure", c.disparate_exposure}});
  }
  j["loss_trace"] = std::move(trace);
  return j.dump(2) + "\n";
}

inline Model load_model(std::string_view text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw ParseError("unsupported model format_version " + std::to_string(version) +
                       " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    Model model;
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.omega = Weights(j.at("omega").get<std::vector<double>>());
    if (!j.at("scaling").is_null()) {
      model.scaling = ScalingParams{j["scaling"].at("means").get<std::vector<double>>(),
                                    j["scaling"].at("stddevs").get<std::vector<double>>()};
    }
    const auto& h = j.at("hyperparams");
    auto& hp = model.hyperparams;
    hp.gamma = h.at("gamma").get<double>();
    hp.learning_rate = h.at("learning_rate").get<double>();
    hp.iterations = h.at("iterations").get<long long>();
    hp.init_stddev = h.at("init_stddev").get<double>();
    hp.seed = h.at("seed").get<std::uint64_t>();
    hp.standardize = h.at("standardize").get<bool>();
    hp.include_protected_feature = h.at("include_protected_feature").get<bool>();
    for (const auto& c : j.at("loss_trace")) {
      model.loss_trace.push_back({c.at("iteration").get<long long>(), c.at("loss").get<double>(),
                                  c.at("disparate_exposure").get<double>()});
    }
    if (model.feature_names.empty()) throw ParseError("model has 0 features");
    if (model.omega.size() != model.feature_names.size()) {
      throw ParseError("omega length does not match feature_names");
    }
    if (model.scaling && (model.scaling->means.size() != model.feature_names.size() ||
                          model.scaling->stddevs.size() != model.feature_names.size())) {
      throw ParseError("scaling length does not match feature_names");
    }
    if (model.loss_trace.empty()) throw ParseError("model has an empty loss_trace");
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("malformed model file: ") + e.what());
  }
}

}  // namespace deltr
