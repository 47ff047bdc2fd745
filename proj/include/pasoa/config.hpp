/*
 * Copyright 2026 the pasoa authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pasoa/contrastive.hpp"
#include "pasoa/eval.hpp"
#include "pasoa/model.hpp"
#include "pasoa/smc.hpp"

namespace pasoa {

enum class Method { pasoa, smc, random };

Method method_from_string(const std::string& s);
const char* to_string(Method m);

// Full experiment description. The on-disk form is a flat key/value JSON
// document; see config_to_json for the canonical key set.
struct ExperimentConfig {
  std::string model_name = "sources";
  Method method = Method::pasoa;
  std::size_t k = 30;         // number of experiments
  std::size_t n = 100;        // particles per contrastive subset
  std::size_t l = 200;        // contrastive count; M = n * (l + 1)
  std::uint64_t seed = 1;
  std::size_t rollouts = 1;
  std::string out_dir = "runs";

  TemperConfig temper;
  SGConfig sg;
  EvalConfig eval;
  ModelSettings models;

  // empty: draw theta_star from the prior, independently per rollout
  std::vector<double> theta_star;

  std::size_t particles() const { return n * (l + 1); }
  bool temper_enabled() const { return method != Method::smc; }
};

// Parse / serialize the flat JSON form. Unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Throws ValidationError with a human-readable message.
void validate(const ExperimentConfig& cfg);

// FNV-1a hash of the canonical config serialization (output path excluded),
// as a fixed-width hex string.
std::string config_digest(const ExperimentConfig& cfg);

ExperimentConfig load_config_file(const std::string& path);

}  // namespace pasoa
