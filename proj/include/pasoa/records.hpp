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

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pasoa/config.hpp"

namespace pasoa {

// Everything recorded about one experiment step. Serialized as one JSON
// line; wall time is excluded from the line (it goes to the timing sidecar)
// so the JSONL output is byte-deterministic.
struct StepRecord {
  std::size_t k = 0;
  std::vector<double> xi;
  double y = 0.0;
  std::vector<double> xi_init;  // optimizer start (the winning restart)
  std::size_t n_temper_steps = 0;
  std::vector<double> lambdas;
  std::vector<double> acceptance_rates;
  std::vector<double> ess_values;
  double mean_acceptance = 0.0;
  double pce_estimate = 0.0;
  double pce_std_error = 0.0;
  double spce = 0.0;
  double snmc = 0.0;
  double w2 = 0.0;
  std::vector<std::pair<std::string, double>> w2_blocks;
  double wall_time_s = 0.0;
};

struct RolloutRecord {
  std::string config_digest;
  std::vector<double> theta_star;
  std::vector<StepRecord> steps;
  std::size_t total_temper_steps = 0;
};

nlohmann::json step_to_json(const StepRecord& rec);
StepRecord step_from_json(const nlohmann::json& j);

nlohmann::json header_to_json(const ExperimentConfig& cfg,
                              const std::string& digest,
                              const std::vector<double>& theta_star);

// One rollout per file: a header line, one line per step, a footer line.
void write_rollout_header(std::ostream& out, const ExperimentConfig& cfg,
                          const std::string& digest,
                          const std::vector<double>& theta_star);
void write_step_line(std::ostream& out, const StepRecord& rec);
void write_rollout_footer(std::ostream& out, std::size_t total_temper_steps);

struct RolloutFile {
  nlohmann::json header;
  RolloutRecord record;
};

RolloutFile read_rollout_file(const std::string& path);

}  // namespace pasoa
