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

#include "pasoa/records.hpp"

#include <fstream>
#include <ostream>

#include "pasoa/errors.hpp"

namespace pasoa {

using nlohmann::json;

json step_to_json(const StepRecord& rec) {
  json j;
  j["type"] = "step";
  j["k"] = rec.k;
  j["xi"] = rec.xi;
  j["y"] = rec.y;
  j["xi_init"] = rec.xi_init;
  j["n_temper_steps"] = rec.n_temper_steps;
  j["lambdas"] = rec.lambdas;
  j["acceptance_rates"] = rec.acceptance_rates;
  j["ess_values"] = rec.ess_values;
  j["mean_acceptance"] = rec.mean_acceptance;
  j["pce_estimate"] = rec.pce_estimate;
  j["pce_std_error"] = rec.pce_std_error;
  j["spce"] = rec.spce;
  j["snmc"] = rec.snmc;
  j["w2"] = rec.w2;
  json blocks = json::object();
  for (const auto& [name, value] : rec.w2_blocks) blocks[name] = value;
  j["w2_blocks"] = blocks;
  return j;
}

StepRecord step_from_json(const json& j) {
  StepRecord rec;
  rec.k = j.at("k").get<std::size_t>();
  rec.xi = j.at("xi").get<std::vector<double>>();
  rec.y = j.at("y").get<double>();
  rec.xi_init = j.at("xi_init").get<std::vector<double>>();
  rec.n_temper_steps = j.at("n_temper_steps").get<std::size_t>();
  rec.lambdas = j.at("lambdas").get<std::vector<double>>();
  rec.acceptance_rates =
      j.at("acceptance_rates").get<std::vector<double>>();
  rec.ess_values = j.at("ess_values").get<std::vector<double>>();
  rec.mean_acceptance = j.at("mean_acceptance").get<double>();
  rec.pce_estimate = j.at("pce_estimate").get<double>();
  rec.pce_std_error = j.at("pce_std_error").get<double>();
  rec.spce = j.at("spce").get<double>();
  rec.snmc = j.at("snmc").get<double>();
  rec.w2 = j.at("w2").get<double>();
  for (const auto& [name, value] : j.at("w2_blocks").items()) {
    rec.w2_blocks.emplace_back(name, value.get<double>());
  }
  return rec;
}

json header_to_json(const ExperimentConfig& cfg, const std::string& digest,
                    const std::vector<double>& theta_star) {
  json j;
  j["type"] = "header";
  j["config_digest"] = digest;
  json c = config_to_json(cfg);
  c.erase("out");  // output location is environmental, not experiment state
  j["config"] = c;
  j["theta_star"] = theta_star;
  return j;
}

void write_rollout_header(std::ostream& out, const ExperimentConfig& cfg,
                          const std::string& digest,
                          const std::vector<double>& theta_star) {
  out << header_to_json(cfg, digest, theta_star).dump() << '\n';
  out.flush();
}

void write_step_line(std::ostream& out, const StepRecord& rec) {
  out << step_to_json(rec).dump() << '\n';
  out.flush();  // keep partial rollouts on disk if a later step aborts
}

void write_rollout_footer(std::ostream& out, std::size_t total_temper_steps) {
  json j;
  j["type"] = "footer";
  j["total_temper_steps"] = total_temper_steps;
  out << j.dump() << '\n';
  out.flush();
}

RolloutFile read_rollout_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open rollout file: " + path);

  RolloutFile file;
  bool have_header = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError("malformed rollout line: " + std::string(e.what()));
    }
    const std::string type = j.value("type", "");
    if (type == "header") {
      file.header = j;
      file.record.config_digest = j.at("config_digest").get<std::string>();
      file.record.theta_star = j.at("theta_star").get<std::vector<double>>();
      have_header = true;
    } else if (type == "step") {
      file.record.steps.push_back(step_from_json(j));
    } else if (type == "footer") {
      file.record.total_temper_steps =
          j.at("total_temper_steps").get<std::size_t>();
    } else {
      throw ValidationError("unknown rollout line type '" + type + "'");
    }
  }
  if (!have_header) {
    throw ValidationError("rollout file has no header line: " + path);
  }
  return file;
}

}  // namespace pasoa
