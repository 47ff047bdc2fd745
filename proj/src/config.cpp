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

#include "pasoa/config.hpp"

#include <cstdio>
#include <fstream>

#include "pasoa/errors.hpp"

namespace pasoa {
namespace {

using nlohmann::json;

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const json::exception&) {
      throw ValidationError(std::string("config key '") + key +
                            "' has the wrong type");
    }
  }
}

const char* const kKnownKeys[] = {
    "model", "method", "k", "n", "l", "seed", "rollouts", "out",
    "ess_min", "resampling", "mh_moves", "mh_scale", "root_tol",
    "max_temper_steps",
    "grad_steps", "lr", "adam_beta1", "adam_beta2", "adam_eps", "minibatch",
    "polyak_window", "restarts", "sg_algorithm",
    "l_eval", "n_outer", "theta_star",
    "lingauss_prior_sigma", "lingauss_obs_sigma", "lingauss_design_lo",
    "lingauss_design_hi",
    "sources_s", "sources_alpha", "sources_b", "sources_m", "sources_sigma",
    "sources_design_lo", "sources_design_hi",
    "ces_epsilon", "ces_tau", "ces_logu_mu", "ces_logu_sigma",
    "ces_tail_threshold", "ces_design_lo", "ces_design_hi",
};

}  // namespace

Method method_from_string(const std::string& s) {
  if (s == "pasoa") return Method::pasoa;
  if (s == "smc") return Method::smc;
  if (s == "random") return Method::random;
  throw ValidationError("unknown method '" + s +
                        "' (expected pasoa, smc or random)");
}

const char* to_string(Method m) {
  switch (m) {
    case Method::pasoa: return "pasoa";
    case Method::smc: return "smc";
    case Method::random: return "random";
  }
  return "?";
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) {
    throw ValidationError("config must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* k : kKnownKeys) known = known || key == k;
    if (!known) throw ValidationError("unknown config key '" + key + "'");
  }

  ExperimentConfig cfg;
  read_key(j, "model", cfg.model_name);
  if (j.contains("method")) {
    cfg.method = method_from_string(j.at("method").get<std::string>());
  }
  read_key(j, "k", cfg.k);
  read_key(j, "n", cfg.n);
  read_key(j, "l", cfg.l);
  read_key(j, "seed", cfg.seed);
  read_key(j, "rollouts", cfg.rollouts);
  read_key(j, "out", cfg.out_dir);

  read_key(j, "ess_min", cfg.temper.ess_min_fraction);
  if (j.contains("resampling")) {
    cfg.temper.scheme =
        resampling_scheme_from_string(j.at("resampling").get<std::string>());
  }
  read_key(j, "mh_moves", cfg.temper.mh_moves_per_step);
  read_key(j, "mh_scale", cfg.temper.mh_scale);
  read_key(j, "root_tol", cfg.temper.root_tol);
  read_key(j, "max_temper_steps", cfg.temper.max_temper_steps);

  read_key(j, "grad_steps", cfg.sg.steps);
  read_key(j, "lr", cfg.sg.learning_rate);
  read_key(j, "adam_beta1", cfg.sg.adam_beta1);
  read_key(j, "adam_beta2", cfg.sg.adam_beta2);
  read_key(j, "adam_eps", cfg.sg.adam_eps);
  read_key(j, "minibatch", cfg.sg.minibatch);
  read_key(j, "polyak_window", cfg.sg.polyak_window);
  read_key(j, "restarts", cfg.sg.restarts);
  if (j.contains("sg_algorithm")) {
    const std::string alg = j.at("sg_algorithm").get<std::string>();
    if (alg == "adam") {
      cfg.sg.use_adam = true;
    } else if (alg == "sgd") {
      cfg.sg.use_adam = false;
    } else {
      throw ValidationError("sg_algorithm must be 'adam' or 'sgd'");
    }
  }

  read_key(j, "l_eval", cfg.eval.l_eval);
  read_key(j, "n_outer", cfg.eval.n_outer);

  if (j.contains("theta_star") && !j.at("theta_star").is_string()) {
    // the string form ("prior") keeps the default empty vector
    cfg.theta_star = j.at("theta_star").get<std::vector<double>>();
  }

  read_key(j, "lingauss_prior_sigma", cfg.models.lingauss.prior_sigma);
  read_key(j, "lingauss_obs_sigma", cfg.models.lingauss.obs_sigma);
  read_key(j, "lingauss_design_lo", cfg.models.lingauss.design_lo);
  read_key(j, "lingauss_design_hi", cfg.models.lingauss.design_hi);

  read_key(j, "sources_s", cfg.models.sources.n_sources);
  read_key(j, "sources_alpha", cfg.models.sources.alpha);
  read_key(j, "sources_b", cfg.models.sources.background);
  read_key(j, "sources_m", cfg.models.sources.softening);
  read_key(j, "sources_sigma", cfg.models.sources.sigma);
  read_key(j, "sources_design_lo", cfg.models.sources.design_lo);
  read_key(j, "sources_design_hi", cfg.models.sources.design_hi);

  read_key(j, "ces_epsilon", cfg.models.ces.epsilon);
  read_key(j, "ces_tau", cfg.models.ces.tau);
  read_key(j, "ces_logu_mu", cfg.models.ces.logu_mu);
  read_key(j, "ces_logu_sigma", cfg.models.ces.logu_sigma);
  read_key(j, "ces_tail_threshold", cfg.models.ces.tail_threshold);
  read_key(j, "ces_design_lo", cfg.models.ces.design_lo);
  read_key(j, "ces_design_hi", cfg.models.ces.design_hi);

  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["model"] = cfg.model_name;
  j["method"] = to_string(cfg.method);
  j["k"] = cfg.k;
  j["n"] = cfg.n;
  j["l"] = cfg.l;
  j["seed"] = cfg.seed;
  j["rollouts"] = cfg.rollouts;
  j["out"] = cfg.out_dir;

  j["ess_min"] = cfg.temper.ess_min_fraction;
  j["resampling"] = to_string(cfg.temper.scheme);
  j["mh_moves"] = cfg.temper.mh_moves_per_step;
  j["mh_scale"] = cfg.temper.mh_scale;
  j["root_tol"] = cfg.temper.root_tol;
  j["max_temper_steps"] = cfg.temper.max_temper_steps;

  j["grad_steps"] = cfg.sg.steps;
  j["lr"] = cfg.sg.learning_rate;
  j["adam_beta1"] = cfg.sg.adam_beta1;
  j["adam_beta2"] = cfg.sg.adam_beta2;
  j["adam_eps"] = cfg.sg.adam_eps;
  j["minibatch"] = cfg.sg.minibatch;
  j["polyak_window"] = cfg.sg.polyak_window;
  j["restarts"] = cfg.sg.restarts;
  j["sg_algorithm"] = cfg.sg.use_adam ? "adam" : "sgd";

  j["l_eval"] = cfg.eval.l_eval;
  j["n_outer"] = cfg.eval.n_outer;

  if (cfg.theta_star.empty()) {
    j["theta_star"] = "prior";
  } else {
    j["theta_star"] = cfg.theta_star;
  }

  j["lingauss_prior_sigma"] = cfg.models.lingauss.prior_sigma;
  j["lingauss_obs_sigma"] = cfg.models.lingauss.obs_sigma;
  j["lingauss_design_lo"] = cfg.models.lingauss.design_lo;
  j["lingauss_design_hi"] = cfg.models.lingauss.design_hi;

  j["sources_s"] = cfg.models.sources.n_sources;
  j["sources_alpha"] = cfg.models.sources.alpha;
  j["sources_b"] = cfg.models.sources.background;
  j["sources_m"] = cfg.models.sources.softening;
  j["sources_sigma"] = cfg.models.sources.sigma;
  j["sources_design_lo"] = cfg.models.sources.design_lo;
  j["sources_design_hi"] = cfg.models.sources.design_hi;

  j["ces_epsilon"] = cfg.models.ces.epsilon;
  j["ces_tau"] = cfg.models.ces.tau;
  j["ces_logu_mu"] = cfg.models.ces.logu_mu;
  j["ces_logu_sigma"] = cfg.models.ces.logu_sigma;
  j["ces_tail_threshold"] = cfg.models.ces.tail_threshold;
  j["ces_design_lo"] = cfg.models.ces.design_lo;
  j["ces_design_hi"] = cfg.models.ces.design_hi;

  return j;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.k < 1) throw ValidationError("K must be >= 1");
  if (cfg.n < 1) throw ValidationError("N (particles per subset) must be >= 1");
  if (cfg.l < 1) throw ValidationError("L (contrastive count) must be >= 1");
  if (cfg.rollouts < 1) throw ValidationError("rollouts must be >= 1");
  if (!(cfg.temper.ess_min_fraction > 0.0 &&
        cfg.temper.ess_min_fraction <= 1.0)) {
    throw ValidationError("ess_min must be in (0, 1]");
  }
  if (cfg.temper.ess_min_fraction * static_cast<double>(cfg.particles()) <
      1.0) {
    throw ValidationError("ess_min * M must be at least 1");
  }
  if (cfg.temper.max_temper_steps < 1) {
    throw ValidationError("max_temper_steps must be >= 1");
  }
  if (cfg.temper.root_tol <= 0.0) {
    throw ValidationError("root_tol must be positive");
  }
  if (cfg.sg.steps < 1) throw ValidationError("grad_steps must be >= 1");
  if (cfg.sg.minibatch < 1) throw ValidationError("minibatch must be >= 1");
  if (cfg.sg.restarts < 1) throw ValidationError("restarts must be >= 1");
  if (!(cfg.sg.learning_rate > 0.0)) {
    throw ValidationError("lr must be positive");
  }
  if (cfg.eval.l_eval < 1) throw ValidationError("l_eval must be >= 1");
  if (cfg.eval.n_outer < 1) throw ValidationError("n_outer must be >= 1");

  const auto model = make_model(cfg.model_name, cfg.models);
  if (!cfg.theta_star.empty() &&
      cfg.theta_star.size() != model->theta_dim()) {
    throw ValidationError("theta_star has wrong dimension for model " +
                          cfg.model_name);
  }
  const DesignBounds& b = model->design_bounds();
  for (std::size_t j = 0; j < b.lo.size(); ++j) {
    if (!(b.lo[j] < b.hi[j])) {
      throw ValidationError("design bounds must satisfy lo < hi");
    }
  }
}

std::string config_digest(const ExperimentConfig& cfg) {
  json j = config_to_json(cfg);
  j.erase("out");  // the output location does not identify the experiment
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("malformed config JSON: " + std::string(e.what()));
  }
  return config_from_json(j);
}

}  // namespace pasoa
