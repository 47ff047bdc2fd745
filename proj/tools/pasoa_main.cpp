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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "pasoa/config.hpp"
#include "pasoa/errors.hpp"
#include "pasoa/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

std::size_t thread_count() {
  if (const char* env = std::getenv("PASOA_THREADS")) {
    const long v = std::atol(env);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

int run_command(const std::string& config_path,
                const std::optional<std::string>& model,
                const std::optional<std::string>& method,
                const std::optional<std::size_t>& k,
                const std::optional<std::size_t>& n,
                const std::optional<std::size_t>& l,
                const std::optional<double>& ess_min,
                const std::optional<std::size_t>& grad_steps,
                const std::optional<double>& lr,
                const std::optional<std::uint64_t>& seed,
                const std::optional<std::size_t>& rollouts,
                const std::optional<std::string>& out) {
  pasoa::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = pasoa::load_config_file(config_path);
  if (model) cfg.model_name = *model;
  if (method) cfg.method = pasoa::method_from_string(*method);
  if (k) cfg.k = *k;
  if (n) cfg.n = *n;
  if (l) cfg.l = *l;
  if (ess_min) cfg.temper.ess_min_fraction = *ess_min;
  if (grad_steps) cfg.sg.steps = *grad_steps;
  if (lr) cfg.sg.learning_rate = *lr;
  if (seed) cfg.seed = *seed;
  if (rollouts) cfg.rollouts = *rollouts;
  if (out) cfg.out_dir = *out;
  pasoa::validate(cfg);

  const pasoa::BatchResult result =
      pasoa::run_batch(cfg, cfg.rollouts, thread_count());

  std::size_t failed = 0;
  for (std::size_t r = 0; r < result.failures.size(); ++r) {
    if (!result.failures[r].empty()) {
      ++failed;
      std::cerr << "rollout " << r << " failed: " << result.failures[r]
                << '\n';
    }
  }
  std::cout << "wrote " << result.rollouts.size() << " rollout(s) and "
            << "summary.csv under " << cfg.out_dir << '\n';
  return failed == 0 ? kExitOk : kExitRuntime;
}

int eval_command(const std::string& rollout_path,
                 const std::optional<std::size_t>& l_eval,
                 std::uint64_t seed, std::optional<std::string> out_path) {
  const auto rows = pasoa::evaluate_rollout_file(rollout_path, l_eval, seed);
  std::string out = out_path.value_or(rollout_path + ".eval.jsonl");
  std::ofstream f(out);
  if (!f) throw pasoa::ValidationError("cannot write " + out);
  pasoa::write_eval_rows(f, rows);
  std::cout << "wrote " << rows.size() << " eval rows to " << out << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential Bayesian experimental design with tempered SMC "
               "and contrastive-bound design optimization"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "run sequential design rollouts");
  std::string config_path;
  std::optional<std::string> model, method, out;
  std::optional<std::size_t> k, n, l, grad_steps, rollouts;
  std::optional<double> ess_min, lr;
  std::optional<std::uint64_t> seed;
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--model", model, "lingauss | sources | ces");
  run->add_option("--method", method, "pasoa | smc | random");
  run->add_option("--k", k, "number of experiments");
  run->add_option("--n", n, "particles per contrastive subset");
  run->add_option("--l", l, "contrastive count (M = N(L+1))");
  run->add_option("--ess-min", ess_min, "ESS fraction target");
  run->add_option("--grad-steps", grad_steps, "gradient steps per design");
  run->add_option("--lr", lr, "learning rate");
  run->add_option("--seed", seed, "master seed");
  run->add_option("--rollouts", rollouts, "number of rollouts");
  run->add_option("--out", out, "output directory");

  // eval
  auto* eval = app.add_subcommand("eval", "re-evaluate a stored rollout");
  std::string rollout_path;
  std::optional<std::size_t> l_eval;
  std::uint64_t eval_seed = 0;
  std::optional<std::string> eval_out;
  eval->add_option("--rollout", rollout_path, "rollout JSONL file")
      ->required();
  eval->add_option("--l-eval", l_eval, "contrastive draws for SPCE/SNMC");
  eval->add_option("--seed", eval_seed, "evaluation seed");
  eval->add_option("--out", eval_out, "output file (default: <in>.eval.jsonl)");

  // check
  auto* check = app.add_subcommand("check", "run the fast invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (run->parsed()) {
      return run_command(config_path, model, method, k, n, l, ess_min,
                         grad_steps, lr, seed, rollouts, out);
    }
    if (eval->parsed()) {
      return eval_command(rollout_path, l_eval, eval_seed, eval_out);
    }
    if (check->parsed()) {
      return pasoa::selfcheck(std::cout) ? kExitOk : kExitRuntime;
    }
  } catch (const pasoa::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}
