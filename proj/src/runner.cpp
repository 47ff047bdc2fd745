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

#include "pasoa/runner.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "pasoa/contrastive.hpp"
#include "pasoa/errors.hpp"
#include "pasoa/eval.hpp"

namespace pasoa {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kTagRollout = 0x726f;
constexpr std::uint64_t kTagTruth = 0x7473;
constexpr std::uint64_t kTagInitCloud = 0x6963;
constexpr std::uint64_t kTagEval = 0x6576;
constexpr std::uint64_t kTagDesign = 0x6467;
constexpr std::uint64_t kTagObs = 0x6f62;
constexpr std::uint64_t kTagTemper = 0x746d;
constexpr std::uint64_t kTagPce = 0x7063;

constexpr std::size_t kDiagPceSamples = 1000;

// shortest round-trip decimal form, for deterministic CSV output
std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// normal-approximation standard error of the median: 1.2533 * sd / sqrt(n)
double median_se_of(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return 1.2533141373155003 * sd / std::sqrt(static_cast<double>(n));
}

std::vector<double> draw_uniform_design(const DesignBounds& bounds, Rng rng) {
  std::vector<double> xi(bounds.lo.size());
  for (std::size_t j = 0; j < xi.size(); ++j) {
    xi[j] = rng.uniform(bounds.lo[j], bounds.hi[j]);
  }
  return xi;
}

// Posterior-to-truth distance, quotienting out exchangeable-block
// relabelings when the model has that symmetry.
void fill_w2(const Model& model, const ParticleCloud& cloud,
             std::span<const double> theta_star, double& joint,
             std::vector<std::pair<std::string, double>>& named_blocks) {
  named_blocks.clear();
  const std::size_t bs = model.exchangeable_block_size();
  if (bs > 0 && cloud.dim % bs == 0) {
    std::vector<double> blocks;
    joint = wasserstein2_matched(cloud, theta_star, bs, &blocks);
    const auto names = model.param_blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      named_blocks.emplace_back(names[b].name, blocks[b]);
    }
    return;
  }
  joint = wasserstein2_to_point(cloud, theta_star);
  for (const ParamBlock& block : model.param_blocks()) {
    named_blocks.emplace_back(
        block.name,
        wasserstein2_block(cloud, theta_star, block.offset, block.size));
  }
}

}  // namespace

RolloutRecord run_rollout(const ExperimentConfig& cfg,
                          std::size_t rollout_index, std::ostream* jsonl,
                          std::ostream* timings) {
  const auto model = make_model(cfg.model_name, cfg.models);
  const Rng root(cfg.seed);
  const Rng rrng = root.fork({kTagRollout, rollout_index});

  std::vector<double> theta_star = cfg.theta_star;
  if (theta_star.empty()) {
    theta_star.resize(model->theta_dim());
    Rng trng = rrng.fork(kTagTruth);
    model->sample_prior(trng, theta_star);
  }

  RolloutRecord record;
  record.config_digest = config_digest(cfg);
  record.theta_star = theta_star;
  if (jsonl != nullptr) {
    write_rollout_header(*jsonl, cfg, record.config_digest, theta_star);
  }

  const std::size_t m = cfg.particles();
  ParticleCloud cloud(m, model->theta_dim());
  {
    Rng irng = rrng.fork(kTagInitCloud);
    sample_prior_matrix(*model, irng, cloud.positions.data(), m, m);
  }

  SequentialEvaluator evaluator(*model, theta_star, cfg.eval.l_eval,
                                rrng.fork(kTagEval));

  TemperConfig temper = cfg.temper;
  temper.temper_enabled = cfg.temper_enabled();

  const DesignBounds& bounds = model->design_bounds();
  History history;

  for (std::size_t k = 1; k <= cfg.k; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    StepRecord rec;
    rec.k = k;
    try {
      const auto subsets = partition_cloud(cloud, cfg.l);
      Rng drng = rrng.fork({kTagDesign, k});
      if (cfg.method == Method::random) {
        rec.xi = draw_uniform_design(bounds, drng);
        rec.xi_init = rec.xi;
        const PceEstimate est = estimate_pce(*model, subsets, rec.xi,
                                             kDiagPceSamples,
                                             rrng.fork({kTagPce, k}));
        rec.pce_estimate = est.value;
        rec.pce_std_error = est.std_error;
      } else {
        const std::vector<double> xi0 =
            draw_uniform_design(bounds, drng.fork(0));
        const DesignResult result =
            optimize_design(*model, subsets, xi0, cfg.sg, drng.fork(1));
        rec.xi = result.xi;
        rec.xi_init = result.xi_start;
        rec.pce_estimate = result.pce.value;
        rec.pce_std_error = result.pce.std_error;
      }

      Rng orng = rrng.fork({kTagObs, k});
      rec.y = model->simulate(theta_star, rec.xi, orng.normal());

      const TemperTrace trace = temper_to_posterior(
          *model, cloud, rec.y, rec.xi, history, temper,
          rrng.fork({kTagTemper, k}));
      history.push_back({rec.y, rec.xi});

      rec.n_temper_steps = trace.size();
      rec.lambdas = trace.lambdas;
      rec.acceptance_rates = trace.acceptance_rates;
      rec.ess_values = trace.ess_values;
      double acc = 0.0;
      for (double a : trace.acceptance_rates) acc += a;
      rec.mean_acceptance =
          trace.size() > 0 ? acc / static_cast<double>(trace.size()) : 0.0;

      evaluator.observe(rec.y, rec.xi);
      rec.spce = evaluator.spce();
      rec.snmc = evaluator.snmc();

      fill_w2(*model, cloud, theta_star, rec.w2, rec.w2_blocks);
    } catch (const RuntimeError& e) {
      throw RuntimeError("step " + std::to_string(k) + ": " + e.what());
    }

    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    record.steps.push_back(rec);
    record.total_temper_steps += rec.n_temper_steps;
    if (jsonl != nullptr) write_step_line(*jsonl, rec);
    if (timings != nullptr) {
      *timings << k << ',' << format_double(rec.wall_time_s) << '\n';
      timings->flush();
    }
  }

  if (jsonl != nullptr) {
    write_rollout_footer(*jsonl, record.total_temper_steps);
  }
  return record;
}

std::vector<BatchSummaryRow> summarize(
    const std::vector<RolloutRecord>& rollouts) {
  std::vector<BatchSummaryRow> rows;
  if (rollouts.empty()) return rows;
  const std::size_t k_max = rollouts.front().steps.size();
  for (std::size_t k = 1; k <= k_max; ++k) {
    std::vector<double> spce_v, snmc_v, w2_v, temper_v;
    for (const RolloutRecord& r : rollouts) {
      if (r.steps.size() < k) continue;
      const StepRecord& s = r.steps[k - 1];
      spce_v.push_back(s.spce);
      snmc_v.push_back(s.snmc);
      w2_v.push_back(s.w2);
      temper_v.push_back(static_cast<double>(s.n_temper_steps));
    }
    if (spce_v.empty()) break;
    BatchSummaryRow row;
    row.k = k;
    row.spce_med = median_of(spce_v);
    row.spce_se = median_se_of(spce_v);
    row.snmc_med = median_of(snmc_v);
    row.snmc_se = median_se_of(snmc_v);
    row.w2_med = median_of(w2_v);
    row.w2_se = median_se_of(w2_v);
    row.temper_med = median_of(temper_v);
    rows.push_back(row);
  }
  return rows;
}

void write_summary_csv(std::ostream& out,
                       const std::vector<BatchSummaryRow>& summary) {
  out << "k,spce_med,spce_se,snmc_med,snmc_se,w2_med,w2_se,temper_med\n";
  for (const BatchSummaryRow& r : summary) {
    out << r.k << ',' << format_double(r.spce_med) << ','
        << format_double(r.spce_se) << ',' << format_double(r.snmc_med) << ','
        << format_double(r.snmc_se) << ',' << format_double(r.w2_med) << ','
        << format_double(r.w2_se) << ',' << format_double(r.temper_med)
        << '\n';
  }
}

BatchResult run_batch(const ExperimentConfig& cfg, std::size_t n_rollouts,
                      std::size_t parallelism) {
  fs::create_directories(cfg.out_dir);

  BatchResult result;
  result.failures.assign(n_rollouts, "");
  result.rollout_files.resize(n_rollouts);
  std::vector<RolloutRecord> records(n_rollouts);
  std::vector<char> ok(n_rollouts, 0);

  const std::size_t workers =
      std::max<std::size_t>(1, std::min(parallelism, n_rollouts));

  auto work = [&](std::size_t tid) {
    for (std::size_t r = tid; r < n_rollouts; r += workers) {
      char name[32];
      std::snprintf(name, sizeof(name), "rollout_%03zu", r);
      const fs::path jsonl_path = fs::path(cfg.out_dir) / (std::string(name) + ".jsonl");
      const fs::path timing_path =
          fs::path(cfg.out_dir) / (std::string(name) + "_timings.csv");
      result.rollout_files[r] = jsonl_path.string();
      std::ofstream jsonl(jsonl_path);
      std::ofstream timings(timing_path);
      timings << "k,wall_time_s\n";
      try {
        records[r] = run_rollout(cfg, r, &jsonl, &timings);
        ok[r] = 1;
      } catch (const std::exception& e) {
        result.failures[r] = e.what();
      }
    }
  };

  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }

  for (std::size_t r = 0; r < n_rollouts; ++r) {
    if (ok[r]) result.rollouts.push_back(std::move(records[r]));
  }
  result.summary = summarize(result.rollouts);

  std::ofstream csv(fs::path(cfg.out_dir) / "summary.csv");
  write_summary_csv(csv, result.summary);
  return result;
}

std::vector<EvalRow> evaluate_rollout_file(
    const std::string& path, std::optional<std::size_t> l_eval_override,
    std::uint64_t seed) {
  const RolloutFile file = read_rollout_file(path);
  ExperimentConfig cfg = config_from_json(file.header.at("config"));
  if (l_eval_override) cfg.eval.l_eval = *l_eval_override;

  const auto model = make_model(cfg.model_name, cfg.models);
  const std::vector<double>& theta_star = file.record.theta_star;
  if (theta_star.size() != model->theta_dim()) {
    throw ValidationError("rollout theta_star does not match model " +
                          cfg.model_name);
  }

  const Rng root(seed);
  const std::size_t m = cfg.particles();
  ParticleCloud cloud(m, model->theta_dim());
  {
    Rng irng = root.fork(kTagInitCloud);
    sample_prior_matrix(*model, irng, cloud.positions.data(), m, m);
  }
  SequentialEvaluator evaluator(*model, theta_star, cfg.eval.l_eval,
                                root.fork(kTagEval));
  TemperConfig temper = cfg.temper;
  temper.temper_enabled = cfg.temper_enabled();

  History history;
  std::vector<EvalRow> rows;
  for (const StepRecord& step : file.record.steps) {
    temper_to_posterior(*model, cloud, step.y, step.xi, history, temper,
                        root.fork({kTagTemper, step.k}));
    history.push_back({step.y, step.xi});
    evaluator.observe(step.y, step.xi);

    EvalRow row;
    row.k = step.k;
    row.spce = evaluator.spce();
    row.snmc = evaluator.snmc();
    fill_w2(*model, cloud, theta_star, row.w2, row.w2_blocks);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_eval_rows(std::ostream& out, const std::vector<EvalRow>& rows) {
  for (const EvalRow& row : rows) {
    nlohmann::json j;
    j["type"] = "eval";
    j["k"] = row.k;
    j["spce"] = row.spce;
    j["snmc"] = row.snmc;
    j["w2"] = row.w2;
    nlohmann::json blocks = nlohmann::json::object();
    for (const auto& [name, value] : row.w2_blocks) blocks[name] = value;
    j["w2_blocks"] = blocks;
    out << j.dump() << '\n';
  }
}

}  // namespace pasoa
