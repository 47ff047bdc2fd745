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
#include <optional>
#include <string>
#include <vector>

#include "pasoa/config.hpp"
#include "pasoa/records.hpp"

namespace pasoa {

// One full sequential-design rollout. rollout_index selects the derived
// seed; `jsonl` and `timings` (both optional) receive the streamed step
// lines / wall times as the rollout progresses.
RolloutRecord run_rollout(const ExperimentConfig& cfg,
                          std::size_t rollout_index, std::ostream* jsonl,
                          std::ostream* timings);

struct BatchSummaryRow {
  std::size_t k = 0;
  double spce_med = 0.0, spce_se = 0.0;
  double snmc_med = 0.0, snmc_se = 0.0;
  double w2_med = 0.0, w2_se = 0.0;
  double temper_med = 0.0;
};

struct BatchResult {
  std::vector<RolloutRecord> rollouts;          // successful rollouts
  std::vector<std::string> failures;            // error text per failed index
  std::vector<BatchSummaryRow> summary;         // per-step medians / SEs
  std::vector<std::string> rollout_files;
};

// Independent rollouts with seeds derived from cfg.seed, run on
// `parallelism` threads; writes rollout_###.jsonl files, timing sidecars and
// summary.csv under cfg.out_dir. Individual failures are recorded and the
// batch continues.
BatchResult run_batch(const ExperimentConfig& cfg, std::size_t n_rollouts,
                      std::size_t parallelism);

std::vector<BatchSummaryRow> summarize(
    const std::vector<RolloutRecord>& rollouts);

void write_summary_csv(std::ostream& out,
                       const std::vector<BatchSummaryRow>& summary);

// Post-hoc evaluation of a stored rollout file: re-assimilates the stored
// (y, xi) sequence with tempered SMC and recomputes spce/snmc/w2 per step
// with fresh randomness.
struct EvalRow {
  std::size_t k = 0;
  double spce = 0.0;
  double snmc = 0.0;
  double w2 = 0.0;
  std::vector<std::pair<std::string, double>> w2_blocks;
};

std::vector<EvalRow> evaluate_rollout_file(
    const std::string& path, std::optional<std::size_t> l_eval_override,
    std::uint64_t seed);

void write_eval_rows(std::ostream& out, const std::vector<EvalRow>& rows);

// Fast invariant/oracle subset used by the `check` CLI subcommand; prints
// one line per check and returns true when all pass.
bool selfcheck(std::ostream& out);

}  // namespace pasoa
