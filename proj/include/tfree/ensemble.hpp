// Copyright 2026 The tfree Authors
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

// Seeded ensemble execution and output emission.
//
// Output files (under output_path, reals with 17 significant digits):
//   manifest.json          resolved config, derived scaling, per-run results
//   checkpoints.{csv,json} run_id, i, t, open_count, q_pred, ce_mean, ce_min,
//                          ce_max, c_pred, max_deg_rm1, deg_pred, max_codeg
//   aggregate.{csv,json}   per checkpoint step: mean/std/min/max over runs
//                          plus predicted values and band edges
//   independence.{csv,json}, scaling.{csv,json}         (independence)
//   traces_sets, traces_pairs, martingale_summary       (martingale)
//   subgraph_freq.{csv,json}                            (subgraph-freq)
//   oracle_test.{csv,json}                              (oracle-test)

#ifndef TFREE_ENSEMBLE_HPP
#define TFREE_ENSEMBLE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tfree/combinatorics.hpp"
#include "tfree/observables.hpp"

namespace tfree {

enum class Mode { Trajectory, Independence, Martingale, SubgraphFreq, OracleTest };
enum class Format { Csv, Json };

std::string to_string(Mode mode);
std::string to_string(Format format);
Mode parse_mode(const std::string& text);
Format parse_format(const std::string& text);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  int n = 40;
  int r = 3;
  std::uint64_t master_seed = 1;
  int runs = 1;
  Mode mode = Mode::Trajectory;
  ConstantPack constants;
  std::int64_t checkpoint_every = 0;  // 0: ceil(s / 4)
  int ce_sample_size = 32;
  int tracked_A_count = 16;
  int tracked_pair_count = 4;
  std::optional<std::int64_t> i_max_override;
  bool drive_to_termination = false;
  std::filesystem::path output_path = "out";
  Format format = Format::Csv;

  // independence: optional grid of n for the scaling table; MIS node budget
  std::vector<int> n_grid;
  std::uint64_t mis_budget = 10'000'000;
  // subgraph-freq: r-sets separated by ';', vertices by ','. Empty means two
  // disjoint r-sets {0..r-1}, {r..2r-1}. j defaults to i_max.
  std::string pattern;
  std::optional<std::int64_t> j;
  // oracle-test
  int oracle_max_n = 12;
};

// Throws ConfigError with a description of the first problem.
void validate(const RunConfig& config);

// Parses the pattern string of a subgraph-freq config.
std::vector<RSet> parse_pattern(const std::string& text, int n, int r);

// Last step of a run that is not driven to termination.
std::int64_t stop_step(const RunConfig& config, const TrajectoryModel& model);
std::int64_t checkpoint_cadence(const RunConfig& config, const TrajectoryModel& model);

struct EnsembleOutcome {
  bool checks_passed = true;  // false only when oracle-test finds a mismatch
  std::vector<std::string> failures;
  std::vector<std::filesystem::path> files;
};

// Validates, prepares the output directory, runs every run_id on `workers`
// threads and writes all files in run_id order. Throws ConfigError before
// any run starts if the config is invalid or the output is not writable.
EnsembleOutcome run_ensemble(const RunConfig& config, unsigned workers = 1);

// Worker count from TFREE_WORKERS, default 1.
unsigned workers_from_env();

// %.17g-style text (17 significant digits, round-trip exact); "nan",
// "inf", "-inf" for non-finite values.
std::string format_real(double value);

// Recomputes aggregate rows from checkpoint records (grouped by step, runs
// in the given order). Exposed for tests.
struct AggregateRow {
  std::int64_t i = 0;
  double t = 0.0;
  int runs = 0;
  double open_mean = 0.0, open_std = 0.0, open_min = 0.0, open_max = 0.0;
  double q_pred = 0.0, open_band_lo = 0.0, open_band_hi = 0.0;
  double ce_mean = 0.0, ce_std = 0.0, ce_min = 0.0, ce_max = 0.0;
  double c_pred = 0.0, ce_band_lo = 0.0, ce_band_hi = 0.0;
  double max_deg_mean = 0.0, max_deg_max = 0.0, deg_pred = 0.0;
  double max_codeg_mean = 0.0, max_codeg_max = 0.0;
};
std::vector<AggregateRow> aggregate(const std::vector<ObservationRecord>& records);

}  // namespace tfree

#endif  // TFREE_ENSEMBLE_HPP
