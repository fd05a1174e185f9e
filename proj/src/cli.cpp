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

#include "tfree/cli.hpp"

#include <CLI11.hpp>

#include "tfree/ensemble.hpp"

namespace tfree {

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random greedy T^(r)-free process simulator", "simulate"};
  app.set_config("--config", "", "key = value config file; command-line flags take precedence");

  RunConfig config;
  std::string mode = "trajectory";
  std::string format = "csv";
  std::string output = config.output_path.string();
  std::int64_t i_max_override = -1;
  std::int64_t j = -1;

  app.add_option("--mode", mode, "trajectory | independence | martingale | subgraph-freq | oracle-test");
  app.add_option("--n", config.n, "number of vertices");
  app.add_option("--r", config.r, "uniformity");
  app.add_option("--runs", config.runs, "independent runs");
  app.add_option("--master-seed,--master_seed", config.master_seed, "master seed");
  app.add_option("--zeta", config.constants.zeta);
  app.add_option("--gamma", config.constants.gamma);
  app.add_option("--epsilon", config.constants.epsilon);
  app.add_option("--W", config.constants.W);
  app.add_option("--kappa", config.constants.kappa);
  app.add_option("--checkpoint-every,--checkpoint_every", config.checkpoint_every, "0 means ceil(s/4)");
  app.add_option("--ce-sample-size,--ce_sample_size", config.ce_sample_size);
  app.add_option("--tracked-A-count,--tracked_A_count", config.tracked_A_count);
  app.add_option("--tracked-pair-count,--tracked_pair_count", config.tracked_pair_count);
  app.add_option("--i-max-override,--i_max_override", i_max_override, "stop step replacing i_max");
  app.add_flag("--drive-to-termination,--drive_to_termination", config.drive_to_termination);
  app.add_option("--output,--output-path,--output_path", output, "output directory");
  app.add_option("--format", format, "csv | json");
  app.add_option("--n-grid,--n_grid", config.n_grid, "independence: n values for the scaling table")
      ->delimiter(',');
  app.add_option("--mis-budget,--mis_budget", config.mis_budget, "branch-and-bound node budget");
  app.add_option("--pattern", config.pattern, "subgraph-freq: '0,1,2;3,4,5' ('-' for empty)");
  app.add_option("--j", j, "subgraph-freq: step (default i_max)");
  app.add_option("--oracle-max-n,--oracle_max_n", config.oracle_max_n);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  EnsembleOutcome outcome;
  try {
    config.mode = parse_mode(mode);
    config.format = parse_format(format);
    config.output_path = output;
    if (i_max_override >= 0) config.i_max_override = i_max_override;
    if (j >= 0) config.j = j;
    outcome = run_ensemble(config, workers_from_env());
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }

  for (const auto& f : outcome.files) out << "wrote " << f.string() << '\n';
  if (!outcome.checks_passed) {
    for (const auto& msg : outcome.failures) err << "check failed: " << msg << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}

}  // namespace tfree
