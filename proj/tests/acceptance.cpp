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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "tfree/combinatorics.hpp"
#include "tfree/ensemble.hpp"
#include "tfree/independence.hpp"
#include "tfree/observables.hpp"
#include "tfree/oracle.hpp"
#include "tfree/process.hpp"
#include "tfree/rng.hpp"

using namespace tfree;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

constexpr std::uint64_t kSeed = 20260101;

// 1. Engine partition equals the oracle at every step; C_e for every open
// r-set equals the oracle at 10 random steps per run.
Verdict oracle_equivalence() {
  std::uint64_t partition_checks = 0, ce_checks = 0;
  for (int r : {2, 3}) {
    for (int n : {6, 8, 10}) {
      for (std::uint64_t run_id = 0; run_id < 50; ++run_id) {
        const auto seed = derive_seed(derive_seed(kSeed, static_cast<std::uint64_t>(n * 10 + r)), run_id);
        ProcessState probe(n, r, seed);
        run(probe, StopCondition::at_termination());
        std::vector<std::int64_t> steps(static_cast<std::size_t>(probe.steps()) + 1);
        std::iota(steps.begin(), steps.end(), 0);
        Rng pick(derive_seed(seed, stream::kOracleCheck));
        for (std::size_t j = steps.size(); j > 1; --j) std::swap(steps[j - 1], steps[pick.below(j)]);
        steps.resize(std::min<std::size_t>(steps.size(), 10));

        ProcessState state(n, r, seed);
        while (true) {
          ++partition_checks;
          if (auto msg = oracle::compare_with_engine(state); !msg.empty()) {
            return {false, "n=" + std::to_string(n) + " r=" + std::to_string(r) + ": " + msg};
          }
          if (std::find(steps.begin(), steps.end(), state.steps()) != steps.end()) {
            const auto edges = state.edge_sets();
            for (Rank e : state.open_ranks()) {
              const auto es = RSet::from_rank(e, n, r);
              ++ce_checks;
              if (compute_Ce(state, es) != oracle::oracle_Ce(edges, es, n, r)) {
                return {false, "C_e mismatch for " + es.to_string()};
              }
            }
          }
          if (!state.step()) break;
        }
        if (!oracle::oracle_is_Tr_free(state.edge_sets(), n, r)) return {false, "terminal graph not T-free"};
      }
    }
  }
  return {true, std::to_string(partition_checks) + " partition checks, " + std::to_string(ce_checks) +
                    " C_e checks, 300 runs"};
}

// 2. Every r-set lies in (r+1) C(n-r, r-1) copies.
Verdict copy_count_identity() {
  std::uint64_t sets = 0;
  for (int r = 2; r <= 4; ++r) {
    for (int n = 2 * r - 1; n <= 12; ++n) {
      const std::uint64_t expected = static_cast<std::uint64_t>(r + 1) * binom(n - r, r - 1);
      for (Rank j = 0; j < binom(n, r); ++j) {
        std::uint64_t count = 0;
        for_each_copy_containing(unrank(j, n, r), n, [&](const CopyView&) { ++count; });
        ++sets;
        if (count != expected) {
          return {false, "n=" + std::to_string(n) + " r=" + std::to_string(r) + " rank " + std::to_string(j) +
                             ": " + std::to_string(count) + " != " + std::to_string(expected)};
        }
      }
    }
  }
  return {true, std::to_string(sets) + " r-sets checked"};
}

// 3. Q_A(0), Q_AB(0), X+(0) and |O(0)|.
Verdict initial_conditions() {
  std::uint64_t checks = 0;
  for (int r = 2; r <= 4; ++r) {
    for (int n : {2 * r, 12, 25}) {
      const auto model = scaling(n, r);
      const auto state = init(n, r, kSeed);
      ++checks;
      if (state.open_count() != model.N) return {false, "|O(0)| != N"};
      for (Rank x = 0; x < state.num_rm1_sets(); ++x) {
        ++checks;
        if (compute_QA(state, RSet::from_rank(x, n, r - 1)) != static_cast<std::uint64_t>(n - r + 1)) {
          return {false, "Q_A(0) != n-r+1"};
        }
      }
      const int ell = tracking_ell(model);
      Rng rng(derive_seed(kSeed, static_cast<std::uint64_t>(n)));
      auto state_copy = state;
      const auto trace = build_martingale_traces(state_copy, {}, random_set_pairs(n, ell, 5, rng),
                                                 TrajectoryModel(model));
      const double S = static_cast<double>(trace.S);
      for (const auto& p : trace.pairs) {
        checks += 2;
        if (p.q_ab[0] != pair_total(ell, r)) return {false, "Q_AB(0) != S"};
        const double x0 = S * std::pow(n, -model.constants.epsilon);
        if (std::abs(p.x_plus[0] - x0) > 1e-12 * std::max(1.0, std::abs(x0))) return {false, "X+(0) != S n^-eps"};
      }
    }
  }
  return {true, std::to_string(checks) + " values checked"};
}

// 4. Y+ - Y- and X+ - X- equal twice the band at every step.
Verdict trace_identities() {
  std::uint64_t checks = 0;
  double worst = 0;
  for (int r : {2, 3}) {
    const int n = r == 2 ? 60 : 30;
    const auto model = scaling(n, r);
    for (std::uint64_t run_id = 0; run_id < 10; ++run_id) {
      const auto seed = derive_seed(kSeed + 4, run_id);
      Rng rng(derive_seed(seed, stream::kTracking));
      auto sets = random_rm1_sets(n, r, 8, rng);
      auto pairs = random_set_pairs(n, tracking_ell(model), 4, rng);
      ProcessState state(n, r, seed);
      const auto trace = build_martingale_traces(state, sets, pairs, model);
      const double W = model.constants.W, eps = model.constants.epsilon;
      for (const auto& st : trace.sets) {
        for (std::size_t i = 0; i < st.steps.size(); ++i) {
          const double want = 2 * f(st.t[i], W, r) * std::pow(n, 1 - eps);
          worst = std::max(worst, std::abs((st.y_plus[i] - st.y_minus[i]) - want) / want);
          ++checks;
        }
      }
      const double S = static_cast<double>(trace.S);
      for (const auto& pt : trace.pairs) {
        for (std::size_t i = 0; i < pt.steps.size(); ++i) {
          const double want = 2 * f(pt.t[i], W, r) * S * std::pow(n, -eps);
          worst = std::max(worst, std::abs((pt.x_plus[i] - pt.x_minus[i]) - want) / want);
          ++checks;
        }
      }
    }
  }
  return {worst <= 1e-12, std::to_string(checks) + " steps, max relative error " + fmt(worst) + " (limit 1e-12)"};
}

struct TrackingStats {
  double open_dev = 0;  // max relative deviation of mean |O(i)|/N from q(t), t <= 1.5
  double open_dev_t = 0;
  double ce_dev = 0;  // max relative deviation of mean |C_e| from c(t) D^(1/r), 0.5 <= t <= 1.5
  double ce_dev_t = 0;
  int checkpoints = 0;
};

// Ensemble at checkpoints i = 0, ceil(s/4), 2 ceil(s/4), ... up to t = 1.5.
// A terminated run contributes |O(i)| = 0 and no C_e samples.
TrackingStats tracking_ensemble(int n, int r, int runs, std::uint64_t seed) {
  const auto model = scaling(n, r);
  const auto cadence = static_cast<std::int64_t>(std::ceil(model.s / 4));
  const auto last = static_cast<std::int64_t>(std::floor(1.5 * model.s));
  std::map<std::int64_t, double> open_sum;
  std::map<std::int64_t, std::pair<double, double>> ce_sum;
  for (int run_id = 0; run_id < runs; ++run_id) {
    const auto run_seed = derive_seed(seed, static_cast<std::uint64_t>(run_id));
    ProcessState state(n, r, run_seed);
    Rng sampler(derive_seed(run_seed, stream::kObserver));
    for (std::int64_t i = 0; i <= last; i += cadence) {
      run(state, StopCondition::at_step(i));
      if (state.steps() < i) {
        open_sum[i] += 0;
        continue;
      }
      const auto rec = record_checkpoint(state, model, 32, sampler);
      open_sum[i] += static_cast<double>(rec.open_count);
      for (auto c : rec.ce_samples) {
        ce_sum[i].first += static_cast<double>(c);
        ce_sum[i].second += 1;
      }
    }
  }
  TrackingStats out;
  const double root = std::pow(static_cast<double>(model.D), 1.0 / r);
  for (const auto& [i, sum] : open_sum) {
    const double t = model.t(i);
    const double pred = q(t, r);
    const double dev = std::abs(sum / runs / static_cast<double>(model.N) - pred) / pred;
    ++out.checkpoints;
    if (dev > out.open_dev) out.open_dev = dev, out.open_dev_t = t;
    if (t >= 0.5 && ce_sum[i].second > 0) {
      const double cp = c(t, r) * root;
      const double cdev = std::abs(ce_sum[i].first / ce_sum[i].second - cp) / cp;
      if (cdev > out.ce_dev) out.ce_dev = cdev, out.ce_dev_t = t;
    }
  }
  return out;
}

// 7. Pattern frequencies at j = i_max.
Verdict subgraph_frequency() {
  const int n = 10, r = 3;
  const auto model = scaling(n, r);
  const std::int64_t j = model.i_max;
  const std::vector<RSet> one{RSet::from_vertices({0, 1, 2}, n)};
  const std::vector<RSet> two{RSet::from_vertices({0, 1, 2}, n), RSet::from_vertices({3, 4, 5}, n)};
  const auto f1r = subgraph_frequency_test(one, j, 10000, n, r, kSeed + 7);
  const auto f2r = subgraph_frequency_test(two, j, 10000, n, r, kSeed + 8);
  const double d1 = std::abs(f1r.empirical_p - f1r.predicted_p) / f1r.predicted_p;
  const double d2 = std::abs(f2r.empirical_p - f2r.predicted_p) / f2r.predicted_p;
  const bool ok = f2r.predicted_p >= 0.01 && d1 <= 0.30 && d2 <= 0.40;
  return {ok, "j=" + std::to_string(j) + " L=1: " + fmt(f1r.empirical_p) + " vs " + fmt(f1r.predicted_p) + " (dev " +
                  fmt(d1) + ", limit 0.3); L=2: " + fmt(f2r.empirical_p) + " vs " + fmt(f2r.predicted_p) +
                  " (dev " + fmt(d2) + ", limit 0.4)"};
}

// 8. Max codegree at i_max.
Verdict codegree_statistic() {
  const int n = 20, r = 3;
  const auto model = scaling(n, r);
  int within = 0, worst = 0;
  for (std::uint64_t run_id = 0; run_id < 100; ++run_id) {
    ProcessState state(n, r, derive_seed(kSeed + 8, run_id));
    run(state, StopCondition::at_step(model.i_max));
    const int cd = max_codegree(state);
    worst = std::max(worst, cd);
    within += cd <= 5 * r;
  }
  return {within >= 90, std::to_string(within) + "/100 runs with max codegree <= " + std::to_string(5 * r) +
                            " (need 90); largest " + std::to_string(worst) + ", " + std::to_string(100 - within) +
                            " violations"};
}

// 9. mean alpha / (n log n)^(1/r) across a grid.
Verdict independence_scaling() {
  std::string detail;
  bool ok = true;
  for (int r : {3, 2}) {
    const std::vector<int> grid = r == 3 ? std::vector<int>{15, 20, 25, 30} : std::vector<int>{20, 40, 80};
    const auto rows = scaling_probe(grid, r, 30, kSeed + 9);
    double lo = INFINITY, hi = 0;
    int inexact = 0;
    detail += "r=" + std::to_string(r) + " ratios";
    for (const auto& row : rows) {
      lo = std::min(lo, row.ratio);
      hi = std::max(hi, row.ratio);
      inexact += row.runs - row.exact_runs;
      detail += " " + fmt(row.ratio);
    }
    detail += " (spread " + fmt(hi / lo) + ", limit 2";
    if (inexact) detail += ", " + std::to_string(inexact) + " inexact";
    detail += "); ";
    ok &= hi / lo < 2.0;
  }
  detail.resize(detail.size() - 2);
  return {ok, detail};
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 10. Byte-identical reruns and single-run wall time.
Verdict determinism_and_performance() {
  const auto dir = fs::temp_directory_path() / "tfree_acceptance_replay";
  fs::remove_all(dir);
  RunConfig config;
  config.n = 40;
  config.r = 3;
  config.runs = 1;
  config.master_seed = kSeed + 10;
  config.output_path = dir;
  const auto start = std::chrono::steady_clock::now();
  const auto first = run_ensemble(config);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::vector<std::string> bytes;
  for (const auto& p : first.files) bytes.push_back(read_all(p));

  config.runs = 4;
  std::vector<std::string> ensemble_bytes;
  for (const auto& p : run_ensemble(config, 1).files) ensemble_bytes.push_back(read_all(p));
  bool identical = true;
  for (unsigned workers : {1u, 2u}) {
    const auto again = run_ensemble(config, workers);
    for (std::size_t k = 0; k < again.files.size(); ++k) identical &= read_all(again.files[k]) == ensemble_bytes[k];
  }
  fs::remove_all(dir);
  return {identical && seconds < 60.0, std::string(identical ? "reruns byte-identical" : "reruns differ") +
                                           "; n=40 r=3 run to i_max in " + fmt(seconds) + " s (limit 60 s)"};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](const std::string& id, const std::string& name, const std::function<Verdict()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = body();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !v.pass;
    std::printf("%s criterion %s %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id.c_str(), name.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report("1", "oracle equivalence", oracle_equivalence);
  report("2", "copy-count identity", copy_count_identity);
  report("3", "initial conditions", initial_conditions);
  report("4", "trace identities", trace_identities);

  TrackingStats r3, r2;
  report("5a", "open-set trajectory r=3 n=40", [&] {
    r3 = tracking_ensemble(40, 3, 50, kSeed + 5);
    return Verdict{r3.open_dev <= 0.15, "max deviation " + fmt(r3.open_dev) + " at t=" + fmt(r3.open_dev_t) +
                                            " over " + std::to_string(r3.checkpoints) + " checkpoints (limit 0.15)"};
  });
  report("5b", "open-set trajectory r=2 n=100", [&] {
    r2 = tracking_ensemble(100, 2, 50, kSeed + 6);
    return Verdict{r2.open_dev <= 0.10, "max deviation " + fmt(r2.open_dev) + " at t=" + fmt(r2.open_dev_t) +
                                            " over " + std::to_string(r2.checkpoints) + " checkpoints (limit 0.10)"};
  });
  report("6a", "C_e trajectory r=3 n=40", [&] {
    return Verdict{r3.ce_dev <= 0.25, "max deviation " + fmt(r3.ce_dev) + " at t=" + fmt(r3.ce_dev_t) + " (limit 0.25)"};
  });
  report("6b", "C_e trajectory r=2 n=100", [&] {
    return Verdict{r2.ce_dev <= 0.25, "max deviation " + fmt(r2.ce_dev) + " at t=" + fmt(r2.ce_dev_t) + " (limit 0.25)"};
  });
  report("7", "subgraph frequency", subgraph_frequency);
  report("8", "codegree statistic", codegree_statistic);
  report("9", "independence scaling", independence_scaling);
  report("10", "determinism and performance", determinism_and_performance);

  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
