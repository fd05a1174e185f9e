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

// Measurements taken on a running process and the shifted sequences used to
// check dynamic concentration: per-checkpoint observation records, open
// superset counts Q_A, pair counts Q_{A,B}, the stopping time for an ell-set
// pair, and the Y/Z/X traces.

#ifndef TFREE_OBSERVABLES_HPP
#define TFREE_OBSERVABLES_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tfree/combinatorics.hpp"
#include "tfree/process.hpp"
#include "tfree/rng.hpp"

namespace tfree {

struct ObservationRecord {
  std::uint64_t run_id = 0;
  std::int64_t i = 0;
  double t = 0.0;
  std::uint64_t open_count = 0;
  double q_pred = 0.0;     // q(t) * N
  double open_band = 0.0;  // N^(1 - gamma)
  std::vector<std::uint64_t> ce_samples;
  double c_pred = 0.0;   // c(t) * D^(1/r)
  double ce_band = 0.0;  // N^(-gamma) * D^(1/r)
  int max_deg_rm1 = 0;
  double deg_pred = 0.0;  // t * D^(-1/r) * n
  int max_codeg_rm1 = 0;
  std::int64_t edges_count = 0;

  // NaN when there are no samples.
  double ce_mean() const;
  double ce_min() const;
  double ce_max() const;
};

// Samples sample_size open r-sets uniformly with replacement from sampler
// (never from the process generator, so observing does not perturb the run).
ObservationRecord record_checkpoint(const ProcessState& state, const TrajectoryModel& model,
                                    int sample_size, Rng& sampler, std::uint64_t run_id = 0);

// Max codegree over pairs of distinct (r-1)-sets, bucketing each vertex x by
// the (r-1)-sets A with A + x an edge.
int max_codegree(const ProcessState& state);
// Codegree of two (r-1)-sets by intersecting their neighbor lists directly.
int codegree(const ProcessState& state, const RSet& a, const RSet& b);

// |O_A(i)|: open r-sets containing the (r-1)-set A.
std::uint64_t compute_QA(const ProcessState& state, const RSet& a);

// C(2 ell, r) - 2 C(ell, r): r-subsets of a disjoint ell-set pair that meet
// both halves.
std::uint64_t pair_total(int ell, int r);

// Disjoint vertex sets A, B (ell-sets in practice). Sorted; validated by the
// functions that take them.
struct SetPair {
  std::vector<Vertex> a;
  std::vector<Vertex> b;
};

// True iff some (r-1)-set X has N_i(X) meeting both A and B with
// |N_i(X) & (A | B)| >= k / n^(2 epsilon), compared as reals.
bool detect_tau(const ProcessState& state, const SetPair& pair, double k, double epsilon);

// Extra information needed at the stopping step itself.
struct TauInfo {
  bool at_tau = false;
  std::span<const RSet> closed_this_step;  // O(i-1) & C(i)
};

// Q_{A,B}(i): r-sets inside A | B meeting both halves that are open, plus
// at i = tau those that closed during step i.
std::uint64_t compute_QAB(const ProcessState& state, const SetPair& pair, const TauInfo& tau = {});

struct SetTrace {
  RSet a;
  std::vector<std::int64_t> steps;
  std::vector<double> t;
  std::vector<std::uint64_t> q_a;
  std::vector<int> degree;
  std::vector<double> y_plus;
  std::vector<double> y_minus;
  std::vector<double> z;
  std::optional<std::int64_t> first_y_plus_negative;
  std::optional<std::int64_t> first_y_minus_positive;
  std::optional<std::int64_t> first_z_positive;
};

struct PairTrace {
  SetPair pair;
  std::vector<std::int64_t> steps;
  std::vector<double> t;
  std::vector<std::uint64_t> q_ab;
  std::vector<double> x_plus;
  std::vector<double> x_minus;
  std::int64_t tau = 0;
  bool tau_reached = false;  // condition met before i_max
  // Violations are only looked for at steps i <= tau.
  std::optional<std::int64_t> first_x_plus_nonpositive;
  std::optional<std::int64_t> first_x_minus_nonnegative;
};

struct MartingaleTrace {
  int ell = 0;
  std::uint64_t S = 0;
  std::vector<SetTrace> sets;
  std::vector<PairTrace> pairs;
};

// Accumulates traces one step at a time. Call observe() once at i = 0 and
// then after every step.
class MartingaleTracker {
 public:
  MartingaleTracker(const TrajectoryModel& model, std::vector<RSet> tracked_sets,
                    std::vector<SetPair> tracked_pairs, int ell);

  void observe(const ProcessState& state, const StepOutcome* last_step);
  const MartingaleTrace& trace() const { return trace_; }
  MartingaleTrace take() { return std::move(trace_); }

 private:
  TrajectoryModel model_;
  MartingaleTrace trace_;
  std::vector<bool> tau_seen_;
};

// Picks count distinct uniformly random (r-1)-sets.
std::vector<RSet> random_rm1_sets(int n, int r, int count, Rng& rng);
// Picks count random pairs of disjoint ell-sets (each pair from one random
// permutation). Throws std::invalid_argument if 2 ell > n.
std::vector<SetPair> random_set_pairs(int n, int ell, int count, Rng& rng);
// ell used for pair tracking: the model's ell, capped at n / 2.
int tracking_ell(const TrajectoryModel& model);

// Drives the state to min(i_max, M), observing every step.
MartingaleTrace build_martingale_traces(ProcessState& state, std::vector<RSet> tracked_sets,
                                        std::vector<SetPair> tracked_pairs,
                                        const TrajectoryModel& model);

struct SubgraphFrequency {
  std::size_t pattern_size = 0;
  std::int64_t j = 0;
  std::uint64_t runs = 0;
  std::uint64_t hits = 0;
  double empirical_p = 0.0;
  double predicted_p = 0.0;  // (j / N)^L
  double ci_low = 0.0;       // Wilson 99% interval
  double ci_high = 0.0;
};

// Fraction of independent runs (seeds derive_seed(seed, run)) in which all
// pattern r-sets are edges of G(j). Throws std::invalid_argument if the
// pattern contains a copy of T^(r), has repeated or wrong-size r-sets, or if
// j exceeds i_max.
SubgraphFrequency subgraph_frequency_test(std::span<const RSet> pattern, std::int64_t j,
                                          std::uint64_t runs, int n, int r, std::uint64_t seed,
                                          const ConstantPack& constants = {});

}  // namespace tfree

#endif  // TFREE_OBSERVABLES_HPP
