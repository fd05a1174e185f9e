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

// Incremental state machine for the random greedy T^(r)-free process.

#ifndef TFREE_PROCESS_HPP
#define TFREE_PROCESS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tfree/combinatorics.hpp"
#include "tfree/rng.hpp"

namespace tfree {

enum class Status : std::uint8_t { Open, Edge, Closed };

struct StepOutcome {
  RSet chosen;
  std::vector<RSet> newly_closed;
};

// Full state of one run. Every r-set of [n] is Open, Edge or Closed; the
// open ranks are also kept in a dense list with a rank -> position index so
// that uniform sampling and removal are O(1).
//
// Single-threaded; a state may be moved between threads when idle.
class ProcessState {
 public:
  // Throws std::invalid_argument unless n >= r >= 2.
  ProcessState(int n, int r, std::uint64_t seed);

  int n() const { return n_; }
  int r() const { return r_; }
  Rank num_rsets() const { return static_cast<Rank>(status_.size()); }
  std::int64_t steps() const { return static_cast<std::int64_t>(edges_.size()); }
  bool terminated() const { return open_.empty(); }

  Status status(Rank idx) const { return status_[idx]; }
  Status status(const RSet& e) const { return status_[e.rank()]; }
  std::span<const Status> statuses() const { return status_; }
  std::span<const Rank> open_ranks() const { return open_; }
  std::size_t open_count() const { return open_.size(); }
  std::size_t closed_count() const { return closed_count_; }
  // E(i) in selection order.
  std::span<const Rank> edges() const { return edges_; }
  std::vector<RSet> edge_sets() const;

  // N_i(A) and d_i(A) for an (r-1)-set A, by rank or by set.
  std::span<const Vertex> neighbors(Rank a_rank) const { return neighbors_[a_rank]; }
  std::span<const Vertex> neighbors(const RSet& a) const { return neighbors_[a.rank()]; }
  int degree(Rank a_rank) const { return static_cast<int>(neighbors_[a_rank].size()); }
  int degree(const RSet& a) const { return degree(a.rank()); }
  Rank num_rm1_sets() const { return static_cast<Rank>(neighbors_.size()); }
  // Delta_{r-1}(G(i)).
  int max_degree() const;

  Rng& rng() { return rng_; }
  const Rng& rng() const { return rng_; }

  // One step of the process: sample e uniformly from O(i), make it an edge,
  // close every open r-set that would now complete a copy with r edges.
  // nullopt once O(i) is empty.
  std::optional<StepOutcome> step();

  // Deterministic step with a chosen r-set. Throws std::invalid_argument if
  // e is not open.
  StepOutcome add_edge(const RSet& e);

  // Recounts the partition and cross-checks the open list, position index
  // and neighbor lists. Throws std::logic_error on any disagreement.
  void check_invariants() const;

 private:
  void remove_open(Rank idx);

  int n_;
  int r_;
  std::vector<Status> status_;
  std::vector<Rank> open_;
  std::vector<std::uint32_t> position_;
  std::vector<Rank> edges_;
  std::vector<std::vector<Vertex>> neighbors_;
  std::size_t closed_count_ = 0;
  Rng rng_;
};

ProcessState init(int n, int r, std::uint64_t seed);

struct StopCondition {
  std::optional<std::int64_t> until_step;  // nullopt: until terminated

  static StopCondition at_step(std::int64_t i) { return {i}; }
  static StopCondition at_termination() { return {std::nullopt}; }
};

struct RunResult {
  std::int64_t steps = 0;
  bool terminated = false;  // steps == M
  std::vector<Rank> edges;
};

// Called after each step with the new state and what the step did.
using StepHook = std::function<void(const ProcessState&, const StepOutcome&)>;

// Steps until the stop condition is met or the process terminates.
RunResult run(ProcessState& state, StopCondition stop, const StepHook& hook = {});

// C_e(i): the open r-sets f such that G(i) + e + f contains a copy of T^(r)
// using both e and f. Sorted by rank. Throws std::invalid_argument if e is
// not open.
std::vector<RSet> compute_Ce(const ProcessState& state, const RSet& e);
std::size_t count_Ce(const ProcessState& state, const RSet& e);

}  // namespace tfree

#endif  // TFREE_PROCESS_HPP
