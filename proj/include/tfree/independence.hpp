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

// Independence number of r-graphs produced by the process.

#ifndef TFREE_INDEPENDENCE_HPP
#define TFREE_INDEPENDENCE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "tfree/combinatorics.hpp"
#include "tfree/process.hpp"

namespace tfree {

// Plain r-uniform hypergraph on [0, n); edges are sorted vertex lists.
struct Hypergraph {
  int n = 0;
  int r = 0;
  std::vector<std::vector<Vertex>> edges;

  static Hypergraph from_state(const ProcessState& state);
  static Hypergraph complete(int n, int r);
};

// True iff no edge lies inside the vertex set.
bool is_independent(const Hypergraph& g, std::span<const Vertex> vertices);

// Maximal independent set built over a uniformly random vertex order.
std::vector<Vertex> greedy_independent(const Hypergraph& g, std::uint64_t seed);

inline constexpr int kMaxExactVertices = 256;
inline constexpr std::uint64_t kDefaultNodeBudget = 10'000'000;

struct MisResult {
  int alpha = 0;  // best found; equals the independence number when exact
  int lower_bound = 0;
  int upper_bound = 0;
  std::vector<Vertex> witness;
  bool exact = false;
  std::uint64_t nodes_expanded = 0;
  bool budget_hit = false;
};

// Branch and bound: pick an edge inside the candidate set and branch on
// which of its free vertices to drop (earlier ones in the edge are kept in
// later branches). Prunes with |candidate| minus a greedy packing of
// disjoint edges inside the candidate. When the node budget runs out the
// result carries the best witness and an upper bound over the unexplored
// frontier. Throws std::invalid_argument if n > kMaxExactVertices.
MisResult exact_mis(const Hypergraph& g, std::uint64_t node_budget = kDefaultNodeBudget);

// Number of open r-sets inside K. Throws std::invalid_argument on a vertex
// outside [0, n) or a repeated vertex.
std::uint64_t open_rsets_inside(const ProcessState& state, std::span<const Vertex> k_set);

struct ScalingRow {
  int n = 0;
  int r = 0;
  int runs = 0;
  std::int64_t i_max = 0;
  double mean_steps = 0.0;
  double mean_alpha = 0.0;
  double std_alpha = 0.0;
  double scale = 0.0;  // (n log n)^(1/r)
  double ratio = 0.0;  // mean_alpha / scale
  int exact_runs = 0;
  double mean_upper = 0.0;
};

// For each n: runs_per_n processes (seeds derive_seed(derive_seed(seed, n),
// run)) stopped at min(i_max, M), independence number of each result.
std::vector<ScalingRow> scaling_probe(std::span<const int> n_grid, int r, int runs_per_n,
                                      std::uint64_t seed, const ConstantPack& constants = {},
                                      std::uint64_t node_budget = kDefaultNodeBudget);

}  // namespace tfree

#endif  // TFREE_INDEPENDENCE_HPP
