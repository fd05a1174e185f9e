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

#include "tfree/independence.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tfree/rng.hpp"

namespace tfree {

Hypergraph Hypergraph::from_state(const ProcessState& state) {
  Hypergraph g{state.n(), state.r(), {}};
  g.edges.reserve(static_cast<std::size_t>(state.steps()));
  for (Rank e : state.edges()) g.edges.push_back(RSet::from_rank(e, state.n(), state.r()).vertices());
  return g;
}

Hypergraph Hypergraph::complete(int n, int r) {
  Hypergraph g{n, r, {}};
  const Rank total = binom(n, r);
  for (Rank e = 0; e < total; ++e) g.edges.push_back(RSet::from_rank(e, n, r).vertices());
  return g;
}

bool is_independent(const Hypergraph& g, std::span<const Vertex> vertices) {
  std::vector<char> in(static_cast<std::size_t>(g.n), 0);
  for (Vertex v : vertices) in.at(static_cast<std::size_t>(v)) = 1;
  return std::none_of(g.edges.begin(), g.edges.end(), [&](const std::vector<Vertex>& e) {
    return std::all_of(e.begin(), e.end(), [&](Vertex v) { return in[v] != 0; });
  });
}

std::vector<Vertex> greedy_independent(const Hypergraph& g, std::uint64_t seed) {
  std::vector<std::vector<int>> incident(static_cast<std::size_t>(g.n));
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    for (Vertex v : g.edges[e]) incident[v].push_back(static_cast<int>(e));
  }
  std::vector<Vertex> order(static_cast<std::size_t>(g.n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int j = g.n - 1; j > 0; --j) std::swap(order[j], order[rng.below(static_cast<std::uint64_t>(j) + 1)]);

  std::vector<char> in(static_cast<std::size_t>(g.n), 0);
  std::vector<Vertex> out;
  for (Vertex v : order) {
    const bool blocked = std::any_of(incident[v].begin(), incident[v].end(), [&](int e) {
      return std::all_of(g.edges[e].begin(), g.edges[e].end(), [&](Vertex u) { return u == v || in[u]; });
    });
    if (!blocked) {
      in[v] = 1;
      out.push_back(v);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

using Mask = std::bitset<kMaxExactVertices>;

class BranchAndBound {
 public:
  BranchAndBound(const Hypergraph& g, std::uint64_t budget) : g_(g), budget_(budget) {
    incident_.resize(static_cast<std::size_t>(g.n));
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      Mask m;
      for (Vertex v : g.edges[e]) {
        m.set(static_cast<std::size_t>(v));
        incident_[v].push_back(static_cast<int>(e));
      }
      edges_.push_back(m);
    }
  }

  void seed_incumbent(std::span<const Vertex> set) {
    if (static_cast<int>(set.size()) <= best_) return;
    best_ = static_cast<int>(set.size());
    best_set_.reset();
    for (Vertex v : set) best_set_.set(static_cast<std::size_t>(v));
  }

  void solve() {
    Mask all;
    for (int v = 0; v < g_.n; ++v) all.set(static_cast<std::size_t>(v));
    search(all, Mask{});
  }

  MisResult result() const {
    MisResult out;
    out.alpha = best_;
    out.lower_bound = best_;
    out.exact = !budget_hit_;
    out.budget_hit = budget_hit_;
    out.upper_bound = budget_hit_ ? std::max(best_, frontier_bound_) : best_;
    out.nodes_expanded = nodes_;
    for (int v = 0; v < g_.n; ++v) {
      if (best_set_.test(static_cast<std::size_t>(v))) out.witness.push_back(v);
    }
    return out;
  }

 private:
  void search(const Mask& cand, const Mask& forced) {
    std::vector<int> alive;
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      if ((edges_[e] & cand) == edges_[e]) alive.push_back(static_cast<int>(e));
    }
    const int size = static_cast<int>(cand.count());

    // Every edge inside the candidate set loses one of its free vertices,
    // and edges with disjoint free parts lose distinct ones.
    Mask used;
    int packing = 0;
    for (int e : alive) {
      const Mask free = edges_[e] & ~forced;
      if ((free & used).none()) {
        used |= free;
        ++packing;
      }
    }
    const int bound = size - packing;

    if (nodes_ >= budget_) {
      budget_hit_ = true;
      frontier_bound_ = std::max(frontier_bound_, bound);
      return;
    }
    ++nodes_;
    if (alive.empty()) {
      if (size > best_) {
        best_ = size;
        best_set_ = cand;
      }
      return;
    }
    if (bound <= best_) return;

    // Branch on the alive edge with the fewest free vertices.
    int pick = alive.front();
    std::size_t fewest = kMaxExactVertices + 1;
    for (int e : alive) {
      const std::size_t free = (edges_[e] & ~forced).count();
      if (free < fewest) {
        fewest = free;
        pick = e;
      }
    }
    std::vector<Vertex> free_vertices;
    for (Vertex v : g_.edges[pick]) {
      if (!forced.test(static_cast<std::size_t>(v))) free_vertices.push_back(v);
    }

    Mask keep = cand;
    Mask fixed = forced;
    for (std::size_t j = 0; j < free_vertices.size(); ++j) {
      const auto u = static_cast<std::size_t>(free_vertices[j]);
      Mask child = keep;
      child.reset(u);
      search(child, fixed);
      // Later branches keep u.
      if (!keep.test(u) || !force(keep, fixed, free_vertices[j])) return;
    }
  }

  // Adds v to the forced set and drops every vertex that would complete an
  // edge of forced vertices. False on contradiction.
  bool force(Mask& cand, Mask& forced, Vertex v) {
    forced.set(static_cast<std::size_t>(v));
    for (int e : incident_[v]) {
      if ((edges_[e] & cand) != edges_[e]) continue;
      const Mask free = edges_[e] & ~forced;
      const auto left = free.count();
      if (left == 0) return false;
      if (left == 1) cand &= ~free;
    }
    return true;
  }

  const Hypergraph& g_;
  std::uint64_t budget_;
  std::vector<Mask> edges_;
  std::vector<std::vector<int>> incident_;
  std::uint64_t nodes_ = 0;
  bool budget_hit_ = false;
  int best_ = -1;
  Mask best_set_;
  int frontier_bound_ = 0;
};

}  // namespace

MisResult exact_mis(const Hypergraph& g, std::uint64_t node_budget) {
  if (g.n > kMaxExactVertices) {
    throw std::invalid_argument("exact_mis supports at most " + std::to_string(kMaxExactVertices) +
                                " vertices");
  }
  for (const auto& e : g.edges) {
    for (Vertex v : e) {
      if (v < 0 || v >= g.n) throw std::invalid_argument("edge vertex outside [0, n)");
    }
  }
  BranchAndBound solver(g, node_budget);
  for (std::uint64_t s = 0; s < 4; ++s) solver.seed_incumbent(greedy_independent(g, mix64(s)));
  solver.solve();
  return solver.result();
}

std::uint64_t open_rsets_inside(const ProcessState& state, std::span<const Vertex> k_set) {
  std::vector<Vertex> k(k_set.begin(), k_set.end());
  std::sort(k.begin(), k.end());
  if (std::adjacent_find(k.begin(), k.end()) != k.end()) throw std::invalid_argument("repeated vertex in K");
  if (!k.empty() && (k.front() < 0 || k.back() >= state.n())) {
    throw std::invalid_argument("vertex of K outside [0, n)");
  }
  std::uint64_t count = 0;
  detail::for_each_combination(k, state.r(), [&](std::span<const Vertex> e) {
    if (state.status(colex_rank(e)) == Status::Open) ++count;
  });
  return count;
}

std::vector<ScalingRow> scaling_probe(std::span<const int> n_grid, int r, int runs_per_n,
                                      std::uint64_t seed, const ConstantPack& constants,
                                      std::uint64_t node_budget) {
  if (runs_per_n < 1) throw std::invalid_argument("need at least one run per n");
  std::vector<ScalingRow> rows;
  for (int n : n_grid) {
    const auto model = scaling(n, r, constants);
    ScalingRow row;
    row.n = n;
    row.r = r;
    row.runs = runs_per_n;
    row.i_max = model.i_max;
    row.scale = model.independence_scale();
    std::vector<double> alphas;
    double steps = 0.0, upper = 0.0;
    const std::uint64_t n_seed = derive_seed(seed, static_cast<std::uint64_t>(n));
    for (int run_id = 0; run_id < runs_per_n; ++run_id) {
      ProcessState state(n, r, derive_seed(n_seed, static_cast<std::uint64_t>(run_id)));
      run(state, StopCondition::at_step(model.i_max));
      const auto mis = exact_mis(Hypergraph::from_state(state), node_budget);
      alphas.push_back(mis.alpha);
      steps += static_cast<double>(state.steps());
      upper += mis.upper_bound;
      if (mis.exact) ++row.exact_runs;
    }
    const double m = static_cast<double>(runs_per_n);
    row.mean_steps = steps / m;
    row.mean_upper = upper / m;
    row.mean_alpha = std::accumulate(alphas.begin(), alphas.end(), 0.0) / m;
    double var = 0.0;
    for (double a : alphas) var += (a - row.mean_alpha) * (a - row.mean_alpha);
    row.std_alpha = runs_per_n > 1 ? std::sqrt(var / (m - 1.0)) : 0.0;
    row.ratio = row.mean_alpha / row.scale;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace tfree
