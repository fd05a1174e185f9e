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

#include "tfree/process.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace tfree {

namespace {

// Scans the copies through e and reports, for each copy whose other members
// are r - 1 edges plus exactly one open r-set, that open r-set.
template <typename F>
void for_each_completing_open(const ProcessState& state, const RSet& e, F&& visit) {
  const int r = state.r();
  const Rank self = e.rank();
  for_each_copy_containing(e, state.n(), [&](const CopyView& view) {
    int edges = 0;
    int opens = 0;
    Rank open_rank = 0;
    for (Rank member : view.edge_ranks) {
      if (member == self) continue;
      switch (state.status(member)) {
        case Status::Edge:
          ++edges;
          break;
        case Status::Open:
          ++opens;
          open_rank = member;
          break;
        case Status::Closed:
          return;
      }
    }
    if (edges == r - 1 && opens == 1) visit(open_rank);
  });
}

}  // namespace

ProcessState::ProcessState(int n, int r, std::uint64_t seed) : n_(n), r_(r), rng_(seed) {
  if (r < 2 || n < r) throw std::invalid_argument("need n >= r >= 2");
  if (r > kMaxUniformity) {
    throw std::invalid_argument("uniformity above " + std::to_string(kMaxUniformity) + " not supported");
  }
  const Rank total = binom(n, r);
  if (total > std::numeric_limits<std::uint32_t>::max()) {
    throw std::invalid_argument("C(n, r) too large for the dense state");
  }
  status_.assign(total, Status::Open);
  open_.resize(total);
  position_.resize(total);
  for (Rank j = 0; j < total; ++j) {
    open_[j] = j;
    position_[j] = static_cast<std::uint32_t>(j);
  }
  neighbors_.resize(binom(n, r - 1));
}

ProcessState init(int n, int r, std::uint64_t seed) { return ProcessState(n, r, seed); }

std::vector<RSet> ProcessState::edge_sets() const {
  std::vector<RSet> out;
  out.reserve(edges_.size());
  for (Rank e : edges_) out.push_back(RSet::from_rank(e, n_, r_));
  return out;
}

int ProcessState::max_degree() const {
  std::size_t best = 0;
  for (const auto& nb : neighbors_) best = std::max(best, nb.size());
  return static_cast<int>(best);
}

void ProcessState::remove_open(Rank idx) {
  const std::uint32_t pos = position_[idx];
  const Rank last = open_.back();
  open_[pos] = last;
  position_[last] = pos;
  open_.pop_back();
}

std::optional<StepOutcome> ProcessState::step() {
  if (open_.empty()) return std::nullopt;
  const Rank pick = open_[rng_.below(open_.size())];
  return add_edge(RSet::from_rank(pick, n_, r_));
}

StepOutcome ProcessState::add_edge(const RSet& e) {
  if (e.size() != r_ || e.rank() >= status_.size()) {
    throw std::invalid_argument("not an r-set of this process: " + e.to_string());
  }
  if (status_[e.rank()] != Status::Open) {
    throw std::invalid_argument("r-set " + e.to_string() + " is not open");
  }
  remove_open(e.rank());
  status_[e.rank()] = Status::Edge;
  edges_.push_back(e.rank());

  const auto& ev = e.vertices();
  std::array<Vertex, kMaxUniformity> sub{};
  for (int drop = 0; drop < r_; ++drop) {
    for (int j = 0, c = 0; j < r_; ++j) {
      if (j != drop) sub[c++] = ev[j];
    }
    neighbors_[colex_rank(std::span<const Vertex>(sub.data(), r_ - 1))].push_back(ev[drop]);
  }

  // A copy gets its r-th edge only at the step that adds it, so the copies
  // through e are the only ones that can close anything now.
  StepOutcome out{e, {}};
  for_each_completing_open(*this, e, [&](Rank f) {
    if (status_[f] != Status::Open) return;  // already closed via another copy
    remove_open(f);
    status_[f] = Status::Closed;
    ++closed_count_;
    out.newly_closed.push_back(RSet::from_rank(f, n_, r_));
  });
  return out;
}

void ProcessState::check_invariants() const {
  std::size_t open = 0, edge = 0, closed = 0;
  for (Rank j = 0; j < status_.size(); ++j) {
    switch (status_[j]) {
      case Status::Open:
        ++open;
        if (position_[j] >= open_.size() || open_[position_[j]] != j) {
          throw std::logic_error("open list does not index r-set " + std::to_string(j));
        }
        break;
      case Status::Edge: ++edge; break;
      case Status::Closed: ++closed; break;
    }
  }
  if (open != open_.size()) throw std::logic_error("open list size disagrees with status array");
  if (edge != edges_.size()) throw std::logic_error("edge list size disagrees with status array");
  if (closed != closed_count_) throw std::logic_error("closed count disagrees with status array");
  for (Rank e : edges_) {
    if (status_[e] != Status::Edge) throw std::logic_error("edge list holds a non-edge");
  }
  std::size_t incidences = 0;
  for (const auto& nb : neighbors_) incidences += nb.size();
  if (incidences != edges_.size() * static_cast<std::size_t>(r_)) {
    throw std::logic_error("neighbor lists disagree with edge list");
  }
}

RunResult run(ProcessState& state, StopCondition stop, const StepHook& hook) {
  while (!stop.until_step || state.steps() < *stop.until_step) {
    auto outcome = state.step();
    if (!outcome) break;
    if (hook) hook(state, *outcome);
  }
  return {state.steps(), state.terminated(), {state.edges().begin(), state.edges().end()}};
}

std::vector<RSet> compute_Ce(const ProcessState& state, const RSet& e) {
  if (e.size() != state.r() || state.status(e) != Status::Open) {
    throw std::invalid_argument("C_e requires an open r-set, got " + e.to_string());
  }
  std::vector<Rank> found;
  for_each_completing_open(state, e, [&](Rank f) { found.push_back(f); });
  std::sort(found.begin(), found.end());
  found.erase(std::unique(found.begin(), found.end()), found.end());
  std::vector<RSet> out;
  out.reserve(found.size());
  for (Rank f : found) out.push_back(RSet::from_rank(f, state.n(), state.r()));
  return out;
}

std::size_t count_Ce(const ProcessState& state, const RSet& e) {
  if (e.size() != state.r() || state.status(e) != Status::Open) {
    throw std::invalid_argument("C_e requires an open r-set, got " + e.to_string());
  }
  std::vector<Rank> found;
  for_each_completing_open(state, e, [&](Rank f) { found.push_back(f); });
  std::sort(found.begin(), found.end());
  return static_cast<std::size_t>(std::unique(found.begin(), found.end()) - found.begin());
}

}  // namespace tfree
