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

#include "tfree/oracle.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>
#include <string>

namespace tfree::oracle {

namespace {

void guard(int n, int r, int max_n) {
  if (r < 2 || n < r) throw std::invalid_argument("oracle needs n >= r >= 2");
  if (n > max_n) {
    throw std::invalid_argument("oracle refuses n = " + std::to_string(n) + " above ceiling " +
                                std::to_string(max_n));
  }
}

std::vector<std::vector<Vertex>> subsets(const std::vector<Vertex>& pool, int k) {
  std::vector<std::vector<Vertex>> out;
  std::vector<Vertex> cur;
  auto rec = [&](auto&& self, std::size_t start) -> void {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (std::size_t j = start; j < pool.size(); ++j) {
      cur.push_back(pool[j]);
      self(self, j + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

std::vector<char> membership(std::span<const RSet> edges, int n, int r) {
  std::vector<char> in(binom(n, r), 0);
  for (const auto& e : edges) {
    if (e.size() != r) throw std::invalid_argument("edge of wrong size: " + e.to_string());
    in[e.rank()] = 1;
  }
  return in;
}

}  // namespace

std::vector<std::vector<Rank>> all_copies(int n, int r, int max_n) {
  guard(n, r, max_n);
  static std::mutex cache_mutex;
  static std::map<std::pair<int, int>, std::vector<std::vector<Rank>>> cache;
  {
    std::lock_guard lock(cache_mutex);
    if (auto it = cache.find({n, r}); it != cache.end()) return it->second;
  }

  std::vector<Vertex> all(static_cast<std::size_t>(n));
  for (Vertex v = 0; v < n; ++v) all[v] = v;
  std::vector<std::vector<Rank>> copies;
  for (const auto& core : subsets(all, r - 1)) {
    std::vector<Vertex> rest;
    std::set_difference(all.begin(), all.end(), core.begin(), core.end(), std::back_inserter(rest));
    for (const auto& crossing : subsets(rest, r)) {
      std::vector<Rank> members;
      for (Vertex x : crossing) {
        std::vector<Vertex> b = core;
        b.push_back(x);
        members.push_back(RSet::from_vertices(b, n).rank());
      }
      members.push_back(RSet::from_vertices(crossing, n).rank());
      copies.push_back(std::move(members));
    }
  }

  std::lock_guard lock(cache_mutex);
  cache.emplace(std::pair{n, r}, copies);
  return copies;
}

Partition oracle_partition(std::span<const RSet> edges, int n, int r, int max_n) {
  const auto copies = all_copies(n, r, max_n);
  const auto in = membership(edges, n, r);
  std::vector<char> closed(in.size(), 0);
  for (const auto& copy : copies) {
    int present = 0;
    Rank missing = 0;
    for (Rank m : copy) {
      if (in[m]) {
        ++present;
      } else {
        missing = m;
      }
    }
    if (present == r + 1) throw ContractViolation("edge set already contains a copy of T^(r)");
    if (present == r) closed[missing] = 1;
  }
  Partition p;
  for (Rank j = 0; j < in.size(); ++j) {
    auto s = RSet::from_rank(j, n, r);
    if (in[j]) {
      p.edges.push_back(std::move(s));
    } else if (closed[j]) {
      p.closed.push_back(std::move(s));
    } else {
      p.open.push_back(std::move(s));
    }
  }
  return p;
}

std::vector<RSet> oracle_open_set(std::span<const RSet> edges, int n, int r, int max_n) {
  return oracle_partition(edges, n, r, max_n).open;
}

bool oracle_is_Tr_free(std::span<const RSet> edges, int n, int r, int max_n) {
  const auto copies = all_copies(n, r, max_n);
  const auto in = membership(edges, n, r);
  return std::none_of(copies.begin(), copies.end(), [&](const std::vector<Rank>& copy) {
    return std::all_of(copy.begin(), copy.end(), [&](Rank m) { return in[m] != 0; });
  });
}

std::vector<RSet> oracle_Ce(std::span<const RSet> edges, const RSet& e, int n, int r, int max_n) {
  const auto copies = all_copies(n, r, max_n);
  const auto open = oracle_open_set(edges, n, r, max_n);
  auto in = membership(edges, n, r);
  std::vector<RSet> out;
  for (const auto& f : open) {
    if (f == e) continue;
    in[e.rank()] = 1;
    in[f.rank()] = 1;
    const bool hit = std::any_of(copies.begin(), copies.end(), [&](const std::vector<Rank>& copy) {
      const bool uses_both = std::find(copy.begin(), copy.end(), e.rank()) != copy.end() &&
                             std::find(copy.begin(), copy.end(), f.rank()) != copy.end();
      return uses_both && std::all_of(copy.begin(), copy.end(), [&](Rank m) { return in[m] != 0; });
    });
    in[e.rank()] = 0;
    in[f.rank()] = 0;
    if (hit) out.push_back(f);
  }
  return out;
}

std::string compare_with_engine(const ProcessState& state, int max_n) {
  const auto edges = state.edge_sets();
  const auto p = oracle_partition(edges, state.n(), state.r(), max_n);
  auto check = [&](const std::vector<RSet>& sets, Status expected, const char* name) -> std::string {
    for (const auto& s : sets) {
      if (state.status(s) != expected) {
        return "step " + std::to_string(state.steps()) + ": " + s.to_string() + " should be " + name;
      }
    }
    return {};
  };
  if (auto msg = check(p.open, Status::Open, "open"); !msg.empty()) return msg;
  if (auto msg = check(p.closed, Status::Closed, "closed"); !msg.empty()) return msg;
  if (auto msg = check(p.edges, Status::Edge, "an edge"); !msg.empty()) return msg;
  if (p.open.size() != state.open_count()) return "open count mismatch";
  return {};
}

}  // namespace tfree::oracle
