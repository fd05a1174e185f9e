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

// Stateless combinatorial and analytic primitives for the T^(r)-free process:
// colex ranking of r-sets, enumeration of the r-uniform triangles through a
// given r-set, and the scaling constants and trajectory functions used to
// compare a run against its predicted evolution.

#ifndef TFREE_COMBINATORICS_HPP
#define TFREE_COMBINATORICS_HPP

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tfree {

using Vertex = int;
using Rank = std::uint64_t;

// Largest supported uniformity. Copy enumeration uses fixed-size buffers.
inline constexpr int kMaxUniformity = 8;

// C(n, k), or 0 when k < 0 or k > n. Throws std::overflow_error if the value
// does not fit in 64 bits.
std::uint64_t binom(int n, int k);

// Colex rank of a strictly increasing vertex list: sum_j C(v_j, j + 1).
// No validation; callers guarantee the ordering.
Rank colex_rank(std::span<const Vertex> sorted_vertices);

// A canonically ordered r-subset of [0, n) together with its colex rank.
class RSet {
 public:
  RSet() = default;

  // Sorts the input. Throws std::invalid_argument on duplicates or on a
  // vertex outside [0, n).
  static RSet from_vertices(std::vector<Vertex> vertices, int n);
  static RSet from_rank(Rank idx, int n, int r);

  const std::vector<Vertex>& vertices() const { return vertices_; }
  Rank rank() const { return rank_; }
  int size() const { return static_cast<int>(vertices_.size()); }
  bool contains(Vertex v) const;
  bool is_subset_of(const RSet& other) const;

  friend bool operator==(const RSet& a, const RSet& b) {
    return a.vertices_ == b.vertices_;
  }
  friend std::strong_ordering operator<=>(const RSet& a, const RSet& b) {
    if (a.size() != b.size()) return a.size() <=> b.size();
    return a.rank_ <=> b.rank_;
  }

  std::string to_string() const;

 private:
  RSet(std::vector<Vertex> v, Rank rank) : vertices_(std::move(v)), rank_(rank) {}

  std::vector<Vertex> vertices_;
  Rank rank_ = 0;
};

Rank rank(const RSet& s);
RSet unrank(Rank idx, int n, int r);

// A copy of T^(r): r petal edges b_i = core + {crossing_i} sharing the
// (r-1)-set core, plus the crossing edge a = crossing.
struct TriangleCopy {
  std::vector<Vertex> core;      // r - 1 vertices, increasing
  std::vector<Vertex> crossing;  // r vertices disjoint from core, increasing

  int uniformity() const { return static_cast<int>(crossing.size()); }
  // b_1, ..., b_r, a in that order.
  std::vector<RSet> edges(int n) const;
  std::vector<Rank> edge_ranks() const;

  friend bool operator==(const TriangleCopy&, const TriangleCopy&) = default;
  friend auto operator<=>(const TriangleCopy&, const TriangleCopy&) = default;
};

// Borrowed view of one copy handed to enumeration visitors. edge_ranks holds
// b_1..b_r followed by a; the views are valid only during the callback.
struct CopyView {
  std::span<const Vertex> core;
  std::span<const Vertex> crossing;
  std::span<const Rank> edge_ranks;

  TriangleCopy to_copy() const {
    return {{core.begin(), core.end()}, {crossing.begin(), crossing.end()}};
  }
};

namespace detail {

// Visits every k-subset of pool in lexicographic order of positions.
template <typename F>
void for_each_combination(std::span<const Vertex> pool, int k, F&& visit) {
  const int m = static_cast<int>(pool.size());
  if (k < 0 || k > m) return;
  std::array<int, kMaxUniformity> idx{};
  std::array<Vertex, kMaxUniformity> chosen{};
  for (int j = 0; j < k; ++j) idx[j] = j;
  while (true) {
    for (int j = 0; j < k; ++j) chosen[j] = pool[idx[j]];
    visit(std::span<const Vertex>(chosen.data(), static_cast<std::size_t>(k)));
    int j = k - 1;
    while (j >= 0 && idx[j] == m - k + j) --j;
    if (j < 0) return;
    ++idx[j];
    for (int l = j + 1; l < k; ++l) idx[l] = idx[l - 1] + 1;
  }
}

// Rank of the sorted union of a sorted list and one extra vertex not in it.
inline Rank rank_with(std::span<const Vertex> sorted, Vertex extra) {
  Rank r = 0;
  int pos = 0;
  bool placed = false;
  for (Vertex v : sorted) {
    if (!placed && extra < v) {
      r += binom(extra, pos + 1);
      ++pos;
      placed = true;
    }
    r += binom(v, pos + 1);
    ++pos;
  }
  if (!placed) r += binom(extra, pos + 1);
  return r;
}

}  // namespace detail

// Calls visit(const CopyView&) once for each copy of T^(r) on [n] that has e
// as a member edge. Yields nothing when n < 2r - 1.
//
// e appears either as a petal (drop one of its vertices to get the core, the
// dropped vertex is one of the crossing vertices, the other r - 1 crossing
// vertices come from outside e) or as the crossing edge (the core is any
// (r-1)-set outside e). The two branches are disjoint, so there are no
// repeats: (r + 1) * C(n - r, r - 1) copies in total.
template <typename F>
void for_each_copy_containing(const RSet& e, int n, F&& visit) {
  const int r = e.size();
  const auto& ev = e.vertices();
  std::vector<Vertex> outside;
  outside.reserve(static_cast<std::size_t>(n));
  for (Vertex v = 0, j = 0; v < n; ++v) {
    if (j < r && ev[j] == v) {
      ++j;
    } else {
      outside.push_back(v);
    }
  }

  std::array<Vertex, kMaxUniformity> core{};
  std::array<Vertex, kMaxUniformity> crossing{};
  std::array<Rank, kMaxUniformity + 1> ranks{};
  const auto core_span = std::span<const Vertex>(core.data(), r - 1);
  const auto crossing_span = std::span<const Vertex>(crossing.data(), r);
  const auto rank_span = std::span<const Rank>(ranks.data(), r + 1);

  auto emit = [&] {
    for (int j = 0; j < r; ++j) ranks[j] = detail::rank_with(core_span, crossing[j]);
    ranks[r] = colex_rank(crossing_span);
    visit(CopyView{core_span, crossing_span, rank_span});
  };

  // e is a petal edge.
  for (int drop = 0; drop < r; ++drop) {
    const Vertex x = ev[drop];
    for (int j = 0, c = 0; j < r; ++j) {
      if (j != drop) core[c++] = ev[j];
    }
    detail::for_each_combination(outside, r - 1, [&](std::span<const Vertex> rest) {
      int c = 0;
      bool placed = false;
      for (Vertex v : rest) {
        if (!placed && x < v) {
          crossing[c++] = x;
          placed = true;
        }
        crossing[c++] = v;
      }
      if (!placed) crossing[c++] = x;
      emit();
    });
  }

  // e is the crossing edge.
  std::copy(ev.begin(), ev.end(), crossing.begin());
  detail::for_each_combination(outside, r - 1, [&](std::span<const Vertex> chosen) {
    std::copy(chosen.begin(), chosen.end(), core.begin());
    emit();
  });
}

std::vector<TriangleCopy> copies_containing(const RSet& e, int n);

// True iff no copy of T^(r) has all of its member edges in the given set.
// Scans the copies through each edge; suitable for any n.
bool is_triangle_free(std::span<const RSet> edges, int n);

// Small constants of the analysis. Defaults are tuned for desk-scale n.
struct ConstantPack {
  double zeta = 0.4;
  double gamma = 0.3;
  double epsilon = 0.2;
  double W = 4.0;
  double kappa = 4.0;

  double lambda() const { return (kappa - gamma) / 2.0; }

  // Throws std::invalid_argument if any constant is non-positive.
  void validate() const;
  // Human-readable notes for each violated link of
  // 1/kappa < zeta < 1/W < epsilon < gamma. Violations are not errors.
  std::vector<std::string> ordering_warnings() const;
};

struct TrajectoryModel {
  int n = 0;
  int r = 0;
  Rank N = 0;           // C(n, r)
  std::uint64_t D = 0;  // (r + 1) * C(n - r, r - 1)
  double s = 0.0;       // N / D^(1/r); +inf when D = 0
  std::int64_t i_max = 0;
  double t_max = 0.0;
  ConstantPack constants;
  double lambda = 0.0;
  int k = 0;    // kappa * (n log n)^(1/r), rounded, at least 1
  int ell = 0;  // lambda * (n log n)^(1/r), rounded, at least 1

  double t(std::int64_t i) const;
  // D^(1/r).
  double d_root() const;
  // (n log n)^(1/r).
  double independence_scale() const;
};

// Throws std::invalid_argument unless n >= r >= 2 and r <= kMaxUniformity.
TrajectoryModel scaling(int n, int r, const ConstantPack& constants = {});

// Independence scale (n log n)^(1/r), natural log.
double independence_scale(int n, int r);

double q(double t, int r);
double c(double t, int r);
double f(double t, double W, int r);
double f1(double t, double W, int r);

}  // namespace tfree

#endif  // TFREE_COMBINATORICS_HPP
