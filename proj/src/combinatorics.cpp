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

#include "tfree/combinatorics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tfree {

namespace {

constexpr int kTableN = 4096;
constexpr int kTableK = 16;
constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t binom_direct(int n, int k) {
  if (k > n - k) k = n - k;
  unsigned __int128 value = 1;
  for (int j = 1; j <= k; ++j) {
    value = value * static_cast<unsigned __int128>(n - k + j) / j;
    if (value > kSaturated) return kSaturated;
  }
  return static_cast<std::uint64_t>(value);
}

struct BinomialTable {
  std::vector<std::uint64_t> values;

  BinomialTable() : values(static_cast<std::size_t>(kTableN) * (kTableK + 1), 0) {
    for (int n = 0; n < kTableN; ++n) {
      at(n, 0) = 1;
      for (int k = 1; k <= kTableK && k <= n; ++k) {
        const std::uint64_t a = at(n - 1, k - 1);
        const std::uint64_t b = k <= n - 1 ? at(n - 1, k) : 0;
        at(n, k) = (a == kSaturated || b == kSaturated || a > kSaturated - b) ? kSaturated : a + b;
      }
    }
  }

  std::uint64_t& at(int n, int k) { return values[static_cast<std::size_t>(n) * (kTableK + 1) + k]; }
};

const BinomialTable& table() {
  static const BinomialTable t;
  return t;
}

}  // namespace

std::uint64_t binom(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  std::uint64_t value;
  if (n < kTableN && k <= kTableK) {
    value = table().values[static_cast<std::size_t>(n) * (kTableK + 1) + k];
  } else {
    value = binom_direct(n, k);
  }
  if (value == kSaturated) {
    throw std::overflow_error("binomial coefficient C(" + std::to_string(n) + ", " +
                              std::to_string(k) + ") exceeds 64 bits");
  }
  return value;
}

Rank colex_rank(std::span<const Vertex> sorted_vertices) {
  Rank r = 0;
  for (std::size_t j = 0; j < sorted_vertices.size(); ++j) {
    r += binom(sorted_vertices[j], static_cast<int>(j) + 1);
  }
  return r;
}

RSet RSet::from_vertices(std::vector<Vertex> vertices, int n) {
  std::sort(vertices.begin(), vertices.end());
  for (std::size_t j = 0; j < vertices.size(); ++j) {
    if (vertices[j] < 0 || vertices[j] >= n) {
      throw std::invalid_argument("vertex " + std::to_string(vertices[j]) + " outside [0, " +
                                  std::to_string(n) + ")");
    }
    if (j > 0 && vertices[j] == vertices[j - 1]) {
      throw std::invalid_argument("duplicate vertex " + std::to_string(vertices[j]));
    }
  }
  const Rank r = colex_rank(vertices);
  return RSet(std::move(vertices), r);
}

RSet RSet::from_rank(Rank idx, int n, int r) {
  if (r < 0 || r > n) throw std::invalid_argument("set size outside [0, n]");
  if (idx >= binom(n, r)) {
    throw std::invalid_argument("rank " + std::to_string(idx) + " outside [0, C(" +
                                std::to_string(n) + ", " + std::to_string(r) + "))");
  }
  std::vector<Vertex> v(static_cast<std::size_t>(r));
  Rank rest = idx;
  Vertex hi = n - 1;
  for (int j = r; j >= 1; --j) {
    // Largest vertex c with C(c, j) <= rest.
    while (binom(hi, j) > rest) --hi;
    v[static_cast<std::size_t>(j - 1)] = hi;
    rest -= binom(hi, j);
    --hi;
  }
  return RSet(std::move(v), idx);
}

bool RSet::contains(Vertex x) const {
  return std::binary_search(vertices_.begin(), vertices_.end(), x);
}

bool RSet::is_subset_of(const RSet& other) const {
  return std::includes(other.vertices_.begin(), other.vertices_.end(), vertices_.begin(),
                       vertices_.end());
}

std::string RSet::to_string() const {
  std::ostringstream out;
  out << '{';
  for (std::size_t j = 0; j < vertices_.size(); ++j) {
    if (j) out << ',';
    out << vertices_[j];
  }
  out << '}';
  return out.str();
}

Rank rank(const RSet& s) { return s.rank(); }

RSet unrank(Rank idx, int n, int r) { return RSet::from_rank(idx, n, r); }

std::vector<RSet> TriangleCopy::edges(int n) const {
  std::vector<RSet> out;
  out.reserve(crossing.size() + 1);
  for (Vertex x : crossing) {
    std::vector<Vertex> b = core;
    b.push_back(x);
    out.push_back(RSet::from_vertices(std::move(b), n));
  }
  out.push_back(RSet::from_vertices(crossing, n));
  return out;
}

std::vector<Rank> TriangleCopy::edge_ranks() const {
  std::vector<Rank> out;
  out.reserve(crossing.size() + 1);
  for (Vertex x : crossing) out.push_back(detail::rank_with(core, x));
  out.push_back(colex_rank(crossing));
  return out;
}

std::vector<TriangleCopy> copies_containing(const RSet& e, int n) {
  std::vector<TriangleCopy> out;
  for_each_copy_containing(e, n, [&](const CopyView& view) { out.push_back(view.to_copy()); });
  return out;
}

bool is_triangle_free(std::span<const RSet> edges, int n) {
  std::vector<Rank> present;
  present.reserve(edges.size());
  for (const auto& e : edges) present.push_back(e.rank());
  std::sort(present.begin(), present.end());
  auto has = [&](Rank x) { return std::binary_search(present.begin(), present.end(), x); };
  for (const auto& e : edges) {
    bool found = false;
    for_each_copy_containing(e, n, [&](const CopyView& view) {
      if (found) return;
      found = std::all_of(view.edge_ranks.begin(), view.edge_ranks.end(), has);
    });
    if (found) return false;
  }
  return true;
}

void ConstantPack::validate() const {
  const std::pair<const char*, double> named[] = {
      {"zeta", zeta}, {"gamma", gamma}, {"epsilon", epsilon}, {"W", W}, {"kappa", kappa}};
  for (const auto& [name, value] : named) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw std::invalid_argument(std::string("constant ") + name + " must be positive and finite");
    }
  }
}

std::vector<std::string> ConstantPack::ordering_warnings() const {
  std::vector<std::string> out;
  const std::pair<const char*, double> chain[] = {
      {"1/kappa", 1.0 / kappa}, {"zeta", zeta}, {"1/W", 1.0 / W}, {"epsilon", epsilon}, {"gamma", gamma}};
  for (std::size_t j = 0; j + 1 < std::size(chain); ++j) {
    if (!(chain[j].second < chain[j + 1].second)) {
      std::ostringstream msg;
      msg.precision(6);
      msg << chain[j].first << " = " << chain[j].second << " is not below " << chain[j + 1].first
          << " = " << chain[j + 1].second;
      out.push_back(msg.str());
    }
  }
  return out;
}

double TrajectoryModel::t(std::int64_t i) const {
  return std::isinf(s) ? 0.0 : static_cast<double>(i) / s;
}

double TrajectoryModel::d_root() const {
  return std::pow(static_cast<double>(D), 1.0 / r);
}

double TrajectoryModel::independence_scale() const { return tfree::independence_scale(n, r); }

double independence_scale(int n, int r) {
  return std::pow(static_cast<double>(n) * std::log(static_cast<double>(n)), 1.0 / r);
}

TrajectoryModel scaling(int n, int r, const ConstantPack& constants) {
  if (r < 2 || n < r) throw std::invalid_argument("need n >= r >= 2");
  if (r > kMaxUniformity) {
    throw std::invalid_argument("uniformity above " + std::to_string(kMaxUniformity) + " not supported");
  }
  constants.validate();
  TrajectoryModel m;
  m.n = n;
  m.r = r;
  m.constants = constants;
  m.N = binom(n, r);
  m.D = static_cast<std::uint64_t>(r + 1) * binom(n - r, r - 1);
  const double big_n = static_cast<double>(m.N);
  if (m.D == 0) {
    // No copy fits on n < 2r - 1 vertices: nothing ever closes and the
    // process takes every r-set.
    m.s = std::numeric_limits<double>::infinity();
    m.i_max = static_cast<std::int64_t>(m.N);
    m.t_max = 0.0;
  } else {
    m.s = big_n / m.d_root();
    const double log_term = std::pow(std::log(big_n), 1.0 / r);
    m.i_max = static_cast<std::int64_t>(std::ceil(constants.zeta * m.s * log_term));
    m.t_max = static_cast<double>(m.i_max) / m.s;
  }
  m.lambda = constants.lambda();
  const double scale = independence_scale(n, r);
  m.k = std::max(1, static_cast<int>(std::lround(constants.kappa * scale)));
  m.ell = std::max(1, static_cast<int>(std::lround(m.lambda * scale)));
  return m;
}

double q(double t, int r) { return std::exp(-std::pow(t, r)); }

double c(double t, int r) { return r * std::pow(t, r - 1) * q(t, r); }

double f(double t, double W, int r) { return std::exp(W * (std::pow(t, r) + t)); }

double f1(double t, double W, int r) { return std::exp((W + 1.0) * std::pow(t, r) + W * t); }

}  // namespace tfree
