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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "tfree/observables.hpp"
#include "tfree/oracle.hpp"
#include "tfree/process.hpp"

using namespace tfree;

namespace {

bool straddles(const RSet& e, const SetPair& p) {
  bool a = false, b = false, outside = false;
  for (Vertex v : e.vertices()) {
    const bool in_a = std::binary_search(p.a.begin(), p.a.end(), v);
    const bool in_b = std::binary_search(p.b.begin(), p.b.end(), v);
    a |= in_a;
    b |= in_b;
    outside |= !in_a && !in_b;
  }
  return a && b && !outside;
}

RSet with_vertex(std::vector<Vertex> base, Vertex v, int n) {
  base.push_back(v);
  return RSet::from_vertices(base, n);
}

}  // namespace

TEST_CASE("checkpoint at i=0") {
  const auto state = init(12, 3, 4);
  const auto model = scaling(12, 3);
  Rng sampler(1);
  const auto rec = record_checkpoint(state, model, 10, sampler, 7);
  CHECK(rec.run_id == 7);
  CHECK(rec.i == 0);
  CHECK(rec.open_count == 220);
  CHECK(rec.q_pred == doctest::Approx(220));
  CHECK(rec.c_pred == 0.0);
  CHECK(rec.ce_samples.size() == 10);
  CHECK(rec.ce_max() == 0.0);
  CHECK(rec.max_deg_rm1 == 0);
  CHECK(rec.max_codeg_rm1 == 0);
  CHECK(rec.deg_pred == 0.0);
  CHECK(rec.open_band == doctest::Approx(std::pow(220.0, 0.7)));
  CHECK(std::isnan(ObservationRecord{}.ce_mean()));
}

TEST_CASE("checkpoint does not touch the process generator") {
  auto a = init(12, 3, 4);
  auto b = init(12, 3, 4);
  const auto model = scaling(12, 3);
  Rng sampler(1);
  for (int i = 0; i < 20; ++i) {
    record_checkpoint(a, model, 5, sampler);
    a.step();
    b.step();
  }
  CHECK(std::equal(a.edges().begin(), a.edges().end(), b.edges().begin(), b.edges().end()));
}

TEST_CASE("Q_A accounting") {
  auto state = init(8, 3, 11);
  const auto a = RSet::from_vertices({2, 5}, 8);
  CHECK(compute_QA(state, a) == 6);
  run(state, StopCondition::at_termination(), [&](const ProcessState& s, const StepOutcome&) {
    for (Rank x = 0; x < s.num_rm1_sets(); ++x) {
      const auto set = unrank(x, 8, 2);
      std::uint64_t open = 0, edge = 0, closed = 0;
      for (Vertex v = 0; v < 8; ++v) {
        if (set.contains(v)) continue;
        const auto st = s.status(with_vertex(set.vertices(), v, 8));
        open += st == Status::Open;
        edge += st == Status::Edge;
        closed += st == Status::Closed;
      }
      REQUIRE(compute_QA(s, set) == open);
      REQUIRE(edge == static_cast<std::uint64_t>(s.degree(set)));
      REQUIRE(open + edge + closed == 6);
    }
  });
  CHECK(compute_QA(state, a) == 0);
}

TEST_CASE("codegree two ways") {
  for (int r = 2; r <= 3; ++r) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto state = init(10, r, seed);
      run(state, StopCondition::at_step(15 + 5 * static_cast<std::int64_t>(seed)));
      int best = 0;
      for (Rank x = 0; x < state.num_rm1_sets(); ++x) {
        for (Rank y = x + 1; y < state.num_rm1_sets(); ++y) {
          best = std::max(best, codegree(state, unrank(x, 10, r - 1), unrank(y, 10, r - 1)));
        }
      }
      CHECK(max_codegree(state) == best);
    }
  }
}

TEST_CASE("pair totals") {
  CHECK(pair_total(5, 3) == 100);
  CHECK(pair_total(3, 2) == 9);
  CHECK(pair_total(1, 3) == 0);
}

TEST_CASE("Q_AB against the oracle") {
  const SetPair pair{{0, 2, 4}, {5, 7, 9}};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto state = init(10, 3, seed);
    CHECK(compute_QAB(state, pair) == pair_total(3, 3));
    run(state, StopCondition::at_step(10 + 3 * static_cast<std::int64_t>(seed)));
    const auto open = oracle::oracle_open_set(state.edge_sets(), 10, 3);
    const auto expected = std::count_if(open.begin(), open.end(), [&](const RSet& e) { return straddles(e, pair); });
    CHECK(compute_QAB(state, pair) == static_cast<std::uint64_t>(expected));
  }
  CHECK_THROWS_AS(compute_QAB(init(10, 3, 0), SetPair{{0, 1}, {1, 2}}), std::invalid_argument);
}

TEST_CASE("stopping condition on a hand-built graph") {
  const int n = 20;
  const auto model = scaling(n, 3);
  const double k = static_cast<double>(model.k);
  const double eps = model.constants.epsilon;
  const double threshold = k / std::pow(n, 2 * eps);
  REQUIRE(threshold > 4.0);
  REQUIRE(threshold <= 5.0);
  const SetPair pair{{0, 1, 2, 3, 4, 5, 6}, {7, 8, 9, 10, 11, 12, 13}};
  const std::vector<Vertex> x{18, 19};

  SUBCASE("four neighbours across both halves are not enough") {
    auto state = init(n, 3, 0);
    CHECK_FALSE(detect_tau(state, pair, k, eps));
    for (Vertex v : {0, 1, 7, 8}) state.add_edge(with_vertex(x, v, n));
    CHECK_FALSE(detect_tau(state, pair, k, eps));
    state.add_edge(with_vertex(x, 2, n));
    CHECK(detect_tau(state, pair, k, eps));
    CHECK(detect_tau(state, pair, k / 2, eps));
  }
  SUBCASE("one-sided neighbourhoods never trigger") {
    auto state = init(n, 3, 0);
    for (Vertex v : {0, 1, 2, 3, 4, 5, 6}) state.add_edge(with_vertex(x, v, n));
    CHECK_FALSE(detect_tau(state, pair, k, eps));
  }
  SUBCASE("sets closed in the stopping step are still counted") {
    auto state = init(n, 3, 0);
    state.add_edge(with_vertex(x, 0, n));
    state.add_edge(with_vertex(x, 1, n));
    const auto outcome = state.add_edge(with_vertex(x, 7, n));
    REQUIRE(outcome.newly_closed.size() == 1);
    CHECK(outcome.newly_closed[0] == RSet::from_vertices({0, 1, 7}, n));
    const auto plain = compute_QAB(state, pair);
    CHECK(plain == pair_total(7, 3) - 1);
    CHECK(compute_QAB(state, pair, TauInfo{true, outcome.newly_closed}) == plain + 1);
    CHECK(compute_QAB(state, pair, TauInfo{false, outcome.newly_closed}) == plain);
  }
}

TEST_CASE("martingale traces") {
  const int n = 30, r = 3;
  const auto model = scaling(n, r);
  const double eps = model.constants.epsilon;
  const int ell = tracking_ell(model);
  CHECK(ell == std::min(model.ell, n / 2));
  Rng picker(5);
  auto sets = random_rm1_sets(n, r, 6, picker);
  auto pairs = random_set_pairs(n, ell, 4, picker);
  CHECK(sets.size() == 6);
  for (const auto& p : pairs) {
    CHECK(p.a.size() == static_cast<std::size_t>(ell));
    std::vector<Vertex> both;
    std::set_intersection(p.a.begin(), p.a.end(), p.b.begin(), p.b.end(), std::back_inserter(both));
    CHECK(both.empty());
  }
  auto state = init(n, r, 77);
  const auto trace = build_martingale_traces(state, sets, pairs, model);
  CHECK((state.steps() == model.i_max || state.terminated()));
  CHECK(trace.S == pair_total(ell, r));

  for (const auto& st : trace.sets) {
    CHECK(st.y_plus[0] == doctest::Approx(r - 1 + std::pow(n, 1 - eps)));
    CHECK(st.y_minus[0] == doctest::Approx(r - 1 - std::pow(n, 1 - eps)));
    CHECK(st.z[0] == doctest::Approx(-std::pow(n, 1.0 / r - eps)));
    CHECK(st.steps.size() == static_cast<std::size_t>(state.steps() + 1));
    for (std::size_t i = 0; i < st.steps.size(); ++i) {
      const double band = f(st.t[i], model.constants.W, r) * std::pow(n, 1 - eps);
      CHECK(st.y_plus[i] - st.y_minus[i] == doctest::Approx(2 * band));
      if (i > 0) CHECK(st.q_a[i] <= st.q_a[i - 1]);
    }
    const auto neg = std::find_if(st.y_plus.begin(), st.y_plus.end(), [](double y) { return y < 0; });
    CHECK(st.first_y_plus_negative.has_value() == (neg != st.y_plus.end()));
    if (neg != st.y_plus.end()) CHECK(*st.first_y_plus_negative == st.steps[neg - st.y_plus.begin()]);
  }
  for (const auto& pt : trace.pairs) {
    const double S = static_cast<double>(trace.S);
    CHECK(pt.q_ab[0] == trace.S);
    CHECK(pt.x_plus[0] == doctest::Approx(S * std::pow(n, -eps)));
    CHECK(pt.tau <= model.i_max);
    for (std::size_t i = 0; i < pt.steps.size(); ++i) {
      const double band = f(pt.t[i], model.constants.W, r) * S * std::pow(n, -eps);
      CHECK(pt.x_plus[i] - pt.x_minus[i] == doctest::Approx(2 * band));
      if (i > 0 && pt.steps[i] < pt.tau) CHECK(pt.q_ab[i] <= pt.q_ab[i - 1]);
    }
    if (pt.first_x_plus_nonpositive) CHECK(*pt.first_x_plus_nonpositive <= pt.tau);
  }
  CHECK_THROWS_AS(random_set_pairs(10, 6, 1, picker), std::invalid_argument);
}

TEST_CASE("subgraph frequency") {
  const int n = 10, r = 3;
  const auto model = scaling(n, r);
  const std::int64_t j = model.i_max;

  SUBCASE("empty pattern always present") {
    const auto res = subgraph_frequency_test({}, j, 50, n, r, 1);
    CHECK(res.hits == 50);
    CHECK(res.predicted_p == 1.0);
  }
  SUBCASE("single r-set appears with probability j/N") {
    const std::vector<RSet> pattern{RSet::from_vertices({1, 4, 8}, n)};
    const auto res = subgraph_frequency_test(pattern, j, 10000, n, r, 2);
    CHECK(res.predicted_p == doctest::Approx(static_cast<double>(j) / 120));
    CHECK(res.ci_low <= res.predicted_p);
    CHECK(res.predicted_p <= res.ci_high);
  }
  SUBCASE("two disjoint r-sets") {
    const std::vector<RSet> pattern{RSet::from_vertices({0, 1, 2}, n), RSet::from_vertices({3, 4, 5}, n)};
    const auto res = subgraph_frequency_test(pattern, j, 10000, n, r, 3);
    CHECK(std::abs(res.empirical_p - res.predicted_p) / res.predicted_p < 0.3);
  }
  SUBCASE("invalid patterns") {
    const TriangleCopy copy{{0, 1}, {2, 3, 4}};
    CHECK_THROWS_AS(subgraph_frequency_test(copy.edges(n), j, 10, n, r, 1), std::invalid_argument);
    const std::vector<RSet> twice{RSet::from_vertices({0, 1, 2}, n), RSet::from_vertices({0, 1, 2}, n)};
    CHECK_THROWS_AS(subgraph_frequency_test(twice, j, 10, n, r, 1), std::invalid_argument);
    CHECK_THROWS_AS(subgraph_frequency_test({}, j + 1, 10, n, r, 1), std::invalid_argument);
  }
}
