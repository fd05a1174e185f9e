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

#include "tfree/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tfree {

namespace {

void validate_pair(const SetPair& pair, int n) {
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto* half : {&pair.a, &pair.b}) {
    if (!std::is_sorted(half->begin(), half->end())) throw std::invalid_argument("pair half not sorted");
    for (Vertex v : *half) {
      if (v < 0 || v >= n) throw std::invalid_argument("pair vertex outside [0, n)");
      if (seen[v]) throw std::invalid_argument("pair halves overlap or repeat a vertex");
      seen[v] = 1;
    }
  }
}

double deg_coefficient(const TrajectoryModel& model, double t) {
  return model.D == 0 ? 0.0 : t / model.d_root() * model.n;
}

}  // namespace

double ObservationRecord::ce_mean() const {
  if (ce_samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double sum = std::accumulate(ce_samples.begin(), ce_samples.end(), 0.0);
  return sum / static_cast<double>(ce_samples.size());
}

double ObservationRecord::ce_min() const {
  if (ce_samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(*std::min_element(ce_samples.begin(), ce_samples.end()));
}

double ObservationRecord::ce_max() const {
  if (ce_samples.empty()) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(*std::max_element(ce_samples.begin(), ce_samples.end()));
}

ObservationRecord record_checkpoint(const ProcessState& state, const TrajectoryModel& model,
                                    int sample_size, Rng& sampler, std::uint64_t run_id) {
  if (sample_size < 1) throw std::invalid_argument("sample_size must be at least 1");
  ObservationRecord rec;
  rec.run_id = run_id;
  rec.i = state.steps();
  rec.edges_count = state.steps();
  rec.t = model.t(rec.i);
  const double big_n = static_cast<double>(model.N);
  const double gamma = model.constants.gamma;
  rec.open_count = state.open_count();
  rec.q_pred = q(rec.t, model.r) * big_n;
  rec.open_band = std::pow(big_n, 1.0 - gamma);
  rec.c_pred = c(rec.t, model.r) * model.d_root();
  rec.ce_band = std::pow(big_n, -gamma) * model.d_root();

  const auto open = state.open_ranks();
  if (!open.empty()) {
    rec.ce_samples.reserve(static_cast<std::size_t>(sample_size));
    for (int j = 0; j < sample_size; ++j) {
      const Rank e = open[sampler.below(open.size())];
      rec.ce_samples.push_back(count_Ce(state, RSet::from_rank(e, state.n(), state.r())));
    }
  }
  rec.max_deg_rm1 = state.max_degree();
  rec.deg_pred = deg_coefficient(model, rec.t);
  rec.max_codeg_rm1 = max_codegree(state);
  return rec;
}

int max_codegree(const ProcessState& state) {
  const int n = state.n();
  const int r = state.r();
  std::vector<std::vector<Rank>> by_vertex(static_cast<std::size_t>(n));
  std::array<Vertex, kMaxUniformity> sub{};
  for (Rank e : state.edges()) {
    const auto es = RSet::from_rank(e, n, r);
    const auto& ev = es.vertices();
    for (int drop = 0; drop < r; ++drop) {
      for (int j = 0, c = 0; j < r; ++j) {
        if (j != drop) sub[c++] = ev[j];
      }
      by_vertex[ev[drop]].push_back(colex_rank(std::span<const Vertex>(sub.data(), r - 1)));
    }
  }
  const std::uint64_t stride = state.num_rm1_sets();
  std::vector<std::uint64_t> keys;
  for (auto& bucket : by_vertex) {
    std::sort(bucket.begin(), bucket.end());
    for (std::size_t x = 0; x < bucket.size(); ++x) {
      for (std::size_t y = x + 1; y < bucket.size(); ++y) keys.push_back(bucket[x] * stride + bucket[y]);
    }
  }
  std::sort(keys.begin(), keys.end());
  int best = 0;
  for (std::size_t j = 0; j < keys.size();) {
    std::size_t l = j;
    while (l < keys.size() && keys[l] == keys[j]) ++l;
    best = std::max(best, static_cast<int>(l - j));
    j = l;
  }
  return best;
}

int codegree(const ProcessState& state, const RSet& a, const RSet& b) {
  if (a.size() != state.r() - 1 || b.size() != state.r() - 1) {
    throw std::invalid_argument("codegree needs two (r-1)-sets");
  }
  if (a == b) throw std::invalid_argument("codegree needs distinct sets");
  auto na = std::vector<Vertex>(state.neighbors(a).begin(), state.neighbors(a).end());
  auto nb = std::vector<Vertex>(state.neighbors(b).begin(), state.neighbors(b).end());
  std::sort(na.begin(), na.end());
  std::sort(nb.begin(), nb.end());
  std::vector<Vertex> both;
  std::set_intersection(na.begin(), na.end(), nb.begin(), nb.end(), std::back_inserter(both));
  return static_cast<int>(both.size());
}

std::uint64_t compute_QA(const ProcessState& state, const RSet& a) {
  if (a.size() != state.r() - 1) throw std::invalid_argument("Q_A needs an (r-1)-set");
  std::uint64_t count = 0;
  for (Vertex x = 0; x < state.n(); ++x) {
    if (a.contains(x)) continue;
    if (state.status(detail::rank_with(a.vertices(), x)) == Status::Open) ++count;
  }
  return count;
}

std::uint64_t pair_total(int ell, int r) { return binom(2 * ell, r) - 2 * binom(ell, r); }

bool detect_tau(const ProcessState& state, const SetPair& pair, double k, double epsilon) {
  validate_pair(pair, state.n());
  std::vector<std::uint8_t> side(static_cast<std::size_t>(state.n()), 0);
  for (Vertex v : pair.a) side[v] = 1;
  for (Vertex v : pair.b) side[v] = 2;
  const double threshold = k / std::pow(static_cast<double>(state.n()), 2.0 * epsilon);
  for (Rank x = 0; x < state.num_rm1_sets(); ++x) {
    int in_a = 0, in_b = 0;
    for (Vertex v : state.neighbors(x)) {
      if (side[v] == 1) ++in_a;
      if (side[v] == 2) ++in_b;
    }
    if (in_a > 0 && in_b > 0 && static_cast<double>(in_a + in_b) >= threshold) return true;
  }
  return false;
}

std::uint64_t compute_QAB(const ProcessState& state, const SetPair& pair, const TauInfo& tau) {
  validate_pair(pair, state.n());
  const int r = state.r();
  std::vector<std::uint8_t> side(static_cast<std::size_t>(state.n()), 0);
  for (Vertex v : pair.a) side[v] = 1;
  for (Vertex v : pair.b) side[v] = 2;
  std::vector<Vertex> both;
  std::merge(pair.a.begin(), pair.a.end(), pair.b.begin(), pair.b.end(), std::back_inserter(both));

  auto straddles = [&](std::span<const Vertex> e) {
    bool a = false, b = false;
    for (Vertex v : e) {
      a |= side[v] == 1;
      b |= side[v] == 2;
    }
    return a && b;
  };

  std::uint64_t count = 0;
  detail::for_each_combination(both, r, [&](std::span<const Vertex> e) {
    if (straddles(e) && state.status(colex_rank(e)) == Status::Open) ++count;
  });
  if (tau.at_tau) {
    for (const auto& e : tau.closed_this_step) {
      const auto& ev = e.vertices();
      const bool inside = std::all_of(ev.begin(), ev.end(), [&](Vertex v) { return side[v] != 0; });
      if (inside && straddles(ev)) ++count;
    }
  }
  return count;
}

MartingaleTracker::MartingaleTracker(const TrajectoryModel& model, std::vector<RSet> tracked_sets,
                                     std::vector<SetPair> tracked_pairs, int ell)
    : model_(model), tau_seen_(tracked_pairs.size(), false) {
  trace_.ell = ell;
  trace_.S = pair_total(ell, model.r);
  for (auto& a : tracked_sets) {
    if (a.size() != model.r - 1) throw std::invalid_argument("tracked set must be an (r-1)-set");
    SetTrace st;
    st.a = std::move(a);
    trace_.sets.push_back(std::move(st));
  }
  for (auto& p : tracked_pairs) {
    validate_pair(p, model.n);
    if (static_cast<int>(p.a.size()) != ell || static_cast<int>(p.b.size()) != ell) {
      throw std::invalid_argument("tracked pair halves must be ell-sets");
    }
    PairTrace pt;
    pt.pair = std::move(p);
    pt.tau = model.i_max;
    trace_.pairs.push_back(std::move(pt));
  }
}

void MartingaleTracker::observe(const ProcessState& state, const StepOutcome* last_step) {
  const std::int64_t i = state.steps();
  const double t = model_.t(i);
  const int r = model_.r;
  const double n = model_.n;
  const double eps = model_.constants.epsilon;
  const double W = model_.constants.W;
  const double qt = q(t, r);
  const double ft = f(t, W, r);

  const double set_band = ft * std::pow(n, 1.0 - eps);
  const double z_shift = deg_coefficient(model_, t) + f1(t, W, r) * std::pow(n, 1.0 / r - eps);
  for (auto& st : trace_.sets) {
    const auto qa = compute_QA(state, st.a);
    const int d = state.degree(st.a);
    const double trend = qt * n - static_cast<double>(qa);
    const double yp = trend + set_band;
    const double ym = trend - set_band;
    const double z = static_cast<double>(d) - z_shift;
    st.steps.push_back(i);
    st.t.push_back(t);
    st.q_a.push_back(qa);
    st.degree.push_back(d);
    st.y_plus.push_back(yp);
    st.y_minus.push_back(ym);
    st.z.push_back(z);
    if (yp < 0 && !st.first_y_plus_negative) st.first_y_plus_negative = i;
    if (ym > 0 && !st.first_y_minus_positive) st.first_y_minus_positive = i;
    if (z > 0 && !st.first_z_positive) st.first_z_positive = i;
  }

  const double S = static_cast<double>(trace_.S);
  const double pair_band = ft * S * std::pow(n, -eps);
  const std::span<const RSet> closed =
      last_step ? std::span<const RSet>(last_step->newly_closed) : std::span<const RSet>();
  for (std::size_t p = 0; p < trace_.pairs.size(); ++p) {
    auto& pt = trace_.pairs[p];
    bool at_tau = false;
    const bool before_or_at_tau = !tau_seen_[p];
    if (!tau_seen_[p]) {
      const bool reached = i <= model_.i_max &&
                           detect_tau(state, pt.pair, model_.k, eps);
      if (reached || i >= model_.i_max) {
        at_tau = true;
        tau_seen_[p] = true;
        pt.tau = std::min(i, model_.i_max);
        pt.tau_reached = reached;
      }
    }
    const auto qab = compute_QAB(state, pt.pair, TauInfo{at_tau, closed});
    const double trend = qt * S - static_cast<double>(qab);
    const double xp = trend + pair_band;
    const double xm = trend - pair_band;
    pt.steps.push_back(i);
    pt.t.push_back(t);
    pt.q_ab.push_back(qab);
    pt.x_plus.push_back(xp);
    pt.x_minus.push_back(xm);
    if (before_or_at_tau) {
      if (xp <= 0 && !pt.first_x_plus_nonpositive) pt.first_x_plus_nonpositive = i;
      if (xm >= 0 && !pt.first_x_minus_nonnegative) pt.first_x_minus_nonnegative = i;
    }
  }
}

std::vector<RSet> random_rm1_sets(int n, int r, int count, Rng& rng) {
  const Rank total = binom(n, r - 1);
  const auto want = std::min<Rank>(static_cast<Rank>(std::max(count, 0)), total);
  std::vector<Rank> picked;
  while (picked.size() < want) {
    const Rank x = rng.below(total);
    if (std::find(picked.begin(), picked.end(), x) == picked.end()) picked.push_back(x);
  }
  std::vector<RSet> out;
  for (Rank x : picked) out.push_back(RSet::from_rank(x, n, r - 1));
  return out;
}

std::vector<SetPair> random_set_pairs(int n, int ell, int count, Rng& rng) {
  if (ell < 1 || 2 * ell > n) throw std::invalid_argument("need 1 <= ell <= n / 2 for set pairs");
  std::vector<SetPair> out;
  std::vector<Vertex> perm(static_cast<std::size_t>(n));
  for (int c = 0; c < count; ++c) {
    std::iota(perm.begin(), perm.end(), 0);
    for (int j = n - 1; j > 0; --j) {
      std::swap(perm[j], perm[rng.below(static_cast<std::uint64_t>(j) + 1)]);
    }
    SetPair p{{perm.begin(), perm.begin() + ell}, {perm.begin() + ell, perm.begin() + 2 * ell}};
    std::sort(p.a.begin(), p.a.end());
    std::sort(p.b.begin(), p.b.end());
    out.push_back(std::move(p));
  }
  return out;
}

int tracking_ell(const TrajectoryModel& model) { return std::min(model.ell, model.n / 2); }

MartingaleTrace build_martingale_traces(ProcessState& state, std::vector<RSet> tracked_sets,
                                        std::vector<SetPair> tracked_pairs,
                                        const TrajectoryModel& model) {
  MartingaleTracker tracker(model, std::move(tracked_sets), std::move(tracked_pairs),
                            tracking_ell(model));
  tracker.observe(state, nullptr);
  run(state, StopCondition::at_step(model.i_max),
      [&](const ProcessState& s, const StepOutcome& out) { tracker.observe(s, &out); });
  return tracker.take();
}

SubgraphFrequency subgraph_frequency_test(std::span<const RSet> pattern, std::int64_t j,
                                          std::uint64_t runs, int n, int r, std::uint64_t seed,
                                          const ConstantPack& constants) {
  const auto model = scaling(n, r, constants);
  if (j < 0 || j > model.i_max) {
    throw std::invalid_argument("j must lie in [0, i_max = " + std::to_string(model.i_max) + "]");
  }
  if (runs == 0) throw std::invalid_argument("need at least one run");
  std::vector<Rank> ranks;
  for (const auto& e : pattern) {
    if (e.size() != r) throw std::invalid_argument("pattern r-set of wrong size: " + e.to_string());
    ranks.push_back(e.rank());
  }
  std::sort(ranks.begin(), ranks.end());
  if (std::adjacent_find(ranks.begin(), ranks.end()) != ranks.end()) {
    throw std::invalid_argument("pattern repeats an r-set");
  }
  if (!is_triangle_free(pattern, n)) throw std::invalid_argument("pattern contains a copy of T^(r)");

  SubgraphFrequency out;
  out.pattern_size = pattern.size();
  out.j = j;
  out.runs = runs;
  for (std::uint64_t run_id = 0; run_id < runs; ++run_id) {
    ProcessState state(n, r, derive_seed(seed, run_id));
    run(state, StopCondition::at_step(j));
    const bool all = std::all_of(ranks.begin(), ranks.end(),
                                 [&](Rank e) { return state.status(e) == Status::Edge; });
    if (all) ++out.hits;
  }
  const double m = static_cast<double>(runs);
  out.empirical_p = static_cast<double>(out.hits) / m;
  out.predicted_p = std::pow(static_cast<double>(j) / static_cast<double>(model.N),
                             static_cast<double>(pattern.size()));
  constexpr double z = 2.5758293035489004;  // two-sided 99%
  const double p = out.empirical_p;
  const double denom = 1.0 + z * z / m;
  const double centre = (p + z * z / (2 * m)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / m + z * z / (4 * m * m)) / denom;
  out.ci_low = std::max(0.0, centre - half);
  out.ci_high = std::min(1.0, centre + half);
  return out;
}

}  // namespace tfree
