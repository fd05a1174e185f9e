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

#include "tfree/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>
#include <variant>

#include <json.hpp>

#include "tfree/independence.hpp"
#include "tfree/oracle.hpp"
#include "tfree/process.hpp"
#include "tfree/rng.hpp"

namespace tfree {

namespace {

constexpr const char* kToolName = "tfree-simulate";
constexpr const char* kToolVersion = "1.0.0";

using json = nlohmann::ordered_json;
using Cell = std::variant<std::monostate, std::int64_t, std::uint64_t, double, std::string, bool>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

Cell opt_cell(const std::optional<std::int64_t>& v) {
  return v ? Cell{*v} : Cell{};
}

std::string cell_text(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "";
        } else if constexpr (std::is_same_v<T, double>) {
          return format_real(v);
        } else if constexpr (std::is_same_v<T, std::string>) {
          return v;
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          return std::to_string(v);
        }
      },
      cell);
}

json cell_json(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else if constexpr (std::is_same_v<T, double>) {
          return std::isfinite(v) ? json(v) : json(nullptr);
        } else {
          return v;
        }
      },
      cell);
}

std::string csv_escape(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::filesystem::path write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write to " + path.string() + " failed");
  return path;
}

std::filesystem::path write_table(const Table& table, const std::filesystem::path& dir, Format format) {
  std::ostringstream out;
  if (format == Format::Csv) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
    out << '\n';
    for (const auto& row : table.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_escape(cell_text(row[c]));
      out << '\n';
    }
    return write_text(dir / (table.name + ".csv"), out.str());
  }
  json rows = json::array();
  for (const auto& row : table.rows) {
    json obj = json::object();
    for (std::size_t c = 0; c < row.size(); ++c) obj[table.columns[c]] = cell_json(row[c]);
    rows.push_back(std::move(obj));
  }
  return write_text(dir / (table.name + ".json"), rows.dump(2) + "\n");
}

std::string join_vertices(std::span<const Vertex> vs) {
  std::string out;
  for (std::size_t j = 0; j < vs.size(); ++j) {
    if (j) out += ' ';
    out += std::to_string(vs[j]);
  }
  return out;
}

template <typename F>
void parallel_for(std::size_t count, unsigned workers, F&& body) {
  workers = static_cast<unsigned>(std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1)));
  if (workers == 1) {
    for (std::size_t j = 0; j < count; ++j) body(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t j; (j = next.fetch_add(1)) < count;) body(j);
      } catch (...) {
        errors[w] = std::current_exception();
        next.store(count);
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct MisRow {
  std::string stage;
  std::int64_t i = 0;
  MisResult mis;
  int greedy = 0;
};

struct OracleRow {
  std::int64_t partition_checks = 0;
  std::int64_t ce_checks = 0;
  std::string failure;
};

struct RunOutput {
  std::uint64_t run_id = 0;
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  bool terminated = false;
  std::vector<ObservationRecord> checkpoints;
  std::vector<MisRow> mis;
  std::optional<MartingaleTrace> trace;
  std::optional<OracleRow> oracle;
};

// The model with i_max replaced by the configured stop step.
TrajectoryModel effective_model(const RunConfig& config) {
  auto model = scaling(config.n, config.r, config.constants);
  if (config.i_max_override) {
    model.i_max = *config.i_max_override;
    model.t_max = model.t(model.i_max);
  }
  return model;
}

class CheckpointRecorder {
 public:
  CheckpointRecorder(const RunConfig& config, const TrajectoryModel& model, std::uint64_t run_id,
                     std::uint64_t seed, std::vector<ObservationRecord>& out)
      : config_(config),
        model_(model),
        run_id_(run_id),
        cadence_(checkpoint_cadence(config, model)),
        sampler_(derive_seed(seed, stream::kObserver)),
        out_(out) {}

  void maybe_record(const ProcessState& state) {
    const auto i = state.steps();
    if (i == 0 || i == 1 || i % cadence_ == 0) record(state);
  }

  void finish(const ProcessState& state) {
    if (out_.empty() || out_.back().i != state.steps()) record(state);
  }

  // Runs to `stop` (nullopt: termination) recording along the way.
  void run_to(ProcessState& state, std::optional<std::int64_t> stop, const StepHook& extra = {}) {
    if (out_.empty()) maybe_record(state);
    run(state, StopCondition{stop}, [&](const ProcessState& s, const StepOutcome& o) {
      if (extra) extra(s, o);
      maybe_record(s);
    });
    finish(state);
  }

 private:
  void record(const ProcessState& state) {
    out_.push_back(record_checkpoint(state, model_, config_.ce_sample_size, sampler_, run_id_));
  }

  const RunConfig& config_;
  const TrajectoryModel& model_;
  std::uint64_t run_id_;
  std::int64_t cadence_;
  Rng sampler_;
  std::vector<ObservationRecord>& out_;
};

MisRow measure_mis(const ProcessState& state, const std::string& stage, std::uint64_t seed,
                   std::uint64_t budget) {
  const auto g = Hypergraph::from_state(state);
  MisRow row{stage, state.steps(), exact_mis(g, budget), 0};
  row.greedy = static_cast<int>(greedy_independent(g, derive_seed(seed, stream::kIndependence)).size());
  return row;
}

OracleRow oracle_run(const RunConfig& config, std::uint64_t seed) {
  OracleRow out;
  ProcessState probe(config.n, config.r, seed);
  run(probe, StopCondition::at_termination());
  const std::int64_t total = probe.steps();

  // Ten distinct checkpoint steps in [0, M).
  Rng pick(derive_seed(seed, stream::kOracleCheck));
  std::vector<std::int64_t> steps(static_cast<std::size_t>(total));
  std::iota(steps.begin(), steps.end(), 0);
  for (std::size_t j = steps.size(); j > 1; --j) std::swap(steps[j - 1], steps[pick.below(j)]);
  steps.resize(std::min<std::size_t>(steps.size(), 10));
  std::sort(steps.begin(), steps.end());

  ProcessState state(config.n, config.r, seed);
  auto check = [&]() -> bool {
    ++out.partition_checks;
    if (auto msg = oracle::compare_with_engine(state, config.oracle_max_n); !msg.empty()) {
      out.failure = msg;
      return false;
    }
    if (!std::binary_search(steps.begin(), steps.end(), state.steps())) return true;
    const auto edges = state.edge_sets();
    std::vector<Rank> targets(state.open_ranks().begin(), state.open_ranks().end());
    if (targets.size() > 16) {
      std::vector<Rank> chosen;
      for (int j = 0; j < 4; ++j) chosen.push_back(targets[pick.below(targets.size())]);
      targets = chosen;
    }
    for (Rank e : targets) {
      const auto es = RSet::from_rank(e, config.n, config.r);
      ++out.ce_checks;
      if (compute_Ce(state, es) != oracle::oracle_Ce(edges, es, config.n, config.r, config.oracle_max_n)) {
        out.failure = "step " + std::to_string(state.steps()) + ": C_e mismatch for " + es.to_string();
        return false;
      }
    }
    return true;
  };
  if (!check()) return out;
  while (state.step()) {
    if (!check()) return out;
  }
  if (!oracle::oracle_is_Tr_free(state.edge_sets(), config.n, config.r, config.oracle_max_n)) {
    out.failure = "terminal graph contains a copy of T^(r)";
  }
  return out;
}

RunOutput execute_run(const RunConfig& config, const TrajectoryModel& model, std::uint64_t run_id) {
  RunOutput out;
  out.run_id = run_id;
  out.seed = derive_seed(config.master_seed, run_id);
  if (config.mode == Mode::OracleTest) {
    out.oracle = oracle_run(config, out.seed);
    ProcessState replay(config.n, config.r, out.seed);
    run(replay, StopCondition::at_termination());
    out.steps = replay.steps();
    out.terminated = true;
    return out;
  }

  ProcessState state(config.n, config.r, out.seed);
  CheckpointRecorder recorder(config, model, run_id, out.seed, out.checkpoints);
  const std::int64_t stop = model.i_max;
  switch (config.mode) {
    case Mode::Trajectory:
      recorder.run_to(state, config.drive_to_termination ? std::nullopt : std::optional(stop));
      break;
    case Mode::Independence:
      recorder.run_to(state, stop);
      out.mis.push_back(measure_mis(state, "i_max", out.seed, config.mis_budget));
      if (config.drive_to_termination) {
        recorder.run_to(state, std::nullopt);
        out.mis.push_back(measure_mis(state, "M", out.seed, config.mis_budget));
      }
      break;
    case Mode::Martingale: {
      Rng tracking(derive_seed(out.seed, stream::kTracking));
      const int ell = tracking_ell(model);
      auto sets = random_rm1_sets(config.n, config.r, config.tracked_A_count, tracking);
      auto pairs = random_set_pairs(config.n, ell, config.tracked_pair_count, tracking);
      MartingaleTracker tracker(model, std::move(sets), std::move(pairs), ell);
      tracker.observe(state, nullptr);
      recorder.run_to(state, stop, [&](const ProcessState& s, const StepOutcome& o) { tracker.observe(s, &o); });
      out.trace = tracker.take();
      if (config.drive_to_termination) recorder.run_to(state, std::nullopt);
      break;
    }
    case Mode::SubgraphFreq:
    case Mode::OracleTest:
      break;
  }
  out.steps = state.steps();
  out.terminated = state.terminated();
  return out;
}

json config_json(const RunConfig& config) {
  json j;
  j["n"] = config.n;
  j["r"] = config.r;
  j["master_seed"] = config.master_seed;
  j["runs"] = config.runs;
  j["mode"] = to_string(config.mode);
  j["constants"] = {{"zeta", config.constants.zeta},
                    {"gamma", config.constants.gamma},
                    {"epsilon", config.constants.epsilon},
                    {"W", config.constants.W},
                    {"kappa", config.constants.kappa}};
  j["checkpoint_every"] = config.checkpoint_every;
  j["ce_sample_size"] = config.ce_sample_size;
  j["tracked_A_count"] = config.tracked_A_count;
  j["tracked_pair_count"] = config.tracked_pair_count;
  j["i_max_override"] = config.i_max_override ? json(*config.i_max_override) : json(nullptr);
  j["drive_to_termination"] = config.drive_to_termination;
  j["output_path"] = config.output_path.generic_string();
  j["format"] = to_string(config.format);
  j["n_grid"] = config.n_grid;
  j["mis_budget"] = config.mis_budget;
  j["pattern"] = config.pattern;
  j["j"] = config.j ? json(*config.j) : json(nullptr);
  j["oracle_max_n"] = config.oracle_max_n;
  return j;
}

Table checkpoint_table(const std::vector<RunOutput>& outputs) {
  Table t{"checkpoints",
          {"run_id", "i", "t", "open_count", "q_pred", "ce_mean", "ce_min", "ce_max", "c_pred",
           "max_deg_rm1", "deg_pred", "max_codeg"},
          {}};
  for (const auto& run : outputs) {
    for (const auto& rec : run.checkpoints) {
      t.rows.push_back({rec.run_id, rec.i, rec.t, rec.open_count, rec.q_pred, rec.ce_mean(), rec.ce_min(),
                        rec.ce_max(), rec.c_pred, static_cast<std::int64_t>(rec.max_deg_rm1), rec.deg_pred,
                        static_cast<std::int64_t>(rec.max_codeg_rm1)});
    }
  }
  return t;
}

Table aggregate_table(const std::vector<ObservationRecord>& records) {
  Table t{"aggregate",
          {"i", "t", "runs", "open_mean", "open_std", "open_min", "open_max", "q_pred", "open_band_lo",
           "open_band_hi", "ce_mean", "ce_std", "ce_min", "ce_max", "c_pred", "ce_band_lo", "ce_band_hi",
           "max_deg_mean", "max_deg_max", "deg_pred", "max_codeg_mean", "max_codeg_max"},
          {}};
  for (const auto& a : aggregate(records)) {
    t.rows.push_back({a.i, a.t, static_cast<std::int64_t>(a.runs), a.open_mean, a.open_std, a.open_min,
                      a.open_max, a.q_pred, a.open_band_lo, a.open_band_hi, a.ce_mean, a.ce_std, a.ce_min,
                      a.ce_max, a.c_pred, a.ce_band_lo, a.ce_band_hi, a.max_deg_mean, a.max_deg_max,
                      a.deg_pred, a.max_codeg_mean, a.max_codeg_max});
  }
  return t;
}

Table independence_table(const std::vector<RunOutput>& outputs, const TrajectoryModel& model) {
  Table t{"independence",
          {"run_id", "stage", "i", "alpha", "lower_bound", "upper_bound", "exact", "nodes_expanded",
           "greedy", "scale", "ratio", "witness"},
          {}};
  const double scale = model.independence_scale();
  for (const auto& run : outputs) {
    for (const auto& row : run.mis) {
      t.rows.push_back({run.run_id, row.stage, row.i, static_cast<std::int64_t>(row.mis.alpha),
                        static_cast<std::int64_t>(row.mis.lower_bound),
                        static_cast<std::int64_t>(row.mis.upper_bound), row.mis.exact, row.mis.nodes_expanded,
                        static_cast<std::int64_t>(row.greedy), scale, row.mis.alpha / scale,
                        join_vertices(row.mis.witness)});
    }
  }
  return t;
}

Table scaling_table(const std::vector<ScalingRow>& rows) {
  Table t{"scaling",
          {"n", "r", "runs", "i_max", "mean_steps", "mean_alpha", "std_alpha", "scale", "ratio", "exact_runs",
           "mean_upper"},
          {}};
  for (const auto& row : rows) {
    t.rows.push_back({static_cast<std::int64_t>(row.n), static_cast<std::int64_t>(row.r),
                      static_cast<std::int64_t>(row.runs), row.i_max, row.mean_steps, row.mean_alpha,
                      row.std_alpha, row.scale, row.ratio, static_cast<std::int64_t>(row.exact_runs),
                      row.mean_upper});
  }
  return t;
}

std::vector<Table> martingale_tables(const std::vector<RunOutput>& outputs) {
  Table sets{"traces_sets", {"run_id", "set_id", "set", "i", "t", "Q_A", "d_A", "Y_plus", "Y_minus", "Z"}, {}};
  Table pairs{"traces_pairs", {"run_id", "pair_id", "i", "t", "Q_AB", "S", "X_plus", "X_minus", "tau"}, {}};
  Table summary{"martingale_summary",
                {"run_id", "kind", "id", "members", "tau", "tau_reached", "first_y_plus_negative",
                 "first_y_minus_positive", "first_z_positive", "first_x_plus_nonpositive",
                 "first_x_minus_nonnegative"},
                {}};
  for (const auto& run : outputs) {
    if (!run.trace) continue;
    const auto& tr = *run.trace;
    for (std::size_t id = 0; id < tr.sets.size(); ++id) {
      const auto& st = tr.sets[id];
      const auto members = join_vertices(st.a.vertices());
      for (std::size_t j = 0; j < st.steps.size(); ++j) {
        sets.rows.push_back({run.run_id, static_cast<std::uint64_t>(id), members, st.steps[j], st.t[j],
                             st.q_a[j], static_cast<std::int64_t>(st.degree[j]), st.y_plus[j], st.y_minus[j],
                             st.z[j]});
      }
      summary.rows.push_back({run.run_id, std::string("set"), static_cast<std::uint64_t>(id), members, Cell{},
                              Cell{}, opt_cell(st.first_y_plus_negative), opt_cell(st.first_y_minus_positive),
                              opt_cell(st.first_z_positive), Cell{}, Cell{}});
    }
    for (std::size_t id = 0; id < tr.pairs.size(); ++id) {
      const auto& pt = tr.pairs[id];
      for (std::size_t j = 0; j < pt.steps.size(); ++j) {
        pairs.rows.push_back({run.run_id, static_cast<std::uint64_t>(id), pt.steps[j], pt.t[j], pt.q_ab[j],
                              tr.S, pt.x_plus[j], pt.x_minus[j], pt.tau});
      }
      summary.rows.push_back({run.run_id, std::string("pair"), static_cast<std::uint64_t>(id),
                              join_vertices(pt.pair.a) + " | " + join_vertices(pt.pair.b), pt.tau,
                              pt.tau_reached, Cell{}, Cell{}, Cell{}, opt_cell(pt.first_x_plus_nonpositive),
                              opt_cell(pt.first_x_minus_nonnegative)});
    }
  }
  return {sets, pairs, summary};
}

Table oracle_table(const std::vector<RunOutput>& outputs) {
  Table t{"oracle_test", {"run_id", "steps", "partition_checks", "ce_checks", "ok", "failure"}, {}};
  for (const auto& run : outputs) {
    if (!run.oracle) continue;
    t.rows.push_back({run.run_id, run.steps, run.oracle->partition_checks, run.oracle->ce_checks,
                      run.oracle->failure.empty(), run.oracle->failure});
  }
  return t;
}

void prepare_output(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  if (!std::filesystem::is_directory(dir)) throw ConfigError("output path " + dir.string() + " is not a directory");
  const auto probe = dir / ".tfree-write-probe";
  {
    std::ofstream out(probe, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("output directory " + dir.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::Trajectory: return "trajectory";
    case Mode::Independence: return "independence";
    case Mode::Martingale: return "martingale";
    case Mode::SubgraphFreq: return "subgraph-freq";
    case Mode::OracleTest: return "oracle-test";
  }
  return "unknown";
}

std::string to_string(Format format) { return format == Format::Csv ? "csv" : "json"; }

Mode parse_mode(const std::string& text) {
  for (Mode m : {Mode::Trajectory, Mode::Independence, Mode::Martingale, Mode::SubgraphFreq, Mode::OracleTest}) {
    if (to_string(m) == text) return m;
  }
  throw ConfigError("unrecognized mode '" + text + "'");
}

Format parse_format(const std::string& text) {
  if (text == "csv") return Format::Csv;
  if (text == "json") return Format::Json;
  throw ConfigError("unrecognized format '" + text + "'");
}

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::vector<RSet> parse_pattern(const std::string& text, int n, int r) {
  std::vector<RSet> out;
  if (text.empty()) {
    if (2 * r > n) throw ConfigError("default pattern needs n >= 2r");
    std::vector<Vertex> a(static_cast<std::size_t>(r)), b(static_cast<std::size_t>(r));
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), r);
    return {RSet::from_vertices(a, n), RSet::from_vertices(b, n)};
  }
  if (text == "-") return out;  // empty pattern
  std::stringstream sets(text);
  std::string item;
  while (std::getline(sets, item, ';')) {
    std::vector<Vertex> vs;
    std::stringstream verts(item);
    std::string v;
    while (std::getline(verts, v, ',')) {
      int value = 0;
      const auto* first = v.data();
      const auto* last = v.data() + v.size();
      while (first < last && *first == ' ') ++first;
      const auto res = std::from_chars(first, last, value);
      if (res.ec != std::errc{} || res.ptr != last) throw ConfigError("bad vertex '" + v + "' in pattern");
      vs.push_back(value);
    }
    if (static_cast<int>(vs.size()) != r) throw ConfigError("pattern set '" + item + "' is not an r-set");
    try {
      out.push_back(RSet::from_vertices(vs, n));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("pattern: ") + e.what());
    }
  }
  return out;
}

void validate(const RunConfig& config) {
  if (config.r < 2 || config.r > kMaxUniformity) {
    throw ConfigError("r must lie in [2, " + std::to_string(kMaxUniformity) + "]");
  }
  if (config.n < config.r) throw ConfigError("n must be at least r");
  if (config.runs < 1) throw ConfigError("runs must be at least 1");
  try {
    config.constants.validate();
    if (binom(config.n, config.r) > std::numeric_limits<std::uint32_t>::max()) {
      throw ConfigError("C(n, r) too large");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::overflow_error& e) {
    throw ConfigError(e.what());
  }
  if (config.checkpoint_every < 0) throw ConfigError("checkpoint_every must be non-negative");
  if (config.ce_sample_size < 1) throw ConfigError("ce_sample_size must be at least 1");
  if (config.tracked_A_count < 0 || config.tracked_pair_count < 0) {
    throw ConfigError("tracked counts must be non-negative");
  }
  if (config.i_max_override && *config.i_max_override < 0) throw ConfigError("i_max_override must be non-negative");
  if (config.output_path.empty()) throw ConfigError("output path is empty");
  switch (config.mode) {
    case Mode::Independence:
      if (config.n > kMaxExactVertices) throw ConfigError("independence mode supports n <= 256");
      for (int n : config.n_grid) {
        if (n < config.r || n > kMaxExactVertices) throw ConfigError("n_grid entries must lie in [r, 256]");
      }
      if (config.mis_budget < 1) throw ConfigError("mis_budget must be positive");
      break;
    case Mode::SubgraphFreq: {
      parse_pattern(config.pattern, config.n, config.r);
      const auto model = effective_model(config);
      if (config.j && (*config.j < 0 || *config.j > model.i_max)) throw ConfigError("j must lie in [0, i_max]");
      break;
    }
    case Mode::OracleTest:
      if (config.n > config.oracle_max_n) {
        throw ConfigError("oracle-test needs n <= oracle_max_n (" + std::to_string(config.oracle_max_n) + ")");
      }
      break;
    case Mode::Trajectory:
    case Mode::Martingale:
      break;
  }
}

std::int64_t stop_step(const RunConfig& config, const TrajectoryModel& model) {
  return config.i_max_override ? *config.i_max_override : model.i_max;
}

std::int64_t checkpoint_cadence(const RunConfig& config, const TrajectoryModel& model) {
  if (config.checkpoint_every > 0) return config.checkpoint_every;
  if (std::isinf(model.s)) return 1;
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(model.s / 4.0)));
}

std::vector<AggregateRow> aggregate(const std::vector<ObservationRecord>& records) {
  std::map<std::int64_t, std::vector<const ObservationRecord*>> by_step;
  for (const auto& rec : records) by_step[rec.i].push_back(&rec);
  std::vector<AggregateRow> out;
  for (const auto& [i, group] : by_step) {
    AggregateRow a;
    a.i = i;
    a.runs = static_cast<int>(group.size());
    const auto& first = *group.front();
    a.t = first.t;
    a.q_pred = first.q_pred;
    a.open_band_lo = first.q_pred - first.open_band;
    a.open_band_hi = first.q_pred + first.open_band;
    a.c_pred = first.c_pred;
    a.ce_band_lo = first.c_pred - first.ce_band;
    a.ce_band_hi = first.c_pred + first.ce_band;
    a.deg_pred = first.deg_pred;

    std::vector<double> open, ce, deg, codeg;
    double ce_lo = std::numeric_limits<double>::quiet_NaN(), ce_hi = ce_lo;
    for (const auto* rec : group) {
      open.push_back(static_cast<double>(rec->open_count));
      deg.push_back(rec->max_deg_rm1);
      codeg.push_back(rec->max_codeg_rm1);
      if (!rec->ce_samples.empty()) {
        ce.push_back(rec->ce_mean());
        ce_lo = std::isnan(ce_lo) ? rec->ce_min() : std::min(ce_lo, rec->ce_min());
        ce_hi = std::isnan(ce_hi) ? rec->ce_max() : std::max(ce_hi, rec->ce_max());
      }
    }
    auto mean = [](const std::vector<double>& xs) {
      return xs.empty() ? std::numeric_limits<double>::quiet_NaN()
                        : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    };
    a.open_mean = mean(open);
    a.open_std = sample_std(open, a.open_mean);
    a.open_min = *std::min_element(open.begin(), open.end());
    a.open_max = *std::max_element(open.begin(), open.end());
    a.ce_mean = mean(ce);
    a.ce_std = ce.empty() ? std::numeric_limits<double>::quiet_NaN() : sample_std(ce, a.ce_mean);
    a.ce_min = ce_lo;
    a.ce_max = ce_hi;
    a.max_deg_mean = mean(deg);
    a.max_deg_max = *std::max_element(deg.begin(), deg.end());
    a.max_codeg_mean = mean(codeg);
    a.max_codeg_max = *std::max_element(codeg.begin(), codeg.end());
    out.push_back(a);
  }
  return out;
}

unsigned workers_from_env() {
  const char* text = std::getenv("TFREE_WORKERS");
  if (!text || !*text) return 1;
  unsigned value = 0;
  const auto* last = text + std::char_traits<char>::length(text);
  const auto res = std::from_chars(text, last, value);
  if (res.ec != std::errc{} || res.ptr != last || value == 0) {
    throw ConfigError(std::string("TFREE_WORKERS must be a positive integer, got '") + text + "'");
  }
  return value;
}

EnsembleOutcome run_ensemble(const RunConfig& config, unsigned workers) {
  validate(config);
  prepare_output(config.output_path);
  const auto base_model = scaling(config.n, config.r, config.constants);
  const auto model = effective_model(config);
  const auto& dir = config.output_path;

  EnsembleOutcome outcome;
  std::vector<RunOutput> outputs;
  std::vector<ScalingRow> scaling_rows;
  std::optional<SubgraphFrequency> frequency;

  if (config.mode == Mode::SubgraphFreq) {
    const auto pattern = parse_pattern(config.pattern, config.n, config.r);
    frequency = subgraph_frequency_test(pattern, config.j.value_or(model.i_max),
                                        static_cast<std::uint64_t>(config.runs), config.n, config.r,
                                        config.master_seed, config.constants);
  } else {
    outputs.resize(static_cast<std::size_t>(config.runs));
    parallel_for(outputs.size(), workers, [&](std::size_t run_id) {
      outputs[run_id] = execute_run(config, model, static_cast<std::uint64_t>(run_id));
    });
  }
  if (config.mode == Mode::Independence && !config.n_grid.empty()) {
    scaling_rows.resize(config.n_grid.size());
    parallel_for(config.n_grid.size(), workers, [&](std::size_t j) {
      const int n = config.n_grid[j];
      scaling_rows[j] = scaling_probe(std::span<const int>(&n, 1), config.r, config.runs, config.master_seed,
                                      config.constants, config.mis_budget)
                            .front();
    });
  }

  // Data files.
  if (config.mode != Mode::SubgraphFreq && config.mode != Mode::OracleTest) {
    outcome.files.push_back(write_table(checkpoint_table(outputs), dir, config.format));
    std::vector<ObservationRecord> all;
    for (const auto& run : outputs) all.insert(all.end(), run.checkpoints.begin(), run.checkpoints.end());
    outcome.files.push_back(write_table(aggregate_table(all), dir, config.format));
  }
  switch (config.mode) {
    case Mode::Independence:
      outcome.files.push_back(write_table(independence_table(outputs, base_model), dir, config.format));
      if (!scaling_rows.empty()) outcome.files.push_back(write_table(scaling_table(scaling_rows), dir, config.format));
      break;
    case Mode::Martingale:
      for (const auto& table : martingale_tables(outputs)) {
        outcome.files.push_back(write_table(table, dir, config.format));
      }
      break;
    case Mode::SubgraphFreq: {
      const auto& fr = *frequency;
      Table t{"subgraph_freq",
              {"L", "j", "runs", "hits", "empirical_p", "predicted_p", "ci_low", "ci_high"},
              {{static_cast<std::uint64_t>(fr.pattern_size), fr.j, fr.runs, fr.hits, fr.empirical_p,
                fr.predicted_p, fr.ci_low, fr.ci_high}}};
      outcome.files.push_back(write_table(t, dir, config.format));
      break;
    }
    case Mode::OracleTest:
      outcome.files.push_back(write_table(oracle_table(outputs), dir, config.format));
      for (const auto& run : outputs) {
        if (run.oracle && !run.oracle->failure.empty()) {
          outcome.checks_passed = false;
          outcome.failures.push_back("run " + std::to_string(run.run_id) + ": " + run.oracle->failure);
        }
      }
      break;
    case Mode::Trajectory:
      break;
  }

  // Manifest.
  json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kToolVersion;
  manifest["config"] = config_json(config);
  manifest["derived"] = {{"N", base_model.N},
                         {"D", base_model.D},
                         {"s", std::isfinite(base_model.s) ? json(base_model.s) : json(nullptr)},
                         {"i_max", base_model.i_max},
                         {"t_max", base_model.t_max},
                         {"stop_step", model.i_max},
                         {"checkpoint_every", checkpoint_cadence(config, model)},
                         {"lambda", base_model.lambda},
                         {"k", base_model.k},
                         {"ell", base_model.ell},
                         {"tracking_ell", tracking_ell(base_model)},
                         {"S", pair_total(tracking_ell(base_model), config.r)},
                         {"codegree_threshold", 5 * config.r},
                         {"max_degree_threshold_r_minus_1",
                          config.constants.epsilon * std::pow(config.n * std::log(config.n), 1.0 / (config.r - 1))},
                         {"max_degree_threshold_r",
                          config.constants.epsilon * std::pow(config.n * std::log(config.n), 1.0 / config.r)}};
  json warnings = json::array();
  for (const auto& w : config.constants.ordering_warnings()) warnings.push_back(w);
  if (tracking_ell(base_model) != base_model.ell) {
    warnings.push_back("ell = " + std::to_string(base_model.ell) + " exceeds n/2; pairs use ell = " +
                       std::to_string(tracking_ell(base_model)));
  }
  manifest["warnings"] = warnings;
  json runs = json::array();
  for (const auto& run : outputs) {
    runs.push_back({{"run_id", run.run_id},
                    {"seed", run.seed},
                    {"steps", run.steps},
                    {"terminated", run.terminated},
                    {"M", run.terminated ? json(run.steps) : json(nullptr)}});
  }
  manifest["runs"] = runs;
  manifest["checks_passed"] = outcome.checks_passed;
  json files = json::array();
  for (const auto& f : outcome.files) files.push_back(f.filename().generic_string());
  manifest["files"] = files;
  outcome.files.push_back(write_text(dir / "manifest.json", manifest.dump(2) + "\n"));
  return outcome;
}

}  // namespace tfree
