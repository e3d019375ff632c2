// SPDX-License-Identifier: Apache-2.0
#include "risgee/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "risgee/scenario.hpp"

#ifndef RISGEE_VERSION
#define RISGEE_VERSION "unknown"
#endif

namespace risgee::harness {

namespace {

struct MethodName {
  MethodId id;
  const char* name;
};

constexpr MethodName kMethodNames[] = {
    {MethodId::kMethod1Gee, "method1-gee"},     {MethodId::kMethod2Gee, "method2-gee"},
    {MethodId::kMethod1Sr, "method1-sr"},       {MethodId::kMethod2Sr, "method2-sr"},
    {MethodId::kUniformRandom, "uniform-random"}, {MethodId::kPassiveMethod1, "passive-method1"},
    {MethodId::kPassiveMethod2, "passive-method2"},
};

constexpr std::uint64_t kBaselineStream = 0x756e69666f726dULL;

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

CellStats aggregate(double grid_value, int ris_elements, MethodId method,
                    const std::vector<TrialOutcome>& outcomes) {
  CellStats s;
  s.grid_value = grid_value;
  s.ris_elements = ris_elements;
  s.method = method;
  s.trials = static_cast<int>(outcomes.size());
  std::vector<double> gee, rate, iters, secs;
  for (const auto& o : outcomes) {
    if (o.failed) {
      ++s.failures;
      continue;
    }
    if (!o.converged) ++s.unconverged;
    gee.push_back(o.gee_bits_per_joule);
    rate.push_back(o.sum_rate_bps);
    iters.push_back(o.outer_iterations);
    secs.push_back(o.seconds);
  }
  s.mean_gee = mean(gee);
  s.median_gee = median(gee);
  s.mean_sum_rate = mean(rate);
  s.mean_iterations = mean(iters);
  s.mean_seconds = mean(secs);
  s.median_seconds = median(secs);
  if (!outcomes.empty()) s.trajectory = outcomes.front().trajectory;
  return s;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

nlohmann::json options_json(const solvers::SolverOptions& o) {
  return {{"tol_outer", o.tol_outer},
          {"tol_sequential", o.tol_sequential},
          {"tol_dinkelbach", o.tol_dinkelbach},
          {"tol_inner", o.tol_inner},
          {"max_outer", o.max_outer},
          {"max_sequential", o.max_sequential},
          {"max_dinkelbach", o.max_dinkelbach},
          {"max_ascent", o.max_ascent},
          {"armijo", o.armijo},
          {"backtrack", o.backtrack},
          {"max_extrapolation", o.max_extrapolation},
          {"randomization_samples", o.randomization_samples},
          {"rank_tol", o.rank_tol},
          {"seed", o.seed}};
}

nlohmann::json spec_json(const ExperimentSpec& spec) {
  nlohmann::json methods = nlohmann::json::array();
  for (auto m : spec.methods) methods.push_back(method_id_name(m));
  return {{"experiment", spec.experiment},
          {"sweep", sweep_variable_name(spec.variable)},
          {"grid", spec.grid},
          {"ris_sizes", spec.ris_sizes},
          {"methods", methods},
          {"trials", spec.trials},
          {"config", spec.config_document},
          {"solver_options", options_json(spec.options)}};
}

std::string fingerprint(const ExperimentSpec& spec) {
  char buf[17];
  const std::uint64_t h = fnv1a(spec_json(spec).dump());
  for (int i = 15; i >= 0; --i) buf[15 - i] = "0123456789abcdef"[(h >> (4 * i)) & 0xF];
  buf[16] = '\0';
  return buf;
}

ScenarioConfig with_pmax(ScenarioConfig cfg, double p_max_dbw) {
  cfg.p_max_w = RVec::Constant(cfg.users, dbw_to_watts(p_max_dbw));
  return cfg;
}

// Runs every method on every trial at one configuration and appends one cell
// per method. Channels are drawn from `channel_cfg` so that sweeps over power
// parameters keep the same realizations at every grid point.
void run_cells(const ExperimentSpec& spec, const std::vector<MethodId>& methods,
               const ScenarioConfig& cfg, const std::vector<ChannelSet>& channels,
               double grid_value, SweepResult& out) {
  std::map<MethodId, std::vector<TrialOutcome>> outcomes;
  for (int t = 0; t < spec.trials; ++t) {
    const std::uint64_t key = Rng::derive(cfg.seed, static_cast<std::uint64_t>(t));
    for (MethodId m : methods) {
      TrialOutcome o = run_trial(m, channels[t], cfg, spec.options, key);
      if (!(spec.keep_trajectories && t == 0)) o.trajectory.clear();
      outcomes[m].push_back(std::move(o));
    }
  }
  for (MethodId m : methods) {
    CellStats s = aggregate(grid_value, cfg.ris_elements, m, outcomes[m]);
    out.attempted += s.trials;
    out.failures += s.failures;
    out.cells.push_back(std::move(s));
  }
}

std::vector<ChannelSet> draw_trials(const ScenarioConfig& cfg, int trials) {
  std::vector<ChannelSet> out;
  out.reserve(trials);
  for (int t = 0; t < trials; ++t) {
    out.push_back(scenario::build_scenario(cfg, static_cast<std::uint64_t>(t))
                      .realization.channels);
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << text;
  f.flush();
  if (!f) throw std::runtime_error("write to '" + path.string() + "' failed");
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidInput("results csv: bad number '" + s + "'");
  }
  return v;
}

int parse_int(const std::string& s) {
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidInput("results csv: bad integer '" + s + "'");
  }
  return v;
}

constexpr const char* kResultsHeader =
    "sweep,grid_value,ris_elements,method,trials,failures,unconverged,mean_gee_bits_per_joule,"
    "median_gee_bits_per_joule,mean_sum_rate_bps,mean_outer_iterations";

}  // namespace

std::string method_id_name(MethodId m) {
  for (const auto& e : kMethodNames) {
    if (e.id == m) return e.name;
  }
  return "unknown";
}

MethodId parse_method(const std::string& name) {
  for (const auto& e : kMethodNames) {
    if (name == e.name) return e.id;
  }
  throw ConfigError("unknown method '" + name + "'");
}

std::vector<MethodId> parse_method_list(const std::string& list) {
  std::vector<MethodId> out;
  for (const auto& item : split(list, ',')) {
    const MethodId m = parse_method(item);
    if (std::find(out.begin(), out.end(), m) != out.end()) {
      throw ConfigError("method '" + item + "' listed twice");
    }
    out.push_back(m);
  }
  if (out.empty()) throw ConfigError("method list is empty");
  return out;
}

Profile profile(const std::string& name) {
  Profile p;
  p.name = name;
  p.pmax_grid_dbw = {-40, -30, -20, -10, 0, 10, 20};
  p.pcn_grid_dbm = {0, 5, 10, 15, 20, 25, 30};
  p.timing_grid_dbw = {-40, -20, 0, 20};
  if (name == "desk") {
    p.pcn_ris_sizes = {16, 24, 32};
    return p;
  }
  if (name == "paper") {
    p.ris_elements = 100;
    p.users = 4;
    p.bs_antennas = 4;
    p.pcn_ris_sizes = {100, 150, 200};
    return p;
  }
  throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
}

nlohmann::json apply_profile(const nlohmann::json& doc, const Profile& prof) {
  nlohmann::json out = doc;
  out["ris_elements"] = prof.ris_elements;
  out["users"] = prof.users;
  out["bs_antennas"] = prof.bs_antennas;
  return out;
}

std::string sweep_variable_name(SweepVariable v) {
  return v == SweepVariable::kPmaxDbw ? "p_max_dbw" : "pcn_dbm";
}

void ExperimentSpec::validate() const {
  if (grid.empty()) throw ConfigError("experiment grid is empty");
  if (methods.empty()) throw ConfigError("experiment method set is empty");
  if (trials < 1) throw ConfigError("trial count must be >= 1");
  for (int n : ris_sizes) {
    if (n < 1) throw ConfigError("RIS sizes must be >= 1");
  }
  try {
    base.validate();
    options.validate();
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
}

double SweepResult::failure_rate() const {
  return attempted > 0 ? static_cast<double>(failures) / attempted : 0.0;
}

const CellStats& SweepResult::cell(double grid_value, int ris_elements, MethodId method) const {
  for (const auto& c : cells) {
    if (c.grid_value == grid_value && c.ris_elements == ris_elements && c.method == method) {
      return c;
    }
  }
  throw std::out_of_range("no cell for " + method_id_name(method) + " at " +
                          format_double(grid_value) + ", N = " + std::to_string(ris_elements));
}

GeeBreakdown run_baseline_e(const ChannelSet& ch, const ScenarioConfig& cfg, Rng& rng) {
  const ScenarioConfig pcfg = passive_variant(cfg);
  ch.check(pcfg);
  Allocation a;
  a.gamma = CVec(ch.elements());
  for (Eigen::Index n = 0; n < a.gamma.size(); ++n) a.gamma(n) = rng.unit_phase();
  a.p = pcfg.p_max_w;
  a.filters = model::mmse_filters(a.gamma, a.p, ch, pcfg);
  return model::gee(a, ch, pcfg);
}

TrialOutcome run_trial(MethodId method, const ChannelSet& ch, const ScenarioConfig& cfg,
                       const solvers::SolverOptions& opts, std::uint64_t trial_key) {
  TrialOutcome out;
  try {
    if (method == MethodId::kUniformRandom) {
      Rng rng(Rng::derive(trial_key, kBaselineStream));
      const GeeBreakdown g = run_baseline_e(ch, cfg, rng);
      out.gee_bits_per_joule = g.gee_bits_per_joule;
      out.sum_rate_bps = g.sum_rate_bps;
      out.trajectory = {g.gee_bits_per_joule};
      return out;
    }
    solvers::SolveReport r;
    switch (method) {
      case MethodId::kMethod1Gee:
        r = solvers::method1_solve(ch, cfg, solvers::default_init(ch, cfg), opts);
        break;
      case MethodId::kMethod2Gee:
        r = solvers::method2_solve(ch, cfg, solvers::default_init(ch, cfg), opts);
        break;
      case MethodId::kMethod1Sr:
        r = solvers::sum_rate_mode(ch, cfg, solvers::Method::kAlternating, opts);
        break;
      case MethodId::kMethod2Sr:
        r = solvers::sum_rate_mode(ch, cfg, solvers::Method::kEmbeddedMmse, opts);
        break;
      case MethodId::kPassiveMethod1:
        r = solvers::passive_solve(ch, cfg, solvers::Method::kAlternating, opts);
        break;
      case MethodId::kPassiveMethod2:
      default:
        r = solvers::passive_solve(ch, cfg, solvers::Method::kEmbeddedMmse, opts);
        break;
    }
    out.gee_bits_per_joule = r.final.gee_bits_per_joule;
    out.sum_rate_bps = r.final.sum_rate_bps;
    out.outer_iterations = r.outer_iterations;
    out.seconds = r.times.total_s;
    out.converged = r.converged;
    out.trajectory = std::move(r.gee_trajectory);
  } catch (const std::exception& e) {
    out.failed = true;
    out.converged = false;
    out.error = e.what();
  }
  return out;
}

SweepResult sweep_pmax(const ExperimentSpec& spec) {
  spec.validate();
  SweepResult out;
  out.variable = SweepVariable::kPmaxDbw;
  out.fingerprint = fingerprint(spec);
  const auto channels = draw_trials(spec.base, spec.trials);
  for (double p : spec.grid) {
    run_cells(spec, spec.methods, with_pmax(spec.base, p), channels, p, out);
  }
  return out;
}

SweepResult sweep_pcn(const ExperimentSpec& spec) {
  spec.validate();
  SweepResult out;
  out.variable = SweepVariable::kPcnDbm;
  out.fingerprint = fingerprint(spec);
  const std::vector<int> sizes =
      spec.ris_sizes.empty() ? std::vector<int>{spec.base.ris_elements} : spec.ris_sizes;
  for (int n : sizes) {
    ScenarioConfig cfg = spec.base;
    cfg.ris_elements = n;
    const auto channels = draw_trials(cfg, spec.trials);
    for (double pcn : spec.grid) {
      cfg.pcn_w = dbm_to_watts(pcn);
      run_cells(spec, spec.methods, cfg, channels, pcn, out);
    }
  }
  return out;
}

std::vector<Crossover> find_crossovers(const SweepResult& result, MethodId active,
                                       MethodId passive) {
  std::vector<int> sizes;
  std::vector<double> grid;
  for (const auto& c : result.cells) {
    if (std::find(sizes.begin(), sizes.end(), c.ris_elements) == sizes.end()) {
      sizes.push_back(c.ris_elements);
    }
    if (std::find(grid.begin(), grid.end(), c.grid_value) == grid.end()) {
      grid.push_back(c.grid_value);
    }
  }
  std::sort(grid.begin(), grid.end());
  std::vector<Crossover> out;
  for (int n : sizes) {
    Crossover x;
    x.ris_elements = n;
    double prev_gap = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double gap = result.cell(grid[i], n, passive).mean_gee -
                         result.cell(grid[i], n, active).mean_gee;
      if (gap > 0.0) {
        if (i == 0) {
          x.below_grid = true;
          x.lo = x.hi = x.estimate = grid[0];
        } else {
          x.found = true;
          x.lo = grid[i - 1];
          x.hi = grid[i];
          x.estimate = x.lo + (x.hi - x.lo) * (-prev_gap) / (gap - prev_gap);
        }
        break;
      }
      prev_gap = gap;
    }
    out.push_back(x);
  }
  return out;
}

TimingTable timing_table(const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.methods = {MethodId::kMethod1Gee, MethodId::kPassiveMethod1, MethodId::kMethod2Gee,
               MethodId::kPassiveMethod2};
  TimingTable out;
  out.raw = sweep_pmax(s);
  std::vector<double> pmax, ratio;
  for (double p : s.grid) {
    TimingRow row;
    row.p_max_dbw = p;
    row.t1a = out.raw.cell(p, s.base.ris_elements, MethodId::kMethod1Gee).median_seconds;
    row.t1p = out.raw.cell(p, s.base.ris_elements, MethodId::kPassiveMethod1).median_seconds;
    row.t2a = out.raw.cell(p, s.base.ris_elements, MethodId::kMethod2Gee).median_seconds;
    row.t2p = out.raw.cell(p, s.base.ris_elements, MethodId::kPassiveMethod2).median_seconds;
    pmax.push_back(p);
    ratio.push_back(row.r1a_1p());
    out.rows.push_back(row);
  }
  out.spearman_1a_1p = pmax.size() >= 2 ? spearman(pmax, ratio) : 0.0;
  return out;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidInput("spearman: need two equal-length samples of size >= 2");
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double mx = mean(rx);
  const double my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string results_csv(const SweepResult& result) {
  std::string out = std::string(kResultsHeader) + "\n";
  const std::string sweep = sweep_variable_name(result.variable);
  for (const auto& c : result.cells) {
    out += sweep + "," + format_double(c.grid_value) + "," + std::to_string(c.ris_elements) + "," +
           method_id_name(c.method) + "," + std::to_string(c.trials) + "," +
           std::to_string(c.failures) + "," + std::to_string(c.unconverged) + "," +
           format_double(c.mean_gee) + "," + format_double(c.median_gee) + "," +
           format_double(c.mean_sum_rate) + "," + format_double(c.mean_iterations) + "\n";
  }
  return out;
}

std::vector<CellStats> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw InvalidInput("results csv: missing or unexpected header");
  }
  std::vector<CellStats> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 11) throw InvalidInput("results csv: expected 11 fields in '" + line + "'");
    CellStats c;
    c.grid_value = parse_double(f[1]);
    c.ris_elements = parse_int(f[2]);
    try {
      c.method = parse_method(f[3]);
    } catch (const ConfigError& e) {
      throw InvalidInput(std::string("results csv: ") + e.what());
    }
    c.trials = parse_int(f[4]);
    c.failures = parse_int(f[5]);
    c.unconverged = parse_int(f[6]);
    c.mean_gee = parse_double(f[7]);
    c.median_gee = parse_double(f[8]);
    c.mean_sum_rate = parse_double(f[9]);
    c.mean_iterations = parse_double(f[10]);
    out.push_back(c);
  }
  return out;
}

std::string timing_csv(const SweepResult& result) {
  std::string out = "sweep,grid_value,ris_elements,method,mean_seconds,median_seconds\n";
  const std::string sweep = sweep_variable_name(result.variable);
  for (const auto& c : result.cells) {
    out += sweep + "," + format_double(c.grid_value) + "," + std::to_string(c.ris_elements) + "," +
           method_id_name(c.method) + "," + format_double(c.mean_seconds) + "," +
           format_double(c.median_seconds) + "\n";
  }
  return out;
}

std::string timing_table_csv(const TimingTable& table) {
  std::string out = "p_max_dbw,t1a_over_t1p,t2a_over_t2p,t2p_over_t1p,t2a_over_t1a\n";
  for (const auto& r : table.rows) {
    out += format_double(r.p_max_dbw) + "," + format_double(r.r1a_1p()) + "," +
           format_double(r.r2a_2p()) + "," + format_double(r.r2p_1p()) + "," +
           format_double(r.r2a_1a()) + "\n";
  }
  return out;
}

nlohmann::json sidecar(const SweepResult& result, const ExperimentSpec& spec) {
  nlohmann::json j = spec_json(spec);
  j["schema"] = "risgee-results/1";
  j["seed"] = spec.base.seed;
  j["generator"] = std::string(Rng::kName);
  j["version"] = build_version();
  j["fingerprint"] = result.fingerprint;
  j["attempted"] = result.attempted;
  j["failures"] = result.failures;
  j["channel_model"] = {
      {"los_component", "random-phase unit-modulus entries, drawn per realization"},
      {"pathloss", "(d / ref_distance_m)^-pathloss_exponent times ref_gain_db"},
      {"direct_link", false}};
  return j;
}

std::vector<std::string> emit_results(const SweepResult& result, const ExperimentSpec& spec,
                                      const std::string& dir, const std::string& stem) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  std::error_code ec;
  fs::create_directories(base, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + dir + "': " + ec.message());
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& text) {
    const fs::path p = base / name;
    write_file(p, text);
    written.push_back(p.string());
  };
  emit(stem + ".csv", results_csv(result));
  emit(stem + "_timing.csv", timing_csv(result));
  emit(stem + ".json", sidecar(result, spec).dump(2) + "\n");
  const bool any_trajectory = std::any_of(result.cells.begin(), result.cells.end(),
                                          [](const CellStats& c) { return !c.trajectory.empty(); });
  if (spec.keep_trajectories && any_trajectory) {
    std::string text = "grid_value,ris_elements,method,iteration,gee_bits_per_joule\n";
    for (const auto& c : result.cells) {
      for (std::size_t i = 0; i < c.trajectory.size(); ++i) {
        text += format_double(c.grid_value) + "," + std::to_string(c.ris_elements) + "," +
                method_id_name(c.method) + "," + std::to_string(i) + "," +
                format_double(c.trajectory[i]) + "\n";
      }
    }
    emit(stem + "_trajectory.csv", text);
  }
  return written;
}

std::string build_version() { return RISGEE_VERSION; }

}  // namespace risgee::harness
