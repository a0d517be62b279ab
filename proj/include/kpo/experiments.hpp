// Copyright 2026 The kpo-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Fidelity sweeps over gate angles, flat key=value configs, and CSV output.

#pragma once

#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "kpo/gates.hpp"

#ifndef KPO_VERSION
#define KPO_VERSION "0.1.0"
#endif

namespace kpo {

inline constexpr std::string_view kVersion = KPO_VERSION;

enum class Experiment { rz_sweep, rx_sweep, zz_sweep, init_check };
enum class GridSpacing { linear, log };

inline std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::rz_sweep: return "rz_sweep";
    case Experiment::rx_sweep: return "rx_sweep";
    case Experiment::zz_sweep: return "zz_sweep";
    case Experiment::init_check: return "init_check";
  }
  return "unknown";
}

inline std::optional<Experiment> experiment_from_string(std::string_view s) {
  if (s == "rz_sweep" || s == "rz-sweep") return Experiment::rz_sweep;
  if (s == "rx_sweep" || s == "rx-sweep") return Experiment::rx_sweep;
  if (s == "zz_sweep" || s == "zz-sweep") return Experiment::zz_sweep;
  if (s == "init_check" || s == "init-check") return Experiment::init_check;
  return std::nullopt;
}

inline std::string_view to_string(GridSpacing s) { return s == GridSpacing::log ? "log" : "linear"; }

struct SweepConfig {
  Experiment experiment = Experiment::rz_sweep;
  // Swept quantity: phi (rz), Delta0/K (rx), Theta (zz), T_init*K (init_check).
  double grid_start = -std::numbers::pi;
  double grid_stop = std::numbers::pi;
  int grid_count = 41;
  GridSpacing grid_spacing = GridSpacing::linear;
  std::vector<double> grid_values;  // overrides start/stop/count when non-empty

  double kerr = 1.0;
  double pump = kDefaultPump;
  double gate_time = kDefaultRzGateTime;
  int n_max = kDefaultNmax;
  double step = 1e-3;
  ScheduleKind ramp = ScheduleKind::sine_squared;
  int sample_every = 100;

  int workers = 1;
  bool strict = false;
  std::string output;
  std::string wigner_output;  // init_check only
  double wigner_extent = 6.0;
  int wigner_points = 121;

  bool operator==(const SweepConfig&) const = default;

  KpoParams params() const { return {kerr, pump, 0.0, n_max}; }

  std::vector<double> grid() const {
    if (!grid_values.empty()) return grid_values;
    std::vector<double> g(grid_count);
    for (int i = 0; i < grid_count; ++i) {
      const double f = grid_count == 1 ? 0.0 : static_cast<double>(i) / (grid_count - 1);
      if (grid_spacing == GridSpacing::log) {
        g[i] = std::exp(std::log(grid_start) + f * (std::log(grid_stop) - std::log(grid_start)));
      } else {
        g[i] = grid_start + f * (grid_stop - grid_start);
      }
    }
    if (grid_count > 1) g.back() = grid_stop;
    return g;
  }
};

/// Defaults per experiment, matching the standard protocol parameters.
inline SweepConfig default_config(Experiment e) {
  SweepConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::rz_sweep:
      break;
    case Experiment::rx_sweep:
      c.grid_start = 0.0;
      c.grid_stop = 2.5;
      c.grid_count = 26;
      c.gate_time = kDefaultRxGateTime;
      break;
    case Experiment::zz_sweep:
      c.grid_start = 0.0;
      c.grid_stop = std::numbers::pi;
      c.grid_count = 33;
      c.gate_time = kDefaultZzGateTime;
      break;
    case Experiment::init_check:
      c.grid_values = {5.0, 10.0, 20.0, 50.0, 100.0};
      c.grid_start = 5.0;
      c.grid_stop = 100.0;
      c.grid_count = 5;
      c.grid_spacing = GridSpacing::log;
      c.gate_time = kDefaultInitTime;
      break;
  }
  return c;
}

// --- parsing ---------------------------------------------------------------------

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::optional<double> parse_plain_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

/// Accepts plain numbers and multiples of pi: "pi", "-pi/2", "0.5*pi", "3pi/4".
inline double parse_real(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  auto fail = [&]() -> double {
    throw Error(ErrorKind::config, "key '" + std::string(key) + "': not a number: '" +
                                       std::string(text) + "'");
  };
  const auto pi_pos = s.find("pi");
  if (pi_pos == std::string::npos) {
    auto v = parse_plain_double(s);
    return v ? *v : fail();
  }
  std::string coef = s.substr(0, pi_pos);
  std::string rest = s.substr(pi_pos + 2);
  double c = 1.0;
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  if (coef == "-") {
    c = -1.0;
  } else if (!coef.empty() && coef != "+") {
    auto v = parse_plain_double(coef);
    if (!v) fail();
    c = *v;
  }
  double d = 1.0;
  if (!rest.empty()) {
    if (rest.front() != '/') fail();
    auto v = parse_plain_double(rest.substr(1));
    if (!v || *v == 0.0) fail();
    d = *v;
  }
  return c * std::numbers::pi / d;
}

inline int parse_int(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::config, "key '" + std::string(key) + "': not an integer: '" + s + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw Error(ErrorKind::config, "key '" + std::string(key) + "': not a boolean: '" + s + "'");
}

inline std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

/// Parses "key = value" lines; '#' starts a comment. When `experiment` is given
/// (e.g. by the CLI subcommand) it selects the defaults and must agree with any
/// `experiment` key in the text.
inline SweepConfig parse_config(std::string_view text,
                                std::optional<Experiment> experiment = std::nullopt) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::config, "line " + std::to_string(lineno) + ": expected key = value");
    }
    entries.emplace_back(detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }

  for (const auto& [k, v] : entries) {
    if (k != "experiment") continue;
    const auto e = experiment_from_string(v);
    if (!e) throw Error(ErrorKind::config, "unknown experiment '" + v + "'");
    if (experiment && *experiment != *e) {
      throw Error(ErrorKind::config, "config is for experiment '" + v + "', requested '" +
                                         std::string(to_string(*experiment)) + "'");
    }
    experiment = e;
  }
  SweepConfig c = default_config(experiment.value_or(Experiment::rz_sweep));

  bool range_given = false;
  bool values_given = false;
  for (const auto& [k, v] : entries) {
    if (k == "experiment") {
      continue;
    } else if (k == "grid_start") {
      c.grid_start = detail::parse_real(k, v);
      range_given = true;
    } else if (k == "grid_stop") {
      c.grid_stop = detail::parse_real(k, v);
      range_given = true;
    } else if (k == "grid_count") {
      c.grid_count = detail::parse_int(k, v);
      range_given = true;
    } else if (k == "grid_spacing") {
      if (v == "linear") {
        c.grid_spacing = GridSpacing::linear;
      } else if (v == "log") {
        c.grid_spacing = GridSpacing::log;
      } else {
        throw Error(ErrorKind::config, "grid_spacing must be linear or log");
      }
      range_given = true;
    } else if (k == "grid_values") {
      c.grid_values.clear();
      std::string item;
      std::istringstream items(v);
      while (std::getline(items, item, ',')) c.grid_values.push_back(detail::parse_real(k, item));
      values_given = true;
    } else if (k == "kerr") {
      c.kerr = detail::parse_real(k, v);
    } else if (k == "pump") {
      c.pump = detail::parse_real(k, v);
    } else if (k == "gate_time") {
      c.gate_time = detail::parse_real(k, v);
    } else if (k == "n_max") {
      c.n_max = detail::parse_int(k, v);
    } else if (k == "step") {
      c.step = detail::parse_real(k, v);
    } else if (k == "ramp") {
      const auto r = schedule_kind_from_string(v);
      if (!r) throw Error(ErrorKind::config, "unknown ramp '" + v + "'");
      c.ramp = *r;
    } else if (k == "sample_every") {
      c.sample_every = detail::parse_int(k, v);
    } else if (k == "workers") {
      c.workers = detail::parse_int(k, v);
    } else if (k == "strict") {
      c.strict = detail::parse_bool(k, v);
    } else if (k == "output") {
      c.output = v;
    } else if (k == "wigner_output") {
      c.wigner_output = v;
    } else if (k == "wigner_extent") {
      c.wigner_extent = detail::parse_real(k, v);
    } else if (k == "wigner_points") {
      c.wigner_points = detail::parse_int(k, v);
    } else {
      throw Error(ErrorKind::config, "unknown key '" + k + "'");
    }
  }
  // An explicit range replaces a default value list.
  if (range_given && !values_given) c.grid_values.clear();
  return c;
}

inline SweepConfig load_config(const std::string& path,
                               std::optional<Experiment> experiment = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), experiment);
}

/// Serializes every field; parse_config(to_config_string(c)) == c.
inline std::string to_config_string(const SweepConfig& c) {
  std::ostringstream out;
  out << "experiment = " << to_string(c.experiment) << '\n';
  out << "grid_start = " << detail::format_exact(c.grid_start) << '\n';
  out << "grid_stop = " << detail::format_exact(c.grid_stop) << '\n';
  out << "grid_count = " << c.grid_count << '\n';
  out << "grid_spacing = " << to_string(c.grid_spacing) << '\n';
  if (!c.grid_values.empty()) {
    out << "grid_values = ";
    for (std::size_t i = 0; i < c.grid_values.size(); ++i) {
      out << (i ? ", " : "") << detail::format_exact(c.grid_values[i]);
    }
    out << '\n';
  }
  out << "kerr = " << detail::format_exact(c.kerr) << '\n';
  out << "pump = " << detail::format_exact(c.pump) << '\n';
  out << "gate_time = " << detail::format_exact(c.gate_time) << '\n';
  out << "n_max = " << c.n_max << '\n';
  out << "step = " << detail::format_exact(c.step) << '\n';
  out << "ramp = " << to_string(c.ramp) << '\n';
  out << "sample_every = " << c.sample_every << '\n';
  out << "workers = " << c.workers << '\n';
  out << "strict = " << (c.strict ? "true" : "false") << '\n';
  if (!c.output.empty()) out << "output = " << c.output << '\n';
  if (!c.wigner_output.empty()) out << "wigner_output = " << c.wigner_output << '\n';
  out << "wigner_extent = " << detail::format_exact(c.wigner_extent) << '\n';
  out << "wigner_points = " << c.wigner_points << '\n';
  return out.str();
}

/// Hard errors throw; grids outside the tested ranges produce warnings, or
/// errors when `strict` is set.
inline std::vector<std::string> validate(const SweepConfig& c) {
  auto bad = [](const std::string& msg) { throw Error(ErrorKind::config, msg); };
  if (c.grid_values.empty() && c.grid_count < 2) bad("grid_count must be >= 2");
  if (!c.grid_values.empty() && c.grid_values.size() < 2) bad("grid_values needs >= 2 entries");
  if (c.grid_values.empty() && c.grid_spacing == GridSpacing::log &&
      !(c.grid_start > 0.0 && c.grid_stop > 0.0)) {
    bad("log grid needs positive endpoints");
  }
  if (!(c.kerr > 0.0)) bad("kerr must be positive");
  if (!(c.pump > 0.0)) bad("pump must be positive");
  if (!(c.gate_time > 0.0)) bad("gate_time must be positive");
  if (!(c.step > 0.0)) bad("step must be positive");
  if (c.n_max < 1) bad("n_max must be >= 1");
  if (c.sample_every < 1) bad("sample_every must be >= 1");
  if (c.workers < 1) bad("workers must be >= 1");
  if (c.wigner_points < 2 || !(c.wigner_extent > 0.0)) bad("invalid Wigner grid");

  double lo = 0.0;
  double hi = 0.0;
  const char* what = "";
  switch (c.experiment) {
    case Experiment::rz_sweep:
      lo = -std::numbers::pi, hi = std::numbers::pi, what = "phi";
      break;
    case Experiment::rx_sweep:
      lo = 0.0, hi = 2.5 * c.kerr, what = "Delta0";
      break;
    case Experiment::zz_sweep:
      lo = 0.0, hi = std::numbers::pi, what = "Theta";
      break;
    case Experiment::init_check:
      lo = 1.0, hi = 1000.0, what = "T_init";
      break;
  }
  std::vector<std::string> warnings;
  constexpr double kSlack = 1e-12;
  for (double v : c.grid()) {
    if (c.experiment == Experiment::init_check && !(v > 0.0)) bad("T_init values must be positive");
    if (c.experiment == Experiment::rx_sweep && v < 0.0) bad("Delta0 must be nonnegative");
    if (v < lo - kSlack || v > hi + kSlack) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s=%.6g outside the tested range [%.6g, %.6g]", what, v, lo,
                    hi);
      if (c.strict) bad(buf);
      warnings.emplace_back(buf);
    }
  }
  if (!truncation_adequate(c.params().alpha(), c.n_max)) {
    const std::string msg = "n_max=" + std::to_string(c.n_max) + " is small for pump " +
                            detail::format_g9(c.pump);
    if (c.strict) bad(msg);
    warnings.push_back(msg);
  }
  return warnings;
}

// --- results -------------------------------------------------------------------------

struct SweepTable {
  std::vector<std::string> metadata;  // "key=value", written as '# ' lines
  std::vector<std::string> columns;   // numeric columns; a status column follows
  std::vector<std::vector<double>> rows;
  std::vector<std::string> status;
  std::vector<std::string> notes;     // per-row diagnostics, written after the table

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    throw Error(ErrorKind::out_of_range, "no column '" + std::string(name) + "'");
  }
  std::vector<double> values(std::string_view name) const {
    const std::size_t j = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[j]);
    return out;
  }
};

struct SweepOutput {
  SweepTable table;
  std::optional<WignerMap> wigner;  // init_check with wigner_output
};

inline void write_csv(std::ostream& out, const SweepTable& t) {
  for (const auto& m : t.metadata) out << "# " << m << '\n';
  for (std::size_t j = 0; j < t.columns.size(); ++j) out << (j ? "," : "") << t.columns[j];
  out << ",status\n";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < t.rows[i].size(); ++j) {
      out << (j ? "," : "") << detail::format_g9(t.rows[i][j]);
    }
    out << ',' << t.status[i] << '\n';
  }
  for (const auto& n : t.notes) out << "# note: " << n << '\n';
}

inline std::string to_csv(const SweepTable& t) {
  std::ostringstream out;
  write_csv(out, t);
  return out.str();
}

/// gnuplot script plotting every numeric column against the first.
inline void write_gnuplot_script(std::ostream& out, const SweepTable& t,
                                 const std::string& csv_path) {
  out << "set datafile separator ','\n";
  out << "set key autotitle columnhead\n";
  out << "set xlabel '" << t.columns.front() << "'\n";
  out << "set grid\n";
  out << "plot ";
  for (std::size_t j = 1; j < t.columns.size(); ++j) {
    out << (j > 1 ? ", \\\n     " : "") << "'" << csv_path << "' using 1:" << (j + 1)
        << " with linespoints";
  }
  out << '\n';
}

// --- sweeps ---------------------------------------------------------------------------

namespace detail {

/// Runs fn(i) for i in [0, count) on up to `workers` threads. fn must write
/// only to slot i of its outputs.
template <class F>
void parallel_rows(int count, int workers, F&& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline std::vector<std::string> common_metadata(const SweepConfig& c) {
  std::vector<std::string> m;
  m.push_back("kpo-sim=" + std::string(kVersion));
  m.push_back("experiment=" + std::string(to_string(c.experiment)));
  m.push_back("units=hbar=1; rates in units of K; times in units of 1/K");
  m.push_back("kerr=" + format_exact(c.kerr));
  m.push_back("pump=" + format_exact(c.pump));
  m.push_back("detuning=0");
  if (c.experiment != Experiment::init_check) m.push_back("gate_time=" + format_exact(c.gate_time));
  m.push_back("n_max=" + std::to_string(c.n_max));
  m.push_back("integrator=rk4 fixed step");
  m.push_back("step=" + format_exact(c.step));
  m.push_back("sample_every=" + std::to_string(c.sample_every));
  std::string g = "grid=";
  const auto grid = c.grid();
  for (std::size_t i = 0; i < grid.size(); ++i) g += (i ? ";" : "") + format_g9(grid[i]);
  m.push_back(g);
  m.push_back("fidelity=|<ideal|psi_out>|^2 in the full Fock space (state fidelity, not process)");
  m.push_back("qubit_basis=|0>,|1> = (|C+> +- |C->)/sqrt2, C+- = normalized cats at +-sqrt(p0/K)");
  m.push_back("leakage=1 - |projection onto qubit subspace|^2");
  m.push_back("fock_tail=max population of the top two Fock levels during evolution");
  return m;
}

struct RowOutcome {
  std::vector<double> values;
  std::string status = "ok";
  std::vector<std::string> notes;
};

template <class F>
RowOutcome guarded_row(std::size_t columns, F&& body) {
  RowOutcome out;
  try {
    out = body();
    if (!out.notes.empty() && out.status == "ok") out.status = "warning";
  } catch (const Error& e) {
    out.values.assign(columns, std::numeric_limits<double>::quiet_NaN());
    out.status = e.kind() == ErrorKind::integration_diverged ? "diverged" : "error";
    out.notes = {e.what()};
  }
  return out;
}

template <class RowFn>
SweepTable run_rows(const SweepConfig& c, std::vector<std::string> columns,
                    std::vector<std::string> metadata, RowFn&& row) {
  const auto grid = c.grid();
  const int n = static_cast<int>(grid.size());
  std::vector<RowOutcome> outcomes(n);
  parallel_rows(n, c.workers, [&](int i) {
    outcomes[i] = guarded_row(columns.size(), [&] { return row(grid[i]); });
    outcomes[i].values.front() = grid[i];
  });
  SweepTable t{std::move(metadata), std::move(columns), {}, {}, {}};
  for (int i = 0; i < n; ++i) {
    t.rows.push_back(std::move(outcomes[i].values));
    t.status.push_back(outcomes[i].status);
    for (const auto& note : outcomes[i].notes) {
      t.notes.push_back("row " + std::to_string(i) + ": " + note);
    }
  }
  return t;
}

inline IntegrateOptions integrate_options(const SweepConfig& c) {
  IntegrateOptions o;
  o.step = c.step;
  o.sample_every = c.sample_every;
  return o;
}

inline void require_experiment(const SweepConfig& c, Experiment e) {
  if (c.experiment != e) {
    throw Error(ErrorKind::config, "config is for " + std::string(to_string(c.experiment)) +
                                       ", expected " + std::string(to_string(e)));
  }
}

}  // namespace detail

/// Rows (phi, fidelity, leakage, norm_drift, fock_tail); input (|0>+|1>)/sqrt2,
/// ideal output (e^{-i phi/2}|0> + e^{i phi/2}|1>)/sqrt2.
inline SweepTable run_rz_sweep(const SweepConfig& c) {
  detail::require_experiment(c, Experiment::rz_sweep);
  validate(c);
  const KpoParams params = c.params();
  const QubitBasis basis = QubitBasis::make(params);
  const double s = 1.0 / std::sqrt(2.0);
  const StateVector input = basis.embed(s, s);
  auto meta = detail::common_metadata(c);
  meta.push_back("input_state=(|0>+|1>)/sqrt2");
  meta.push_back("ideal_output=(e^{-i phi/2}|0> + e^{i phi/2}|1>)/sqrt2");
  meta.push_back("drive=E(t) = pi phi/(8 Tg sqrt(p0/K)) sin(pi t/Tg)");
  return detail::run_rows(
      c, {"phi", "fidelity", "leakage", "norm_drift", "fock_tail"}, std::move(meta),
      [&](double phi) {
        const auto r = apply_rz(phi, c.gate_time, params, input, detail::integrate_options(c));
        const StateVector ideal = basis.embed(std::polar(s, -phi / 2), std::polar(s, phi / 2));
        detail::RowOutcome out;
        out.values = {phi, fidelity(ideal, r.final_state),
                      project_to_qubit(r.final_state, basis).leakage, r.norm_drift, r.leakage};
        out.notes = r.warnings;
        return out;
      });
}

/// Rows (delta0, theta, fidelity, leakage, norm_drift, fock_tail, theta_search);
/// input (|0> + i|1>)/sqrt2, theta maximizes |<psi_out|Rx(theta) psi_in>|^2.
inline SweepTable run_rx_sweep(const SweepConfig& c) {
  detail::require_experiment(c, Experiment::rx_sweep);
  validate(c);
  const KpoParams params = c.params();
  const QubitBasis basis = QubitBasis::make(params);
  const double s = 1.0 / std::sqrt(2.0);
  const StateVector input = basis.embed(s, Complex(0.0, s));
  auto meta = detail::common_metadata(c);
  meta.push_back("input_state=(|0>+i|1>)/sqrt2");
  meta.push_back("detuning_schedule=Delta(t) = Delta0 sin^2(pi t/Tg)");
  meta.push_back("theta=arg(c-/c+)_out - arg(c-/c+)_in on the cat pair, branch (-2pi,0]");
  meta.push_back("theta_search=golden-section maximizer of the fidelity, tolerance 1e-6 rad");
  meta.push_back("rx_fidelity=full Fock space output vs Rx(theta) psi_in embedded via the cat basis");
  return detail::run_rows(
      c, {"delta0", "theta", "fidelity", "leakage", "norm_drift", "fock_tail", "theta_search"},
      std::move(meta), [&](double delta0) {
        const auto r = apply_rx(delta0, c.gate_time, params, input, detail::integrate_options(c));
        const auto est = extract_theta(r.final_state, input, basis);
        detail::RowOutcome out;
        out.values = {delta0,      est.theta,
                      est.fidelity, project_to_qubit(r.final_state, basis).leakage,
                      r.norm_drift, r.leakage,
                      est.theta_search};
        out.notes = r.warnings;
        if (angular_distance(est.theta, est.theta_search) > 1e-4) {
          out.notes.push_back("analytic and search theta disagree by more than 1e-4 rad");
        }
        return out;
      });
}

/// Rows (Theta, fidelity, leakage, norm_drift, fock_tail); input
/// (|0>+|1>)(|0>+|1>)/2, ideal output U(Theta) applied to it.
inline SweepTable run_zz_sweep(const SweepConfig& c) {
  detail::require_experiment(c, Experiment::zz_sweep);
  validate(c);
  const KpoParams params = c.params();
  const QubitBasis basis = QubitBasis::make(params);
  const StateVector input = tensor(basis.cat_plus, basis.cat_plus);
  auto meta = detail::common_metadata(c);
  meta.push_back("input_state=(|0>+|1>)(|0>+|1>)/2");
  meta.push_back("ideal_output=(e^{-i T/2}|00> + e^{i T/2}|01> + e^{i T/2}|10> + e^{-i T/2}|11>)/2");
  meta.push_back("coupling_schedule=g(t) = pi Theta/(8 Tg p0/K) sin(pi t/Tg)");
  return detail::run_rows(
      c, {"Theta", "fidelity", "leakage", "norm_drift", "fock_tail"}, std::move(meta),
      [&](double Theta) {
        const auto r =
            apply_zz(Theta, c.gate_time, params, params, input, detail::integrate_options(c));
        const double h = Theta / 2;
        const StateVector ideal = embed_pair(
            basis, basis, {std::polar(0.5, -h), std::polar(0.5, h), std::polar(0.5, h),
                           std::polar(0.5, -h)});
        detail::RowOutcome out;
        out.values = {Theta, fidelity(ideal, r.final_state),
                      project_to_qubits(r.final_state, basis, basis).leakage, r.norm_drift,
                      r.leakage};
        out.notes = r.warnings;
        return out;
      });
}

/// Rows (t_init, fidelity, parity, norm_drift, fock_tail); optionally the
/// Wigner map of the final state for the last grid point.
inline SweepOutput run_init_check(const SweepConfig& c) {
  detail::require_experiment(c, Experiment::init_check);
  validate(c);
  const KpoParams params = c.params();
  const auto grid = c.grid();
  auto meta = detail::common_metadata(c);
  meta.push_back("input_state=|0> (vacuum)");
  meta.push_back("ramp=" + std::string(to_string(c.ramp)) +
                 (c.ramp == ScheduleKind::sine_squared ? " p(t) = p0 sin^2(pi t/(2 T_init))"
                  : c.ramp == ScheduleKind::sine       ? " p(t) = p0 sin(pi t/(2 T_init))"
                  : c.ramp == ScheduleKind::linear_ramp ? " p(t) = p0 t/T_init"
                                                        : " p(t) = p0"));
  meta.push_back("fidelity=|<C+|psi_final>|^2, C+ the even cat at sqrt(p0/K)");
  if (!c.wigner_output.empty()) {
    meta.push_back("wigner=(2/pi)<psi|D(beta)PD(beta)^dag|psi> of the last grid point, integral 1");
  }
  std::optional<StateVector> last_state;
  std::mutex last_mutex;
  SweepTable table = detail::run_rows(
      c, {"t_init", "fidelity", "parity", "norm_drift", "fock_tail"}, std::move(meta),
      [&](double t_init) {
        const auto r = initialize_qubit(params, t_init, c.ramp, detail::integrate_options(c));
        if (t_init == grid.back()) {
          std::lock_guard<std::mutex> lock(last_mutex);
          last_state = r.sim.final_state;
        }
        detail::RowOutcome out;
        out.values = {t_init, r.cat_fidelity, parity_expectation(r.sim.final_state),
                      r.sim.norm_drift, r.sim.leakage};
        out.notes = r.sim.warnings;
        return out;
      });
  SweepOutput out{std::move(table), std::nullopt};
  if (!c.wigner_output.empty() && last_state) {
    out.wigner = wigner(*last_state, PhaseSpaceGrid::square(c.wigner_extent, c.wigner_points));
  }
  return out;
}

inline SweepOutput run_experiment(const SweepConfig& c) {
  switch (c.experiment) {
    case Experiment::rz_sweep: return {run_rz_sweep(c), std::nullopt};
    case Experiment::rx_sweep: return {run_rx_sweep(c), std::nullopt};
    case Experiment::zz_sweep: return {run_zz_sweep(c), std::nullopt};
    case Experiment::init_check: return run_init_check(c);
  }
  throw Error(ErrorKind::config, "unknown experiment");
}

}  // namespace kpo
