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

// kpo_sim: fidelity sweeps and Wigner maps for Kerr-parametric-oscillator qubits.
//
//   kpo_sim rz-sweep   [--config f] [--out f] [--workers n] [--step h] [--nmax n]
//   kpo_sim rx-sweep   ...
//   kpo_sim zz-sweep   ...
//   kpo_sim init-check ... [--wigner-out f]
//   kpo_sim wigner --state cat_even --alpha 2 [--extent 6] [--points 121] [--out f]
//
// Exit codes: 0 success, 1 invalid input, 2 I/O failure, 3 simulation failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "kpo/experiments.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::string gnuplot;
  std::string wigner_out;
  std::optional<int> workers;
  std::optional<double> step;
  std::optional<int> nmax;
  bool strict = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--out", f.out, "CSV output path (default: stdout)");
  cmd->add_option("--workers", f.workers, "parallel rows")->check(CLI::PositiveNumber);
  cmd->add_option("--step", f.step, "RK4 step in units of 1/K");
  cmd->add_option("--nmax", f.nmax, "Fock truncation per oscillator");
  cmd->add_option("--gnuplot", f.gnuplot, "also write a gnuplot script for the CSV");
  cmd->add_flag("--strict", f.strict, "treat out-of-range grids as errors");
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw kpo::Error(kpo::ErrorKind::io, "cannot open '" + path + "' for writing");
  out << body;
  if (!out) throw kpo::Error(kpo::ErrorKind::io, "write to '" + path + "' failed");
}

std::string wigner_csv(const kpo::WignerMap& map, const std::vector<std::string>& header) {
  std::ostringstream s;
  kpo::write_wigner_csv(s, map, header);
  return s.str();
}

int run_sweep(kpo::Experiment experiment, const CommonFlags& f) {
  kpo::SweepConfig cfg =
      f.config.empty() ? kpo::default_config(experiment) : kpo::load_config(f.config, experiment);
  if (f.workers) cfg.workers = *f.workers;
  if (f.step) cfg.step = *f.step;
  if (f.nmax) cfg.n_max = *f.nmax;
  if (f.strict) cfg.strict = true;
  if (!f.out.empty()) cfg.output = f.out;
  if (!f.wigner_out.empty()) cfg.wigner_output = f.wigner_out;

  for (const auto& w : kpo::validate(cfg)) std::cerr << "warning: " << w << '\n';
  const auto result = kpo::run_experiment(cfg);
  const std::string csv = kpo::to_csv(result.table);
  if (cfg.output.empty()) {
    std::cout << csv;
  } else {
    write_file(cfg.output, csv);
  }
  if (!f.gnuplot.empty()) {
    std::ostringstream s;
    kpo::write_gnuplot_script(s, result.table, cfg.output.empty() ? "sweep.csv" : cfg.output);
    write_file(f.gnuplot, s.str());
  }
  if (result.wigner) {
    write_file(cfg.wigner_output,
               wigner_csv(*result.wigner, {"state=final state of the slowest initialization ramp",
                                           "pump=" + kpo::detail::format_g9(cfg.pump)}));
  }
  for (const auto& n : result.table.notes) std::cerr << "note: " << n << '\n';
  return 0;
}

struct WignerFlags {
  std::string state = "cat_even";
  double alpha = 2.0;
  int fock = 0;
  double t_init = kpo::kDefaultInitTime;
  double extent = 6.0;
  int points = 121;
  int nmax = kpo::kDefaultNmax;
  double step = 1e-3;
  std::string out;
};

int run_wigner(const WignerFlags& f) {
  using namespace kpo;
  if (f.nmax < 1) throw Error(ErrorKind::invalid_dimension, "--nmax must be >= 1");
  if (f.points < 2 || !(f.extent > 0.0)) throw Error(ErrorKind::invalid_parameter, "bad grid");
  std::optional<StateVector> psi;
  std::string label = f.state;
  if (f.state == "vacuum") {
    psi = vacuum(f.nmax);
  } else if (f.state == "fock") {
    psi = fock_state(f.fock, f.nmax);
    label += " n=" + std::to_string(f.fock);
  } else if (f.state == "coherent") {
    psi = coherent_state(f.alpha, f.nmax);
  } else if (f.state == "cat_even") {
    psi = cat_state(f.alpha, Parity::even, f.nmax);
  } else if (f.state == "cat_odd") {
    psi = cat_state(f.alpha, Parity::odd, f.nmax);
  } else if (f.state == "init") {
    KpoParams p;
    p.pump = f.alpha * f.alpha;
    p.n_max = f.nmax;
    IntegrateOptions o;
    o.step = f.step;
    psi = initialize_qubit(p, f.t_init, ScheduleKind::sine_squared, o).sim.final_state;
    label += " t_init=" + detail::format_g9(f.t_init);
  } else {
    throw Error(ErrorKind::invalid_parameter, "unknown state '" + f.state + "'");
  }
  const auto map = wigner(*psi, PhaseSpaceGrid::square(f.extent, f.points));
  const std::string csv = wigner_csv(
      map, {"kpo-sim=" + std::string(kVersion), "state=" + label,
            "alpha=" + detail::format_g9(f.alpha), "n_max=" + std::to_string(f.nmax)});
  if (f.out.empty()) {
    std::cout << csv;
  } else {
    write_file(f.out, csv);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kerr parametric oscillator qubit simulator"};
  app.set_version_flag("--version", std::string(kpo::kVersion));
  app.require_subcommand(1);

  CommonFlags rz, rx, zz, init;
  add_common(app.add_subcommand("rz-sweep", "Rz(phi) fidelity over phi"), rz);
  add_common(app.add_subcommand("rx-sweep", "Rx angle and fidelity over Delta0"), rx);
  add_common(app.add_subcommand("zz-sweep", "U(Theta) fidelity over Theta"), zz);
  auto* init_cmd = app.add_subcommand("init-check", "cat-state initialization over T_init");
  add_common(init_cmd, init);
  init_cmd->add_option("--wigner-out", init.wigner_out, "Wigner CSV of the final state");

  WignerFlags wf;
  auto* wig = app.add_subcommand("wigner", "Wigner map of a single-oscillator state");
  wig->add_option("--state", wf.state, "vacuum | fock | coherent | cat_even | cat_odd | init");
  wig->add_option("--alpha", wf.alpha, "coherent amplitude (init: sqrt(p0/K))");
  wig->add_option("--fock", wf.fock, "Fock level for --state fock");
  wig->add_option("--t-init", wf.t_init, "ramp duration for --state init");
  wig->add_option("--extent", wf.extent, "grid covers [-extent, extent]^2");
  wig->add_option("--points", wf.points, "points per axis");
  wig->add_option("--nmax", wf.nmax, "Fock truncation");
  wig->add_option("--step", wf.step, "RK4 step for --state init");
  wig->add_option("--out", wf.out, "CSV output path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("rz-sweep")) return run_sweep(kpo::Experiment::rz_sweep, rz);
    if (app.got_subcommand("rx-sweep")) return run_sweep(kpo::Experiment::rx_sweep, rx);
    if (app.got_subcommand("zz-sweep")) return run_sweep(kpo::Experiment::zz_sweep, zz);
    if (app.got_subcommand("init-check")) return run_sweep(kpo::Experiment::init_check, init);
    if (app.got_subcommand("wigner")) return run_wigner(wf);
  } catch (const kpo::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case kpo::ErrorKind::io: return 2;
      case kpo::ErrorKind::integration_diverged: return 3;
      default: return 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
