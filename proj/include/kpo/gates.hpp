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

// Cat-qubit protocols on Kerr parametric oscillators.
//
// A qubit lives in the span of the even/odd cats |C+>, |C->; the logical
// states are |0> = (|C+> + |C->)/sqrt2 ~ |+alpha0>, |1> = (|C+> - |C->)/sqrt2 ~
// |-alpha0>, alpha0 = sqrt(p0/K). Every gate is an adiabatic pulse whose
// dynamical phase sets the rotation angle:
//
//   Rz(phi):   drive E(t) (a + a^dag),        E = pi phi / (8 Tg alpha0) sin(pi t/Tg)
//   Rx(theta): detuning Delta(t) a^dag a,     Delta = Delta0 sin^2(pi t/Tg)
//   U(Theta):  coupling g(t)(a1 a2^dag + h.c.), g = pi Theta / (8 Tg alpha0^2) sin(pi t/Tg)

#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "kpo/evolve.hpp"
#include "kpo/fock.hpp"
#include "kpo/hamiltonian.hpp"

namespace kpo {

inline constexpr double kDefaultPump = 4.0;
inline constexpr double kDefaultRzGateTime = 2.0;
inline constexpr double kDefaultZzGateTime = 2.0;
inline constexpr double kDefaultRxGateTime = 10.0;
inline constexpr double kDefaultInitTime = 100.0;
inline constexpr int kDefaultNmax = 20;
inline constexpr double kQubitLeakageWarning = 1e-3;

enum class GateKind { init, rz, rx, zz };

inline std::string_view to_string(GateKind kind) {
  switch (kind) {
    case GateKind::init: return "init";
    case GateKind::rz: return "rz";
    case GateKind::rx: return "rx";
    case GateKind::zz: return "zz";
  }
  return "unknown";
}

/// Orthonormal qubit frame of one oscillator at pump p0.
struct QubitBasis {
  KpoParams params;
  double alpha0;
  StateVector cat_plus;
  StateVector cat_minus;
  StateVector zero;
  StateVector one;

  static QubitBasis make(const KpoParams& params) {
    params.validate();
    const double alpha0 = params.alpha();
    if (alpha0 <= 0.0) {
      throw Error(ErrorKind::invalid_parameter, "qubit basis needs a nonzero pump amplitude");
    }
    StateVector plus = cat_state(alpha0, Parity::even, params.n_max);
    StateVector minus = cat_state(alpha0, Parity::odd, params.n_max);
    const double s = 1.0 / std::sqrt(2.0);
    StateVector zero = s * (plus + minus);
    StateVector one = s * (plus - minus);
    return {params, alpha0, std::move(plus), std::move(minus), std::move(zero), std::move(one)};
  }

  const Dims& dims() const noexcept { return zero.dims(); }

  /// c0 |0> + c1 |1> in the oscillator Fock space.
  StateVector embed(Complex c0, Complex c1) const { return c0 * zero + c1 * one; }
};

/// Amplitudes c_{ij} |i>|j> on two oscillators, index 2i + j.
inline StateVector embed_pair(const QubitBasis& first, const QubitBasis& second,
                              const std::array<Complex, 4>& c) {
  const std::array<const StateVector*, 2> a{&first.zero, &first.one};
  const std::array<const StateVector*, 2> b{&second.zero, &second.one};
  Vector out = Vector::Zero(first.zero.dim() * second.zero.dim());
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) out += c[2 * i + j] * tensor(*a[i], *b[j]).amplitudes();
  }
  return StateVector(std::move(out), {first.zero.dim(), second.zero.dim()});
}

struct QubitProjection {
  Vector amplitudes;  // logical-basis amplitudes (2 or 4)
  double leakage;     // 1 - ||projection||^2
};

inline QubitProjection project_to_qubit(const StateVector& psi, const QubitBasis& basis) {
  detail::require_same_dims(psi.dims(), basis.dims(), "qubit projection");
  Vector c(2);
  c(0) = inner_product(basis.zero, psi);
  c(1) = inner_product(basis.one, psi);
  const double leak = psi.amplitudes().squaredNorm() - c.squaredNorm();
  return {std::move(c), std::max(leak, 0.0)};
}

inline QubitProjection project_to_qubits(const StateVector& psi, const QubitBasis& first,
                                         const QubitBasis& second) {
  detail::require_same_dims(psi.dims(), Dims{first.zero.dim(), second.zero.dim()},
                            "two-qubit projection");
  const std::array<const StateVector*, 2> a{&first.zero, &first.one};
  const std::array<const StateVector*, 2> b{&second.zero, &second.one};
  Vector c(4);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) c(2 * i + j) = inner_product(tensor(*a[i], *b[j]), psi);
  }
  const double leak = psi.amplitudes().squaredNorm() - c.squaredNorm();
  return {std::move(c), std::max(leak, 0.0)};
}

/// Rz(phi) = exp(-i phi Z/2), Rx(theta) = exp(-i theta X/2),
/// U(Theta) = exp(-i Theta Z1 Z2 / 2), as matrices on the logical basis.
inline Operator ideal_gate(GateKind kind, double angle) {
  const double h = 0.5 * angle;
  switch (kind) {
    case GateKind::rz: {
      Matrix m = Matrix::Zero(2, 2);
      m(0, 0) = std::polar(1.0, -h);
      m(1, 1) = std::polar(1.0, h);
      return Operator(std::move(m), {2});
    }
    case GateKind::rx: {
      Matrix m(2, 2);
      m(0, 0) = m(1, 1) = std::cos(h);
      m(0, 1) = m(1, 0) = Complex(0.0, -std::sin(h));
      return Operator(std::move(m), {2});
    }
    case GateKind::zz: {
      Matrix m = Matrix::Zero(4, 4);
      m(0, 0) = m(3, 3) = std::polar(1.0, -h);
      m(1, 1) = m(2, 2) = std::polar(1.0, h);
      return Operator(std::move(m), {2, 2});
    }
    case GateKind::init: break;
  }
  throw Error(ErrorKind::invalid_parameter,
              "no ideal gate for kind '" + std::string(to_string(kind)) + "'");
}

/// Everything needed to simulate one gate.
struct GateProtocol {
  GateKind kind;
  double angle;      // phi, Delta0, Theta, or p0 for init
  double gate_time;  // Tg, or T_init
  std::vector<KpoParams> params;
  PulseSchedule schedule;
};

namespace detail {
inline void require_gate_time(double t) {
  if (!(t > 0.0)) throw Error(ErrorKind::invalid_parameter, "gate time must be positive");
}
inline void require_resting(const KpoParams& p) {
  p.validate();
  if (p.detuning != 0.0) {
    throw Error(ErrorKind::invalid_parameter, "gates start from zero detuning");
  }
}
}  // namespace detail

inline GateProtocol rz_protocol(double phi, double gate_time, const KpoParams& params) {
  detail::require_gate_time(gate_time);
  detail::require_resting(params);
  const double amp = std::numbers::pi * phi / (8.0 * gate_time * params.alpha());
  return {GateKind::rz, phi, gate_time, {params}, {ScheduleKind::sine, amp, gate_time, 0.0}};
}

inline GateProtocol rx_protocol(double delta0, double gate_time, const KpoParams& params) {
  detail::require_gate_time(gate_time);
  detail::require_resting(params);
  if (!(delta0 >= 0.0)) throw Error(ErrorKind::invalid_parameter, "detuning must be >= 0");
  return {GateKind::rx, delta0, gate_time, {params},
          {ScheduleKind::sine_squared, delta0, gate_time, 0.0}};
}

inline GateProtocol zz_protocol(double Theta, double gate_time, const KpoParams& first,
                                const KpoParams& second) {
  detail::require_gate_time(gate_time);
  detail::require_resting(first);
  detail::require_resting(second);
  if (first.pump != second.pump || first.kerr != second.kerr) {
    throw Error(ErrorKind::invalid_parameter, "ZZ gate needs identical oscillators");
  }
  const double amp = std::numbers::pi * Theta / (8.0 * gate_time * first.pump / first.kerr);
  return {GateKind::zz, Theta, gate_time, {first, second},
          {ScheduleKind::sine, amp, gate_time, 0.0}};
}

/// Pump ramp p(t) from 0 to params.pump over t_init. Sine-type ramps use the
/// rising half of a period twice as long, so sine_squared gives
/// p0 sin^2(pi t / (2 t_init)).
inline GateProtocol init_protocol(const KpoParams& params, double t_init,
                                  ScheduleKind ramp = ScheduleKind::sine_squared) {
  detail::require_gate_time(t_init);
  detail::require_resting(params);
  const double span =
      (ramp == ScheduleKind::sine || ramp == ScheduleKind::sine_squared) ? 2.0 * t_init : t_init;
  return {GateKind::init, params.pump, t_init, {params}, {ramp, params.pump, span, 0.0}};
}

inline TimeDependentHamiltonian protocol_hamiltonian(const GateProtocol& g) {
  switch (g.kind) {
    case GateKind::rz: {
      const KpoParams& p = g.params.at(0);
      return {kpo_hamiltonian(p), {{drive_operator(p.n_max), g.schedule}}, g.gate_time};
    }
    case GateKind::rx: {
      const KpoParams& p = g.params.at(0);
      return {kpo_hamiltonian(p), {{number_operator(p.n_max), g.schedule}}, g.gate_time};
    }
    case GateKind::zz: {
      const KpoParams& a = g.params.at(0);
      const KpoParams& b = g.params.at(1);
      return {joint_kpo_hamiltonian(a, b), {{coupling_operator(a.n_max, b.n_max), g.schedule}},
              g.gate_time};
    }
    case GateKind::init: {
      const KpoParams& p = g.params.at(0);
      KpoParams unpumped = p;
      unpumped.pump = 0.0;
      return {kpo_hamiltonian(unpumped), {{pump_operator(p.n_max), g.schedule}}, g.gate_time};
    }
  }
  throw Error(ErrorKind::invalid_parameter, "unknown gate kind");
}

/// Rotation angle implied by the protocol's schedule, by quadrature:
/// phi = 4 alpha0 int E dt, Theta = 4 alpha0^2 int g dt.
inline double scheduled_angle(const GateProtocol& g, int panels = 1000) {
  const double integral = schedule_integral(g.schedule, panels);
  const KpoParams& p = g.params.at(0);
  switch (g.kind) {
    case GateKind::rz: return 4.0 * p.alpha() * integral;
    case GateKind::zz: return 4.0 * (p.pump / p.kerr) * integral;
    default: break;
  }
  throw Error(ErrorKind::invalid_parameter, "angle is defined by the schedule only for rz and zz");
}

namespace detail {
inline void flag_qubit_leakage(SimResult& r, double leakage, std::string_view gate) {
  if (leakage > kQubitLeakageWarning) {
    char buf[120];
    std::snprintf(buf, sizeof buf, "%.*s: qubit-subspace leakage %.3g exceeds %.1g",
                  static_cast<int>(gate.size()), gate.data(), leakage, kQubitLeakageWarning);
    r.warnings.emplace_back(buf);
  }
}
}  // namespace detail

inline SimResult apply_rz(double phi, double gate_time, const KpoParams& params,
                          const StateVector& psi0, const IntegrateOptions& options = {}) {
  auto result = integrate(protocol_hamiltonian(rz_protocol(phi, gate_time, params)), psi0, options);
  detail::flag_qubit_leakage(
      result, project_to_qubit(result.final_state, QubitBasis::make(params)).leakage, "rz");
  return result;
}

inline SimResult apply_rx(double delta0, double gate_time, const KpoParams& params,
                          const StateVector& psi0, const IntegrateOptions& options = {}) {
  auto result =
      integrate(protocol_hamiltonian(rx_protocol(delta0, gate_time, params)), psi0, options);
  detail::flag_qubit_leakage(
      result, project_to_qubit(result.final_state, QubitBasis::make(params)).leakage, "rx");
  return result;
}

inline SimResult apply_zz(double Theta, double gate_time, const KpoParams& first,
                          const KpoParams& second, const StateVector& psi0,
                          const IntegrateOptions& options = {}) {
  auto result = integrate(protocol_hamiltonian(zz_protocol(Theta, gate_time, first, second)),
                          psi0, options);
  const auto proj = project_to_qubits(result.final_state, QubitBasis::make(first),
                                      QubitBasis::make(second));
  detail::flag_qubit_leakage(result, proj.leakage, "zz");
  return result;
}

struct InitResult {
  SimResult sim;
  double cat_fidelity;  // against the even cat at sqrt(p0/K)
};

/// Adiabatic bifurcation from the vacuum to the even cat.
inline InitResult initialize_qubit(const KpoParams& params, double t_init,
                                   ScheduleKind ramp = ScheduleKind::sine_squared,
                                   const IntegrateOptions& options = {}) {
  const auto protocol = init_protocol(params, t_init, ramp);
  auto sim = integrate(protocol_hamiltonian(protocol), vacuum(params.n_max), options);
  const double f = fidelity(cat_state(params.alpha(), Parity::even, params.n_max), sim.final_state);
  return {std::move(sim), f};
}

// --- Rx angle extraction ---------------------------------------------------------

inline constexpr double kThetaWrapTolerance = 1e-9;

/// Maps an angle onto (-2pi, 0]. Values within kThetaWrapTolerance above a
/// multiple of 2pi are reported as that multiple instead of wrapping to ~-2pi.
inline double wrap_theta(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  theta = std::remainder(theta, two_pi);  // [-pi, pi]
  if (theta > kThetaWrapTolerance) theta -= two_pi;
  if (theta > 0.0) theta = 0.0;
  return theta;
}

/// |<psi_out| Rx(theta) psi_in>|^2 with the rotation applied in the logical frame.
inline double rx_fidelity(const StateVector& psi_out, const StateVector& psi_in,
                          const QubitBasis& basis, double theta) {
  const Vector q = project_to_qubit(psi_in, basis).amplitudes;
  const Vector r = ideal_gate(GateKind::rx, theta).matrix() * q;
  return fidelity(psi_out, basis.embed(r(0), r(1)));
}

struct ThetaEstimate {
  double theta;            // from cat-sector phases, in (-2pi, 0]
  double fidelity;         // rx_fidelity at theta
  double theta_search;     // golden-section maximizer of rx_fidelity
  double fidelity_search;
};

inline double angular_distance(double a, double b) {
  return std::abs(std::remainder(a - b, 2.0 * std::numbers::pi));
}

/// Golden-section maximization of rx_fidelity over (-2pi, 0], seeded by a
/// coarse scan.
inline std::pair<double, double> search_theta(const StateVector& psi_out,
                                              const StateVector& psi_in, const QubitBasis& basis,
                                              double tol = 1e-6) {
  const double two_pi = 2.0 * std::numbers::pi;
  auto f = [&](double th) { return rx_fidelity(psi_out, psi_in, basis, th); };
  constexpr int kScan = 72;
  const double h = two_pi / kScan;
  int best = 0;
  double best_f = -1.0;
  for (int k = 0; k < kScan; ++k) {
    const double v = f(-two_pi + (k + 1) * h);
    if (v > best_f) {
      best_f = v;
      best = k;
    }
  }
  const double centre = -two_pi + (best + 1) * h;
  double lo = centre - h;
  double hi = centre + h;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  const double theta = wrap_theta(0.5 * (lo + hi));
  return {theta, f(theta)};
}

/// Rx angle from the relative phase the gate put between the cat sectors:
/// theta = arg(c-_out / c+_out) - arg(c-_in / c+_in), cross-checked by search.
inline ThetaEstimate extract_theta(const StateVector& psi_out, const StateVector& psi_in,
                                   const QubitBasis& basis) {
  detail::require_same_dims(psi_in.dims(), basis.dims(), "extract_theta");
  detail::require_same_dims(psi_out.dims(), basis.dims(), "extract_theta");
  const Complex in_plus = inner_product(basis.cat_plus, psi_in);
  const Complex in_minus = inner_product(basis.cat_minus, psi_in);
  constexpr double kMinSector = 1e-12;
  if (std::norm(in_plus) < kMinSector || std::norm(in_minus) < kMinSector) {
    throw Error(ErrorKind::unidentifiable_angle,
                "input state lies in a single parity sector; the Rx angle is unidentifiable");
  }
  const Complex out_plus = inner_product(basis.cat_plus, psi_out);
  const Complex out_minus = inner_product(basis.cat_minus, psi_out);
  const double raw = std::arg(out_minus * std::conj(out_plus) * std::conj(in_minus) * in_plus);
  const double theta = wrap_theta(raw);
  const auto [theta_s, f_s] = search_theta(psi_out, psi_in, basis);
  return {theta, rx_fidelity(psi_out, psi_in, basis, theta), theta_s, f_s};
}

}  // namespace kpo
