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

// Hamiltonian terms of a Kerr parametric oscillator (hbar = 1, rotating frame
// at half the pump frequency) and the scalar pulse envelopes that drive them.

#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "kpo/fock.hpp"

namespace kpo {

enum class ScheduleKind { constant, linear_ramp, sine, sine_squared };

inline std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::linear_ramp: return "linear_ramp";
    case ScheduleKind::sine: return "sine";
    case ScheduleKind::sine_squared: return "sine_squared";
  }
  return "unknown";
}

inline std::optional<ScheduleKind> schedule_kind_from_string(std::string_view s) {
  if (s == "constant") return ScheduleKind::constant;
  if (s == "linear_ramp") return ScheduleKind::linear_ramp;
  if (s == "sine") return ScheduleKind::sine;
  if (s == "sine_squared") return ScheduleKind::sine_squared;
  return std::nullopt;
}

/// Scalar envelope on [0, duration]; `offset` is a constant baseline added to it.
struct PulseSchedule {
  ScheduleKind kind = ScheduleKind::constant;
  double amplitude = 0.0;
  double duration = 1.0;
  double offset = 0.0;

  double envelope(double t) const {
    const double s = std::numbers::pi * t / duration;
    switch (kind) {
      case ScheduleKind::constant: return 1.0;
      case ScheduleKind::linear_ramp: return t / duration;
      case ScheduleKind::sine: return std::sin(s);
      case ScheduleKind::sine_squared: {
        const double v = std::sin(s);
        return v * v;
      }
    }
    return 0.0;
  }
};

inline double schedule_eval(const PulseSchedule& s, double t) {
  if (!(s.duration > 0.0)) {
    throw Error(ErrorKind::invalid_parameter, "schedule duration must be positive");
  }
  if (!(t >= 0.0 && t <= s.duration)) {
    throw Error(ErrorKind::out_of_range, "t=" + std::to_string(t) + " outside [0, " +
                                             std::to_string(s.duration) + "]");
  }
  return s.offset + s.amplitude * s.envelope(t);
}

/// Composite Simpson rule with `panels` subintervals (rounded up to even).
template <class F>
double simpson(F&& f, double a, double b, int panels = 1000) {
  if (panels < 2) panels = 2;
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double acc = f(a) + f(b);
  for (int i = 1; i < panels; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return acc * h / 3.0;
}

inline double schedule_integral(const PulseSchedule& s, int panels = 1000) {
  return simpson([&](double t) { return schedule_eval(s, t); }, 0.0, s.duration, panels);
}

struct KpoParams {
  double kerr = 1.0;
  double pump = 4.0;
  double detuning = 0.0;
  int n_max = 20;

  void validate() const {
    if (!(kerr > 0.0)) throw Error(ErrorKind::invalid_parameter, "Kerr coefficient must be > 0");
    if (!(pump >= 0.0)) throw Error(ErrorKind::invalid_parameter, "pump amplitude must be >= 0");
    if (!(detuning >= 0.0)) throw Error(ErrorKind::invalid_parameter, "detuning must be >= 0");
    detail::require_n_max(n_max);
  }

  int dim() const { return n_max + 1; }
  /// Coherent amplitude sqrt(p/K) of the two stable branches.
  double alpha() const { return std::sqrt(pump / kerr); }
};

/// (1/2) a^dag^2 a^2; diagonal n(n-1)/2.
inline Operator kerr_operator(int n_max) {
  const Operator a = annihilation_operator(n_max);
  const Operator ad = a.adjoint();
  return 0.5 * (ad * ad * a * a);
}

/// -(1/2)(a^dag^2 + a^2), the two-photon pump term per unit amplitude.
inline Operator pump_operator(int n_max) {
  const Operator a = annihilation_operator(n_max);
  const Operator ad = a.adjoint();
  return -0.5 * (ad * ad + a * a);
}

/// a + a^dag, the single-photon drive per unit amplitude.
inline Operator drive_operator(int n_max) {
  const Operator a = annihilation_operator(n_max);
  return a + a.adjoint();
}

/// a1 a2^dag + a1^dag a2 on the joint space of two modes.
inline Operator coupling_operator(int n_max1, int n_max2) {
  const Operator a1 = annihilation_operator(n_max1);
  const Operator a2 = annihilation_operator(n_max2);
  return tensor(a1, a2.adjoint()) + tensor(a1.adjoint(), a2);
}

/// Delta a^dag a + (K/2) a^dag^2 a^2 - (p/2)(a^dag^2 + a^2).
inline Operator kpo_hamiltonian(const KpoParams& params) {
  params.validate();
  return Complex(params.detuning) * number_operator(params.n_max) +
         Complex(params.kerr) * kerr_operator(params.n_max) +
         Complex(params.pump) * pump_operator(params.n_max);
}

inline Operator drive_hamiltonian(double amplitude, int n_max) {
  return Complex(amplitude) * drive_operator(n_max);
}

inline Operator coupling_hamiltonian(double g, int n_max1, int n_max2) {
  return Complex(g) * coupling_operator(n_max1, n_max2);
}

/// H1 (x) 1 + 1 (x) H1 for two uncoupled oscillators.
inline Operator joint_kpo_hamiltonian(const KpoParams& first, const KpoParams& second) {
  const Dims joint{first.dim(), second.dim()};
  return embed(kpo_hamiltonian(first), 0, joint) + embed(kpo_hamiltonian(second), 1, joint);
}

}  // namespace kpo
