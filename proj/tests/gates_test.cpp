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

#include "kpo/gates.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

using namespace kpo;

namespace {

constexpr double kPi = std::numbers::pi;
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

const QubitBasis& basis() {
  static const QubitBasis b = QubitBasis::make(KpoParams{});
  return b;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

StateVector apply_logical(const QubitBasis& b, const Operator& gate, const StateVector& psi) {
  const Vector q = gate.matrix() * project_to_qubit(psi, b).amplitudes;
  return b.embed(q(0), q(1));
}

StateVector apply_logical_pair(const QubitBasis& b, const Operator& gate, const StateVector& psi) {
  const Vector q = gate.matrix() * project_to_qubits(psi, b, b).amplitudes;
  return embed_pair(b, b, {q(0), q(1), q(2), q(3)});
}

}  // namespace

TEST(IdealGate, Unitary) {
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> u(-2.0 * kPi, 2.0 * kPi);
  for (int trial = 0; trial < 30; ++trial) {
    for (GateKind k : {GateKind::rz, GateKind::rx, GateKind::zz}) {
      const Matrix g = ideal_gate(k, u(rng)).matrix();
      EXPECT_LT(max_abs(g.adjoint() * g - Matrix::Identity(g.rows(), g.cols())), 1e-14);
    }
  }
}

TEST(IdealGate, SpecialValues) {
  EXPECT_EQ(ideal_gate(GateKind::rz, 0.0).matrix(), Matrix::Identity(2, 2));

  const Matrix rx = ideal_gate(GateKind::rx, kPi).matrix();
  EXPECT_LT(std::abs(rx(0, 1) - Complex(0.0, -1.0)), 1e-15);
  EXPECT_LT(std::abs(rx(1, 0) - Complex(0.0, -1.0)), 1e-15);
  EXPECT_LT(std::abs(rx(0, 0)), 1e-15);
  EXPECT_LT(std::abs(rx(1, 1)), 1e-15);

  const Matrix u = ideal_gate(GateKind::zz, kPi / 2).matrix();
  const Complex m = std::polar(1.0, -kPi / 4);
  const Complex p = std::polar(1.0, kPi / 4);
  const std::array<Complex, 4> diag{m, p, p, m};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) EXPECT_EQ(u(i, j), i == j ? diag[i] : Complex(0.0));
  }
  EXPECT_EQ(ideal_gate(GateKind::zz, 1.0).dims(), (Dims{2, 2}));
}

TEST(IdealGate, RzCompositionProperty) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = u(rng), b = u(rng);
    const Matrix ab = ideal_gate(GateKind::rz, a).matrix() * ideal_gate(GateKind::rz, b).matrix();
    EXPECT_LT(max_abs(ab - ideal_gate(GateKind::rz, a + b).matrix()), 1e-14);
  }
}

TEST(IdealGate, InitHasNoMatrix) { EXPECT_THROW(ideal_gate(GateKind::init, 0.0), Error); }

TEST(QubitBasisTest, Invariants) {
  const QubitBasis& b = basis();
  EXPECT_DOUBLE_EQ(b.alpha0, 2.0);
  EXPECT_EQ(inner_product(b.cat_plus, b.cat_minus), Complex(0.0));
  EXPECT_LE(std::abs(inner_product(b.zero, b.one)), std::exp(-8.0) + 1e-10);
  EXPECT_NEAR(b.zero.norm(), 1.0, 1e-14);
  // The logical states sit on the two coherent branches.
  EXPECT_GT(fidelity(b.zero, coherent_state(2.0, 20)), 1.0 - 1e-6);
  EXPECT_GT(fidelity(b.one, coherent_state(-2.0, 20)), 1.0 - 1e-6);
  EXPECT_THROW(QubitBasis::make(KpoParams{1.0, 0.0, 0.0, 20}), Error);
}

TEST(Projection, Examples) {
  const QubitBasis& b = basis();
  const auto cat = project_to_qubit(b.cat_plus, b);
  EXPECT_NEAR(cat.amplitudes(0).real(), kInvSqrt2, 1e-12);
  EXPECT_NEAR(cat.amplitudes(1).real(), kInvSqrt2, 1e-12);
  EXPECT_LT(cat.leakage, 1e-12);

  EXPECT_GT(project_to_qubit(fock_state(2, 20), b).leakage, 0.5);

  const auto pair = project_to_qubits(tensor(b.zero, b.one), b, b);
  EXPECT_NEAR(std::abs(pair.amplitudes(1)), 1.0, 1e-6);
  for (int i : {0, 2, 3}) EXPECT_LT(std::abs(pair.amplitudes(i)), 1e-6);
  EXPECT_LT(pair.leakage, 1e-6);

  EXPECT_THROW(project_to_qubit(vacuum(10), b), Error);
}

TEST(Protocols, AngleClosure) {
  const KpoParams p;
  for (double phi : {-kPi, -1.0, 0.3, kPi / 2, kPi}) {
    for (double tg : {1.0, 2.0, 4.0}) {
      EXPECT_LT(std::abs(scheduled_angle(rz_protocol(phi, tg, p)) - phi), 1e-9 * std::abs(phi));
    }
  }
  for (double theta : {0.1, kPi / 2, kPi}) {
    EXPECT_LT(std::abs(scheduled_angle(zz_protocol(theta, 2.0, p, p)) - theta), 1e-9 * theta);
  }
  EXPECT_THROW(scheduled_angle(rx_protocol(1.0, 10.0, p)), Error);
}

TEST(Protocols, Preconditions) {
  const KpoParams p;
  EXPECT_THROW(rz_protocol(1.0, 0.0, p), Error);
  EXPECT_THROW(rz_protocol(1.0, 2.0, KpoParams{1.0, 4.0, 0.5, 20}), Error);
  EXPECT_THROW(rx_protocol(-0.1, 10.0, p), Error);
  EXPECT_THROW(zz_protocol(1.0, 2.0, p, KpoParams{1.0, 3.0, 0.0, 20}), Error);
  EXPECT_THROW(init_protocol(p, -1.0), Error);
}

TEST(Protocols, InitRampShape) {
  const auto g = init_protocol(KpoParams{}, 100.0);
  EXPECT_NEAR(schedule_eval(g.schedule, 0.0), 0.0, 1e-15);
  EXPECT_NEAR(schedule_eval(g.schedule, 50.0), 2.0, 1e-12);
  EXPECT_NEAR(schedule_eval(g.schedule, 100.0), 4.0, 1e-12);
  const auto lin = init_protocol(KpoParams{}, 100.0, ScheduleKind::linear_ramp);
  EXPECT_NEAR(schedule_eval(lin.schedule, 100.0), 4.0, 1e-12);
}

TEST(Rz, ZeroAngleIsIdentity) {
  const QubitBasis& b = basis();
  const StateVector psi = b.embed(kInvSqrt2, kInvSqrt2);
  EXPECT_GT(fidelity(apply_rz(0.0, 2.0, b.params, psi).final_state, psi), 1.0 - 1e-10);
}

TEST(Rz, HalfPiFidelity) {
  const QubitBasis& b = basis();
  const StateVector psi = b.embed(kInvSqrt2, kInvSqrt2);
  const auto r = apply_rz(kPi / 2, 2.0, b.params, psi);
  const StateVector ideal = b.embed(kInvSqrt2 * std::polar(1.0, -kPi / 4), kInvSqrt2 * std::polar(1.0, kPi / 4));
  EXPECT_GE(fidelity(r.final_state, ideal), 0.98);
  EXPECT_LT(r.norm_drift, 1e-9);
  EXPECT_LT(project_to_qubit(r.final_state, b).leakage, 1e-2);
}

TEST(Rz, LongerGateIsNotWorse) {
  const QubitBasis& b = basis();
  const StateVector psi = b.embed(kInvSqrt2, kInvSqrt2);
  const StateVector ideal = apply_logical(b, ideal_gate(GateKind::rz, kPi), psi);
  const double f2 = fidelity(apply_rz(kPi, 2.0, b.params, psi).final_state, ideal);
  const double f4 = fidelity(apply_rz(kPi, 4.0, b.params, psi).final_state, ideal);
  EXPECT_GE(f4, f2 - 1e-6);
}

TEST(Rz, OppositeAnglesGiveConjugatePhases) {
  // Parity maps E to -E and swaps the logical states.
  const QubitBasis& b = basis();
  const StateVector psi = b.embed(kInvSqrt2, kInvSqrt2);
  for (double phi : {0.4, 1.3, kPi}) {
    const Vector q = project_to_qubit(apply_rz(phi, 2.0, b.params, psi).final_state, b).amplitudes;
    const Vector r = project_to_qubit(apply_rz(-phi, 2.0, b.params, psi).final_state, b).amplitudes;
    EXPECT_LT(std::abs(std::arg(r(1) / r(0)) + std::arg(q(1) / q(0))), 1e-6) << phi;
    EXPECT_LT(std::abs(r(0) - q(1)), 1e-9) << phi;
    EXPECT_LT(std::abs(r(1) - q(0)), 1e-9) << phi;
  }
}

TEST(Rz, RelativePhaseMatchesAngle) {
  const QubitBasis& b = basis();
  const StateVector psi = b.embed(kInvSqrt2, kInvSqrt2);
  const Vector q = project_to_qubit(apply_rz(1.0, 2.0, b.params, psi).final_state, b).amplitudes;
  EXPECT_NEAR(std::arg(q(1) / q(0)), 1.0, 2e-2);
}

TEST(Rx, ZeroDetuningIsIdentity) {
  const QubitBasis& b = basis();
  const StateVector psi = b.embed(kInvSqrt2, Complex(0.0, kInvSqrt2));
  const auto r = apply_rx(0.0, 10.0, b.params, psi);
  // Residual tunnel splitting of the truncated cat pair over 10/K.
  EXPECT_GT(fidelity(r.final_state, psi), 1.0 - 1e-8);
  EXPECT_LT(std::abs(extract_theta(r.final_state, psi, b).theta), 1e-4);
}

TEST(Rx, EndpointReachesMinusPi) {
  const QubitBasis& b = basis();
  const StateVector psi = b.embed(kInvSqrt2, Complex(0.0, kInvSqrt2));
  const auto r = apply_rx(2.5, 10.0, b.params, psi);
  const auto est = extract_theta(r.final_state, psi, b);
  EXPECT_NEAR(est.theta, -kPi, 0.15);
  EXPECT_GE(est.fidelity, 0.98);
  EXPECT_LT(angular_distance(est.theta, est.theta_search), 1e-4);
  EXPECT_LT(r.norm_drift, 1e-9);
}

TEST(Rx, IntermediateDetuningFidelity) {
  const QubitBasis& b = basis();
  const StateVector psi = b.embed(kInvSqrt2, Complex(0.0, kInvSqrt2));
  double previous = 0.0;
  for (double d : {0.5, 1.0, 1.5, 2.0}) {
    const auto est = extract_theta(apply_rx(d, 10.0, b.params, psi).final_state, psi, b);
    EXPECT_GE(est.fidelity_search, 0.98) << d;
    EXPECT_LE(est.theta, previous + 1e-12) << d;
    EXPECT_LT(angular_distance(est.theta, est.theta_search), 1e-4) << d;
    previous = est.theta;
  }
}

TEST(ExtractTheta, IdentityGivesZero) {
  const QubitBasis& b = basis();
  const StateVector psi = b.embed(0.6, Complex(0.0, 0.8));
  const auto est = extract_theta(psi, psi, b);
  EXPECT_EQ(est.theta, 0.0);
  EXPECT_NEAR(est.fidelity, 1.0, 1e-12);
}

TEST(ExtractTheta, SyntheticRotation) {
  const QubitBasis& b = basis();
  const StateVector psi = b.embed(kInvSqrt2, Complex(0.0, kInvSqrt2));
  const StateVector out = apply_logical(b, ideal_gate(GateKind::rx, -kPi / 2), psi);
  const auto est = extract_theta(out, psi, b);
  EXPECT_NEAR(est.theta, -kPi / 2, 1e-8);
  EXPECT_NEAR(est.fidelity, 1.0, 1e-12);
  EXPECT_NEAR(est.theta_search, -kPi / 2, 1e-4);
}

TEST(ExtractTheta, RandomRotationsProperty) {
  const QubitBasis& b = basis();
  std::mt19937 rng(37);
  std::uniform_real_distribution<double> angle(-2.0 * kPi + 1e-3, -1e-3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 25; ++trial) {
    const StateVector psi = b.embed(Complex(g(rng), g(rng)), Complex(g(rng), g(rng))).normalized();
    const double theta = angle(rng);
    const StateVector out = apply_logical(b, ideal_gate(GateKind::rx, theta), psi);
    const auto est = extract_theta(out, psi, b);
    EXPECT_NEAR(est.theta, theta, 1e-8);
    EXPECT_LT(angular_distance(est.theta_search, theta), 1e-4);
    EXPECT_GT(est.fidelity, 1.0 - 1e-12);
  }
}

TEST(ExtractTheta, SingleSectorIsUnidentifiable) {
  const QubitBasis& b = basis();
  for (const StateVector* s : {&b.cat_plus, &b.cat_minus}) {
    try {
      extract_theta(*s, *s, b);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::unidentifiable_angle);
    }
  }
  EXPECT_THROW(extract_theta(vacuum(5), vacuum(5), b), Error);
}

TEST(WrapTheta, Range) {
  EXPECT_EQ(wrap_theta(0.0), 0.0);
  EXPECT_EQ(wrap_theta(5e-10), 0.0);
  EXPECT_NEAR(wrap_theta(0.5), 0.5 - 2.0 * kPi, 1e-15);
  EXPECT_NEAR(wrap_theta(-kPi / 2), -kPi / 2, 1e-15);
  EXPECT_NEAR(wrap_theta(-2.0 * kPi - 0.25), -0.25, 1e-14);
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng);
    const double w = wrap_theta(x);
    EXPECT_GT(w, -2.0 * kPi);
    EXPECT_LE(w, 0.0);
    EXPECT_LT(angular_distance(w, x), 1e-12);
  }
}

TEST(Zz, ZeroAngleIsIdentity) {
  const QubitBasis& b = basis();
  const StateVector psi = embed_pair(b, b, {0.5, 0.5, 0.5, 0.5});
  EXPECT_GT(fidelity(apply_zz(0.0, 2.0, b.params, b.params, psi).final_state, psi), 1.0 - 1e-10);
}

TEST(Zz, HalfPiFidelityAndEntanglement) {
  const QubitBasis& b = basis();
  const StateVector psi = embed_pair(b, b, {0.5, 0.5, 0.5, 0.5});
  const double h = kPi / 4;
  const StateVector ideal = embed_pair(
      b, b, {0.5 * std::polar(1.0, -h), 0.5 * std::polar(1.0, h), 0.5 * std::polar(1.0, h),
             0.5 * std::polar(1.0, -h)});
  const auto r = apply_zz(kPi / 2, 2.0, b.params, b.params, psi);
  EXPECT_GE(fidelity(r.final_state, ideal), 0.98);
  EXPECT_LT(r.norm_drift, 1e-9);

  // Schmidt coefficients of the logical amplitudes.
  const auto proj = project_to_qubits(r.final_state, b, b);
  EXPECT_LT(proj.leakage, 1e-2);
  Eigen::Matrix2cd m;
  m << proj.amplitudes(0), proj.amplitudes(1), proj.amplitudes(2), proj.amplitudes(3);
  const Eigen::Vector2d s = Eigen::JacobiSVD<Eigen::Matrix2cd>(m).singularValues();
  EXPECT_GT(s(1), 0.1);
  EXPECT_NEAR(s(0), s(1), 0.05);
}

TEST(Zz, LongerGateIsNotWorse) {
  const QubitBasis& b = basis();
  const StateVector psi = embed_pair(b, b, {0.5, 0.5, 0.5, 0.5});
  const StateVector ideal = apply_logical_pair(b, ideal_gate(GateKind::zz, kPi), psi);
  const double f2 = fidelity(apply_zz(kPi, 2.0, b.params, b.params, psi).final_state, ideal);
  const double f4 = fidelity(apply_zz(kPi, 4.0, b.params, b.params, psi).final_state, ideal);
  EXPECT_GE(f2, 0.98);
  EXPECT_GE(f4, f2 - 1e-6);
}

TEST(Init, SlowRampReachesCat) {
  const auto r = initialize_qubit(KpoParams{}, 100.0);
  EXPECT_GE(r.cat_fidelity, 0.999);
  EXPECT_NEAR(r.sim.parity_trace.back().second, 1.0, 1e-8);
  EXPECT_LT(r.sim.norm_drift, 1e-9);
}

TEST(Init, QuenchStaysInVacuum) {
  // <0|C+> = 2 e^{-p/2K} / sqrt(2 (1 + e^{-2p/K})) at p/K = 4.
  const double overlap = 2.0 * std::exp(-2.0) / std::sqrt(2.0 * (1.0 + std::exp(-8.0)));
  const double analytic = overlap * overlap;
  EXPECT_NEAR(analytic, 2.0 * std::exp(-4.0) / (1.0 + std::exp(-8.0)), 1e-15);
  EXPECT_NEAR(fidelity(vacuum(20), basis().cat_plus), analytic, 1e-8);
  IntegrateOptions o;
  o.step = 1e-6;
  const auto r = initialize_qubit(KpoParams{}, 1e-4, ScheduleKind::sine_squared, o);
  EXPECT_NEAR(r.cat_fidelity, analytic, 1e-3 * analytic);
}

TEST(Init, ParityPreservedForAnyDuration) {
  for (double t : {1.0, 7.5, 30.0}) {
    for (ScheduleKind ramp : {ScheduleKind::sine_squared, ScheduleKind::linear_ramp}) {
      const auto r = initialize_qubit(KpoParams{}, t, ramp);
      EXPECT_GE(parity_expectation(r.sim.final_state), 1.0 - 1e-8);
      for (const auto& [time, parity] : r.sim.parity_trace) EXPECT_NEAR(parity, 1.0, 1e-8) << time;
    }
  }
}

TEST(Sequence, RotationsCompose) {
  // Rz then Rx on the oscillator tracks the same logical sequence.
  const QubitBasis& b = basis();
  const StateVector psi = b.zero;
  const StateVector mid = apply_rz(kPi / 3, 2.0, b.params, psi).final_state;
  const StateVector out = apply_rx(1.5, 10.0, b.params, mid).final_state;
  const auto est = extract_theta(out, mid, b);
  const StateVector ideal =
      apply_logical(b, ideal_gate(GateKind::rx, est.theta),
                    apply_logical(b, ideal_gate(GateKind::rz, kPi / 3), psi));
  EXPECT_GE(fidelity(out, ideal), 0.95);
}

TEST(Warnings, LeakageFlaggedOnPoorTruncation) {
  auto old = set_warning_handler([](std::string_view) {});
  const KpoParams p{1.0, 4.0, 0.0, 8};
  const QubitBasis b = QubitBasis::make(p);
  const auto r = apply_rz(kPi, 0.5, p, b.embed(kInvSqrt2, kInvSqrt2));
  set_warning_handler(old);
  EXPECT_FALSE(r.warnings.empty());
}
