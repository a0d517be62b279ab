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

// Time integration of i d/dt psi = H(t) psi.
//
// integrate() is the production path: classic fixed-step RK4.
// propagate_reference() is an independent check: piecewise-constant
// midpoint exponentials computed from Hermitian eigendecompositions.

#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "kpo/fock.hpp"
#include "kpo/hamiltonian.hpp"

namespace kpo {

struct ScheduledTerm {
  Operator op;
  PulseSchedule schedule;
};

/// H(t) = base + sum_i schedule_i(t) * op_i on [0, duration].
class TimeDependentHamiltonian {
 public:
  TimeDependentHamiltonian(Operator base, std::vector<ScheduledTerm> terms, double duration)
      : base_(std::move(base)), terms_(std::move(terms)), duration_(duration) {
    if (!(duration_ > 0.0)) {
      throw Error(ErrorKind::invalid_parameter, "Hamiltonian duration must be positive");
    }
    for (const auto& term : terms_) {
      detail::require_same_dims(base_.dims(), term.op.dims(), "Hamiltonian term");
      if (term.schedule.duration < duration_) {
        throw Error(ErrorKind::invalid_parameter,
                    "schedule shorter than the Hamiltonian duration");
      }
    }
  }

  const Operator& base() const noexcept { return base_; }
  const std::vector<ScheduledTerm>& terms() const noexcept { return terms_; }
  double duration() const noexcept { return duration_; }
  const Dims& dims() const noexcept { return base_.dims(); }

  std::vector<double> coefficients(double t) const {
    std::vector<double> c;
    c.reserve(terms_.size());
    for (const auto& term : terms_) c.push_back(schedule_eval(term.schedule, t));
    return c;
  }

  Operator at(double t) const {
    Matrix m = base_.matrix();
    const auto c = coefficients(t);
    for (std::size_t i = 0; i < terms_.size(); ++i) m += c[i] * terms_[i].op.matrix();
    return Operator(std::move(m), dims());
  }

 private:
  Operator base_;
  std::vector<ScheduledTerm> terms_;
  double duration_;
};

struct TrajectoryPoint {
  double t = 0.0;
  double norm = 1.0;
  double parity = 0.0;
  double top_population = 0.0;
  std::vector<std::vector<double>> marginals;  // per mode, index = Fock level
};

struct SimResult {
  StateVector final_state;
  double norm_drift = 0.0;      // |‖psi(T)‖ - 1| before renormalization
  double leakage = 0.0;         // max population of the top two Fock levels over samples
  std::vector<std::pair<double, double>> parity_trace;
  int steps = 0;
  std::vector<TrajectoryPoint> trajectory;
  std::vector<std::pair<double, StateVector>> samples;  // only with store_states
  std::vector<std::string> warnings;
};

struct IntegrateOptions {
  double step = 1e-3;
  int sample_every = 100;
  bool store_states = false;
  double divergence_threshold = 1e-6;
};

namespace detail {

// Matrix-vector kernel that uses a real matrix when the operator has no
// imaginary part (all Hamiltonians here are real symmetric).
class MatVec {
 public:
  explicit MatVec(const Operator& op) : real_(op.is_real()) {
    if (real_) {
      re_ = op.matrix().real();
    } else {
      cx_ = op.matrix();
    }
  }

  bool real() const noexcept { return real_; }

  // y += c * M x, with x given both as complex and split real/imaginary parts.
  void add_to(double c, const Vector& x, const Eigen::VectorXd& xr, const Eigen::VectorXd& xi,
              Eigen::VectorXd& yr, Eigen::VectorXd& yi, Vector& y) const {
    if (real_) {
      yr.noalias() += c * (re_ * xr);
      yi.noalias() += c * (re_ * xi);
    } else {
      y.noalias() += c * (cx_ * x);
    }
  }

 private:
  bool real_;
  Eigen::MatrixXd re_;
  Matrix cx_;
};

class Derivative {
 public:
  explicit Derivative(const TimeDependentHamiltonian& h) : h_(h), base_(h.base()) {
    for (const auto& term : h.terms()) terms_.emplace_back(term.op);
    const int n = h.base().dim();
    xr_.resize(n);
    xi_.resize(n);
    yr_.resize(n);
    yi_.resize(n);
    y_.resize(n);
  }

  // out = -i H(t) x
  void operator()(double t, const Vector& x, Vector& out) {
    xr_ = x.real();
    xi_ = x.imag();
    yr_.setZero();
    yi_.setZero();
    y_.setZero();
    base_.add_to(1.0, x, xr_, xi_, yr_, yi_, y_);
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      const double c = schedule_eval(h_.terms()[i].schedule, t);
      if (c != 0.0) terms_[i].add_to(c, x, xr_, xi_, yr_, yi_, y_);
    }
    // -i (yr + i yi) = yi - i yr
    out.real() = yi_;
    out.imag() = -yr_;
    out += -kI * y_;
  }

 private:
  const TimeDependentHamiltonian& h_;
  MatVec base_;
  std::vector<MatVec> terms_;
  Eigen::VectorXd xr_, xi_, yr_, yi_;
  Vector y_;
};

inline TrajectoryPoint observe(double t, const StateVector& psi) {
  TrajectoryPoint p;
  p.t = t;
  p.norm = psi.norm();
  const double n2 = p.norm * p.norm;
  p.parity = parity_expectation(psi) / n2;
  p.top_population = top_level_population(psi) / n2;
  for (int m = 0; m < psi.modes(); ++m) {
    auto pop = marginal_populations(psi, m);
    for (auto& v : pop) v /= n2;
    p.marginals.push_back(std::move(pop));
  }
  return p;
}

inline void check_initial_state(const TimeDependentHamiltonian& h, const StateVector& psi0) {
  require_same_dims(h.dims(), psi0.dims(), "initial state");
  if (std::abs(psi0.norm() - 1.0) > 1e-8) {
    throw Error(ErrorKind::invalid_parameter, "initial state must have unit norm");
  }
}

}  // namespace detail

/// Fixed-step RK4. The step is shrunk so an integer number of steps spans the
/// duration exactly. Throws integration_diverged when the norm drifts by more
/// than options.divergence_threshold.
inline SimResult integrate(const TimeDependentHamiltonian& h, const StateVector& psi0,
                           const IntegrateOptions& options = {}) {
  detail::check_initial_state(h, psi0);
  if (!(options.step > 0.0)) throw Error(ErrorKind::invalid_parameter, "step must be positive");
  const int sample_every = std::max(1, options.sample_every);

  const double T = h.duration();
  const int steps = std::max(1, static_cast<int>(std::ceil(T / options.step - 1e-9)));
  const double dt = T / steps;
  auto clamp_t = [T](double t) { return std::min(t, T); };

  detail::Derivative deriv(h);
  const int n = psi0.dim();
  Vector psi = psi0.amplitudes();
  Vector k1(n), k2(n), k3(n), k4(n), tmp(n);

  SimResult result{psi0, 0.0, 0.0, {}, steps, {}, {}, {}};
  auto record = [&](double t) {
    StateVector s(psi, h.dims());
    auto point = detail::observe(t, s);
    result.parity_trace.emplace_back(t, point.parity);
    result.leakage = std::max(result.leakage, point.top_population);
    result.trajectory.push_back(std::move(point));
    if (options.store_states) result.samples.emplace_back(t, std::move(s));
  };

  record(0.0);
  for (int i = 0; i < steps; ++i) {
    const double t = i * dt;
    const double t_mid = clamp_t(t + 0.5 * dt);
    const double t_end = clamp_t((i + 1) * dt);
    deriv(t, psi, k1);
    tmp = psi + (0.5 * dt) * k1;
    deriv(t_mid, tmp, k2);
    tmp = psi + (0.5 * dt) * k2;
    deriv(t_mid, tmp, k3);
    tmp = psi + dt * k3;
    deriv(t_end, tmp, k4);
    psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if ((i + 1) % sample_every == 0 && i + 1 != steps) record(t_end);
  }
  record(T);

  const double final_norm = psi.norm();
  result.norm_drift = std::abs(final_norm - 1.0);
  if (!std::isfinite(final_norm) || result.norm_drift > options.divergence_threshold) {
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "norm drift %.3g exceeds %.3g after %d steps of %.3g; use a smaller step",
                  result.norm_drift, options.divergence_threshold, steps, dt);
    throw Error(ErrorKind::integration_diverged, buf);
  }
  result.final_state = StateVector(psi / final_norm, h.dims());
  if (result.leakage > 1e-6) {
    char buf[120];
    std::snprintf(buf, sizeof buf, "top-two Fock level population %.3g exceeds 1e-6",
                  result.leakage);
    result.warnings.emplace_back(buf);
  }
  return result;
}

namespace detail {

// Connected components of the union sparsity graph of all terms. Each block is
// an invariant subspace of H(t) for every t (e.g. parity sectors).
inline std::vector<std::vector<int>> coupled_blocks(const TimeDependentHamiltonian& h) {
  const int n = h.base().dim();
  Eigen::MatrixXd pattern = h.base().matrix().cwiseAbs();
  for (const auto& term : h.terms()) pattern += term.op.matrix().cwiseAbs();
  std::vector<int> label(n, -1);
  std::vector<std::vector<int>> blocks;
  for (int seed = 0; seed < n; ++seed) {
    if (label[seed] >= 0) continue;
    const int id = static_cast<int>(blocks.size());
    blocks.emplace_back();
    std::vector<int> stack{seed};
    label[seed] = id;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      blocks[id].push_back(i);
      for (int j = 0; j < n; ++j) {
        if (label[j] < 0 && (pattern(i, j) != 0.0 || pattern(j, i) != 0.0)) {
          label[j] = id;
          stack.push_back(j);
        }
      }
    }
    std::sort(blocks[id].begin(), blocks[id].end());
  }
  return blocks;
}

// x <- exp(-i H dt) x on one block.
inline void exponentiate_block(const Matrix& h_block, bool real, double dt, Vector& x) {
  if (real) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_block.real());
    const Eigen::MatrixXd& v = es.eigenvectors();
    Vector phases = (-kI * dt * es.eigenvalues().cast<Complex>()).array().exp();
    Eigen::VectorXd cr = v.transpose() * x.real();
    Eigen::VectorXd ci = v.transpose() * x.imag();
    Vector c = phases.cwiseProduct(Vector(cr.cast<Complex>() + kI * ci.cast<Complex>()));
    Eigen::VectorXd yr = v * c.real();
    Eigen::VectorXd yi = v * c.imag();
    x = yr.cast<Complex>() + kI * yi.cast<Complex>();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h_block);
    const Matrix& v = es.eigenvectors();
    Vector phases = (-kI * dt * es.eigenvalues().cast<Complex>()).array().exp();
    x = v * phases.cwiseProduct(v.adjoint() * x);
  }
}

}  // namespace detail

/// Product of exp(-i H(t_k) dt) over n_slices midpoints t_k; second order in dt.
inline StateVector propagate_reference(const TimeDependentHamiltonian& h, const StateVector& psi0,
                                       int n_slices) {
  detail::check_initial_state(h, psi0);
  if (n_slices < 1) throw Error(ErrorKind::invalid_parameter, "n_slices must be >= 1");

  bool real = h.base().is_real();
  for (const auto& term : h.terms()) real = real && term.op.is_real();
  const auto blocks = detail::coupled_blocks(h);

  const double T = h.duration();
  // A time-independent H needs a single exponential.
  const int slices = h.terms().empty() ? 1 : n_slices;
  const double dt = T / slices;

  Vector psi = psi0.amplitudes();
  for (int k = 0; k < slices; ++k) {
    const Matrix hm = h.at(std::min((k + 0.5) * dt, T)).matrix();
    for (const auto& block : blocks) {
      const int m = static_cast<int>(block.size());
      Matrix sub(m, m);
      Vector x(m);
      for (int r = 0; r < m; ++r) {
        x(r) = psi(block[r]);
        for (int c = 0; c < m; ++c) sub(r, c) = hm(block[r], block[c]);
      }
      detail::exponentiate_block(sub, real, dt, x);
      for (int r = 0; r < m; ++r) psi(block[r]) = x(r);
    }
  }
  return StateVector(std::move(psi), h.dims());
}

/// Columns: t, norm, parity, leakage, then the populations of the `top_k`
/// highest Fock levels of each mode.
inline void write_trajectory_csv(std::ostream& out, const SimResult& result, int top_k = 3) {
  if (result.trajectory.empty()) return;
  const auto& first = result.trajectory.front().marginals;
  out << "t,norm,parity,leakage";
  for (std::size_t m = 0; m < first.size(); ++m) {
    const int d = static_cast<int>(first[m].size());
    for (int k = 0; k < std::min(top_k, d); ++k) out << ",p" << (m + 1) << "_n" << (d - 1 - k);
  }
  out << '\n';
  for (const auto& p : result.trajectory) {
    out << detail::format_g9(p.t) << ',' << detail::format_g9(p.norm) << ','
        << detail::format_g9(p.parity) << ',' << detail::format_g9(p.top_population);
    for (const auto& pop : p.marginals) {
      const int d = static_cast<int>(pop.size());
      for (int k = 0; k < std::min(top_k, d); ++k) out << ',' << detail::format_g9(pop[d - 1 - k]);
    }
    out << '\n';
  }
}

}  // namespace kpo
