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

// Truncated Fock-space primitives for one or two bosonic modes.
//
// A mode truncated at photon number n_max has dimension n_max + 1. Joint
// two-mode objects use the index n1 * d2 + n2 (mode 1 varies slowest).

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "kpo/error.hpp"

namespace kpo {

using Complex = std::complex<double>;
using Dims = std::vector<int>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr Complex kI{0.0, 1.0};

namespace detail {

inline int dims_product(const Dims& dims) {
  int n = 1;
  for (int d : dims) n *= d;
  return n;
}

inline void check_dims(const Dims& dims) {
  if (dims.empty() || dims.size() > 2) {
    throw Error(ErrorKind::invalid_dimension, "expected one or two modes, got " +
                                                  std::to_string(dims.size()));
  }
  for (int d : dims) {
    if (d < 2) throw Error(ErrorKind::invalid_dimension, "mode dimension must be >= 2");
  }
}

inline std::string dims_string(const Dims& dims) {
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

inline void require_same_dims(const Dims& a, const Dims& b, const char* where) {
  if (a != b) {
    throw Error(ErrorKind::dimension_mismatch,
                std::string(where) + ": " + dims_string(a) + " vs " + dims_string(b));
  }
}

inline void require_n_max(int n_max) {
  if (n_max < 1) {
    throw Error(ErrorKind::invalid_dimension,
                "n_max must be >= 1, got " + std::to_string(n_max));
  }
}

}  // namespace detail

/// Pure state over a (possibly two-mode) truncated Fock basis.
class StateVector {
 public:
  StateVector(Vector amplitudes, Dims dims)
      : amplitudes_(std::move(amplitudes)), dims_(std::move(dims)) {
    detail::check_dims(dims_);
    if (amplitudes_.size() != detail::dims_product(dims_)) {
      throw Error(ErrorKind::dimension_mismatch,
                  "amplitude count " + std::to_string(amplitudes_.size()) +
                      " does not match dims " + detail::dims_string(dims_));
    }
  }

  const Vector& amplitudes() const noexcept { return amplitudes_; }
  const Dims& dims() const noexcept { return dims_; }
  int dim() const noexcept { return static_cast<int>(amplitudes_.size()); }
  int modes() const noexcept { return static_cast<int>(dims_.size()); }
  Complex operator[](int i) const { return amplitudes_(i); }

  double norm() const { return amplitudes_.norm(); }

  StateVector normalized() const {
    const double n = norm();
    if (n == 0.0) throw Error(ErrorKind::zero_vector, "cannot normalize the zero vector");
    return StateVector(amplitudes_ / n, dims_);
  }

  friend StateVector operator*(Complex c, const StateVector& s) {
    return StateVector(c * s.amplitudes_, s.dims_);
  }
  friend StateVector operator+(const StateVector& a, const StateVector& b) {
    detail::require_same_dims(a.dims_, b.dims_, "state addition");
    return StateVector(a.amplitudes_ + b.amplitudes_, a.dims_);
  }
  friend StateVector operator-(const StateVector& a, const StateVector& b) {
    detail::require_same_dims(a.dims_, b.dims_, "state subtraction");
    return StateVector(a.amplitudes_ - b.amplitudes_, a.dims_);
  }

 private:
  Vector amplitudes_;
  Dims dims_;
};

/// Dense operator on the same index space as StateVector.
class Operator {
 public:
  Operator(Matrix entries, Dims dims) : entries_(std::move(entries)), dims_(std::move(dims)) {
    detail::check_dims(dims_);
    const int n = detail::dims_product(dims_);
    if (entries_.rows() != n || entries_.cols() != n) {
      throw Error(ErrorKind::dimension_mismatch,
                  "operator shape does not match dims " + detail::dims_string(dims_));
    }
  }

  static Operator zero(const Dims& dims) {
    const int n = detail::dims_product(dims);
    return Operator(Matrix::Zero(n, n), dims);
  }
  static Operator identity(const Dims& dims) {
    const int n = detail::dims_product(dims);
    return Operator(Matrix::Identity(n, n), dims);
  }

  const Matrix& matrix() const noexcept { return entries_; }
  const Dims& dims() const noexcept { return dims_; }
  int dim() const noexcept { return static_cast<int>(entries_.rows()); }
  Complex operator()(int r, int c) const { return entries_(r, c); }

  Operator adjoint() const { return Operator(entries_.adjoint(), dims_); }

  /// max |H - H^dagger|; zero for exactly Hermitian operators.
  double hermiticity_error() const {
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
  }

  bool is_real() const { return entries_.imag().cwiseAbs().maxCoeff() == 0.0; }

  StateVector apply(const StateVector& psi) const {
    detail::require_same_dims(dims_, psi.dims(), "operator application");
    return StateVector(entries_ * psi.amplitudes(), dims_);
  }

  friend Operator operator+(const Operator& a, const Operator& b) {
    detail::require_same_dims(a.dims_, b.dims_, "operator addition");
    return Operator(a.entries_ + b.entries_, a.dims_);
  }
  friend Operator operator-(const Operator& a, const Operator& b) {
    detail::require_same_dims(a.dims_, b.dims_, "operator subtraction");
    return Operator(a.entries_ - b.entries_, a.dims_);
  }
  friend Operator operator*(const Operator& a, const Operator& b) {
    detail::require_same_dims(a.dims_, b.dims_, "operator product");
    return Operator(a.entries_ * b.entries_, a.dims_);
  }
  friend Operator operator*(Complex c, const Operator& a) {
    return Operator(c * a.entries_, a.dims_);
  }
  friend StateVector operator*(const Operator& a, const StateVector& psi) { return a.apply(psi); }

 private:
  Matrix entries_;
  Dims dims_;
};

inline Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

// --- single-mode ladder operators -------------------------------------------

inline Operator annihilation_operator(int n_max) {
  detail::require_n_max(n_max);
  const int d = n_max + 1;
  Matrix a = Matrix::Zero(d, d);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return Operator(std::move(a), {d});
}

inline Operator creation_operator(int n_max) { return annihilation_operator(n_max).adjoint(); }

inline Operator number_operator(int n_max) {
  detail::require_n_max(n_max);
  const int d = n_max + 1;
  Matrix n = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return Operator(std::move(n), {d});
}

// --- tensor products ----------------------------------------------------------

inline StateVector tensor(const StateVector& a, const StateVector& b) {
  if (a.modes() != 1 || b.modes() != 1) {
    throw Error(ErrorKind::invalid_dimension, "tensor expects two single-mode states");
  }
  const int d1 = a.dim();
  const int d2 = b.dim();
  Vector out(d1 * d2);
  for (int i = 0; i < d1; ++i) out.segment(i * d2, d2) = a[i] * b.amplitudes();
  return StateVector(std::move(out), {d1, d2});
}

inline Operator tensor(const Operator& a, const Operator& b) {
  if (a.dims().size() != 1 || b.dims().size() != 1) {
    throw Error(ErrorKind::invalid_dimension, "tensor expects two single-mode operators");
  }
  const int d1 = a.dim();
  const int d2 = b.dim();
  Matrix out = Matrix::Zero(d1 * d2, d1 * d2);
  for (int i = 0; i < d1; ++i) {
    for (int j = 0; j < d1; ++j) {
      if (a(i, j) != Complex(0.0)) out.block(i * d2, j * d2, d2, d2) = a(i, j) * b.matrix();
    }
  }
  return Operator(std::move(out), {d1, d2});
}

/// Lifts a single-mode operator onto mode `which` (0 or 1) of a joint space.
inline Operator embed(const Operator& op, int which, const Dims& joint) {
  if (joint.size() != 2 || (which != 0 && which != 1) || op.dim() != joint[which]) {
    throw Error(ErrorKind::dimension_mismatch, "cannot embed operator into " +
                                                   detail::dims_string(joint));
  }
  const Operator id = Operator::identity({joint[1 - which]});
  return which == 0 ? tensor(op, id) : tensor(id, op);
}

// --- states -------------------------------------------------------------------

inline StateVector fock_state(int n, int n_max) {
  detail::require_n_max(n_max);
  if (n < 0 || n > n_max) {
    throw Error(ErrorKind::out_of_range, "Fock level " + std::to_string(n) +
                                             " outside truncation " + std::to_string(n_max));
  }
  Vector v = Vector::Zero(n_max + 1);
  v(n) = 1.0;
  return StateVector(std::move(v), {n_max + 1});
}

inline StateVector vacuum(int n_max) { return fock_state(0, n_max); }

/// Recommended truncation for a coherent amplitude: |alpha|^2 + 6|alpha| <= n_max.
inline bool truncation_adequate(Complex alpha, int n_max) {
  const double r = std::abs(alpha);
  return r * r + 6.0 * r <= static_cast<double>(n_max);
}

/// Coherent state before renormalization; the norm deficit is 1 - ||c||^2.
inline Vector coherent_amplitudes(Complex alpha, int n_max) {
  detail::require_n_max(n_max);
  Vector c(n_max + 1);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (int n = 1; n <= n_max; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

/// Population lost by truncating |alpha> at n_max.
inline double coherent_norm_deficit(Complex alpha, int n_max) {
  return 1.0 - coherent_amplitudes(alpha, n_max).squaredNorm();
}

inline StateVector coherent_state(Complex alpha, int n_max) {
  if (!truncation_adequate(alpha, n_max)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "coherent state |alpha|=%.4g poorly resolved at n_max=%d (norm deficit %.3g)",
                  std::abs(alpha), n_max, coherent_norm_deficit(alpha, n_max));
    warn(buf);
  }
  Vector c = coherent_amplitudes(alpha, n_max);
  c /= c.norm();
  return StateVector(std::move(c), {n_max + 1});
}

enum class Parity { even, odd };

/// Even or odd Schroedinger cat (|alpha> +/- |-alpha>), normalized.
///
/// The amplitudes are built directly in each parity sector so the opposite
/// sector is exactly zero.
inline StateVector cat_state(Complex alpha, Parity parity, int n_max) {
  if (parity == Parity::odd && alpha == Complex(0.0)) {
    throw Error(ErrorKind::zero_vector, "odd cat state with alpha = 0 is the zero vector");
  }
  if (!truncation_adequate(alpha, n_max)) {
    warn("cat state amplitude poorly resolved at n_max=" + std::to_string(n_max));
  }
  Vector c = coherent_amplitudes(alpha, n_max);
  const int keep = parity == Parity::even ? 0 : 1;
  for (int n = 0; n <= n_max; ++n) {
    if (n % 2 != keep) c(n) = 0.0;
  }
  c /= c.norm();
  return StateVector(std::move(c), {n_max + 1});
}

// --- overlaps -------------------------------------------------------------------

inline Complex inner_product(const StateVector& bra, const StateVector& ket) {
  detail::require_same_dims(bra.dims(), ket.dims(), "inner product");
  return bra.amplitudes().dot(ket.amplitudes());
}

/// |<psi|phi>|^2.
inline double fidelity(const StateVector& psi, const StateVector& phi) {
  return std::norm(inner_product(psi, phi));
}

/// min over chi of ||psi - e^{i chi} phi||.
inline double phase_aligned_distance(const StateVector& psi, const StateVector& phi) {
  const Complex overlap = inner_product(phi, psi);
  const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex(1.0);
  return (psi.amplitudes() - phase * phi.amplitudes()).norm();
}

inline Complex expectation(const Operator& op, const StateVector& psi) {
  return inner_product(psi, op.apply(psi));
}

// --- parity -----------------------------------------------------------------------

inline double photon_parity(int index, const Dims& dims) {
  int total = 0;
  if (dims.size() == 1) {
    total = index;
  } else {
    total = index / dims[1] + index % dims[1];
  }
  return total % 2 == 0 ? 1.0 : -1.0;
}

/// (-1)^N with N the total photon number.
inline Operator parity_operator(const Dims& dims) {
  detail::check_dims(dims);
  const int n = detail::dims_product(dims);
  Matrix p = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) p(i, i) = photon_parity(i, dims);
  return Operator(std::move(p), dims);
}

inline double parity_expectation(const StateVector& psi) {
  double acc = 0.0;
  for (int i = 0; i < psi.dim(); ++i) acc += photon_parity(i, psi.dims()) * std::norm(psi[i]);
  return acc;
}

/// Photon-number distribution of one mode, tracing out the other.
inline std::vector<double> marginal_populations(const StateVector& psi, int which = 0) {
  const Dims& dims = psi.dims();
  if (which < 0 || which >= psi.modes()) {
    throw Error(ErrorKind::out_of_range, "mode index " + std::to_string(which));
  }
  std::vector<double> pop(dims[which], 0.0);
  for (int i = 0; i < psi.dim(); ++i) {
    int n = i;
    if (dims.size() == 2) n = which == 0 ? i / dims[1] : i % dims[1];
    pop[n] += std::norm(psi[i]);
  }
  return pop;
}

/// Population in the two highest Fock levels of any mode (truncation leakage).
inline double top_level_population(const StateVector& psi) {
  const Dims& dims = psi.dims();
  double acc = 0.0;
  for (int i = 0; i < psi.dim(); ++i) {
    bool top = false;
    if (dims.size() == 1) {
      top = i >= dims[0] - 2;
    } else {
      top = i / dims[1] >= dims[0] - 2 || i % dims[1] >= dims[1] - 2;
    }
    if (top) acc += std::norm(psi[i]);
  }
  return acc;
}

// --- Wigner function ----------------------------------------------------------------

/// <m|D(gamma)|n> of the untruncated displacement operator.
inline Complex displacement_element(int m, int n, Complex gamma) {
  const double r2 = std::norm(gamma);
  const int lo = std::min(m, n);
  const int k = std::abs(m - n);
  if (r2 == 0.0) return m == n ? 1.0 : 0.0;
  const double log_mag = -0.5 * r2 + 0.5 * (std::lgamma(lo + 1.0) - std::lgamma(lo + k + 1.0)) +
                         k * 0.5 * std::log(r2);
  const double lag = std::assoc_laguerre(static_cast<unsigned>(lo), static_cast<unsigned>(k), r2);
  const double phase_arg = m >= n ? std::arg(gamma) : std::arg(-std::conj(gamma));
  return std::exp(log_mag) * lag * std::polar(1.0, k * phase_arg);
}

struct PhaseSpaceGrid {
  double x_min = -4.0;
  double x_max = 4.0;
  int nx = 81;
  double p_min = -4.0;
  double p_max = 4.0;
  int np = 81;

  static PhaseSpaceGrid square(double extent, int points) {
    return {-extent, extent, points, -extent, extent, points};
  }

  double x(int i) const { return nx == 1 ? x_min : x_min + (x_max - x_min) * i / (nx - 1); }
  double p(int j) const { return np == 1 ? p_min : p_min + (p_max - p_min) * j / (np - 1); }
};

struct WignerMap {
  PhaseSpaceGrid grid;
  Eigen::MatrixXd values;  // values(j, i) = W(x_i + i p_j)
};

/// W(beta) = (2/pi) <psi| D(beta) P D(beta)^dagger |psi>, evaluated as
/// (2/pi) <psi| D(2 beta) P |psi>, which needs only the truncated block.
/// Normalized so that the integral over d(Re beta) d(Im beta) is 1.
inline double wigner_point(const StateVector& psi, Complex beta) {
  if (psi.modes() != 1) {
    throw Error(ErrorKind::invalid_dimension, "Wigner function needs a single-mode state");
  }
  const int d = psi.dim();
  const Complex gamma = 2.0 * beta;
  Complex acc = 0.0;
  for (int m = 0; m < d; ++m) {
    if (psi[m] == Complex(0.0)) continue;
    Complex row = 0.0;
    for (int n = 0; n < d; ++n) {
      if (psi[n] == Complex(0.0)) continue;
      row += displacement_element(m, n, gamma) * (n % 2 == 0 ? 1.0 : -1.0) * psi[n];
    }
    acc += std::conj(psi[m]) * row;
  }
  return 2.0 / std::numbers::pi * acc.real();
}

inline WignerMap wigner(const StateVector& psi, const PhaseSpaceGrid& grid) {
  if (psi.modes() != 1) {
    throw Error(ErrorKind::invalid_dimension, "Wigner function needs a single-mode state");
  }
  if (grid.nx < 1 || grid.np < 1) throw Error(ErrorKind::invalid_parameter, "empty Wigner grid");
  WignerMap map{grid, Eigen::MatrixXd(grid.np, grid.nx)};
  for (int j = 0; j < grid.np; ++j) {
    for (int i = 0; i < grid.nx; ++i) map.values(j, i) = wigner_point(psi, {grid.x(i), grid.p(j)});
  }
  return map;
}

/// Riemann sum of W over the grid cell area.
inline double wigner_integral(const WignerMap& map) {
  const double dx = map.grid.nx > 1 ? (map.grid.x_max - map.grid.x_min) / (map.grid.nx - 1) : 1.0;
  const double dp = map.grid.np > 1 ? (map.grid.p_max - map.grid.p_min) / (map.grid.np - 1) : 1.0;
  return map.values.sum() * dx * dp;
}

namespace detail {
inline std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
}  // namespace detail

/// CSV: '#' header lines, then a row of x values (leading cell "p\x"), then
/// one row per p value with W values, 9 significant digits.
inline void write_wigner_csv(std::ostream& out, const WignerMap& map,
                             const std::vector<std::string>& header = {}) {
  for (const auto& line : header) out << "# " << line << '\n';
  out << "# wigner=(2/pi)<psi|D(beta)PD(beta)^dag|psi>, beta=x+ip, integral dx dp = 1\n";
  out << "p\\x";
  for (int i = 0; i < map.grid.nx; ++i) out << ',' << detail::format_g9(map.grid.x(i));
  out << '\n';
  for (int j = 0; j < map.grid.np; ++j) {
    out << detail::format_g9(map.grid.p(j));
    for (int i = 0; i < map.grid.nx; ++i) out << ',' << detail::format_g9(map.values(j, i));
    out << '\n';
  }
}

}  // namespace kpo
