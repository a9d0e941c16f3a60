// Copyright 2026 The itoprop developers
//
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

#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "itoprop/core.hpp"
#include "itoprop/generator.hpp"

namespace ito {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Harmonic oscillator (truncated number basis)
// ---------------------------------------------------------------------------

struct HoOperators {
  Matrix x;   // (a + a^dag) / sqrt(2 m w)
  Matrix p;   // i sqrt(m w / 2) (a^dag - a); phase convention: p_{01} = -i sqrt(m w / 2)
  Matrix h0;  // diag w (n + 1/2)
};

inline HoOperators ho_operators(int n_trunc, double mass = 1.0, double omega = 1.0) {
  if (n_trunc < 2) throw std::invalid_argument("ho_operators: n_trunc must be >= 2");
  Matrix a = Matrix::Zero(n_trunc, n_trunc);
  for (int n = 1; n < n_trunc; ++n) a(n - 1, n) = std::sqrt(double(n));
  const Matrix ad = a.adjoint();
  HoOperators ops;
  ops.x = (a + ad) / std::sqrt(2.0 * mass * omega);
  ops.p = I1 * std::sqrt(mass * omega / 2.0) * (ad - a);
  ops.h0 = Matrix::Zero(n_trunc, n_trunc);
  for (int n = 0; n < n_trunc; ++n) ops.h0(n, n) = omega * (n + 0.5);
  return ops;
}

/// Ground state of H = p^2/2 + omega^2 x^2 / 2, expressed in the unit-frequency
/// number basis. Phase fixed so the largest-magnitude component is real
/// positive.
inline Vector ho_ground_state(int n_trunc, double omega) {
  const HoOperators ops = ho_operators(n_trunc);
  Matrix h = 0.5 * ops.p * ops.p + 0.5 * omega * omega * ops.x * ops.x;
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector ground = es.eigenvectors().col(0);
  int imax = 0;
  for (int i = 1; i < ground.size(); ++i)
    if (std::abs(ground(i)) > std::abs(ground(imax))) imax = i;
  ground *= std::conj(ground(imax)) / std::abs(ground(imax));
  return ground;
}

// ---------------------------------------------------------------------------
// Linearly driven HO: H = p^2/2m + m w^2 x^2/2 + field(t) x, with a
// sin^2-envelope cosine pulse and a closed-form solution for <x>, <p>.
// ---------------------------------------------------------------------------

struct DrivenHoModel {
  double mass = 1.0;
  double omega = 1.0;
  double e0 = 1e-3;
  double omega_l = 5.0;
  double t_final = 100.0;
  int n_ho = 16;

  double field(double t) const {
    const double s = std::sin(std::numbers::pi * t / t_final);
    return e0 * s * s * std::cos(omega_l * t);
  }

  Generator generator() const {
    const HoOperators ops = ho_operators(n_ho, mass, omega);
    const Matrix drift = -I1 * (0.5 / mass * ops.p.adjoint() * ops.p +
                                0.5 * mass * omega * omega * ops.x * ops.x);
    const Matrix control = -I1 * ops.x;
    return Generator::controlled(drift, control, [*this](double t) { return field(t); });
  }

  QuantumState ground_state() const {
    Vector v = Vector::Zero(n_ho);
    v(0) = 1.0;
    return {v, SpaceTag::Hilbert};
  }
};

namespace detail {

/// E(a, t) = integral_0^t exp(i a s) ds, in a cancellation-free form; the
/// series branch covers the resonant limit a -> 0.
inline Complex osc_integral(double a, double t) {
  const double at = a * t;
  if (std::abs(at) < 1e-6) {
    return t * Complex{1.0 - at * at / 6.0, 0.5 * at - at * at * at / 24.0};
  }
  const double s_half = std::sin(0.5 * at);
  return Complex{-2.0 * s_half * s_half, std::sin(at)} / (I1 * a);
}

}  // namespace detail

/// Closed-form <x>(t), <p>(t) for DrivenHoModel starting from the ground
/// state: z(t) = -exp(i w t) * integral_0^t field(s) exp(-i w s) ds, with
/// <x> = Im(z)/(m w) and <p> = Re(z). The sin^2 cos pulse splits into three
/// cosines, each integrating to a pair of complex exponential integrals.
inline std::pair<double, double> driven_ho_analytic(const DrivenHoModel& m, double t) {
  const double w = m.omega;
  const double wt = kTwoPi / m.t_final;  // envelope frequency
  auto cos_part = [&](double big_omega) {
    return 0.5 * (detail::osc_integral(big_omega - w, t) + detail::osc_integral(-big_omega - w, t));
  };
  const Complex integral = 0.5 * cos_part(m.omega_l) - 0.25 * cos_part(m.omega_l + wt) -
                           0.25 * cos_part(m.omega_l - wt);
  const Complex z = -std::exp(I1 * w * t) * m.e0 * integral;
  return {z.imag() / (m.mass * w), z.real()};
}

// ---------------------------------------------------------------------------
// Frequency-controlled HO: H = p^2/2 + field(t) x^2/2 (unit mass; the control
// is the squared frequency). field = 1 reproduces the unit HO.
// ---------------------------------------------------------------------------

struct FreqHoModel {
  int n_ho = 30;

  Generator generator(std::function<double(double)> field) const {
    const HoOperators ops = ho_operators(n_ho);
    const Matrix drift = -I1 * (0.5 * ops.p.adjoint() * ops.p);
    const Matrix control = -I1 * (0.5 * ops.x * ops.x);
    return Generator::controlled(drift, control, std::move(field));
  }

  QuantumState ground_state(double omega) const { return {ho_ground_state(n_ho, omega), SpaceTag::Hilbert}; }
};

// ---------------------------------------------------------------------------
// Anharmonic qudit ladder with Pythagorean three-tone drive.
// Angular frequencies in rad/ns, times in ns.
// ---------------------------------------------------------------------------

struct PythagoreanDrive {
  double v01 = 0.0, v12 = 0.0, v23 = 0.0;
  double w01 = 0.0, w12 = 0.0, w23 = 0.0;
};

struct QuditModel {
  int n_levels = 10;
  double omega0 = kTwoPi * 6.73;       // rad/ns
  double beta = kTwoPi * 0.12;         // rad/ns
  double t1 = 230.0;                   // ns
  double t2_star = 120.0;              // ns
  double omega_rabi = kTwoPi * 0.0476; // rad/ns
  double p = 0.86;
  double q = 0.86;

  double energy(int n) const { return n * omega0 - 0.5 * beta * n * (n - 1); }
  /// Transition frequency between levels n and n+1.
  double transition_freq(int n) const { return omega0 - n * beta; }

  Matrix h0() const {
    Matrix h = Matrix::Zero(n_levels, n_levels);
    for (int n = 0; n < n_levels; ++n) h(n, n) = energy(n);
    return h;
  }

  /// Nearest-neighbor coupling operator multiplying the scalar field.
  Matrix h1_coupling() const {
    Matrix h = Matrix::Zero(n_levels, n_levels);
    for (int n = 0; n + 1 < n_levels; ++n) h(n, n + 1) = h(n + 1, n) = std::sqrt(double(n + 1));
    return h;
  }

  PythagoreanDrive drive() const {
    PythagoreanDrive d;
    d.v01 = omega_rabi * 0.5 * (p * p + q * q);
    d.v12 = omega_rabi * p * q;
    d.v23 = omega_rabi * 0.5 * (p * p - q * q);
    d.w01 = transition_freq(0);
    d.w12 = transition_freq(1);
    d.w23 = transition_freq(2);
    return d;
  }

  /// Three-tone lab-frame field, each tone resonant with one of the lowest
  /// transitions and scaled by 1/sqrt(k).
  std::function<double(double)> pythagorean_field() const {
    const PythagoreanDrive d = drive();
    return [d](double t) {
      return d.v01 * std::cos(d.w01 * t) + d.v12 / std::sqrt(2.0) * std::cos(d.w12 * t) +
             d.v23 / std::sqrt(3.0) * std::cos(d.w23 * t);
    };
  }

  std::vector<std::pair<Matrix, double>> lindblad_ops() const {
    if (t1 <= 0.0 || t2_star <= 0.0) throw std::invalid_argument("QuditModel: T1, T2* must be positive");
    Matrix l1 = Matrix::Zero(n_levels, n_levels);
    for (int n = 0; n + 1 < n_levels; ++n) l1(n, n + 1) = std::sqrt((n + 1) / t1);
    Matrix l2 = Matrix::Zero(n_levels, n_levels);
    for (int n = 1; n < n_levels; ++n) l2(n, n) = std::sqrt(2.0 * n * n / t2_star);
    return {{l1, 1.0}, {l2, 1.0}};
  }

  /// Hilbert-space generator, Schroedinger picture: G(t) = -i (H0 + H1 e(t)).
  Generator hilbert_generator(std::function<double(double)> field) const {
    return Generator::controlled(-I1 * h0(), -I1 * h1_coupling(), std::move(field));
  }

  /// Liouville-space generator, optionally with the T1/T2* dissipators.
  Generator liouville_generator(std::function<double(double)> field, bool dissipative) const {
    Matrix drift = commutator_superop(h0());
    if (dissipative) drift += dissipator_superop(lindblad_ops());
    return Generator::controlled(drift, commutator_superop(h1_coupling()), std::move(field));
  }

  /// Interaction-picture Hamiltonian under the three-tone drive. The full
  /// form keeps co- and counter-rotating exponentials; the RWA form drops
  /// the counter-rotating ones.
  Matrix interaction_hamiltonian(double t, bool rwa) const {
    const PythagoreanDrive d = drive();
    const double amps[3] = {d.v01, d.v12 / std::sqrt(2.0), d.v23 / std::sqrt(3.0)};
    const double tones[3] = {d.w01, d.w12, d.w23};
    Matrix h = Matrix::Zero(n_levels, n_levels);
    for (int n = 0; n + 1 < n_levels; ++n) {
      const double wn = transition_freq(n);
      Complex c = 0.0;
      for (int k = 0; k < 3; ++k) {
        c += amps[k] * std::exp(I1 * (tones[k] - wn) * t);
        if (!rwa) c += amps[k] * std::exp(-I1 * (tones[k] + wn) * t);
      }
      h(n, n + 1) = 0.5 * std::sqrt(double(n + 1)) * c;
    }
    Matrix full = h + h.adjoint().eval();
    return full;
  }

  Generator interaction_generator(bool rwa) const {
    return Generator::generic(n_levels,
                              [*this, rwa](double t) { return Matrix(-I1 * interaction_hamiltonian(t, rwa)); });
  }

  /// Idealized time-independent interaction Hamiltonian: tridiagonal V/2
  /// couplings inside the lowest four levels, zero elsewhere.
  Matrix h_inf() const {
    const PythagoreanDrive d = drive();
    Matrix h = Matrix::Zero(n_levels, n_levels);
    h(0, 1) = h(1, 0) = 0.5 * d.v01;
    h(1, 2) = h(2, 1) = 0.5 * d.v12;
    h(2, 3) = h(3, 2) = 0.5 * d.v23;
    return h;
  }

  Generator ideal_generator() const { return Generator::constant(Matrix(-I1 * h_inf())); }

  QuantumState basis_state(int n, SpaceTag space = SpaceTag::Hilbert) const {
    Vector v = Vector::Zero(n_levels);
    v(n) = 1.0;
    if (space == SpaceTag::Hilbert) return {v, space};
    Matrix rho = Matrix::Zero(n_levels, n_levels);
    rho(n, n) = 1.0;
    return vectorize(rho);
  }
};

// ---------------------------------------------------------------------------
// Population mismatch between two trajectories on identical grids
// ---------------------------------------------------------------------------

struct PopulationMismatch {
  std::vector<double> pointwise;  // max over levels of |P_n^a - P_n^b|
  double time_average = 0.0;
};

inline PopulationMismatch population_mismatch(const std::vector<Eigen::VectorXd>& pops_a,
                                              const std::vector<Eigen::VectorXd>& pops_b) {
  if (pops_a.size() != pops_b.size() || pops_a.empty())
    throw std::invalid_argument("population_mismatch: grids differ or are empty");
  PopulationMismatch out;
  out.pointwise.reserve(pops_a.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < pops_a.size(); ++i) {
    if (pops_a[i].size() != pops_b[i].size())
      throw std::invalid_argument("population_mismatch: level counts differ");
    const double d = (pops_a[i] - pops_b[i]).cwiseAbs().maxCoeff();
    out.pointwise.push_back(d);
    sum += d;
  }
  out.time_average = sum / double(out.pointwise.size());
  return out;
}

}  // namespace ito
