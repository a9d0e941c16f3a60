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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "itoprop/core.hpp"

namespace ito {

// ---------------------------------------------------------------------------
// Bases: Bell embedding of the four qudit levels and the magic basis
// ---------------------------------------------------------------------------

/// Columns are the Bell states in the two-qubit computational basis
/// |00>,|01>,|10>,|11>; qudit levels 0..3 map to Phi+, Phi-, Psi+, Psi-
/// in that order (a fixed, documented convention — any other order merely
/// relabels the maps).
inline const Matrix& bell_embedding() {
  static const Matrix b = [] {
    const double r = 1.0 / std::numbers::sqrt2;
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = r;  m(3, 0) = r;   // Phi+ = (|00> + |11>)/sqrt2
    m(0, 1) = r;  m(3, 1) = -r;  // Phi- = (|00> - |11>)/sqrt2
    m(1, 2) = r;  m(2, 2) = r;   // Psi+ = (|01> + |10>)/sqrt2
    m(1, 3) = r;  m(2, 3) = -r;  // Psi- = (|01> - |10>)/sqrt2
    return m;
  }();
  return b;
}

/// Magic basis change: columns are Phi+, i Phi-, i Psi+, Psi- expressed in
/// the computational basis. SU(2)xSU(2) becomes SO(4) in this basis.
inline const Matrix& magic_basis() {
  static const Matrix q = [] {
    const double r = 1.0 / std::numbers::sqrt2;
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = r;        m(3, 0) = r;
    m(0, 1) = r * I1;   m(3, 1) = -r * I1;
    m(1, 2) = r * I1;   m(2, 2) = r * I1;
    m(1, 3) = r;        m(2, 3) = -r;
    return m;
  }();
  return q;
}

inline double unitarity_defect(const Matrix& g) {
  return (g.adjoint() * g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Gate extraction from propagated basis states
// ---------------------------------------------------------------------------

/// Matrix elements <m|Psi_n(T)> on the lowest four levels; columns are the
/// propagated basis states. Non-unitary when population leaks out of the
/// subspace.
inline Matrix extract_gate(const std::vector<Vector>& finals) {
  if (finals.size() != 4) throw std::invalid_argument("extract_gate: need four final states");
  Matrix g(4, 4);
  for (int n = 0; n < 4; ++n)
    for (int m = 0; m < 4; ++m) g(m, n) = finals[std::size_t(n)](m);
  return g;
}

/// Unitary polar factor via SVD: the closest unitary in Frobenius distance.
inline Matrix closest_unitary(const Matrix& g) {
  Eigen::JacobiSVD<Matrix> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues().minCoeff() < 1e-10)
    throw std::runtime_error("closest_unitary: rank-deficient gate (extreme leakage)");
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// View a computational-basis two-qubit gate in the Bell basis (and back with
/// the adjoint pair).
inline Matrix to_bell_basis(const Matrix& g) { return bell_embedding().adjoint() * g * bell_embedding(); }

/// A qudit-subspace gate (levels as Bell states) expressed in the two-qubit
/// computational product basis.
inline Matrix qudit_gate_to_computational(const Matrix& g) {
  return bell_embedding() * g * bell_embedding().adjoint();
}

// ---------------------------------------------------------------------------
// Local invariants and entangling power
// ---------------------------------------------------------------------------

struct LocalInvariants {
  double g1 = 0.0, g2 = 0.0, g3 = 0.0;
  Eigen::Vector3d vec() const { return {g1, g2, g3}; }
};

namespace detail {

/// Normalize into SU(4) (principal branch of det^{1/4}) and form the magic
/// basis Gram matrix m = (Q^dag U Q)^T (Q^dag U Q), whose spectrum carries
/// all non-local content.
inline Matrix magic_gram(const Matrix& u_comp) {
  if (unitarity_defect(u_comp) > 1e-8)
    throw std::invalid_argument("magic_gram: input is not unitary; apply closest_unitary first");
  const Complex det = u_comp.determinant();
  const Matrix u_su4 = u_comp / std::pow(det, 0.25);
  const Matrix m_b = magic_basis().adjoint() * u_su4 * magic_basis();
  return m_b.transpose() * m_b;
}

}  // namespace detail

inline LocalInvariants makhlin_invariants(const Matrix& u_comp) {
  const Matrix m = detail::magic_gram(u_comp);
  const Complex tr = m.trace();
  const Complex tr2 = tr * tr;
  LocalInvariants inv;
  inv.g1 = tr2.real() / 16.0;
  inv.g2 = tr2.imag() / 16.0;
  inv.g3 = ((tr2 - (m * m).trace()) / 4.0).real();
  return inv;
}

/// Gate concurrence from the magic-basis Gram spectrum: half the largest
/// pairwise eigenvalue separation, clamped to [0, 1]. Local gates give 0,
/// maximally entangling gates 1.
inline double gate_concurrence(const Matrix& u_comp) {
  const Matrix m = detail::magic_gram(u_comp);
  Eigen::ComplexEigenSolver<Matrix> es(m);
  const auto& mu = es.eigenvalues();
  double best = 0.0;
  for (int j = 0; j < 4; ++j)
    for (int k = j + 1; k < 4; ++k) best = std::max(best, std::abs(mu(j) - mu(k)));
  return std::clamp(0.5 * best, 0.0, 1.0);
}

/// Entanglement entropy of a subspace state interpreted via the Bell
/// embedding: S = -tr(rho_A log2 rho_A) of the reduced one-qubit state.
inline double von_neumann_entropy(const Vector& subspace_state) {
  if (subspace_state.size() != 4) throw std::invalid_argument("von_neumann_entropy: need four amplitudes");
  const double nrm = subspace_state.norm();
  if (std::abs(nrm - 1.0) > 1e-8) throw std::invalid_argument("von_neumann_entropy: state not normalized");
  const Vector psi = bell_embedding() * subspace_state;
  Eigen::Matrix2cd rho_a = Eigen::Matrix2cd::Zero();
  for (int a = 0; a < 2; ++a)
    for (int ap = 0; ap < 2; ++ap)
      for (int b = 0; b < 2; ++b) rho_a(a, ap) += psi(2 * a + b) * std::conj(psi(2 * ap + b));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(rho_a);
  double s = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam > 1e-15) s -= lam * std::log2(lam);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Equivalence-class catalog
// ---------------------------------------------------------------------------

struct GateClass {
  std::string name;
  Eigen::Vector3d triple;
  Matrix gate;  // defining computational-basis matrix
};

using EquivalenceCatalog = std::vector<GateClass>;

/// The standard two-qubit classes; the on-disk catalog mirrors these and is
/// user-extensible.
inline EquivalenceCatalog builtin_catalog() {
  EquivalenceCatalog cat;
  auto add = [&cat](std::string name, Matrix g) {
    const LocalInvariants inv = makhlin_invariants(g);
    cat.push_back({std::move(name), inv.vec(), std::move(g)});
  };
  add("identity", Matrix::Identity(4, 4));

  Matrix cnot = Matrix::Identity(4, 4);
  cnot(2, 2) = cnot(3, 3) = 0.0;
  cnot(2, 3) = cnot(3, 2) = 1.0;
  add("CNOT", cnot);

  Matrix swap = Matrix::Identity(4, 4);
  swap(1, 1) = swap(2, 2) = 0.0;
  swap(1, 2) = swap(2, 1) = 1.0;
  add("SWAP", swap);

  Matrix iswap = Matrix::Identity(4, 4);
  iswap(1, 1) = iswap(2, 2) = 0.0;
  iswap(1, 2) = iswap(2, 1) = I1;
  add("iSWAP", iswap);

  Matrix sqswap = Matrix::Identity(4, 4);
  sqswap(1, 1) = sqswap(2, 2) = 0.5 * (1.0 + I1);
  sqswap(1, 2) = sqswap(2, 1) = 0.5 * (1.0 - I1);
  add("sqrtSWAP", sqswap);

  Matrix sqiswap = Matrix::Identity(4, 4);
  const double r = 1.0 / std::numbers::sqrt2;
  sqiswap(1, 1) = sqiswap(2, 2) = r;
  sqiswap(1, 2) = sqiswap(2, 1) = r * I1;
  add("sqrtiSWAP", sqiswap);

  Matrix bgate = Matrix::Zero(4, 4);
  const double c1 = std::cos(std::numbers::pi / 8), s1 = std::sin(std::numbers::pi / 8);
  const double c3 = std::cos(3 * std::numbers::pi / 8), s3 = std::sin(3 * std::numbers::pi / 8);
  bgate(0, 0) = bgate(3, 3) = c1;
  bgate(0, 3) = bgate(3, 0) = I1 * s1;
  bgate(1, 1) = bgate(2, 2) = c3;
  bgate(1, 2) = bgate(2, 1) = I1 * s3;
  add("B-gate", bgate);
  return cat;
}

/// Nearest class within the Euclidean match radius, ties broken by distance
/// then catalog order.
inline std::optional<std::string> classify(const LocalInvariants& inv, const EquivalenceCatalog& catalog,
                                           double radius = 0.1) {
  std::optional<std::string> best;
  double best_d = radius;
  for (const auto& cls : catalog) {
    const double d = (inv.vec() - cls.triple).norm();
    if (d <= best_d && (!best || d < best_d)) {
      best = cls.name;
      best_d = d;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Haar-random unitaries (deterministic per seed across platforms)
// ---------------------------------------------------------------------------

namespace detail {

/// Uniform double in [0, 1) from the top 53 bits of the raw engine output;
/// avoids std::normal_distribution, whose stream is implementation-defined.
inline double uniform53(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1p-53; }

inline Complex gaussian_complex(std::mt19937_64& rng) {
  double u1 = uniform53(rng);
  while (u1 <= 0.0) u1 = uniform53(rng);
  const double u2 = uniform53(rng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace detail

/// QR of a complex Ginibre matrix with the R-diagonal phase correction,
/// giving the Haar measure.
inline Matrix haar_random(int dim, std::mt19937_64& rng) {
  Matrix z(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) z(i, j) = detail::gaussian_complex(rng);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    q.col(j) *= (std::abs(d) > 0.0) ? d / std::abs(d) : Complex(1.0);
  }
  return q;
}

inline Matrix haar_random(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return haar_random(dim, rng);
}

}  // namespace ito
