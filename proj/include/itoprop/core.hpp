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

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ito {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex I1{0.0, 1.0};

/// Whether a state vector lives in Hilbert space (dim N) or in a
/// vectorized Liouville space (dim N^2, column-stacked density matrix).
enum class SpaceTag { Hilbert, Liouville };

struct QuantumState {
  Vector amplitudes;
  SpaceTag space = SpaceTag::Hilbert;

  QuantumState() = default;
  QuantumState(Vector a, SpaceTag s) : amplitudes(std::move(a)), space(s) {}

  Eigen::Index size() const { return amplitudes.size(); }
  double norm() const { return amplitudes.norm(); }

  /// Side length N of the underlying Hilbert space.
  Eigen::Index hilbert_dim() const {
    if (space == SpaceTag::Hilbert) return amplitudes.size();
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(double(amplitudes.size()))));
    if (n * n != amplitudes.size())
      throw std::invalid_argument("Liouville state length is not a perfect square");
    return n;
  }
};

inline bool is_hermitian(const Matrix& a, double tol = 1e-13) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

/// Column-stacking vectorization: vec(rho)[j*N + i] = rho(i, j).
inline QuantumState vectorize(const Matrix& rho) {
  if (rho.rows() != rho.cols()) throw std::invalid_argument("vectorize: matrix not square");
  const Eigen::Index n = rho.rows();
  Vector v(n * n);
  for (Eigen::Index j = 0; j < n; ++j) v.segment(j * n, n) = rho.col(j);
  return {std::move(v), SpaceTag::Liouville};
}

inline Matrix devectorize(const QuantumState& state) {
  const Eigen::Index n = state.hilbert_dim();
  Matrix rho(n, n);
  for (Eigen::Index j = 0; j < n; ++j) rho.col(j) = state.amplitudes.segment(j * n, n);
  return rho;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Hamiltonian commutator part of the Liouvillian, -i(I (x) H - H^T (x) I),
/// in the column-stacking convention.
inline Matrix commutator_superop(const Matrix& h) {
  const Eigen::Index n = h.rows();
  const Matrix id = Matrix::Identity(n, n);
  return -I1 * (kron(id, h) - kron(h.transpose(), id));
}

/// Dissipative part: sum_k gamma_k [ conj(L) (x) L - 1/2 I (x) L^dag L - 1/2 (L^dag L)^T (x) I ].
inline Matrix dissipator_superop(const std::vector<std::pair<Matrix, double>>& lindblad_ops) {
  if (lindblad_ops.empty()) throw std::invalid_argument("dissipator_superop: no operators");
  const Eigen::Index n = lindblad_ops.front().first.rows();
  const Matrix id = Matrix::Identity(n, n);
  Matrix d = Matrix::Zero(n * n, n * n);
  for (const auto& [l, gamma] : lindblad_ops) {
    if (gamma < 0.0) throw std::invalid_argument("dissipator_superop: negative rate");
    if (l.rows() != n || l.cols() != n) throw std::invalid_argument("dissipator_superop: dimension mismatch");
    const Matrix ldl = l.adjoint() * l;
    d += gamma * (kron(l.conjugate(), l) - 0.5 * kron(id, ldl) - 0.5 * kron(ldl.transpose(), id));
  }
  return d;
}

/// Time-dependent Hamiltonian plus a set of Lindblad operators with rates.
struct LindbladSpec {
  std::function<Matrix(double)> hamiltonian;
  std::vector<std::pair<Matrix, double>> lindblad_ops;
};

/// Full Liouvillian matrix L(t) acting on vectorized density matrices, such that
/// L vec(rho) = vec(-i[H(t), rho] + sum_k gamma_k (L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho})).
inline Matrix build_liouvillian(const LindbladSpec& spec, double t) {
  Matrix l = commutator_superop(spec.hamiltonian(t));
  if (!spec.lindblad_ops.empty()) l += dissipator_superop(spec.lindblad_ops);
  return l;
}

/// <psi|A|psi> for Hilbert states, tr(A rho) for Liouville states.
inline Complex expectation(const Matrix& op, const QuantumState& state) {
  if (state.space == SpaceTag::Hilbert) {
    if (op.rows() != state.amplitudes.size())
      throw std::invalid_argument("expectation: dimension mismatch");
    return state.amplitudes.dot(op * state.amplitudes);
  }
  const Eigen::Index n = state.hilbert_dim();
  if (op.rows() != n) throw std::invalid_argument("expectation: dimension mismatch");
  const Matrix rho = devectorize(state);
  return (op * rho).trace();
}

/// Populations |<n|psi>|^2, or diag(rho) for Liouville states.
inline Eigen::VectorXd populations(const QuantumState& state) {
  if (state.space == SpaceTag::Hilbert) return state.amplitudes.cwiseAbs2();
  const Eigen::Index n = state.hilbert_dim();
  Eigen::VectorXd p(n);
  for (Eigen::Index k = 0; k < n; ++k) p[k] = state.amplitudes[k * n + k].real();
  return p;
}

}  // namespace ito
