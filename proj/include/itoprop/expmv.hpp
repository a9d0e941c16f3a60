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
#include <limits>
#include <stdexcept>
#include <vector>

#include "itoprop/core.hpp"

namespace ito {

/// Thread-local count of dense matrix-vector products performed by the
/// propagation kernels. The benchmark harness snapshots it around runs.
inline std::uint64_t& matvec_count() {
  thread_local std::uint64_t count = 0;
  return count;
}

namespace detail {

inline Vector apply_counted(const Matrix& a, const Vector& v) {
  ++matvec_count();
  return a * v;
}

}  // namespace detail

/// Evaluates w(tau) = f_m(A, tau) v at a batch of offsets, where
///
///   f_m(z, t) = sum_{i >= 0} z^i t^{i+m} / (i+m)!,
///
/// i.e. f_0 = exp and f_m is the remainder of exp after its order-(m-1)
/// Taylor head, divided by z^m. The product A*tau is never split: the walk
/// advances in sub-steps b with ||A b|| <= 1 and sums exponential-type series
/// whose terms decay immediately, using the exact shift identity
///
///   w(a + b) = exp(A b) w(a) + sum_{j=0}^{m-1} a^{m-1-j}/(m-1-j)! f_{j+1}(A, b) v.
///
/// `taus` must be non-negative and ascending. If `residual` is non-null it
/// receives the largest truncation-term ratio encountered (an estimate of the
/// series evaluation error).
inline std::vector<Vector> phi_apply_many(const Matrix& a, int m_order, const std::vector<double>& taus,
                                          const Vector& v, double* residual = nullptr) {
  if (m_order < 0) throw std::invalid_argument("phi_apply_many: negative order");
  if (a.rows() != a.cols() || a.rows() != v.size())
    throw std::invalid_argument("phi_apply_many: dimension mismatch");
  if (!v.allFinite() || !a.allFinite()) throw std::invalid_argument("phi_apply_many: non-finite input");

  constexpr int kMaxTerms = 72;
  constexpr double kTailTol = 1e-17;

  const double anorm = a.cwiseAbs().colwise().sum().maxCoeff();
  const double b_max = anorm > 0.0 ? 1.0 / anorm : std::numeric_limits<double>::infinity();

  // Powers of A applied to the original v, grown on demand; needed for the
  // inhomogeneous part of the shift identity (m_order >= 1 only).
  std::vector<Vector> pow_v{v};
  std::vector<double> pow_norm{v.norm()};
  auto ensure_power = [&](int i) {
    while (int(pow_v.size()) <= i) {
      pow_v.push_back(detail::apply_counted(a, pow_v.back()));
      pow_norm.push_back(pow_v.back().norm());
    }
  };

  double max_resid = 0.0;
  std::vector<Vector> out;
  out.reserve(taus.size());

  Vector w = (m_order == 0) ? v : Vector(Vector::Zero(v.size()));
  double a_cur = 0.0;

  for (double tau : taus) {
    if (tau < a_cur - 1e-300)
      throw std::invalid_argument("phi_apply_many: offsets must be ascending");
    while (tau - a_cur > 0.0) {
      const double b = std::min(b_max, tau - a_cur);

      // exp(A b) w via plain series; ||A b|| <= 1 so terms decay from the start.
      Vector acc = w;
      Vector term = w;
      double ref = std::max(acc.norm(), 1e-300);
      for (int i = 1; i <= kMaxTerms; ++i) {
        term = detail::apply_counted(a, term) * (b / double(i));
        acc += term;
        const double tn = term.norm();
        ref = std::max(ref, acc.norm());
        if (tn <= kTailTol * ref) {
          max_resid = std::max(max_resid, tn / ref);
          break;
        }
        if (i == kMaxTerms) throw std::runtime_error("phi_apply_many: exp series did not converge");
      }

      if (m_order >= 1) {
        // alpha_j = a^{m-1-j}/(m-1-j)! and F[k] = b^k/k!.
        std::vector<double> apow(m_order);
        apow[0] = 1.0;
        for (int r = 1; r < m_order; ++r) apow[r] = apow[r - 1] * a_cur / double(r);
        std::vector<double> bf(kMaxTerms + m_order + 2);
        bf[0] = 1.0;
        for (int k = 1; k < int(bf.size()); ++k) bf[k] = bf[k - 1] * b / double(k);

        double refn = std::max(acc.norm(), 1e-300);
        for (int i = 0; i <= kMaxTerms; ++i) {
          double ci = 0.0;
          for (int j = 0; j < m_order; ++j) ci += apow[m_order - 1 - j] * bf[i + j + 1];
          ensure_power(i);
          acc += ci * pow_v[i];
          const double tn = std::abs(ci) * pow_norm[i];
          refn = std::max(refn, acc.norm());
          if (tn <= kTailTol * refn) {
            max_resid = std::max(max_resid, tn / refn);
            break;
          }
          if (i == kMaxTerms) throw std::runtime_error("phi_apply_many: f_M series did not converge");
        }
      }

      w = std::move(acc);
      a_cur += b;
      if (std::abs(tau - a_cur) < 1e-15 * std::max(1.0, tau)) a_cur = tau;
    }
    out.push_back(w);
  }
  if (residual) *residual = max_resid;
  return out;
}

/// exp(A t) v, computed from the joint product A*t.
inline Vector expm_apply(const Matrix& a, double t, const Vector& v) {
  if (t < 0.0) return phi_apply_many(Matrix(-a), 0, {-t}, v)[0];
  return phi_apply_many(a, 0, {t}, v)[0];
}

}  // namespace ito
