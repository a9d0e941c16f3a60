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
#include <vector>

#include "itoprop/core.hpp"

namespace ito {

/// Chebyshev-Gauss-Lobatto sampling offsets within one time step.
/// tau_j = (dt/2) (1 - cos((j-1) pi / (M-1))), j = 1..M; tau_1 = 0, tau_M = dt.
struct LocalGrid {
  int m_order = 0;
  double dt = 0.0;
  std::vector<double> nodes;
};

inline LocalGrid cgl_nodes(int m_order, double dt) {
  if (m_order < 2) throw std::invalid_argument("cgl_nodes: m_order must be >= 2");
  if (!(dt > 0.0)) throw std::invalid_argument("cgl_nodes: dt must be positive");
  LocalGrid g{m_order, dt, std::vector<double>(m_order)};
  for (int j = 0; j < m_order; ++j)
    g.nodes[j] = 0.5 * dt * (1.0 - std::cos(double(j) * std::numbers::pi / double(m_order - 1)));
  g.nodes.front() = 0.0;
  g.nodes.back() = dt;
  return g;
}

/// Newton form of the interpolant of vector-valued samples on a LocalGrid.
///
/// Divided differences are computed on nodes rescaled to [-2, 2] (a domain of
/// length 4 has unit capacity, which keeps the recursion well conditioned for
/// large orders). `scale` is the factor 4/dt that maps tau to the scaled domain.
struct NewtonInterpolant {
  std::vector<double> scaled_nodes;  // x_j = (4/dt)(tau_j - dt/2)
  std::vector<Vector> coeffs;        // divided differences a_0..a_{M-1}
  double scale = 0.0;                // 4/dt

  int order() const { return int(coeffs.size()); }

  /// Evaluate at an offset tau measured from the interval start.
  Vector eval(double tau, double dt) const {
    const double x = scale * (tau - 0.5 * dt);
    Vector acc = coeffs.back();
    for (int n = order() - 2; n >= 0; --n) acc = coeffs[n] + (x - scaled_nodes[n]) * acc;
    return acc;
  }
};

inline NewtonInterpolant divided_differences(const std::vector<Vector>& samples, const LocalGrid& grid) {
  const int m = grid.m_order;
  if (int(samples.size()) != m)
    throw std::invalid_argument("divided_differences: sample count does not match grid");
  NewtonInterpolant interp;
  interp.scale = 4.0 / grid.dt;
  interp.scaled_nodes.resize(m);
  for (int j = 0; j < m; ++j) interp.scaled_nodes[j] = interp.scale * (grid.nodes[j] - 0.5 * grid.dt);
  // Standard triangle, kept as one column updated in place.
  std::vector<Vector> col = samples;
  interp.coeffs.resize(m);
  interp.coeffs[0] = col[0];
  for (int n = 1; n < m; ++n) {
    for (int j = m - 1; j >= n; --j)
      col[j] = (col[j] - col[j - 1]) / (interp.scaled_nodes[j] - interp.scaled_nodes[j - n]);
    interp.coeffs[n] = col[n];
  }
  return interp;
}

/// Taylor-like monomial form sum_m coeffs[m] tau^m / m! with tau measured in
/// original time from the interval start.
struct MonomialPoly {
  std::vector<Vector> coeffs;

  int order() const { return int(coeffs.size()); }

  Vector eval(double tau) const {
    Vector acc = Vector::Zero(coeffs.front().size());
    double w = 1.0;
    for (int m = 0; m < order(); ++m) {
      acc += w * coeffs[m];
      w *= tau / double(m + 1);
    }
    return acc;
  }
};

/// Newton -> monomial conversion via the q_{n,m} recursion
///   q_{n+1,0} = -x_n q_{n,0},  q_{n+1,m} = m q_{n,m-1} - x_n q_{n,m},
///   q_{n+1,n+1} = (n+1) q_{n,n},  q_{0,0} = 1,
/// followed by the shift from the centered scaled domain back to tau = 0 and
/// the 4/dt rescaling to original time.
inline MonomialPoly newton_to_monomial(const NewtonInterpolant& interp, double dt) {
  const int m_ord = interp.order();
  const Eigen::Index dim = interp.coeffs.front().size();

  // q[n][m] for Newton basis polynomials R_n(x) = sum_m q_{n,m} x^m / m!.
  std::vector<std::vector<double>> q(m_ord);
  q[0] = {1.0};
  for (int n = 0; n + 1 < m_ord; ++n) {
    const double xn = interp.scaled_nodes[n];
    q[n + 1].assign(n + 2, 0.0);
    q[n + 1][0] = -xn * q[n][0];
    for (int m = 1; m <= n; ++m) q[n + 1][m] = double(m) * q[n][m - 1] - xn * q[n][m];
    q[n + 1][n + 1] = double(n + 1) * q[n][n];
  }

  // Monomial coefficients in the scaled variable x: s_m = sum_{n>=m} q_{n,m} a_n.
  std::vector<Vector> sx(m_ord, Vector::Zero(dim));
  for (int n = 0; n < m_ord; ++n)
    for (int m = 0; m <= n; ++m) sx[m] += q[n][m] * interp.coeffs[n];

  // Shift x = y - 2 (so y = (4/dt) tau starts at 0): d_m = sum_{j>=m} c_j h^{j-m} / (j-m)!.
  const double h = -2.0;
  std::vector<Vector> sy(m_ord, Vector::Zero(dim));
  for (int m = 0; m < m_ord; ++m) {
    double w = 1.0;
    for (int j = m; j < m_ord; ++j) {
      sy[m] += w * sx[j];
      w *= h / double(j - m + 1);
    }
  }

  // Rescale y = (4/dt) tau; with the factorial convention this is a plain power.
  MonomialPoly poly;
  poly.coeffs.resize(m_ord);
  double pw = 1.0;
  for (int m = 0; m < m_ord; ++m) {
    poly.coeffs[m] = pw * sy[m];
    pw *= interp.scale;
  }
  return poly;
}

/// Interpolation error estimate eps_M = ||Delta s|| dt, with ||Delta s|| taken
/// as the norm of the highest-order divided difference on the unit-capacity
/// domain. For smooth data this inherits the 1/(2^{M-1} M!) decay of the CGL
/// divided differences.
inline double interp_error_estimate(const NewtonInterpolant& interp, double dt) {
  return interp.coeffs.back().norm() * dt;
}

}  // namespace ito
