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
#include <stdexcept>
#include <utility>
#include <vector>

#include "itoprop/core.hpp"
#include "itoprop/expmv.hpp"
#include "itoprop/generator.hpp"
#include "itoprop/interp.hpp"

namespace ito {

enum class GuessStrategy { ConstantPrevious, HomogeneousSolve, Extrapolate };
enum class Method { PWC, ITO };

struct ItoConfig {
  int m_order = 8;
  double tol_iter = 1e-12;
  int max_iter = 20;
  GuessStrategy guess = GuessStrategy::Extrapolate;

  void validate() const {
    // Above M = 16 the divided-difference interpolation no longer converges.
    if (m_order < 2 || m_order > 16) throw std::invalid_argument("ItoConfig: m_order must be in [2, 16]");
    if (!(tol_iter > 0.0)) throw std::invalid_argument("ItoConfig: tol_iter must be positive");
    if (max_iter < 1) throw std::invalid_argument("ItoConfig: max_iter must be >= 1");
  }
};

struct StepReport {
  int n_iter = 0;
  double eps_iter = 0.0;  // final relative change of the endpoint state
  double eps_m = 0.0;     // inhomogeneity interpolation error estimate
  double eps_fm = 0.0;    // f_M series truncation residual estimate
  bool converged = true;
};

/// One local interval of the inhomogeneous solve: holds the anchor G_0, the
/// start state and, after assemble(), the Taylor-like vectors
/// v_m = G_0 v_{m-1} + s_{m-1} with v_0 = u(t_n). The solution within the
/// interval is
///   u(t_n + tau) = f_M(G_0, tau) v_M + sum_{m<M} tau^m/m! v_m.
struct ItoInterval {
  const LocalGrid* grid = nullptr;
  Matrix g0;
  Vector u0;
  std::vector<Vector> v;  // v_0..v_M
  double eps_m = 0.0;
  double eps_fm = 0.0;

  /// Build the v vectors from inhomogeneity samples at the grid nodes.
  void assemble(const std::vector<Vector>& s_samples) {
    const int m_ord = grid->m_order;
    NewtonInterpolant interp = divided_differences(s_samples, *grid);
    MonomialPoly mono = newton_to_monomial(interp, grid->dt);
    eps_m = interp_error_estimate(interp, grid->dt);
    v.assign(m_ord + 1, Vector());
    v[0] = u0;
    for (int m = 1; m <= m_ord; ++m) v[m] = detail::apply_counted(g0, v[m - 1]) + mono.coeffs[m - 1];
  }

  /// Evaluate the interval solution at ascending offsets from the interval
  /// start. Offsets beyond dt extrapolate (used for the next interval's guess).
  std::vector<Vector> eval(const std::vector<double>& taus) {
    const int m_ord = grid->m_order;
    double resid = 0.0;
    std::vector<Vector> out = phi_apply_many(g0, m_ord, taus, v[m_ord], &resid);
    eps_fm = std::max(eps_fm, resid);
    for (std::size_t j = 0; j < taus.size(); ++j) {
      Vector acc = v[m_ord - 1];
      for (int m = m_ord - 2; m >= 0; --m) acc = v[m] + (taus[j] / double(m + 1)) * acc;
      out[j] += acc;
    }
    return out;
  }
};

/// Carries the extrapolation guess between consecutive steps of one
/// propagation. Owned by exactly one propagation; never shared.
struct ItoWorkspace {
  double dt = 0.0;
  bool has_prev = false;
  std::vector<Vector> next_guess;  // previous interval evaluated at dt + tau_j
  StepReport last_report;
};

namespace detail {

/// Inhomogeneity samples s_j = (G(t_n + tau_j) - G_0) u_j, using the affine
/// field structure when available.
inline std::vector<Vector> inhomogeneity_samples(const Generator& gen, double t_n, const LocalGrid& grid,
                                                 const Matrix& g0, double t_mid,
                                                 const std::vector<Vector>& u_nodes) {
  std::vector<Vector> s(grid.m_order);
  if (gen.affine) {
    const double f_mid = gen.field(t_mid);
    for (int j = 0; j < grid.m_order; ++j)
      s[j] = (gen.field(t_n + grid.nodes[j]) - f_mid) * apply_counted(gen.control, u_nodes[j]);
  } else {
    for (int j = 0; j < grid.m_order; ++j) {
      const Matrix gtd = gen.at(t_n + grid.nodes[j]) - g0;
      s[j] = apply_counted(gtd, u_nodes[j]);
    }
  }
  return s;
}

}  // namespace detail

/// One step of the iteratively time-ordered propagator: solves the
/// inhomogeneous local problem self-consistently until the relative endpoint
/// change drops below tol_iter. On MaxIterExceeded the best iterate is
/// returned with report.converged = false.
inline std::pair<Vector, StepReport> ito_step(const Generator& gen, double t_n, double dt, const ItoConfig& cfg,
                                              const Vector& state, ItoWorkspace& ws,
                                              std::vector<Vector>* nodes_out = nullptr) {
  cfg.validate();
  const LocalGrid grid = cgl_nodes(cfg.m_order, dt);
  const double t_mid = t_n + 0.5 * dt;

  ItoInterval iv;
  iv.grid = &grid;
  iv.g0 = gen.at(t_mid);
  iv.u0 = state;

  // Initial guess for u at the interval nodes.
  std::vector<Vector> u_nodes(grid.m_order);
  const bool can_extrapolate = ws.has_prev && std::abs(ws.dt - dt) < 1e-14 * dt &&
                               int(ws.next_guess.size()) == grid.m_order;
  if (cfg.guess == GuessStrategy::Extrapolate && can_extrapolate) {
    u_nodes = ws.next_guess;
    u_nodes[0] = state;  // exact by construction, keep it bit-identical
  } else if (cfg.guess == GuessStrategy::ConstantPrevious) {
    for (auto& u : u_nodes) u = state;
  } else {
    u_nodes = phi_apply_many(iv.g0, 0, grid.nodes, state);
  }

  StepReport report;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    iv.assemble(detail::inhomogeneity_samples(gen, t_n, grid, iv.g0, t_mid, u_nodes));
    std::vector<Vector> u_new = iv.eval(grid.nodes);
    const double denom = std::max(u_new.back().norm(), 1e-300);
    report.eps_iter = (u_new.back() - u_nodes.back()).norm() / denom;
    report.n_iter = k;
    u_nodes = std::move(u_new);
    if (report.eps_iter <= cfg.tol_iter) break;
    if (k == cfg.max_iter) report.converged = false;
  }
  if (!u_nodes.back().allFinite()) throw std::runtime_error("ito_step: non-finite state");
  report.eps_m = iv.eps_m;
  report.eps_fm = iv.eps_fm;

  // Precompute the extrapolation guess for the adjacent interval by shifting
  // the converged local solution by dt. Only scalar coefficients change; the
  // v vectors are reused as-is.
  if (cfg.guess == GuessStrategy::Extrapolate) {
    std::vector<double> shifted(grid.nodes);
    for (auto& tau : shifted) tau += dt;
    ws.next_guess = iv.eval(shifted);
    ws.dt = dt;
    ws.has_prev = true;
  } else {
    ws.has_prev = false;
  }
  ws.last_report = report;
  if (nodes_out) *nodes_out = u_nodes;
  return {u_nodes.back(), report};
}

/// Piecewise-constant reference step: exp(G(t_mid) dt) applied to the state.
inline Vector pwc_step(const Generator& gen, double t_mid, double dt, const Vector& state) {
  return expm_apply(gen.at(t_mid), dt, state);
}

struct Observer {
  Matrix op;
  int stride = 1;
};

struct PropagateOptions {
  Method method = Method::ITO;
  ItoConfig ito{};
  int state_stride = 0;          // store full states every k-th grid point (0 = off)
  bool record_populations = false;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<Complex>> observables;  // [observer][sample]
  std::vector<double> observable_times;
  std::vector<Eigen::VectorXd> populations;       // per grid point when requested
  std::vector<QuantumState> states;
  QuantumState final_state;

  // Aggregated step reports (ITO only).
  double mean_iterations = 0.0;
  double max_eps_iter = 0.0;
  double max_eps_m = 0.0;
  double max_eps_fm = 0.0;
  bool all_converged = true;
  std::uint64_t matvecs = 0;
};

/// Global propagation loop on an equidistant grid of n_steps intervals.
inline Trajectory propagate(const Generator& gen, double t0, double t_end, int n_steps,
                            const PropagateOptions& opt, const QuantumState& state0,
                            const std::vector<Observer>& observers = {}) {
  if (n_steps < 1) throw std::invalid_argument("propagate: n_steps must be >= 1");
  const double dt = (t_end - t0) / n_steps;

  Trajectory traj;
  traj.observables.resize(observers.size());
  const std::uint64_t mv0 = matvec_count();

  Vector u = state0.amplitudes;
  ItoWorkspace ws;
  double iter_sum = 0.0;

  auto sample = [&](int n, const Vector& state) {
    const double t = t0 + n * dt;
    traj.times.push_back(t);
    QuantumState qs{state, state0.space};
    for (std::size_t k = 0; k < observers.size(); ++k)
      if (n % observers[k].stride == 0) traj.observables[k].push_back(expectation(observers[k].op, qs));
    if (!observers.empty() && n % observers.front().stride == 0) traj.observable_times.push_back(t);
    if (opt.record_populations) traj.populations.push_back(populations(qs));
    if (opt.state_stride > 0 && n % opt.state_stride == 0) traj.states.push_back(qs);
  };

  sample(0, u);
  for (int n = 0; n < n_steps; ++n) {
    const double t_n = t0 + n * dt;
    if (opt.method == Method::PWC) {
      u = pwc_step(gen, t_n + 0.5 * dt, dt, u);
    } else {
      auto [next, rep] = ito_step(gen, t_n, dt, opt.ito, u, ws);
      u = std::move(next);
      iter_sum += rep.n_iter;
      traj.max_eps_iter = std::max(traj.max_eps_iter, rep.eps_iter);
      traj.max_eps_m = std::max(traj.max_eps_m, rep.eps_m);
      traj.max_eps_fm = std::max(traj.max_eps_fm, rep.eps_fm);
      traj.all_converged = traj.all_converged && rep.converged;
    }
    sample(n + 1, u);
  }

  traj.final_state = QuantumState{u, state0.space};
  traj.mean_iterations = (opt.method == Method::ITO) ? iter_sum / n_steps : 0.0;
  traj.matvecs = matvec_count() - mv0;
  return traj;
}

}  // namespace ito
