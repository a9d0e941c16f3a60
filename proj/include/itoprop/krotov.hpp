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

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "itoprop/core.hpp"
#include "itoprop/expmv.hpp"
#include "itoprop/generator.hpp"
#include "itoprop/interp.hpp"
#include "itoprop/propagator.hpp"

namespace ito {

// ---------------------------------------------------------------------------
// Scalar Newton interpolation of field samples on a CGL sub-grid
// ---------------------------------------------------------------------------

struct ScalarInterp {
  double dt = 0.0;
  std::vector<double> xs;      // nodes scaled to [-2, 2]
  std::vector<double> coeffs;  // divided differences on the scaled nodes

  static ScalarInterp fit(const LocalGrid& grid, const std::vector<double>& vals) {
    const int m = grid.m_order;
    ScalarInterp si;
    si.dt = grid.dt;
    si.xs.resize(m);
    for (int j = 0; j < m; ++j) si.xs[j] = 4.0 * grid.nodes[j] / grid.dt - 2.0;
    si.coeffs = vals;
    for (int n = 1; n < m; ++n)
      for (int j = m - 1; j >= n; --j) si.coeffs[j] = (si.coeffs[j] - si.coeffs[j - 1]) / (si.xs[j] - si.xs[j - n]);
    return si;
  }

  double eval(double tau) const {
    const double x = 4.0 * tau / dt - 2.0;
    double acc = coeffs.back();
    for (int j = int(coeffs.size()) - 2; j >= 0; --j) acc = coeffs[j] + (x - xs[j]) * acc;
    return acc;
  }
};

// ---------------------------------------------------------------------------
// Control field on the global grid, optionally with per-interval sub-samples
// ---------------------------------------------------------------------------

struct ControlField {
  double t0 = 0.0;
  double dt = 0.0;
  int n_steps = 0;
  int m_order = 0;  // > 0 when sub-interval samples are carried
  std::vector<double> values;                   // n_steps + 1 grid samples
  std::vector<std::vector<double>> sub_values;  // [interval][node]

  static ControlField sample_grid(const std::function<double(double)>& f, double t0, double dt, int n_steps) {
    ControlField cf{t0, dt, n_steps, 0, {}, {}};
    cf.values.resize(n_steps + 1);
    for (int n = 0; n <= n_steps; ++n) cf.values[n] = f(t0 + n * dt);
    return cf;
  }

  static ControlField sample_sub(const std::function<double(double)>& f, double t0, double dt, int n_steps,
                                 int m_order) {
    ControlField cf = sample_grid(f, t0, dt, n_steps);
    cf.m_order = m_order;
    const LocalGrid grid = cgl_nodes(m_order, dt);
    cf.sub_values.resize(n_steps);
    for (int n = 0; n < n_steps; ++n) {
      cf.sub_values[n].resize(m_order);
      for (int j = 0; j < m_order; ++j) cf.sub_values[n][j] = f(t0 + n * dt + grid.nodes[j]);
    }
    return cf;
  }

  /// Continuous evaluation: interpolates the sub-samples of the containing
  /// interval (requires m_order > 0).
  double at(double t) const {
    const int n = std::min(std::max(int(std::floor((t - t0) / dt)), 0), n_steps - 1);
    const LocalGrid grid = cgl_nodes(m_order, dt);
    return ScalarInterp::fit(grid, sub_values[n]).eval(t - t0 - n * dt);
  }

  /// Callable view with the interpolants precomputed once.
  std::function<double(double)> as_function() const {
    if (m_order == 0) {  // piecewise-constant view
      auto data = std::make_shared<ControlField>(*this);
      return [data](double t) {
        const int n = std::min(std::max(int(std::floor((t - data->t0) / data->dt)), 0), data->n_steps - 1);
        return data->values[n];
      };
    }
    auto interps = std::make_shared<std::vector<ScalarInterp>>();
    const LocalGrid grid = cgl_nodes(m_order, dt);
    interps->reserve(n_steps);
    for (int n = 0; n < n_steps; ++n) interps->push_back(ScalarInterp::fit(grid, sub_values[n]));
    const double t0c = t0, dtc = dt;
    const int nc = n_steps;
    return [interps, t0c, dtc, nc](double t) {
      const int n = std::min(std::max(int(std::floor((t - t0c) / dtc)), 0), nc - 1);
      return (*interps)[n].eval(t - t0c - n * dtc);
    };
  }

  double change_norm(const ControlField& other) const {
    double acc = 0.0;
    for (std::size_t n = 0; n < values.size(); ++n) acc += (values[n] - other.values[n]) * (values[n] - other.values[n]);
    return std::sqrt(acc * dt);
  }
};

// ---------------------------------------------------------------------------
// Optimization functionals
// ---------------------------------------------------------------------------

struct StateToState {
  Vector target;
};

/// Gate objective on the lowest four levels: J_T = 1 - (1/4) Re sum_n
/// <n|O^dag|Psi_n(T)>. Phase-sensitive by construction (Re, not |.|^2).
struct GateTarget {
  Matrix o;  // 4x4 target unitary on the subspace
};

using Functional = std::variant<StateToState, GateTarget>;

inline double functional_value(const Functional& f, const std::vector<Vector>& finals) {
  if (const auto* s2s = std::get_if<StateToState>(&f)) {
    if (finals.size() != 1) throw std::invalid_argument("functional_value: expected one final state");
    return 1.0 - std::norm(s2s->target.dot(finals[0]));
  }
  const auto& gate = std::get<GateTarget>(f);
  if (finals.size() != 4) throw std::invalid_argument("functional_value: expected four final states");
  Complex acc = 0.0;
  for (int n = 0; n < 4; ++n)
    for (int m = 0; m < 4; ++m) acc += std::conj(gate.o(m, n)) * finals[std::size_t(n)](m);
  return 1.0 - 0.25 * acc.real();
}

inline std::vector<Vector> costate_terminal(const Functional& f, const std::vector<Vector>& finals) {
  if (const auto* s2s = std::get_if<StateToState>(&f)) {
    return {Vector(s2s->target.dot(finals[0]) * s2s->target)};
  }
  const auto& gate = std::get<GateTarget>(f);
  const Eigen::Index dim = finals.at(0).size();
  std::vector<Vector> chis(4);
  for (int n = 0; n < 4; ++n) {
    Vector chi = Vector::Zero(dim);
    for (int m = 0; m < 4; ++m) chi(m) = 0.25 * gate.o(m, n);
    chis[std::size_t(n)] = std::move(chi);
  }
  return chis;
}

// ---------------------------------------------------------------------------
// Optimization problem and configuration
// ---------------------------------------------------------------------------

struct ControlProblem {
  Generator gen;  // affine generator carrying the guess field
  double t0 = 0.0;
  double t_final = 0.0;
  int n_steps = 0;
  std::vector<Vector> initial_states;
  Functional functional;
};

struct KrotovConfig {
  double lambda_a = 1.0;
  std::function<double(double)> shape;  // default: sin^2(pi t / T)
  int max_control_iters = 50;
  double stop_tol = 0.0;
  Method propagator = Method::PWC;
  ItoConfig ito{};
  int joint_max_iter = 50;
  double joint_tol = 1e-12;
  /// Debug switch: compute the field estimate once per interval from the
  /// guess state and skip the in-loop re-evaluation. Known-bad scheme, kept
  /// for negative testing.
  bool debug_one_shot_field = false;

  std::function<double(double)> shape_or_default(double t_final) const {
    if (shape) return shape;
    return [t_final](double t) {
      const double s = std::sin(std::numbers::pi * t / t_final);
      return s * s;
    };
  }
};

struct IterationRecord {
  int i = 0;
  double j_t = 0.0;
  double j_total = 0.0;
  double field_change_norm = 0.0;
  std::uint64_t matvecs = 0;
  double wall_time = 0.0;
};

struct OptimizeResult {
  std::vector<IterationRecord> records;
  ControlField field;
  std::vector<Vector> finals;
  std::string error;  // empty on clean completion

  double final_j_t() const { return records.empty() ? 1.0 : records.back().j_t; }
};

namespace detail {

inline Generator adjoint_reversed(const Generator& gen, double t_final, std::function<double(double)> field) {
  // Costate equation dchi/dt = -G(t)^dag chi, rewritten forward in
  // sigma = T - t: dchi~/dsigma = G(T - sigma)^dag chi~.
  Matrix drift_adj = gen.drift.adjoint();
  Matrix ctrl_adj = gen.control.adjoint();
  return Generator::controlled(std::move(drift_adj), std::move(ctrl_adj),
                               [field = std::move(field), t_final](double sigma) { return field(t_final - sigma); });
}

inline double update_term(const std::vector<Vector>& chis, const std::vector<Vector>& psis, const Matrix& ic) {
  double acc = 0.0;
  for (std::size_t m = 0; m < chis.size(); ++m) acc += chis[m].dot(ic * psis[m]).imag();
  return acc;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Forward propagation of all targets under a control field
// ---------------------------------------------------------------------------

inline std::vector<Vector> forward_finals(const ControlProblem& pb, const KrotovConfig& cfg,
                                          const ControlField& field) {
  std::vector<Vector> states = pb.initial_states;
  if (cfg.propagator == Method::PWC) {
    // Classic time-lagged discretization: the grid sample at t_n acts on the
    // whole following interval. This is the sweep's own view of the dynamics;
    // the delivered control is still the continuous interpolant of the
    // samples, whose exact functional is limited by this half-step lag.
    for (int n = 0; n < pb.n_steps; ++n) {
      const Matrix g = pb.gen.drift + field.values[n] * pb.gen.control;
      for (auto& s : states) s = expm_apply(g, field.dt, s);
    }
  } else {
    const Generator gen = pb.gen.with_field(field.as_function());
    for (auto& s : states) {
      ItoWorkspace ws;
      for (int n = 0; n < pb.n_steps; ++n)
        s = ito_step(gen, pb.t0 + n * field.dt, field.dt, cfg.ito, s, ws).first;
    }
  }
  return states;
}

// ---------------------------------------------------------------------------
// Backward costate passes
// ---------------------------------------------------------------------------

/// PWC costate pass: chi[target][n] at all global grid points, propagated
/// with the adjoint generator and the interval-constant old field.
inline std::vector<std::vector<Vector>> backward_costate_pwc(const ControlProblem& pb, const ControlField& field,
                                                             const std::vector<Vector>& terminal) {
  const std::size_t n_tgt = terminal.size();
  std::vector<std::vector<Vector>> chi(n_tgt, std::vector<Vector>(pb.n_steps + 1));
  for (std::size_t m = 0; m < n_tgt; ++m) chi[m][pb.n_steps] = terminal[m];
  for (int n = pb.n_steps - 1; n >= 0; --n) {
    const Matrix g_adj = (pb.gen.drift + field.values[n] * pb.gen.control).adjoint();
    for (std::size_t m = 0; m < n_tgt; ++m) chi[m][n] = expm_apply(g_adj, field.dt, chi[m][n + 1]);
  }
  return chi;
}

/// ITO costate pass: chi values at the CGL sub-nodes of every interval,
/// indexed [target][interval][node] in forward time order. Obtained by
/// propagating the reversed adjoint problem forward and exploiting the
/// reflection symmetry of the CGL nodes.
inline std::vector<std::vector<std::vector<Vector>>> backward_costate_ito(const ControlProblem& pb,
                                                                          const KrotovConfig& cfg,
                                                                          const ControlField& field,
                                                                          const std::vector<Vector>& terminal) {
  const std::size_t n_tgt = terminal.size();
  const int m_ord = cfg.ito.m_order;
  const Generator back = detail::adjoint_reversed(pb.gen, pb.t_final, field.as_function());
  std::vector<std::vector<std::vector<Vector>>> chi(
      n_tgt, std::vector<std::vector<Vector>>(pb.n_steps, std::vector<Vector>(m_ord)));
  for (std::size_t m = 0; m < n_tgt; ++m) {
    Vector state = terminal[m];
    ItoWorkspace ws;
    std::vector<Vector> nodes;
    for (int rev = 0; rev < pb.n_steps; ++rev) {
      state = ito_step(back, rev * field.dt, field.dt, cfg.ito, state, ws, &nodes).first;
      const int n_fwd = pb.n_steps - 1 - rev;
      for (int j = 0; j < m_ord; ++j) chi[m][n_fwd][j] = nodes[std::size_t(m_ord - 1 - j)];
    }
  }
  return chi;
}

// ---------------------------------------------------------------------------
// Update sweeps
// ---------------------------------------------------------------------------

struct SweepResult {
  ControlField field;
  std::vector<Vector> finals;
};

/// Classic time-lagged Krotov sweep: at each grid point the update uses the
/// already-advanced new state and the stored old costate, then the state is
/// advanced one PWC step under the new field value.
inline SweepResult pwc_update(const ControlProblem& pb, const KrotovConfig& cfg, const ControlField& field_old,
                              const std::vector<std::vector<Vector>>& chi) {
  const auto shape = cfg.shape_or_default(pb.t_final);
  const Matrix ic = I1 * pb.gen.control;
  ControlField field = field_old;
  std::vector<Vector> states = pb.initial_states;
  std::vector<Vector> chi_at(chi.size());
  for (int n = 0; n <= pb.n_steps; ++n) {
    const double t = pb.t0 + n * field.dt;
    for (std::size_t m = 0; m < chi.size(); ++m) chi_at[m] = chi[m][std::size_t(n)];
    const double upd = shape(t) / cfg.lambda_a * detail::update_term(chi_at, states, ic);
    if (!std::isfinite(upd)) throw std::runtime_error("pwc_update: non-finite field update");
    field.values[std::size_t(n)] = field_old.values[std::size_t(n)] + upd;
    if (n == pb.n_steps) break;
    const Matrix g = pb.gen.drift + field.values[std::size_t(n)] * pb.gen.control;
    for (auto& s : states) s = expm_apply(g, field.dt, s);
  }
  return {std::move(field), std::move(states)};
}

/// Interleaved field/state sweep: within each interval the sub-node field and
/// the states are converged jointly. The k-loop alternates an ITO solve for
/// all targets under the current field interpolant with a re-evaluation of
/// the field from the updated states, until both residuals drop below
/// joint_tol.
inline SweepResult ito_update(const ControlProblem& pb, const KrotovConfig& cfg, const ControlField& field_old,
                              const std::vector<std::vector<std::vector<Vector>>>& chi) {
  const auto shape = cfg.shape_or_default(pb.t_final);
  const Matrix ic = I1 * pb.gen.control;
  const int m_ord = cfg.ito.m_order;
  const std::size_t n_tgt = pb.initial_states.size();
  const double dt = field_old.dt;
  const LocalGrid grid = cgl_nodes(m_ord, dt);

  ControlField field = field_old;
  std::vector<Vector> states = pb.initial_states;
  std::vector<ItoInterval> prev(n_tgt);
  bool has_prev = false;

  std::vector<double> s_shape(m_ord), eps_old(m_ord), eps(m_ord), eps_new(m_ord);
  std::vector<Vector> chi_at(n_tgt), psi_at(n_tgt);
  std::vector<std::vector<Vector>> u_nodes(n_tgt);
  std::vector<ItoInterval> ivs(n_tgt);

  for (int n = 0; n < pb.n_steps; ++n) {
    const double t_n = pb.t0 + n * dt;
    for (int j = 0; j < m_ord; ++j) {
      s_shape[j] = shape(t_n + grid.nodes[j]);
      eps_old[j] = field_old.sub_values[std::size_t(n)][std::size_t(j)];
    }

    // Guess states at the sub-nodes: extrapolate the previous interval's
    // converged local solution, or solve homogeneously on the first interval.
    if (has_prev) {
      std::vector<double> shifted(grid.nodes);
      for (auto& tau : shifted) tau += dt;
      for (std::size_t m = 0; m < n_tgt; ++m) u_nodes[m] = prev[m].eval(shifted);
    } else {
      const Matrix g0_old = pb.gen.drift + eps_old[m_ord / 2] * pb.gen.control;
      for (std::size_t m = 0; m < n_tgt; ++m) u_nodes[m] = phi_apply_many(g0_old, 0, grid.nodes, states[m]);
    }
    for (std::size_t m = 0; m < n_tgt; ++m) u_nodes[m][0] = states[m];

    // Initial field estimate from the guess states.
    for (int j = 0; j < m_ord; ++j) {
      for (std::size_t m = 0; m < n_tgt; ++m) {
        chi_at[m] = chi[m][std::size_t(n)][std::size_t(j)];
        psi_at[m] = u_nodes[m][std::size_t(j)];
      }
      eps[j] = eps_old[j] + s_shape[j] / cfg.lambda_a * detail::update_term(chi_at, psi_at, ic);
    }

    bool converged = false;
    double state_res = 0.0, field_res = 0.0;
    for (int k = 1; k <= cfg.joint_max_iter; ++k) {
      const ScalarInterp field_interp = ScalarInterp::fit(grid, eps);
      const double eps_mid = field_interp.eval(0.5 * dt);
      const Matrix g0 = pb.gen.drift + eps_mid * pb.gen.control;

      state_res = 0.0;
      for (std::size_t m = 0; m < n_tgt; ++m) {
        ivs[m].grid = &grid;
        ivs[m].g0 = g0;
        ivs[m].u0 = states[m];
        std::vector<Vector> s_samples(m_ord);
        for (int j = 0; j < m_ord; ++j)
          s_samples[std::size_t(j)] = (eps[j] - eps_mid) * detail::apply_counted(pb.gen.control, u_nodes[m][std::size_t(j)]);
        ivs[m].assemble(s_samples);
        std::vector<Vector> u_new = ivs[m].eval(grid.nodes);
        const double denom = std::max(u_new.back().norm(), 1e-300);
        state_res = std::max(state_res, (u_new.back() - u_nodes[m].back()).norm() / denom);
        u_nodes[m] = std::move(u_new);
      }

      if (!cfg.debug_one_shot_field) {
        double scale = 1e-300;
        for (int j = 0; j < m_ord; ++j) scale = std::max(scale, std::abs(eps[j]));
        field_res = 0.0;
        for (int j = 0; j < m_ord; ++j) {
          for (std::size_t m = 0; m < n_tgt; ++m) {
            chi_at[m] = chi[m][std::size_t(n)][std::size_t(j)];
            psi_at[m] = u_nodes[m][std::size_t(j)];
          }
          eps_new[j] = eps_old[j] + s_shape[j] / cfg.lambda_a * detail::update_term(chi_at, psi_at, ic);
          field_res = std::max(field_res, std::abs(eps_new[j] - eps[j]) / scale);
        }
        eps = eps_new;
      } else {
        field_res = 0.0;
      }

      if (state_res <= cfg.joint_tol && field_res <= cfg.joint_tol) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw std::runtime_error("ito_update: joint field/state loop diverged at interval " + std::to_string(n) +
                               " (state residual " + std::to_string(state_res) + ", field residual " +
                               std::to_string(field_res) + "); decrease dt/M or increase lambda_a");

    field.sub_values[std::size_t(n)] = eps;
    field.values[std::size_t(n)] = eps[0];
    for (std::size_t m = 0; m < n_tgt; ++m) {
      states[m] = u_nodes[m].back();
      prev[m] = ivs[m];
    }
    has_prev = true;
  }
  field.values[std::size_t(pb.n_steps)] = field.sub_values.back().back();
  return {std::move(field), std::move(states)};
}

// ---------------------------------------------------------------------------
// Outer optimization loop
// ---------------------------------------------------------------------------

inline OptimizeResult optimize(const ControlProblem& pb, const KrotovConfig& cfg) {
  if (!pb.gen.affine) throw std::invalid_argument("optimize: generator must expose a control structure");
  if (cfg.lambda_a <= 0.0) throw std::invalid_argument("optimize: lambda_a must be positive");
  const double dt = (pb.t_final - pb.t0) / pb.n_steps;
  const auto shape = cfg.shape_or_default(pb.t_final);

  OptimizeResult res;
  res.field = (cfg.propagator == Method::PWC)
                  ? ControlField::sample_grid(pb.gen.field, pb.t0, dt, pb.n_steps)
                  : ControlField::sample_sub(pb.gen.field, pb.t0, dt, pb.n_steps, cfg.ito.m_order);

  const auto t_start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count(); };

  std::uint64_t mv0 = matvec_count();
  res.finals = forward_finals(pb, cfg, res.field);
  double j_t = functional_value(pb.functional, res.finals);
  res.records.push_back({0, j_t, j_t, 0.0, matvec_count() - mv0, elapsed()});

  for (int i = 1; i <= cfg.max_control_iters; ++i) {
    if (j_t <= cfg.stop_tol) break;
    mv0 = matvec_count();
    try {
      const std::vector<Vector> terminal = costate_terminal(pb.functional, res.finals);
      SweepResult sweep;
      if (cfg.propagator == Method::PWC) {
        const auto chi = backward_costate_pwc(pb, res.field, terminal);
        sweep = pwc_update(pb, cfg, res.field, chi);
      } else {
        const auto chi = backward_costate_ito(pb, cfg, res.field, terminal);
        sweep = ito_update(pb, cfg, res.field, chi);
      }
      const double change = sweep.field.change_norm(res.field);
      // Running cost of this update: integral of lambda_a/S * (delta eps)^2.
      double g_a = 0.0;
      for (int n = 0; n <= pb.n_steps; ++n) {
        const double s = shape(pb.t0 + n * dt);
        const double de = sweep.field.values[std::size_t(n)] - res.field.values[std::size_t(n)];
        if (s > 1e-14) g_a += cfg.lambda_a / s * de * de * dt;
      }
      res.field = std::move(sweep.field);
      res.finals = std::move(sweep.finals);
      j_t = functional_value(pb.functional, res.finals);
      res.records.push_back({i, j_t, j_t + g_a, change, matvec_count() - mv0, elapsed()});
    } catch (const std::exception& e) {
      res.error = e.what();
      break;
    }
  }
  return res;
}

}  // namespace ito
