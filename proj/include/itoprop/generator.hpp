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

#include <functional>
#include <stdexcept>
#include <utility>

#include "itoprop/core.hpp"

namespace ito {

/// Right-hand-side generator for du/dt = G(t) u. All physical prefactors
/// (-i/hbar for Schroedinger dynamics, the Liouvillian prefactor for open
/// systems) are absorbed at construction, so propagators treat every problem
/// uniformly.
///
/// Generators built from a single real control expose the affine structure
/// G(t) = drift + field(t) * control; the propagators use it to apply the
/// time-dependent correction without assembling full matrices per sample, and
/// the optimizer uses it to rebind fields.
struct Generator {
  Eigen::Index dim = 0;
  std::function<Matrix(double)> full;

  bool affine = false;
  Matrix drift;
  Matrix control;
  std::function<double(double)> field;

  Matrix at(double t) const { return full(t); }

  static Generator constant(Matrix g0) {
    Generator g;
    g.dim = g0.rows();
    g.full = [m = std::move(g0)](double) { return m; };
    return g;
  }

  static Generator generic(Eigen::Index dim, std::function<Matrix(double)> f) {
    Generator g;
    g.dim = dim;
    g.full = std::move(f);
    return g;
  }

  static Generator controlled(Matrix drift, Matrix control, std::function<double(double)> field) {
    if (drift.rows() != control.rows() || drift.cols() != control.cols())
      throw std::invalid_argument("Generator::controlled: dimension mismatch");
    Generator g;
    g.dim = drift.rows();
    g.affine = true;
    g.drift = std::move(drift);
    g.control = std::move(control);
    g.field = std::move(field);
    g.full = [d = g.drift, c = g.control, f = g.field](double t) { return Matrix(d + f(t) * c); };
    return g;
  }

  /// Same drift/control matrices driven by a different field.
  Generator with_field(std::function<double(double)> f) const {
    if (!affine) throw std::logic_error("Generator::with_field: generator has no control structure");
    return controlled(drift, control, std::move(f));
  }
};

}  // namespace ito
