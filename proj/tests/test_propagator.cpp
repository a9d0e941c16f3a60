// Tests for the iterated time-ordering step and the global propagation loop.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <itoprop/core.hpp>
#include <itoprop/expmv.hpp>
#include <itoprop/generator.hpp>
#include <itoprop/propagator.hpp>

using namespace ito;

namespace {

const Complex kI{0.0, 1.0};

Matrix pauli_z() {
  Matrix z(2, 2);
  z << 1.0, 0.0, 0.0, -1.0;
  return z;
}

Matrix pauli_x() {
  Matrix x(2, 2);
  x << 0.0, 1.0, 1.0, 0.0;
  return x;
}

Vector qubit_state() {
  Vector v(2);
  v << Complex{0.6, 0.0}, Complex{0.0, 0.8};
  return v;
}

// Commuting time-dependent generator G(t) = -i cos(t) sigma_z. The exact
// propagator is exp(-i (sin(t1) - sin(t0)) sigma_z): an independent closed
// form against which a single step can be checked to machine precision.
Generator commuting_gen() {
  return Generator::controlled(Matrix::Zero(2, 2), Complex{0.0, -1.0} * pauli_z(),
                               [](double t) { return std::cos(t); });
}

Vector commuting_exact(double t0, double t1, const Vector& v) {
  const double theta = std::sin(t1) - std::sin(t0);
  Vector out(2);
  out(0) = std::exp(-kI * theta) * v(0);
  out(1) = std::exp(kI * theta) * v(1);
  return out;
}

// Non-commuting driven qubit: G(t) = -i (sigma_z + f(t) sigma_x).
Generator driven_qubit(double amp = 0.8, double omega = 2.0) {
  return Generator::controlled(Complex{0.0, -1.0} * pauli_z(), Complex{0.0, -1.0} * pauli_x(),
                               [amp, omega](double t) { return amp * std::sin(omega * t); });
}

// Fine-grid midpoint-exponential reference propagation.
Vector pwc_reference(const Generator& gen, double t0, double t1, int n, const Vector& v0) {
  const double dt = (t1 - t0) / n;
  Vector u = v0;
  for (int k = 0; k < n; ++k) u = pwc_step(gen, t0 + (k + 0.5) * dt, dt, u);
  return u;
}

}  // namespace

TEST_CASE("time-independent generator converges in one iteration to expm") {
  const Matrix h = pauli_z() + 0.3 * pauli_x();
  const Generator gen = Generator::constant(Complex{0.0, -1.0} * h);
  const Vector v0 = qubit_state();
  ItoConfig cfg;
  cfg.m_order = 6;
  ItoWorkspace ws;
  const auto [u, rep] = ito_step(gen, 0.0, 0.4, cfg, v0, ws);
  CHECK(rep.n_iter == 1);
  CHECK(rep.converged);
  const Vector ref = expm_apply(Complex{0.0, -1.0} * h, 0.4, v0);
  CHECK((u - ref).norm() < 1e-13);
}

TEST_CASE("commuting time-dependent generator matches the closed form") {
  const Generator gen = commuting_gen();
  const Vector v0 = qubit_state();
  ItoConfig cfg;
  cfg.m_order = 8;
  SECTION("single step") {
    ItoWorkspace ws;
    const auto [u, rep] = ito_step(gen, 0.3, 0.5, cfg, v0, ws);
    CHECK(rep.converged);
    // Accuracy of a single big step is limited by the order-8 interpolation
    // of the inhomogeneity over dt = 0.5, roughly (dt/4)^M scale.
    CHECK((u - commuting_exact(0.3, 0.8, v0)).norm() < 1e-10);
    CHECK((u - commuting_exact(0.3, 0.8, v0)).norm() < 10.0 * std::max(rep.eps_m, 1e-13));
  }
  SECTION("multi-step propagate") {
    QuantumState s0{v0, SpaceTag::Hilbert};
    PropagateOptions opt;
    opt.ito = cfg;
    const Trajectory tr = propagate(gen, 0.0, 4.0, 16, opt, s0);
    CHECK(tr.all_converged);
    CHECK((tr.final_state.amplitudes - commuting_exact(0.0, 4.0, v0)).norm() < 1e-12);
  }
}

TEST_CASE("non-commuting problem: step error decreases rapidly with resolution") {
  const Generator gen = driven_qubit();
  const Vector v0 = qubit_state();
  const Vector ref = pwc_reference(gen, 0.0, 1.0, 200000, v0);
  ItoConfig cfg;
  cfg.m_order = 6;

  auto run = [&](int n_steps) {
    ItoWorkspace ws;
    Vector u = v0;
    const double dt = 1.0 / n_steps;
    for (int k = 0; k < n_steps; ++k) u = ito_step(gen, k * dt, dt, cfg, u, ws).first;
    return (u - ref).norm();
  };
  const double e1 = run(1);
  const double e2 = run(2);
  const double e4 = run(4);
  CHECK(e2 < e1);
  CHECK(e4 < e2);
  CHECK(e4 < 1e-8);  // high-order local solver on a smooth drive
}

TEST_CASE("ITO agrees with a converged fine-grid reference to near machine precision") {
  const Generator gen = driven_qubit(1.3, 5.0);
  const Vector v0 = qubit_state();
  const Vector ref = pwc_reference(gen, 0.0, 2.0, 400000, v0);
  QuantumState s0{v0, SpaceTag::Hilbert};
  PropagateOptions opt;
  opt.ito.m_order = 8;
  const Trajectory tr = propagate(gen, 0.0, 2.0, 40, opt, s0);
  CHECK(tr.all_converged);
  CHECK((tr.final_state.amplitudes - ref).norm() < 5e-10);  // limited by the reference
}

TEST_CASE("extrapolation guess needs no more iterations than constant guess") {
  const Generator gen = driven_qubit();
  QuantumState s0{qubit_state(), SpaceTag::Hilbert};
  auto mean_iters = [&](GuessStrategy g) {
    PropagateOptions opt;
    opt.ito.m_order = 8;
    opt.ito.guess = g;
    return propagate(gen, 0.0, 5.0, 100, opt, s0).mean_iterations;
  };
  const double extrap = mean_iters(GuessStrategy::Extrapolate);
  const double constant = mean_iters(GuessStrategy::ConstantPrevious);
  CHECK(extrap <= constant + 1e-12);
  CHECK(extrap >= 1.0);
}

TEST_CASE("anti-Hermitian generator preserves the norm over many steps") {
  const Generator gen = driven_qubit(0.5, 3.0);
  QuantumState s0{qubit_state(), SpaceTag::Hilbert};
  PropagateOptions opt;
  const Trajectory tr = propagate(gen, 0.0, 10.0, 200, opt, s0);
  CHECK(std::abs(tr.final_state.amplitudes.norm() - 1.0) < 1e-11);
}

TEST_CASE("Lindblad propagation preserves the trace and positivity of populations") {
  // Two-level decay: H = 0.5 sigma_z, L = sqrt(gamma) |0><1|.
  Matrix l(2, 2);
  l.setZero();
  l(0, 1) = 1.0;
  LindbladSpec spec;
  spec.hamiltonian = [](double) {
    Matrix h(2, 2);
    h << 0.5, 0.0, 0.0, -0.5;
    return h;
  };
  spec.lindblad_ops = {{l, 0.25}};
  const Generator gen = Generator::generic(4, [spec](double t) { return build_liouvillian(spec, t); });

  const QuantumState s0 =
      vectorize((Matrix(2, 2) << 0.2, Complex{0.1, 0.05}, Complex{0.1, -0.05}, 0.8).finished());
  PropagateOptions opt;
  opt.record_populations = true;
  const Trajectory tr = propagate(gen, 0.0, 8.0, 64, opt, s0);
  const Matrix rho = devectorize(tr.final_state);
  CHECK(std::abs(rho.trace().real() - 1.0) < 1e-11);
  CHECK(std::abs(rho.trace().imag()) < 1e-12);
  // Excited population decays towards zero; all sampled populations stay in [0, 1].
  CHECK(rho(1, 1).real() < 0.8);
  for (const auto& p : tr.populations)
    for (int i = 0; i < p.size(); ++i) CHECK((p(i) > -1e-10 && p(i) < 1.0 + 1e-10));
}

TEST_CASE("iteration cap is reported honestly instead of throwing") {
  const Generator gen = driven_qubit(6.0, 40.0);  // fast drive, huge step
  ItoConfig cfg;
  cfg.m_order = 4;
  cfg.max_iter = 2;
  cfg.tol_iter = 1e-15;
  ItoWorkspace ws;
  const auto [u, rep] = ito_step(gen, 0.0, 2.0, cfg, qubit_state(), ws);
  CHECK_FALSE(rep.converged);
  CHECK(rep.n_iter == 2);
  CHECK(u.allFinite());
  CHECK(rep.eps_iter > 1e-15);
}

TEST_CASE("step diagnostics populate the trajectory aggregates") {
  const Generator gen = driven_qubit();
  QuantumState s0{qubit_state(), SpaceTag::Hilbert};
  PropagateOptions opt;
  opt.ito.m_order = 8;
  Matrix z = pauli_z();
  const std::uint64_t before = matvec_count();
  const Trajectory tr = propagate(gen, 0.0, 1.0, 20, opt, s0, {{z, 1}});
  CHECK(tr.matvecs > 0);
  CHECK(matvec_count() - before >= tr.matvecs);
  CHECK(tr.mean_iterations >= 1.0);
  CHECK(tr.max_eps_iter <= opt.ito.tol_iter);
  CHECK(tr.max_eps_m >= 0.0);
  CHECK(tr.observables.size() == 1);
  CHECK(tr.observables[0].size() == 21);
  // <sigma_z> of the initial state.
  CHECK(std::abs(tr.observables[0][0].real() - (0.36 - 0.64)) < 1e-14);
}

TEST_CASE("configuration validation rejects out-of-range parameters") {
  const Generator gen = commuting_gen();
  ItoWorkspace ws;
  ItoConfig bad;
  bad.m_order = 1;
  CHECK_THROWS(ito_step(gen, 0.0, 0.1, bad, qubit_state(), ws));
  bad.m_order = 17;
  CHECK_THROWS(ito_step(gen, 0.0, 0.1, bad, qubit_state(), ws));
  ItoConfig bad2;
  bad2.tol_iter = 0.0;
  CHECK_THROWS(ito_step(gen, 0.0, 0.1, bad2, qubit_state(), ws));
  QuantumState s0{qubit_state(), SpaceTag::Hilbert};
  CHECK_THROWS(propagate(gen, 0.0, 1.0, 0, PropagateOptions{}, s0));
}
