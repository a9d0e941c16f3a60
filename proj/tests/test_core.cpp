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

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "itoprop/core.hpp"

using namespace ito;

namespace {

Matrix random_matrix(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex{u(rng), u(rng)};
  return m;
}

Matrix random_hermitian(int n, std::mt19937_64& rng) {
  const Matrix m = random_matrix(n, rng);
  return 0.5 * (m + m.adjoint().eval());
}

Matrix random_density(int n, std::mt19937_64& rng) {
  Matrix m = random_matrix(n, rng);
  Matrix rho = m * m.adjoint();
  rho /= rho.trace();
  return rho;
}

}  // namespace

TEST_CASE("vectorize: maximally mixed qubit column-stacks as expected") {
  Matrix rho = 0.5 * Matrix::Identity(2, 2);
  const QuantumState s = vectorize(rho);
  REQUIRE(s.space == SpaceTag::Liouville);
  REQUIRE(s.amplitudes.size() == 4);
  CHECK(std::abs(s.amplitudes(0) - 0.5) < 1e-15);
  CHECK(std::abs(s.amplitudes(1)) < 1e-15);
  CHECK(std::abs(s.amplitudes(2)) < 1e-15);
  CHECK(std::abs(s.amplitudes(3) - 0.5) < 1e-15);
}

TEST_CASE("vectorize: pure projector") {
  Matrix rho = Matrix::Zero(2, 2);
  rho(0, 0) = 1.0;
  const QuantumState s = vectorize(rho);
  CHECK(std::abs(s.amplitudes(0) - 1.0) < 1e-15);
  CHECK(s.amplitudes.tail(3).norm() < 1e-15);
}

TEST_CASE("vectorize/devectorize round-trip is exact") {
  std::mt19937_64 rng(42);
  for (int n : {2, 3, 5, 8, 16}) {
    const Matrix rho = random_hermitian(n, rng);
    const Matrix back = devectorize(vectorize(rho));
    CHECK((back - rho).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("build_liouvillian: diagonal H leaves populations static") {
  Matrix h = Matrix::Zero(3, 3);
  h(0, 0) = 1.0;
  h(1, 1) = 2.5;
  h(2, 2) = -0.7;
  LindbladSpec spec;
  spec.hamiltonian = [h](double) { return h; };
  const Matrix l = build_liouvillian(spec, 0.0);
  std::mt19937_64 rng(7);
  const Matrix rho = random_density(3, rng);
  const Matrix drho = devectorize(QuantumState{l * vectorize(rho).amplitudes, SpaceTag::Liouville});
  for (int i = 0; i < 3; ++i) CHECK(std::abs(drho(i, i)) < 1e-14);
}

TEST_CASE("build_liouvillian matches the element-wise master-equation oracle") {
  std::mt19937_64 rng(11);
  const int n = 4;
  const Matrix h = random_hermitian(n, rng);
  const Matrix l1 = random_matrix(n, rng);
  const double gamma = 0.37;
  LindbladSpec spec;
  spec.hamiltonian = [h](double) { return h; };
  spec.lindblad_ops = {{l1, gamma}};

  const Matrix rho = random_density(n, rng);
  // Independent oracle: direct evaluation of the master-equation right-hand
  // side as matrices.
  const Matrix anticomm = l1.adjoint() * l1 * rho + rho * l1.adjoint() * l1;
  const Matrix expected = -I1 * (h * rho - rho * h) + gamma * (l1 * rho * l1.adjoint() - 0.5 * anticomm);

  const Matrix got =
      devectorize(QuantumState{build_liouvillian(spec, 0.0) * vectorize(rho).amplitudes, SpaceTag::Liouville});
  CHECK((got - expected).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("build_liouvillian annihilates the trace") {
  std::mt19937_64 rng(13);
  const int n = 5;
  LindbladSpec spec;
  const Matrix h = random_hermitian(n, rng);
  spec.hamiltonian = [h](double) { return h; };
  spec.lindblad_ops = {{random_matrix(n, rng), 0.2}, {random_matrix(n, rng), 1.4}};
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix rho = random_density(n, rng);
    const Matrix drho =
        devectorize(QuantumState{build_liouvillian(spec, 0.0) * vectorize(rho).amplitudes, SpaceTag::Liouville});
    CHECK(std::abs(drho.trace()) < 1e-11);
  }
}

TEST_CASE("build_liouvillian is linear in rho") {
  std::mt19937_64 rng(17);
  const int n = 3;
  LindbladSpec spec;
  const Matrix h = random_hermitian(n, rng);
  spec.hamiltonian = [h](double) { return h; };
  spec.lindblad_ops = {{random_matrix(n, rng), 0.9}};
  const Matrix l = build_liouvillian(spec, 0.0);
  const Matrix r1 = random_hermitian(n, rng), r2 = random_hermitian(n, rng);
  const double a = 0.3, b = -1.7;
  const Vector lhs = l * vectorize(Matrix(a * r1 + b * r2)).amplitudes;
  const Vector rhs = a * (l * vectorize(r1).amplitudes) + b * (l * vectorize(r2).amplitudes);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("build_liouvillian rejects negative rates") {
  LindbladSpec spec;
  spec.hamiltonian = [](double) { return Matrix::Zero(2, 2).eval(); };
  spec.lindblad_ops = {{Matrix::Identity(2, 2), -1.0}};
  CHECK_THROWS(build_liouvillian(spec, 0.0));
}

TEST_CASE("expectation: identity and projector cases") {
  Vector psi = Vector::Zero(3);
  psi(0) = 1.0;
  const QuantumState s{psi, SpaceTag::Hilbert};
  CHECK(std::abs(expectation(Matrix::Identity(3, 3), s) - 1.0) < 1e-15);
  Matrix p1 = Matrix::Zero(3, 3);
  p1(1, 1) = 1.0;
  CHECK(std::abs(expectation(p1, s)) < 1e-15);
}

TEST_CASE("expectation of the number operator matches direct summation") {
  const int n = 6;
  Vector psi(n);
  for (int i = 0; i < n; ++i) psi(i) = Complex{1.0 / (i + 1.0), 0.3 * i};
  psi.normalize();
  Matrix num = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) num(i, i) = i;
  double direct = 0.0;
  for (int i = 0; i < n; ++i) direct += i * std::norm(psi(i));
  const Complex got = expectation(num, QuantumState{psi, SpaceTag::Hilbert});
  CHECK(std::abs(got.real() - direct) < 1e-14);
  CHECK(std::abs(got.imag()) < 1e-14);
}

TEST_CASE("expectation in Liouville space is trace(A rho)") {
  std::mt19937_64 rng(23);
  const Matrix rho = random_density(4, rng);
  const Matrix a = random_hermitian(4, rng);
  const Complex expected = (a * rho).trace();
  const Complex got = expectation(a, vectorize(rho));
  CHECK(std::abs(got - expected) < 1e-13);
}

TEST_CASE("is_hermitian flags non-Hermitian matrices") {
  std::mt19937_64 rng(29);
  CHECK(is_hermitian(random_hermitian(4, rng)));
  Matrix m = random_hermitian(4, rng);
  m(0, 1) += Complex{0.0, 1e-6};
  CHECK_FALSE(is_hermitian(m));
}

TEST_CASE("populations: Hilbert and Liouville views agree") {
  std::mt19937_64 rng(31);
  Vector psi(4);
  for (int i = 0; i < 4; ++i) psi(i) = Complex{0.2 * i + 0.1, -0.3 * i};
  psi.normalize();
  const Eigen::VectorXd ph = populations(QuantumState{psi, SpaceTag::Hilbert});
  const Matrix rho = psi * psi.adjoint();
  const Eigen::VectorXd pl = populations(vectorize(rho));
  CHECK((ph - pl).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(std::abs(ph.sum() - 1.0) < 1e-14);
}
