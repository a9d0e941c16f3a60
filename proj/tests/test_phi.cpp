// Tests for the phi-function matrix kernel: f_M(A, tau) v and the matrix
// exponential applied to a vector, checked against independent oracles
// (extended-precision scalar series, dense eigendecomposition).
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <itoprop/expmv.hpp>

using ito::Complex;
using ito::Matrix;
using ito::Vector;
using ito::expm_apply;
using ito::matvec_count;
using ito::phi_apply_many;

namespace {

// Extended-precision scalar series oracle:
//   f_M(z, tau) = sum_{k >= M} tau^k z^{k - M} / k!
// evaluated in long double with a fixed generous term count.
std::complex<long double> scalar_phi_series(std::complex<long double> z,
                                            long double tau, int m) {
  std::complex<long double> sum = 0.0L;
  // term_k = tau^k z^{k-M} / k!, built up recursively starting at k = M.
  long double tau_pow = 1.0L;
  long double fact = 1.0L;
  for (int k = 1; k <= m; ++k) {
    tau_pow *= tau;
    fact *= static_cast<long double>(k);
  }
  std::complex<long double> term = tau_pow / fact;
  for (int k = m; k < m + 120; ++k) {
    sum += term;
    term *= z * tau / static_cast<long double>(k + 1);
  }
  return sum;
}

Matrix random_anti_hermitian(int n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex{g(rng), g(rng)};
  Matrix h = 0.5 * (a + a.adjoint());
  return Complex{0.0, -1.0} * h;
}

Vector random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = Complex{g(rng), g(rng)};
  return v;
}

// Dense oracle for f_M via eigendecomposition of a diagonalizable matrix:
// f_M(A, tau) v = V f_M(Lambda, tau) V^{-1} v, scalar values from the
// long-double series.
Vector phi_eigen_oracle(const Matrix& a, int m, double tau, const Vector& v) {
  Eigen::ComplexEigenSolver<Matrix> es(a);
  const Matrix vec = es.eigenvectors();
  const Vector y = vec.partialPivLu().solve(v);
  Vector fy(y.size());
  for (int i = 0; i < y.size(); ++i) {
    const Complex lam = es.eigenvalues()(i);
    const auto s = scalar_phi_series(
        std::complex<long double>(lam.real(), lam.imag()),
        static_cast<long double>(tau), m);
    fy(i) = Complex{static_cast<double>(s.real()), static_cast<double>(s.imag())} * y(i);
  }
  return vec * fy;
}

}  // namespace

TEST_CASE("scalar case matches an extended-precision series") {
  // 1x1 matrix: f_M(z, tau) against the long-double reference sum.
  const Complex z{0.0, 0.1};
  Matrix a(1, 1);
  a(0, 0) = z;
  Vector v(1);
  v(0) = 1.0;
  for (int m : {2, 4, 8, 12}) {
    const auto out = phi_apply_many(a, m, {1.0}, v);
    const auto ref = scalar_phi_series({0.0L, 0.1L}, 1.0L, m);
    const Complex r{static_cast<double>(ref.real()), static_cast<double>(ref.imag())};
    CAPTURE(m);
    CHECK(std::abs(out[0](0) - r) < 1e-14 * std::max(1.0, std::abs(r)));
  }
}

TEST_CASE("zero matrix gives the leading monomial term") {
  // f_M(0, tau) v = tau^M / M! v exactly (single surviving series term).
  const int n = 4;
  std::mt19937_64 rng(7);
  const Vector v = random_vector(n, rng);
  const Matrix a = Matrix::Zero(n, n);
  for (int m : {2, 5, 9}) {
    const double tau = 0.37;
    const auto out = phi_apply_many(a, m, {tau}, v);
    double fact = 1.0;
    for (int k = 2; k <= m; ++k) fact *= k;
    const Vector expected = (std::pow(tau, m) / fact) * v;
    CHECK((out[0] - expected).norm() <= 1e-14 * expected.norm());
  }
}

TEST_CASE("order zero reduces to the matrix exponential") {
  std::mt19937_64 rng(11);
  const int n = 6;
  const Matrix a = random_anti_hermitian(n, rng, 1.0);
  const Vector v = random_vector(n, rng);
  const double tau = 0.83;
  const auto out = phi_apply_many(a, 0, {tau}, v);
  const Vector ref = phi_eigen_oracle(a, 0, tau, v);
  CHECK((out[0] - ref).norm() < 1e-12 * ref.norm());
  // And expm_apply agrees with the same oracle.
  const Vector e = expm_apply(a, tau, v);
  CHECK((e - ref).norm() < 1e-12 * ref.norm());
}

TEST_CASE("dense anti-Hermitian matrix against the eigendecomposition oracle") {
  std::mt19937_64 rng(13);
  const int n = 10;
  const Matrix a = random_anti_hermitian(n, rng, 2.0);
  const Vector v = random_vector(n, rng);
  for (int m : {3, 8}) {
    for (double tau : {0.05, 0.7, 1.9}) {
      const auto out = phi_apply_many(a, m, {tau}, v);
      const Vector ref = phi_eigen_oracle(a, m, tau, v);
      CAPTURE(m, tau);
      CHECK((out[0] - ref).norm() < 1e-12 * std::max(1e-30, ref.norm()));
    }
  }
}

TEST_CASE("multiple offsets in one walk agree with separate evaluations") {
  std::mt19937_64 rng(17);
  const int n = 8;
  const Matrix a = random_anti_hermitian(n, rng, 3.0);
  const Vector v = random_vector(n, rng);
  const int m = 6;
  const std::vector<double> taus{0.0, 0.1, 0.45, 0.45, 1.2};
  const auto joint = phi_apply_many(a, m, taus, v);
  REQUIRE(joint.size() == taus.size());
  for (std::size_t j = 0; j < taus.size(); ++j) {
    const auto single = phi_apply_many(a, m, {taus[j]}, v);
    CHECK((joint[j] - single[0]).norm() < 1e-13 * std::max(1.0, single[0].norm()));
  }
  // tau = 0 gives exactly zero for m >= 1.
  CHECK(joint[0].norm() == 0.0);
}

TEST_CASE("derivative identity holds against central differences") {
  // d/dtau f_M(A, tau) v = A f_M(A, tau) v + tau^{M-1}/(M-1)! v.
  std::mt19937_64 rng(19);
  const int n = 5;
  const Matrix a = random_anti_hermitian(n, rng, 1.5);
  const Vector v = random_vector(n, rng);
  const int m = 4;
  const double tau = 0.6;
  const double h = 1e-5;
  const auto lo = phi_apply_many(a, m, {tau - h}, v);
  const auto hi = phi_apply_many(a, m, {tau + h}, v);
  const Vector numeric = (hi[0] - lo[0]) / (2.0 * h);
  const auto f = phi_apply_many(a, m, {tau}, v);
  double fact = 1.0;
  for (int k = 2; k <= m - 1; ++k) fact *= k;
  const Vector analytic = a * f[0] + (std::pow(tau, m - 1) / fact) * v;
  CHECK((numeric - analytic).norm() < 1e-8 * std::max(1.0, analytic.norm()));
}

TEST_CASE("exponential of an anti-Hermitian generator preserves the norm") {
  std::mt19937_64 rng(23);
  const int n = 12;
  const Matrix a = random_anti_hermitian(n, rng, 4.0);
  const Vector v = random_vector(n, rng);
  for (double t : {0.01, 0.5, 3.0, 10.0}) {
    const Vector w = expm_apply(a, t, v);
    CHECK(std::abs(w.norm() - v.norm()) < 1e-12 * v.norm());
  }
  // Group property: two half steps compose to one full step.
  const Vector half = expm_apply(a, 0.5, expm_apply(a, 0.5, v));
  const Vector full = expm_apply(a, 1.0, v);
  CHECK((half - full).norm() < 1e-12 * full.norm());
}

TEST_CASE("matvec counter increments during kernel evaluation") {
  std::mt19937_64 rng(29);
  const int n = 6;
  const Matrix a = random_anti_hermitian(n, rng, 1.0);
  const Vector v = random_vector(n, rng);
  const long before = matvec_count();
  (void)phi_apply_many(a, 4, {0.9}, v);
  const long after_phi = matvec_count();
  CHECK(after_phi > before);
  (void)expm_apply(a, 1.0, v);
  CHECK(matvec_count() > after_phi);
}

TEST_CASE("invalid inputs are rejected") {
  Matrix a = Matrix::Zero(3, 3);
  Vector v = Vector::Ones(3);
  CHECK_THROWS(phi_apply_many(a, -1, {0.5}, v));
  CHECK_THROWS(phi_apply_many(a, 2, {0.5, 0.1}, v));  // descending offsets
  CHECK_THROWS(phi_apply_many(a, 2, {-0.5}, v));
  Matrix bad = a;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(phi_apply_many(bad, 2, {0.5}, v));
  Vector wrong = Vector::Ones(2);
  CHECK_THROWS(phi_apply_many(a, 2, {0.5}, wrong));
}
