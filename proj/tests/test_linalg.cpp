#include <doctest.h>

#include "support.hpp"

using namespace oogrisk;
using namespace oogrisk::test;

TEST_CASE("symmetric eigenvalue helpers") {
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  CHECK(linalg::max_eigenvalue_sym(m) == doctest::Approx(3.0));
  CHECK(linalg::min_eigenvalue_sym(m) == doctest::Approx(1.0));
  Matrix r;
  REQUIRE(linalg::sqrt_psd(m, 1e-12, r));
  CHECK((r * r - m).norm() < 1e-12);
  m << 1, 2, 2, 1;
  CHECK_FALSE(linalg::sqrt_psd(m, 1e-12, r));
}

TEST_CASE("null space and rank") {
  Matrix m(2, 3);
  m << 1, 2, 3, 2, 4, 6;
  CHECK(linalg::numerical_rank(m, 1e-12) == 1);
  const Matrix z = linalg::null_space(m, 1e-12);
  CHECK(z.cols() == 2);
  CHECK((m * z).norm() < 1e-12);
  CHECK((z.transpose() * z - Matrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("discrete Lyapunov matches the Kronecker solve") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5; ++t) {
    Matrix a = randn(rng, 4, 4);
    a *= 0.95 / linalg::spectral_radius(a);
    const Matrix b = randn(rng, 4, 2);
    const Matrix q = b * b.transpose();
    const Matrix w = linalg::discrete_lyapunov(a, q);
    CHECK((w - lyapunov_kron(a, q)).norm() < 1e-9 * w.norm());
  }
}

TEST_CASE("unit-circle Gramian matches quadrature") {
  std::mt19937_64 rng(11);
  SUBCASE("stable") {
    Matrix a = randn(rng, 3, 3);
    a *= 0.8 / linalg::spectral_radius(a);
    const Matrix b = randn(rng, 3, 1);
    const Matrix w = linalg::unit_circle_gramian(a, b);
    CHECK((w - gramian_quadrature(a, b, 4096)).norm() < 1e-9 * w.norm());
  }
  SUBCASE("mixed stable and unstable modes") {
    Matrix d = Matrix::Zero(4, 4);
    d.diagonal() << 0.5, -0.7, 1.6, -2.2;
    const Matrix v = randn(rng, 4, 4);
    const Matrix a = v * d * v.inverse();
    const Matrix b = randn(rng, 4, 2);
    const Matrix w = linalg::unit_circle_gramian(a, b);
    CHECK((w - gramian_quadrature(a, b, 8192)).norm() < 1e-7 * w.norm());
  }
  SUBCASE("eigenvalue on the circle") {
    Matrix a = Matrix::Identity(2, 2);
    a(0, 0) = -1.0;
    CHECK_THROWS_AS(linalg::unit_circle_gramian(a, Matrix::Ones(2, 1)), std::domain_error);
  }
}

TEST_CASE("block helpers") {
  const std::vector<Matrix> parts{m1(1), Matrix::Constant(2, 2, 3.0)};
  const Matrix bd = linalg::block_diag(parts);
  CHECK(bd.rows() == 3);
  CHECK(bd(0, 1) == 0.0);
  CHECK(bd(2, 2) == 3.0);
  const std::vector<Matrix> rows{Matrix::Ones(1, 2), Matrix::Zero(2, 2)};
  CHECK(linalg::vstack(rows).rows() == 3);
  CHECK(linalg::spectral_radius(Matrix(0, 0)) == 0.0);
}
