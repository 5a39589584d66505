#include <doctest.h>

#include "oogrisk/error.hpp"
#include "support.hpp"

using namespace oogrisk;
using namespace oogrisk::test;

namespace {

struct Loop {
  PlantSpec plant;
  ControllerSpec ctrl;
  DetectorSpec det;
};

Loop random_loop(std::mt19937_64& rng) {
  Loop l;
  Matrix A = randn(rng, 2, 2);
  A *= 0.5 / linalg::spectral_radius(A);
  l.plant.dynamics = StateSpaceModel::discrete(A, randn(rng, 2, 1), randn(rng, 2, 2), Matrix::Zero(2, 1), 0.1);
  l.plant.C_J = randn(rng, 2, 2);
  l.plant.D_J = randn(rng, 2, 1);
  l.ctrl.A_c = m1(0.3);
  l.ctrl.B_c = 0.1 * randn(rng, 1, 2);
  l.ctrl.C_c = 0.1 * randn(rng, 1, 1);
  l.ctrl.D_c = 0.1 * randn(rng, 1, 2);
  l.det.A_e = 0.2 * randn(rng, 2, 2);
  l.det.B_e = randn(rng, 2, 1);
  l.det.K_e = 0.1 * randn(rng, 2, 2);
  l.det.C_e = randn(rng, 1, 2);
  l.det.D_e = randn(rng, 1, 1);
  l.det.E_e = randn(rng, 1, 2);
  l.det.threshold = 4.0;
  return l;
}

// Steps the plant, controller and detector separately and returns the stacked
// [y_p; y_r] trajectory.
Matrix simulate_parts(const Loop& l, const AttackChannels& ch, const Matrix& a) {
  const auto& P = l.plant.dynamics;
  Vector x = Vector::Zero(2), z = Vector::Zero(1), s = Vector::Zero(2);
  const Matrix Ba = ch.B_a(), Da = ch.D_a();
  Matrix out(3, a.cols());
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    const Vector ak = a.col(k);
    const Vector y = P.C * x + Da * ak;
    const Vector u = l.ctrl.C_c * z + l.ctrl.D_c * y;
    const Vector ut = u + Ba * ak;
    out.col(k).head(2) = l.plant.C_J * x + l.plant.D_J * ut;
    out.col(k).tail(1) = (l.det.C_e * s + l.det.D_e * u + l.det.E_e * y) / std::sqrt(l.det.threshold);
    x = P.A * x + P.B * ut;
    z = l.ctrl.A_c * z + l.ctrl.B_c * y;
    s = l.det.A_e * s + l.det.B_e * u + l.det.K_e * y;
  }
  return out;
}

Matrix simulate_closed_loop(const ClosedLoopRealization& r, const Matrix& a) {
  Vector x = Vector::Zero(r.n_states());
  Matrix out(r.n_performance() + r.n_residuals(), a.cols());
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    out.col(k).head(r.n_performance()) = r.C_p * x + r.D_p * a.col(k);
    out.col(k).tail(r.n_residuals()) = r.C_r * x + r.D_r * a.col(k);
    x = r.A_cl * x + r.B_cl * a.col(k);
  }
  return out;
}

}  // namespace

TEST_CASE("zero-order hold matches a Taylor exponential") {
  std::mt19937_64 rng(5);
  const Matrix A = randn(rng, 3, 3), B = randn(rng, 3, 2);
  const auto c = StateSpaceModel::continuous(A, B, Matrix::Identity(3, 3), Matrix::Zero(3, 2));
  const double ts = 0.25;
  const auto d = zoh_discretize(c, ts);
  Matrix aug = Matrix::Zero(5, 5);
  aug.topLeftCorner(3, 3) = A * ts;
  aug.topRightCorner(3, 2) = B * ts;
  const Matrix e = expm_taylor(aug);
  CHECK((d.A - e.topLeftCorner(3, 3)).norm() < 1e-12);
  CHECK((d.B - e.topRightCorner(3, 2)).norm() < 1e-12);
  CHECK(d.domain == TimeDomain::Discrete);
  CHECK(d.sample_time.value() == ts);
}

TEST_CASE("closed-loop assembly reproduces a step-by-step simulation") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 3; ++t) {
    const Loop l = random_loop(rng);
    for (bool sensor : {false, true}) {
      const auto ch = sensor ? AttackChannels::sensors({1}, 1, 2) : AttackChannels::actuators({0}, 1, 2);
      const auto r = assemble_closed_loop(l.plant, l.ctrl, l.det, ch, StabilityPolicy::Warn);
      const Matrix a = randn(rng, 1, 25);
      const Matrix ref = simulate_parts(l, ch, a);
      CHECK((simulate_closed_loop(r, a) - ref).norm() < 1e-10 * (1.0 + ref.norm()));
    }
  }
}

TEST_CASE("realization checks") {
  SUBCASE("unstable loop") {
    CHECK_THROWS_AS(make_realization(m1(1.5), m1(1), m1(1), m1(0), m1(1), m1(1)), Error);
    const auto r = make_realization(m1(1.5), m1(1), m1(1), m1(0), m1(1), m1(1), StabilityPolicy::Warn);
    CHECK_FALSE(r.schur_stable);
    CHECK(r.spectral_radius == doctest::Approx(1.5));
  }
  SUBCASE("rank-deficient attack input") {
    try {
      make_realization(m1(0.5), Matrix::Ones(1, 2), Matrix::Ones(1, 1), Matrix::Zero(1, 2),
                       Matrix::Ones(1, 1), Matrix::Zero(1, 2));
      FAIL("expected RankDeficientInput");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::RankDeficientInput);
    }
  }
  CHECK(is_schur_stable(m1(0.99)));
  CHECK_FALSE(is_schur_stable(m1(-1.0)));
}

TEST_CASE("LQ performance output") {
  Matrix Q(2, 2), R(1, 1);
  Q << 2, 1, 1, 2;
  R << 4;
  const auto po = lq_performance_output(Q, R);
  const Vector x = Vector::LinSpaced(2, 1.0, -2.0);
  const Vector u = Vector::Constant(1, 0.5);
  const Vector y = po.C_J * x + po.D_J * u;
  CHECK(y.squaredNorm() == doctest::Approx(x.dot(Q * x) + u.dot(R * u)));
}

TEST_CASE("invariant zeros of a SISO system") {
  // (z - 0.5) / ((z - 0.2)(z - 0.3)) in controllable form
  Matrix A(2, 2), B(2, 1), C(1, 2);
  A << 0, 1, -0.06, 0.5;
  B << 0, 1;
  C << -0.5, 1;
  const auto zs = invariant_zeros(A, B, C, Matrix::Zero(1, 1));
  REQUIRE(zs.zeros.size() == 1);
  CHECK(std::abs(zs.zeros[0].z - Complex(0.5, 0.0)) < 1e-10);
  CHECK(zs.on_unit_circle.empty());
  CHECK(std::abs(transfer_matrix(A, B, C, Matrix::Zero(1, 1), Complex(0.5, 0.0))(0, 0)) < 1e-12);

  C << -1, 1;
  const auto on = invariant_zeros(A, B, C, Matrix::Zero(1, 1));
  REQUIRE(on.on_unit_circle.size() == 1);
  CHECK(std::abs(on.on_unit_circle[0].z - Complex(1.0, 0.0)) < 1e-8);
  CHECK(std::abs(std::abs(on.on_unit_circle[0].input_direction(0)) - 1.0) < 1e-10);
}

TEST_CASE("zeros of a tall system are common zeros of all outputs") {
  Matrix A(2, 2), B(2, 1), C(2, 2);
  A << 0, 1, -0.06, 0.5;
  B << 0, 1;
  C << -0.5, 1,   // zero at 0.5
      -0.5, 1;
  CHECK(invariant_zeros(A, B, C, Matrix::Zero(2, 1)).zeros.size() == 1);
  C(1, 0) = -0.7;  // second output has its zero at 0.7
  CHECK(invariant_zeros(A, B, C, Matrix::Zero(2, 1)).zeros.empty());
}

TEST_CASE("wide systems have a degenerate pencil") {
  try {
    invariant_zeros(m1(0.5), Matrix::Ones(1, 2), m1(1), Matrix::Zero(1, 2));
    FAIL("expected DegeneratePencil");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegeneratePencil);
  }
}
