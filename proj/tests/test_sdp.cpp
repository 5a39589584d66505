#include <doctest.h>

#include <map>
#include <sstream>

#include "oogrisk/error.hpp"
#include "support.hpp"

using namespace oogrisk;
using namespace oogrisk::test;

namespace {

// y_p = 2a, y_r = a, so the gain is 4 for every attack.
ClosedLoopRealization static_gain_case() {
  return make_realization(m1(0), m1(1), m1(0), m1(2), m1(0), m1(1));
}

std::vector<ClosedLoopRealization> stable_draws(std::mt19937_64& rng, int count) {
  std::vector<ClosedLoopRealization> out;
  while (static_cast<int>(out.size()) < count) {
    auto r = random_realization(rng, 0.7);
    if (residual_zero_margin(r) >= 0.1) out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("static gain") {
  const SolveResult s = solve(build_single_oog_sdp(static_gain_case()));
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(std::abs(s.objective_value - 4.0) < 1e-6);
  CHECK(s.max_constraint_eig < 1e-6);
}

TEST_CASE("zero performance output") {
  std::mt19937_64 rng(2);
  auto r = random_realization(rng, 0.6);
  r.C_p.setZero();
  r.D_p.setZero();
  const SolveResult s = solve(build_single_oog_sdp(r));
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(std::abs(s.objective_value) < 1e-8);
}

TEST_CASE("coupled problem with one scenario equals the single problem") {
  std::mt19937_64 rng(4);
  for (const auto& r : stable_draws(rng, 3)) {
    const SolveResult a = solve(build_single_oog_sdp(r));
    const std::vector<ClosedLoopRealization> one{r};
    const SolveResult b = solve(build_coupled_sdp(one));
    REQUIRE(a.status == SolveStatus::Optimal);
    REQUIRE(b.status == SolveStatus::Optimal);
    CHECK(rel_diff(a.objective_value, b.objective_value) < 1e-6);
  }
}

TEST_CASE("residual scaling") {
  std::mt19937_64 rng(6);
  const auto r = stable_draws(rng, 1).front();
  auto scaled = r;
  scaled.C_r *= 3.0;
  scaled.D_r *= 3.0;
  const double g = solve(build_single_oog_sdp(r)).objective_value;
  const double gs = solve(build_single_oog_sdp(scaled)).objective_value;
  CHECK(rel_diff(gs, g / 9.0) < 1e-6);
}

TEST_CASE("bisection agrees with the interior-point solve") {
  std::mt19937_64 rng(8);
  for (const auto& r : stable_draws(rng, 4)) {
    const LmiProblem p = build_single_oog_sdp(r);
    const SolveResult s = solve(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    const BisectionResult b = feasibility_bisection(p);
    REQUIRE(b.status == SolveStatus::Optimal);
    CHECK(rel_diff(b.gamma, s.objective_value) < 1e-4);
    CHECK(lmi_feasible(p, 1.01 * s.objective_value));
    CHECK_FALSE(lmi_feasible(p, 0.99 * s.objective_value));
    CHECK(certificate_max_eig(p, s.gamma, s.P, s.reach_basis) < 1e-6 * (1.0 + p.F0.norm()));
  }
}

TEST_CASE("LMI data layout") {
  std::mt19937_64 rng(10);
  const auto rs = stable_draws(rng, 2);
  const LmiProblem p = build_coupled_sdp(rs);
  CHECK(p.n_gamma == 2);
  CHECK(p.p_dim == 6);
  CHECK(p.n_a == 1);
  CHECK(p.c == Vector::Ones(2));

  // F0 is the scenario average of [C_p D_p]'[C_p D_p] on the stacked state.
  Matrix cd0 = Matrix::Zero(2, 7), cd1 = Matrix::Zero(2, 7);
  cd0.leftCols(3) = rs[0].C_p;
  cd0.rightCols(1) = rs[0].D_p;
  cd1.middleCols(3, 3) = rs[1].C_p;
  cd1.rightCols(1) = rs[1].D_p;
  const Matrix expect = 0.5 * (cd0.transpose() * cd0 + cd1.transpose() * cd1);
  CHECK((p.F0 - expect).norm() < 1e-12);

  std::ostringstream os;
  write_lmi_coo(p, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "oogrisk-lmi 1");
  std::getline(is, line);
  CHECK(line == "n_gamma 2 p_dim 6 n_a 1 side 7");
  std::getline(is, line);
  CHECK(line == "c 1 1");
  std::map<std::string, Matrix> blocks;
  std::string tag, name;
  Eigen::Index rows = 0, cols = 0, nnz = 0;
  while (is >> tag >> name >> rows >> cols >> nnz) {
    CHECK(tag == "block");
    Matrix m = Matrix::Zero(rows, cols);
    for (Eigen::Index k = 0; k < nnz; ++k) {
      Eigen::Index i = 0, j = 0;
      double v = 0.0;
      is >> i >> j >> v;
      m(i, j) = v;
      if (name[0] == 'F') m(j, i) = v;
    }
    blocks[name] = m;
  }
  REQUIRE(blocks.size() == 5);
  CHECK(blocks["A_bar"] == p.A_bar);
  CHECK(blocks["B_bar"] == p.B_bar);
  CHECK(blocks["F0"] == p.F0);
  CHECK(blocks["F1"] == p.F[0]);
  CHECK(blocks["F2"] == p.F[1]);
}

TEST_CASE("scenarios must share the attack dimension") {
  std::mt19937_64 rng(12);
  const auto a = stable_draws(rng, 1).front();
  const auto b = make_realization(m1(0.5), Matrix::Identity(1, 1), m1(1), m1(0), m1(1), m1(1));
  auto c = b;
  c.B_cl = Matrix::Zero(1, 2);
  c.D_p = Matrix::Zero(1, 2);
  c.D_r = Matrix::Zero(1, 2);
  const std::vector<ClosedLoopRealization> ok{a, b};
  CHECK_NOTHROW(build_coupled_sdp(ok));
  const std::vector<ClosedLoopRealization> mixed{a, c};
  try {
    build_coupled_sdp(mixed);
    FAIL("expected MixedAttackDimensions");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MixedAttackDimensions);
  }
}

TEST_CASE("unit-circle poles are rejected") {
  const auto r = make_realization(m1(1.0), m1(1), m1(1), m1(0), m1(1), m1(1), StabilityPolicy::Warn);
  CHECK_THROWS_AS(solve(build_single_oog_sdp(r)), Error);
}
