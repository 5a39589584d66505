#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oogrisk/risk.hpp"

namespace oogrisk::test {

inline std::string data_path(const std::string& name) {
  return std::string(OOGRISK_DATA_DIR) + "/" + name;
}

inline Matrix m1(double v) { return Matrix::Constant(1, 1, v); }

inline Matrix randn(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> nd;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

// exp(M) by scaling and squaring with a long Taylor series.
inline Matrix expm_taylor(const Matrix& m) {
  const double nrm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (std::ldexp(nrm, -s) > 0.1) ++s;
  const Matrix x = std::ldexp(1.0, -s) * m;
  Matrix term = Matrix::Identity(m.rows(), m.cols());
  Matrix sum = term;
  for (int k = 1; k < 30; ++k) {
    term = (term * x) / k;
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

// Kronecker solve of A W A' - W + Q = 0.
inline Matrix lyapunov_kron(const Matrix& a, const Matrix& q) {
  const Eigen::Index n = a.rows();
  Matrix k = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) k.block(i * n, j * n, n, n) = a(i, j) * a;
  k -= Matrix::Identity(n * n, n * n);
  const Vector w = k.fullPivLu().solve(-Eigen::Map<const Vector>(q.data(), n * n));
  return Eigen::Map<const Matrix>(w.data(), n, n);
}

// (1/2pi) * contour integral over |z| = 1 by the trapezoid rule, which is
// spectrally accurate for smooth periodic integrands.
inline Matrix gramian_quadrature(const Matrix& a, const Matrix& b, int points) {
  const Eigen::Index n = a.rows();
  CMatrix acc = CMatrix::Zero(n, n);
  const CMatrix ac = a.cast<Complex>();
  const CMatrix bc = b.cast<Complex>();
  for (int k = 0; k < points; ++k) {
    const Complex z = std::polar(1.0, 2.0 * M_PI * k / points);
    const CMatrix g = (z * CMatrix::Identity(n, n) - ac).partialPivLu().solve(bc);
    acc += g * g.adjoint();
  }
  return (acc / static_cast<double>(points)).real();
}

// Smallest distance of any residual zero to the unit circle (inf if none).
inline double residual_zero_margin(const ClosedLoopRealization& r) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& z : invariant_zeros(r.A_cl, r.B_cl, r.C_r, r.D_r).zeros)
    d = std::min(d, std::abs(std::abs(z.z) - 1.0));
  return d;
}

// Random 3-state, 1-attack realization with spectral radius `rho`.
inline ClosedLoopRealization random_realization(std::mt19937_64& rng, double rho) {
  Matrix A = randn(rng, 3, 3);
  A *= rho / linalg::spectral_radius(A);
  return make_realization(A, randn(rng, 3, 1), randn(rng, 2, 3), randn(rng, 2, 1), randn(rng, 1, 3),
                          randn(rng, 1, 1));
}

// Scalar loop with a residual zero at z0 on the unit circle that the
// performance output does not share.
inline ClosedLoopRealization unshared_zero_case(double a, double z0) {
  return make_realization(m1(a), m1(1), m1(1), m1(0), m1(a - z0), m1(1));
}

// Performance and residual outputs coincide, zero at z = 1; the gain is 1.
inline ClosedLoopRealization shared_zero_case(double a) {
  return make_realization(m1(a), m1(1), m1(a - 1), m1(1), m1(a - 1), m1(1));
}

// Two scenarios whose residuals each have a zero at z = 1, in orthogonal
// input directions, so the aggregate residual has none.
inline std::vector<ClosedLoopRealization> direction_mismatch_pair(double a) {
  const Matrix A = a * Matrix::Identity(2, 2), B = Matrix::Identity(2, 2), D = Matrix::Identity(2, 2);
  Matrix Cr1 = Matrix::Zero(2, 2), Cr2 = Matrix::Zero(2, 2);
  Cr1(0, 0) = a - 1;
  Cr2(1, 1) = a - 1;
  const Matrix Cp = Matrix::Ones(1, 2), Dp = Matrix::Zero(1, 2);
  return {make_realization(A, B, Cp, Dp, Cr1, D), make_realization(A, B, Cp, Dp, Cr2, D)};
}

// Whether the SDP for `p` runs into gamma_cap: either the solver reports it or
// the bisection fallback does after a numerical failure.
inline bool hits_gamma_cap(const LmiProblem& p, const ToleranceSet& tol = {}) {
  const SolveResult s = solve(p, tol);
  if (s.status == SolveStatus::ObjectiveUnbounded) return true;
  if (s.status != SolveStatus::NumericalTrouble || p.n_gamma != 1) return false;
  return feasibility_bisection(p, 1.0, tol).status == SolveStatus::ObjectiveUnbounded;
}

struct OracleDraw {
  ClosedLoopRealization r;
  double rho = 0.0;
};

// Seeded random 3-state, 1-attack loops with spectral radius in [0.3, 0.9]
// that pass the boundedness test and keep residual zeros 0.1 away from the
// unit circle.
inline std::vector<OracleDraw> oracle_draws(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(0.3, 0.9);
  std::vector<OracleDraw> out;
  while (static_cast<int>(out.size()) < count) {
    const double rho = ud(rng);
    auto r = random_realization(rng, rho);
    if (!is_bounded(boundedness_single(r).verdict)) continue;
    if (residual_zero_margin(r) < 0.1) continue;
    out.push_back({r, rho});
  }
  return out;
}

// Sort-based VaR: the ceil(N(1-beta))-th smallest finite value, or empty when
// fewer than that many values are finite.
inline std::optional<double> var_brute_force(std::vector<std::optional<double>> g, double beta) {
  std::vector<double> finite;
  for (const auto& v : g)
    if (v) finite.push_back(*v);
  std::sort(finite.begin(), finite.end());
  const double x = static_cast<double>(g.size()) * (1.0 - beta);
  // Count the integers m with m >= x, allowing for 1 - beta not being exact.
  long long k = 1;
  while (static_cast<double>(k) < x - 1e-9 * std::max(1.0, x)) ++k;
  k = std::min<long long>(k, static_cast<long long>(g.size()));
  if (k > static_cast<long long>(finite.size())) return std::nullopt;
  return finite[static_cast<size_t>(k - 1)];
}

// eps with C(N,k) (1-eps)^(N-k) = lambda/N, by bisection in log space.
inline double campi_bisection(long long n, long long k, double lambda) {
  if (k >= n) return 1.0;
  const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
  const double target = std::log(lambda / static_cast<double>(n));
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = lc + static_cast<double>(n - k) * std::log1p(-mid);
    if (f > target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Smallest N with 2 exp(-2 N eps^2) <= beta.
inline long long hoeffding_loop(double eps, double beta) {
  long long n = 1;
  while (2.0 * std::exp(-2.0 * static_cast<double>(n) * eps * eps) > beta) ++n;
  return n;
}

}  // namespace oogrisk::test
