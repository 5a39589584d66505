#include <chrono>
#include <cmath>
#include <limits>

#include "ipm.hpp"
#include "oogrisk/error.hpp"
#include "oogrisk/sdp.hpp"

namespace oogrisk {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "Optimal";
    case SolveStatus::Infeasible:
      return "Infeasible";
    case SolveStatus::ObjectiveUnbounded:
      return "ObjectiveUnbounded";
    case SolveStatus::NumericalTrouble:
      return "NumericalTrouble";
  }
  return "?";
}

namespace {

// Input-normal coordinates of the reachable subspace of (A_bar, B_bar):
// x = T xi with T = U Lambda^{1/2}, W = U Lambda U' the unit-circle Gramian.
struct Reduction {
  Matrix T;      // n x r
  Matrix T_inv;  // r x n, left inverse
  Matrix AB;     // r x (r + n_a) = [T_inv A T, T_inv B]
  Matrix Z;      // blockdiag(T, I)
};

Reduction reduce(const LmiProblem& p, double reach_tol) {
  const Eigen::Index n = p.p_dim;
  Reduction red;
  if (n == 0) {
    red.T = Matrix(0, 0);
    red.T_inv = Matrix(0, 0);
    red.AB = Matrix(0, p.n_a);
    red.Z = Matrix::Identity(p.n_a, p.n_a);
    return red;
  }
  Matrix W;
  try {
    W = linalg::unit_circle_gramian(p.A_bar, p.B_bar);
  } catch (const std::domain_error&) {
    throw Error(ErrorCode::InvalidModel, "closed loop has poles on the unit circle", "A_bar");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(W);
  const Vector& ev = es.eigenvalues();
  const double lmax = ev.maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = n - 1; i >= 0; --i)
    if (ev(i) > reach_tol * lmax && ev(i) > 0.0) keep.push_back(i);
  const auto r = static_cast<Eigen::Index>(keep.size());
  red.T.resize(n, r);
  red.T_inv.resize(r, n);
  for (Eigen::Index k = 0; k < r; ++k) {
    const double s = std::sqrt(ev(keep[static_cast<size_t>(k)]));
    red.T.col(k) = es.eigenvectors().col(keep[static_cast<size_t>(k)]) * s;
    red.T_inv.row(k) = es.eigenvectors().col(keep[static_cast<size_t>(k)]).transpose() / s;
  }
  red.AB.resize(r, r + p.n_a);
  red.AB << red.T_inv * p.A_bar * red.T, red.T_inv * p.B_bar;
  red.Z = Matrix::Zero(n + p.n_a, r + p.n_a);
  red.Z.topLeftCorner(n, r) = red.T;
  red.Z.bottomRightCorner(p.n_a, p.n_a).setIdentity();
  return red;
}

Matrix congruence(const Matrix& F, const Matrix& Z) {
  return linalg::symmetrize(Z.transpose() * F * Z);
}

double scale_of(const Matrix& m) {
  const double s = m.norm();
  return s > 0.0 ? s : 1.0;
}

detail::IpmResult run_with_retries(const detail::IpmData& data, detail::IpmOptions opt) {
  detail::IpmResult res = detail::run_ipm(data, opt);
  for (double init : {1e3, 1.0}) {
    if (res.status != detail::IpmResult::Status::Trouble) break;
    opt.init = init;
    detail::IpmResult retry = detail::run_ipm(data, opt);
    retry.iterations += res.iterations;
    res = retry;
  }
  return res;
}

}  // namespace

double certificate_max_eig(const LmiProblem& p, const Vector& gamma, const Matrix& P,
                           const Matrix& reach_basis) {
  const Matrix M = p.constraint_matrix(gamma, P);
  Matrix Z = Matrix::Zero(p.side(), reach_basis.cols() + p.n_a);
  Z.topLeftCorner(p.p_dim, reach_basis.cols()) = reach_basis;
  Z.bottomRightCorner(p.n_a, p.n_a).setIdentity();
  return linalg::max_eigenvalue_sym(Z.transpose() * M * Z);
}

SolveResult solve(const LmiProblem& p, const ToleranceSet& tol) {
  const auto t0 = std::chrono::steady_clock::now();
  p.validate();
  const Reduction red = reduce(p, tol.reach_tol);

  const Matrix F0r = congruence(p.F0, red.Z);
  const double s0 = scale_of(F0r);
  detail::IpmData data;
  data.F0 = F0r / s0;
  data.AB = red.AB;
  Vector to_orig(p.n_gamma);
  Vector c_scaled(p.n_gamma);
  for (Eigen::Index i = 0; i < p.n_gamma; ++i) {
    const Matrix Fi = congruence(p.F[static_cast<size_t>(i)], red.Z);
    const double si = scale_of(Fi);
    data.F.push_back(Fi / si);
    to_orig(i) = s0 / si;
    c_scaled(i) = p.c(i) * to_orig(i);
  }
  const double cmax = c_scaled.size() > 0 && c_scaled.maxCoeff() > 0.0 ? c_scaled.maxCoeff() : 1.0;
  data.c = c_scaled / cmax;

  detail::IpmOptions opt;
  opt.tol = 0.25 * tol.kkt;
  opt.max_iters = tol.max_iters;
  opt.gamma_cap = tol.gamma_cap;
  opt.gamma_to_orig = to_orig;
  opt.obj_to_orig = cmax;
  const detail::IpmResult ir = run_with_retries(data, opt);

  SolveResult out;
  out.iterations = ir.iterations;
  out.primal_infeasibility = ir.pinf;
  out.dual_infeasibility = ir.dinf;
  out.relative_gap = ir.gap;
  out.reach_basis = red.T;
  out.message = ir.message;
  out.gamma = ir.gamma.cwiseProduct(to_orig);
  out.objective_value = p.c.dot(out.gamma);
  if (ir.P.size() > 0 || red.T.cols() == 0)
    out.P = linalg::symmetrize(red.T_inv.transpose() * (s0 * ir.P) * red.T_inv);
  else
    out.P = Matrix::Zero(p.p_dim, p.p_dim);

  switch (ir.status) {
    case detail::IpmResult::Status::Optimal: {
      // Evaluated on the reduced data so that T_inv T round-off does not enter.
      Matrix M = F0r;
      for (Eigen::Index i = 0; i < p.n_gamma; ++i)
        M += out.gamma(i) * congruence(p.F[static_cast<size_t>(i)], red.Z);
      if (ir.P.size() > 0) {
        const Eigen::Index r = red.AB.rows();
        const Matrix Ps = s0 * ir.P;
        M += red.AB.transpose() * Ps * red.AB;
        M.topLeftCorner(r, r) -= Ps;
      }
      out.max_constraint_eig = linalg::max_eigenvalue_sym(M);
      const double scale = 1.0 + F0r.norm();
      const bool gamma_ok = out.gamma.size() == 0 || out.gamma.minCoeff() >= -tol.feas * scale;
      if (gamma_ok && out.max_constraint_eig <= tol.feas * scale) {
        out.status = SolveStatus::Optimal;
      } else {
        out.status = SolveStatus::NumericalTrouble;
        out.message = "certificate check failed";
      }
      break;
    }
    case detail::IpmResult::Status::Unbounded:
      out.status = SolveStatus::ObjectiveUnbounded;
      break;
    case detail::IpmResult::Status::Trouble:
      out.status = SolveStatus::NumericalTrouble;
      break;
  }
  out.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

bool lmi_feasible(const LmiProblem& p, double gamma, const ToleranceSet& tol) {
  p.validate();
  if (p.n_gamma != 1)
    throw Error(ErrorCode::InvalidArgument, "feasibility test needs a single gamma", "lmi");
  const Reduction red = reduce(p, tol.reach_tol);
  // Scaled by the gamma-free part so that an infeasibility margin does not
  // shrink like 1/gamma as the bisection grows gamma.
  const Matrix G = congruence(p.F0 + gamma * p.F[0], red.Z);
  const double s = scale_of(congruence(p.F0, red.Z));
  const Eigen::Index m = G.rows();
  // min t' s.t. G/s + L(P) <= (t' - 1) I, t' >= 0
  detail::IpmData data;
  data.F0 = G / s + Matrix::Identity(m, m);
  data.F.push_back(-Matrix::Identity(m, m));
  data.AB = red.AB;
  data.c = Vector::Ones(1);
  detail::IpmOptions opt;
  opt.tol = 0.1 * tol.feas;
  opt.max_iters = tol.max_iters;
  opt.gamma_cap = std::numeric_limits<double>::infinity();
  const detail::IpmResult ir = run_with_retries(data, opt);
  if (ir.P.rows() != red.AB.rows()) return false;
  // Judge the candidate P itself rather than the solver's bookkeeping.
  const Eigen::Index r = red.AB.rows();
  Matrix M = G / s + red.AB.transpose() * ir.P * red.AB;
  M.topLeftCorner(r, r) -= ir.P;
  return linalg::max_eigenvalue_sym(M) <= tol.feas;
}

BisectionResult feasibility_bisection(const LmiProblem& p, double gamma_hi_start,
                                      const ToleranceSet& tol) {
  if (p.n_gamma != 1)
    throw Error(ErrorCode::InvalidArgument, "bisection needs a single gamma", "lmi");
  BisectionResult out;
  auto feasible = [&](double g) {
    ++out.oracle_calls;
    return lmi_feasible(p, g, tol);
  };
  if (feasible(0.0)) {
    out.gamma = 0.0;
    return out;
  }
  double lo = 0.0;
  double hi = gamma_hi_start > 0.0 ? gamma_hi_start : 1.0;
  while (!feasible(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > tol.gamma_cap) {
      out.status = SolveStatus::ObjectiveUnbounded;
      out.gamma = std::numeric_limits<double>::infinity();
      return out;
    }
  }
  while (hi - lo > tol.bisect * std::max(hi, 1e-12)) {
    const double mid = 0.5 * (lo + hi);
    if (feasible(mid))
      hi = mid;
    else
      lo = mid;
  }
  out.gamma = hi;
  return out;
}

BisectionResult feasibility_bisection(const ClosedLoopRealization& r, double gamma_hi_start,
                                      const ToleranceSet& tol) {
  return feasibility_bisection(build_single_oog_sdp(r), gamma_hi_start, tol);
}

}  // namespace oogrisk
