#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oogrisk/linalg.hpp"
#include "oogrisk/sysmodel.hpp"

namespace oogrisk {

/// min c'gamma over gamma >= 0 and symmetric P subject to
///   M(gamma, P) = F0 + sum_i gamma_i F_i + L(P) <= 0,
///   L(P) = [A_bar B_bar]' P [A_bar B_bar] - [I 0]' P [I 0].
struct LmiProblem {
  Eigen::Index n_gamma = 0;
  Eigen::Index p_dim = 0;
  Eigen::Index n_a = 0;
  Matrix A_bar;  ///< p_dim x p_dim
  Matrix B_bar;  ///< p_dim x n_a
  Matrix F0;     ///< side p_dim + n_a
  std::vector<Matrix> F;
  Vector c;

  Eigen::Index side() const { return p_dim + n_a; }
  Matrix lyapunov_term(const Matrix& P) const;
  Matrix constraint_matrix(const Vector& gamma, const Matrix& P) const;
  void validate() const;
};

/// Single-scenario OOG program: F0 = [C_p D_p]'[C_p D_p], F_1 = -[C_r D_r]'[C_r D_r].
LmiProblem build_single_oog_sdp(const ClosedLoopRealization& r);

/// Coupled expected-loss program over N scenarios sharing the attack input.
/// F0 is averaged over scenarios; F_i penalizes the residual rows of scenario i.
LmiProblem build_coupled_sdp(std::span<const ClosedLoopRealization> rs);

/// Plain-text COO dump: header "oogrisk-lmi 1", dims, objective, then one
/// "block <name> <rows> <cols> <nnz>" section of "i j value" triplets per
/// matrix (upper triangle for the symmetric F blocks).
void write_lmi_coo(const LmiProblem& p, std::ostream& os);

struct ToleranceSet {
  double kkt = 1e-8;
  double feas = 1e-8;
  double gamma_cap = 1e9;
  int max_iters = 200;
  double bisect = 1e-6;
  double reach_tol = 1e-12;  ///< Gramian eigenvalues kept, relative to the largest
};

enum class SolveStatus { Optimal, Infeasible, ObjectiveUnbounded, NumericalTrouble };
const char* to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalTrouble;
  Vector gamma;
  Matrix P;
  double objective_value = 0.0;
  /// Largest eigenvalue of M(gamma, P) compressed to blockdiag(T, I), T the
  /// input-normal reachable basis below.
  double max_constraint_eig = 0.0;
  int iterations = 0;
  double wall_time = 0.0;
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double relative_gap = 0.0;
  /// Input-normal basis T = U Lambda^{1/2} of the reachable subspace of
  /// (A_bar, B_bar), from the Gramian W = U Lambda U'. Attacks starting at
  /// x = 0 never leave range(T), so the certificate is checked there.
  Matrix reach_basis;
  std::string message;
};

/// Primal-dual interior-point solve on the reachable subspace.
SolveResult solve(const LmiProblem& p, const ToleranceSet& tol = {});

/// Largest eigenvalue of blockdiag(T, I)' M(gamma, P) blockdiag(T, I).
double certificate_max_eig(const LmiProblem& p, const Vector& gamma, const Matrix& P,
                           const Matrix& reach_basis);

/// True iff some symmetric P makes M(gamma, P) <= feas * scale on the
/// reachable subspace (single-gamma problems).
bool lmi_feasible(const LmiProblem& p, double gamma, const ToleranceSet& tol = {});

struct BisectionResult {
  SolveStatus status = SolveStatus::Optimal;  ///< ObjectiveUnbounded when the cap is hit
  double gamma = 0.0;
  int oracle_calls = 0;
};

/// Bisection on gamma with the feasibility oracle; doubles the upper bound
/// until feasible or gamma_cap.
BisectionResult feasibility_bisection(const LmiProblem& p, double gamma_hi_start = 1.0,
                                      const ToleranceSet& tol = {});
BisectionResult feasibility_bisection(const ClosedLoopRealization& r, double gamma_hi_start = 1.0,
                                      const ToleranceSet& tol = {});

}  // namespace oogrisk
