#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oogrisk/linalg.hpp"

namespace oogrisk {

enum class TimeDomain { Continuous, Discrete };

/// Linear system (A, B, C, D). Discrete models carry their sampling time.
struct StateSpaceModel {
  Matrix A, B, C, D;
  TimeDomain domain = TimeDomain::Discrete;
  std::optional<double> sample_time;

  static StateSpaceModel continuous(Matrix A, Matrix B, Matrix C, Matrix D);
  static StateSpaceModel discrete(Matrix A, Matrix B, Matrix C, Matrix D, double sample_time);

  Eigen::Index n_states() const { return A.rows(); }
  Eigen::Index n_inputs() const { return B.cols(); }
  Eigen::Index n_outputs() const { return C.rows(); }

  /// Throws DimensionMismatch / InvalidModel when the invariants fail.
  void validate() const;
};

/// Plant with its performance output y_p = C_J x + D_J u~.
struct PlantSpec {
  StateSpaceModel dynamics;
  Matrix C_J, D_J;

  void validate() const;
};

/// Output-feedback controller z+ = A_c z + B_c y~, u = C_c z + D_c y~.
/// n_z = 0 (empty A_c) is a static gain.
struct ControllerSpec {
  Matrix A_c, B_c, C_c, D_c;

  static ControllerSpec static_gain(Matrix D_c);
  Eigen::Index n_states() const { return A_c.rows(); }
  void validate(Eigen::Index n_u, Eigen::Index n_m) const;
};

/// Residual generator s+ = A_e s + B_e u + K_e y~, y_r = C_e s + D_e u + E_e y~.
struct DetectorSpec {
  Matrix A_e, B_e, K_e, C_e, D_e, E_e;
  double threshold = 1.0;

  Eigen::Index n_states() const { return A_e.rows(); }
  Eigen::Index n_residuals() const { return C_e.rows(); }
  void validate(Eigen::Index n_u, Eigen::Index n_m) const;
};

/// Which actuator or sensor channels the adversary writes to. Exactly one of
/// the two masks may be non-empty in the nonzero sense.
struct AttackChannels {
  std::vector<bool> actuator_mask;
  std::vector<bool> sensor_mask;

  static AttackChannels actuators(std::vector<int> indices, int n_u, int n_m);
  static AttackChannels sensors(std::vector<int> indices, int n_u, int n_m);

  Eigen::Index n_attacks() const;
  Matrix B_a() const;  ///< n_u x n_a selector of attacked actuators
  Matrix D_a() const;  ///< n_m x n_a selector of attacked sensors
  void validate(Eigen::Index n_u, Eigen::Index n_m) const;
};

/// Closed loop under attack: x+ = A_cl x + B_cl a, y_p = C_p x + D_p a,
/// y_r = C_r x + D_r a, with x = [x_p; z; s].
struct ClosedLoopRealization {
  Matrix A_cl, B_cl, C_p, D_p, C_r, D_r;
  Vector delta;
  double spectral_radius = 0.0;
  bool schur_stable = true;

  Eigen::Index n_states() const { return A_cl.rows(); }
  Eigen::Index n_attacks() const { return B_cl.cols(); }
  Eigen::Index n_performance() const { return C_p.rows(); }
  Eigen::Index n_residuals() const { return C_r.rows(); }

  StateSpaceModel performance_system() const;
  StateSpaceModel residual_system() const;
};

enum class StabilityPolicy {
  Require,  ///< unstable closed loop is a hard error
  Warn,     ///< recorded on the realization, assembly proceeds
};

struct SysTolerances {
  double stability_tol = 1e-9;
  double circle_tol = 1e-6;
  double psd_tol = 1e-10;
  double rank_tol = 1e-10;
};

/// Zero-order-hold discretization via the exponential of [[A, B], [0, 0]] Ts.
StateSpaceModel zoh_discretize(const StateSpaceModel& model, double ts);

struct PerformanceOutput {
  Matrix C_J, D_J;
};

/// C_J = [sqrt(Q); 0], D_J = [0; sqrt(R)] so that |y_p|^2 = x'Qx + u'Ru.
PerformanceOutput lq_performance_output(const Matrix& Q, const Matrix& R,
                                        const SysTolerances& tol = {});

bool is_schur_stable(const Matrix& A, double stability_tol = 1e-9);

/// Checks that B_cl has full column rank and, per `policy`, that A_cl is Schur stable.
void check_realization(ClosedLoopRealization& r, StabilityPolicy policy,
                       const SysTolerances& tol = {});

ClosedLoopRealization assemble_closed_loop(const PlantSpec& plant, const ControllerSpec& ctrl,
                                           const DetectorSpec& det, const AttackChannels& attack,
                                           StabilityPolicy policy = StabilityPolicy::Require,
                                           const SysTolerances& tol = {});

/// Builds a realization directly from its six matrices and runs the checks.
ClosedLoopRealization make_realization(Matrix A_cl, Matrix B_cl, Matrix C_p, Matrix D_p,
                                       Matrix C_r, Matrix D_r,
                                       StabilityPolicy policy = StabilityPolicy::Require,
                                       const SysTolerances& tol = {});

// ---------------------------------------------------------------------------
// Invariant zeros

struct SystemZero {
  Complex z;
  CVector input_direction;  ///< unit norm, length n_inputs
  int multiplicity = 1;
};

struct ZeroSet {
  std::vector<SystemZero> zeros;
  std::vector<SystemZero> on_unit_circle;
  /// Zeros whose pencil null vector has no input component (output-decoupling
  /// zeros). They do not correspond to any attack direction.
  std::vector<Complex> decoupling;
};

struct ZeroOptions {
  double circle_tol = 1e-6;
  double rank_tol = 1e-8;     ///< sigma_min / scale deciding a rank drop
  double cluster_tol = 1e-5;  ///< relative distance under which zeros are merged
};

/// Finite zeros of the Rosenbrock pencil [[A - zI, B], [C, D]] for square or
/// tall systems. Infinite generalized eigenvalues are discarded. Throws
/// DegeneratePencil when the pencil has deficient normal rank (wide systems
/// included).
ZeroSet invariant_zeros(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                        const ZeroOptions& opt = {});
ZeroSet invariant_zeros(const StateSpaceModel& sys, const ZeroOptions& opt = {});

/// G(z) = C (zI - A)^{-1} B + D.
CMatrix transfer_matrix(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                        Complex z);

}  // namespace oogrisk
