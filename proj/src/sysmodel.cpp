#include "oogrisk/sysmodel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "oogrisk/error.hpp"

namespace oogrisk {

namespace {

std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void expect_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols)
    throw Error(ErrorCode::DimensionMismatch,
                std::string(name) + " is " + dims(m) + ", expected " + std::to_string(rows) +
                    "x" + std::to_string(cols),
                name);
}

void expect_finite(const Matrix& m, const char* name) {
  if (!linalg::all_finite(m))
    throw Error(ErrorCode::InvalidModel, "non-finite entries", name);
}

}  // namespace

StateSpaceModel StateSpaceModel::continuous(Matrix A, Matrix B, Matrix C, Matrix D) {
  StateSpaceModel m{std::move(A), std::move(B), std::move(C), std::move(D),
                    TimeDomain::Continuous, std::nullopt};
  m.validate();
  return m;
}

StateSpaceModel StateSpaceModel::discrete(Matrix A, Matrix B, Matrix C, Matrix D,
                                          double sample_time) {
  StateSpaceModel m{std::move(A), std::move(B), std::move(C), std::move(D), TimeDomain::Discrete,
                    sample_time};
  m.validate();
  return m;
}

void StateSpaceModel::validate() const {
  const auto n = A.rows();
  expect_shape(A, n, n, "A");
  expect_shape(B, n, B.cols(), "B");
  expect_shape(C, C.rows(), n, "C");
  expect_shape(D, C.rows(), B.cols(), "D");
  expect_finite(A, "A");
  expect_finite(B, "B");
  expect_finite(C, "C");
  expect_finite(D, "D");
  if (domain == TimeDomain::Discrete) {
    if (!sample_time || !(*sample_time > 0.0) || !std::isfinite(*sample_time))
      throw Error(ErrorCode::InvalidModel, "discrete model needs a positive sample time",
                  "sample_time");
  } else if (sample_time) {
    throw Error(ErrorCode::InvalidModel, "continuous model must not carry a sample time",
                "sample_time");
  }
}

void PlantSpec::validate() const {
  dynamics.validate();
  const auto n_x = dynamics.n_states();
  const auto n_u = dynamics.n_inputs();
  if (C_J.rows() != D_J.rows())
    throw Error(ErrorCode::DimensionMismatch, "C_J and D_J must have equal row counts", "C_J");
  expect_shape(C_J, C_J.rows(), n_x, "C_J");
  expect_shape(D_J, D_J.rows(), n_u, "D_J");
  expect_finite(C_J, "C_J");
  expect_finite(D_J, "D_J");
  if (dynamics.D.size() > 0 && dynamics.D.cwiseAbs().maxCoeff() != 0.0)
    throw Error(ErrorCode::InvalidModel, "plant feedthrough from u to y is not supported",
                "plant.D");
}

ControllerSpec ControllerSpec::static_gain(Matrix D_c) {
  const auto n_u = D_c.rows();
  const auto n_m = D_c.cols();
  return ControllerSpec{Matrix(0, 0), Matrix(0, n_m), Matrix(n_u, 0), std::move(D_c)};
}

void ControllerSpec::validate(Eigen::Index n_u, Eigen::Index n_m) const {
  const auto n_z = A_c.rows();
  expect_shape(A_c, n_z, n_z, "controller.A_c");
  expect_shape(B_c, n_z, n_m, "controller.B_c");
  expect_shape(C_c, n_u, n_z, "controller.C_c");
  expect_shape(D_c, n_u, n_m, "controller.D_c");
  expect_finite(A_c, "controller.A_c");
  expect_finite(B_c, "controller.B_c");
  expect_finite(C_c, "controller.C_c");
  expect_finite(D_c, "controller.D_c");
}

void DetectorSpec::validate(Eigen::Index n_u, Eigen::Index n_m) const {
  const auto n_s = A_e.rows();
  const auto n_r = C_e.rows();
  expect_shape(A_e, n_s, n_s, "detector.A_e");
  expect_shape(B_e, n_s, n_u, "detector.B_e");
  expect_shape(K_e, n_s, n_m, "detector.K_e");
  expect_shape(C_e, n_r, n_s, "detector.C_e");
  expect_shape(D_e, n_r, n_u, "detector.D_e");
  expect_shape(E_e, n_r, n_m, "detector.E_e");
  for (const auto* m : {&A_e, &B_e, &K_e, &C_e, &D_e, &E_e})
    expect_finite(*m, "detector");
  if (!(threshold > 0.0) || !std::isfinite(threshold))
    throw Error(ErrorCode::InvalidModel, "threshold must be positive", "detector.threshold");
}

namespace {
std::vector<bool> mask_from(const std::vector<int>& idx, int n, const char* what) {
  std::vector<bool> mask(static_cast<size_t>(n), false);
  for (int i : idx) {
    if (i < 0 || i >= n)
      throw Error(ErrorCode::DimensionMismatch,
                  "channel index " + std::to_string(i) + " out of range", what);
    mask[static_cast<size_t>(i)] = true;
  }
  return mask;
}

Matrix selector(const std::vector<bool>& mask, Eigen::Index n_a) {
  Matrix s = Matrix::Zero(static_cast<Eigen::Index>(mask.size()), n_a);
  Eigen::Index col = 0;
  for (size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) s(static_cast<Eigen::Index>(i), col++) = 1.0;
  return s;
}

Eigen::Index count(const std::vector<bool>& mask) {
  return static_cast<Eigen::Index>(std::count(mask.begin(), mask.end(), true));
}
}  // namespace

AttackChannels AttackChannels::actuators(std::vector<int> indices, int n_u, int n_m) {
  return {mask_from(indices, n_u, "attack.actuators"), std::vector<bool>(static_cast<size_t>(n_m))};
}

AttackChannels AttackChannels::sensors(std::vector<int> indices, int n_u, int n_m) {
  return {std::vector<bool>(static_cast<size_t>(n_u)), mask_from(indices, n_m, "attack.sensors")};
}

Eigen::Index AttackChannels::n_attacks() const { return count(actuator_mask) + count(sensor_mask); }

Matrix AttackChannels::B_a() const {
  Matrix full = selector(actuator_mask, n_attacks());
  // actuator columns come first; sensor attacks leave B_a zero
  return full;
}

Matrix AttackChannels::D_a() const {
  const auto n_a = n_attacks();
  Matrix s = Matrix::Zero(static_cast<Eigen::Index>(sensor_mask.size()), n_a);
  Eigen::Index col = count(actuator_mask);
  for (size_t i = 0; i < sensor_mask.size(); ++i)
    if (sensor_mask[i]) s(static_cast<Eigen::Index>(i), col++) = 1.0;
  return s;
}

void AttackChannels::validate(Eigen::Index n_u, Eigen::Index n_m) const {
  if (static_cast<Eigen::Index>(actuator_mask.size()) != n_u)
    throw Error(ErrorCode::DimensionMismatch, "actuator mask length must equal n_u",
                "attack.actuators");
  if (static_cast<Eigen::Index>(sensor_mask.size()) != n_m)
    throw Error(ErrorCode::DimensionMismatch, "sensor mask length must equal n_m",
                "attack.sensors");
  if (count(actuator_mask) > 0 && count(sensor_mask) > 0)
    throw Error(ErrorCode::InvalidModel,
                "the adversary attacks either actuators or sensors, not both", "attack");
  if (n_attacks() == 0)
    throw Error(ErrorCode::InvalidModel, "no attacked channel selected", "attack");
}

StateSpaceModel ClosedLoopRealization::performance_system() const {
  return StateSpaceModel{A_cl, B_cl, C_p, D_p, TimeDomain::Discrete, 1.0};
}

StateSpaceModel ClosedLoopRealization::residual_system() const {
  return StateSpaceModel{A_cl, B_cl, C_r, D_r, TimeDomain::Discrete, 1.0};
}

StateSpaceModel zoh_discretize(const StateSpaceModel& model, double ts) {
  model.validate();
  if (model.domain != TimeDomain::Continuous)
    throw Error(ErrorCode::InvalidModel, "zoh_discretize expects a continuous model", "domain");
  if (!(ts > 0.0) || !std::isfinite(ts))
    throw Error(ErrorCode::InvalidModel, "sampling time must be positive", "Ts");
  const auto n = model.n_states();
  const auto m = model.n_inputs();
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = model.A * ts;
  aug.topRightCorner(n, m) = model.B * ts;
  const Matrix e = aug.exp();
  StateSpaceModel out{e.topLeftCorner(n, n), e.topRightCorner(n, m), model.C, model.D,
                      TimeDomain::Discrete, ts};
  out.validate();
  return out;
}

PerformanceOutput lq_performance_output(const Matrix& Q, const Matrix& R,
                                        const SysTolerances& tol) {
  if (Q.rows() != Q.cols()) throw Error(ErrorCode::DimensionMismatch, "Q must be square", "Q");
  if (R.rows() != R.cols()) throw Error(ErrorCode::DimensionMismatch, "R must be square", "R");
  if (!linalg::all_finite(Q) || !linalg::all_finite(R))
    throw Error(ErrorCode::InvalidModel, "non-finite cost matrices", "Q");
  const double asym_q = (Q - Q.transpose()).cwiseAbs().maxCoeff();
  const double asym_r = (R - R.transpose()).cwiseAbs().maxCoeff();
  if (asym_q > tol.psd_tol * std::max(1.0, Q.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::NotPSD, "Q is not symmetric", "Q");
  if (asym_r > tol.psd_tol * std::max(1.0, R.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::NotPD, "R is not symmetric", "R");

  Matrix sq, sr;
  if (!linalg::sqrt_psd(Q, tol.psd_tol, sq))
    throw Error(ErrorCode::NotPSD, "Q has a negative eigenvalue", "Q");
  if (R.size() > 0 && linalg::min_eigenvalue_sym(R) <= 0.0)
    throw Error(ErrorCode::NotPD, "R is not positive definite", "R");
  linalg::sqrt_psd(R, 0.0, sr);

  const auto n_x = Q.rows();
  const auto n_u = R.rows();
  PerformanceOutput out{Matrix::Zero(n_x + n_u, n_x), Matrix::Zero(n_x + n_u, n_u)};
  out.C_J.topRows(n_x) = sq;
  out.D_J.bottomRows(n_u) = sr;
  return out;
}

bool is_schur_stable(const Matrix& A, double stability_tol) {
  return linalg::spectral_radius(A) <= 1.0 - stability_tol;
}

void check_realization(ClosedLoopRealization& r, StabilityPolicy policy,
                       const SysTolerances& tol) {
  const auto n_c = r.A_cl.rows();
  const auto n_a = r.B_cl.cols();
  expect_shape(r.A_cl, n_c, n_c, "A_cl");
  expect_shape(r.B_cl, n_c, n_a, "B_cl");
  expect_shape(r.C_p, r.C_p.rows(), n_c, "C_p");
  expect_shape(r.D_p, r.C_p.rows(), n_a, "D_p");
  expect_shape(r.C_r, r.C_r.rows(), n_c, "C_r");
  expect_shape(r.D_r, r.C_r.rows(), n_a, "D_r");
  for (const auto* m : {&r.A_cl, &r.B_cl, &r.C_p, &r.D_p, &r.C_r, &r.D_r})
    expect_finite(*m, "realization");
  if (n_a == 0) throw Error(ErrorCode::RankDeficientInput, "no attack input", "B_cl");
  if (linalg::numerical_rank(r.B_cl, tol.rank_tol) < n_a || r.B_cl.cwiseAbs().maxCoeff() == 0.0)
    throw Error(ErrorCode::RankDeficientInput, "B_cl must have full column rank", "B_cl");

  r.spectral_radius = linalg::spectral_radius(r.A_cl);
  r.schur_stable = r.spectral_radius <= 1.0 - tol.stability_tol;
  if (!r.schur_stable && policy == StabilityPolicy::Require)
    throw Error(ErrorCode::UnstableClosedLoop,
                "closed-loop spectral radius " + std::to_string(r.spectral_radius) +
                    " is not below 1",
                "A_cl");
}

ClosedLoopRealization make_realization(Matrix A_cl, Matrix B_cl, Matrix C_p, Matrix D_p,
                                       Matrix C_r, Matrix D_r, StabilityPolicy policy,
                                       const SysTolerances& tol) {
  ClosedLoopRealization r{std::move(A_cl), std::move(B_cl), std::move(C_p), std::move(D_p),
                          std::move(C_r),  std::move(D_r),  Vector(),     0.0,
                          true};
  check_realization(r, policy, tol);
  return r;
}

ClosedLoopRealization assemble_closed_loop(const PlantSpec& plant, const ControllerSpec& ctrl,
                                           const DetectorSpec& det, const AttackChannels& attack,
                                           StabilityPolicy policy, const SysTolerances& tol) {
  plant.validate();
  if (plant.dynamics.domain != TimeDomain::Discrete)
    throw Error(ErrorCode::InvalidModel, "closed-loop assembly needs a discrete plant",
                "plant");
  const auto& P = plant.dynamics;
  const auto n_x = P.n_states();
  const auto n_u = P.n_inputs();
  const auto n_m = P.n_outputs();
  ctrl.validate(n_u, n_m);
  det.validate(n_u, n_m);
  attack.validate(n_u, n_m);

  const auto n_z = ctrl.n_states();
  const auto n_s = det.n_states();
  const auto n_c = n_x + n_z + n_s;
  const auto n_a = attack.n_attacks();
  const auto n_p = plant.C_J.rows();
  const auto n_r = det.n_residuals();

  const Matrix B_a = attack.B_a();
  const Matrix D_a = attack.D_a();
  const Matrix& A = P.A;
  const Matrix& B = P.B;
  const Matrix& C = P.C;
  const Matrix obs_gain = det.B_e * ctrl.D_c + det.K_e;  // B_e D_c + K_e
  const Matrix res_gain = det.D_e * ctrl.D_c + det.E_e;  // D_e D_c + E_e

  ClosedLoopRealization r;
  r.A_cl = Matrix::Zero(n_c, n_c);
  r.A_cl.block(0, 0, n_x, n_x) = A + B * ctrl.D_c * C;
  r.A_cl.block(0, n_x, n_x, n_z) = B * ctrl.C_c;
  r.A_cl.block(n_x, 0, n_z, n_x) = ctrl.B_c * C;
  r.A_cl.block(n_x, n_x, n_z, n_z) = ctrl.A_c;
  r.A_cl.block(n_x + n_z, 0, n_s, n_x) = obs_gain * C;
  r.A_cl.block(n_x + n_z, n_x, n_s, n_z) = det.B_e * ctrl.C_c;
  r.A_cl.block(n_x + n_z, n_x + n_z, n_s, n_s) = det.A_e;

  r.B_cl = Matrix::Zero(n_c, n_a);
  r.B_cl.topRows(n_x) = B * B_a + B * ctrl.D_c * D_a;
  r.B_cl.middleRows(n_x, n_z) = ctrl.B_c * D_a;
  r.B_cl.bottomRows(n_s) = obs_gain * D_a;

  r.C_p = Matrix::Zero(n_p, n_c);
  r.C_p.leftCols(n_x) = plant.C_J + plant.D_J * ctrl.D_c * C;
  r.C_p.middleCols(n_x, n_z) = plant.D_J * ctrl.C_c;
  r.D_p = plant.D_J * (ctrl.D_c * D_a + B_a);

  // The detection threshold is normalized to 1 by scaling the residual.
  const double scale = 1.0 / std::sqrt(det.threshold);
  r.C_r = Matrix::Zero(n_r, n_c);
  r.C_r.leftCols(n_x) = scale * res_gain * C;
  r.C_r.middleCols(n_x, n_z) = scale * det.D_e * ctrl.C_c;
  r.C_r.rightCols(n_s) = scale * det.C_e;
  r.D_r = scale * res_gain * D_a;

  check_realization(r, policy, tol);
  return r;
}

}  // namespace oogrisk
