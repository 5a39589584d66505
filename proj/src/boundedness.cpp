#include <cmath>
#include <complex>
#include <sstream>

#include "oogrisk/error.hpp"
#include "oogrisk/risk.hpp"

namespace oogrisk {

const char* to_string(Boundedness b) {
  switch (b) {
    case Boundedness::BoundedByNoUnitCircleZeros:
      return "BoundedByNoUnitCircleZeros";
    case Boundedness::BoundedBySharedZeros:
      return "BoundedBySharedZeros";
    case Boundedness::Unbounded:
      return "Unbounded";
    case Boundedness::Inconclusive:
      return "Inconclusive";
  }
  return "?";
}

bool is_bounded(Boundedness b) {
  return b == Boundedness::BoundedByNoUnitCircleZeros || b == Boundedness::BoundedBySharedZeros;
}

namespace {

std::string fmt(Complex z) {
  std::ostringstream os;
  os.precision(6);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

ZeroSummary summarize(const ZeroSet& zs) {
  ZeroSummary s;
  for (const auto& z : zs.zeros)
    for (int k = 0; k < z.multiplicity; ++k) s.zeros.push_back(z.z);
  for (const auto& z : zs.on_unit_circle)
    for (int k = 0; k < z.multiplicity; ++k) s.on_unit_circle.push_back(z.z);
  return s;
}

// True when [C_p D_p] = K [C_r D_r] for some K: every residual zero is then a
// performance zero with the same direction.
bool performance_factors_through_residual(const Matrix& Wr, const Matrix& Wp) {
  if (Wp.size() == 0 || Wp.cwiseAbs().maxCoeff() == 0.0) return true;
  if (Wr.rows() == 0) return false;
  const Matrix Kt = Wr.transpose().completeOrthogonalDecomposition().solve(Wp.transpose());
  const double res = (Wp - Kt.transpose() * Wr).norm();
  return res <= 1e-10 * (1.0 + Wp.norm());
}

BoundednessDiagnosis diagnose(const Matrix& A, const Matrix& B, const Matrix& Cr,
                              const Matrix& Dr, const Matrix& Cp, const Matrix& Dp,
                              const RiskOptions& opt) {
  BoundednessDiagnosis d;
  Matrix Wr(Cr.rows(), Cr.cols() + Dr.cols()), Wp(Cp.rows(), Cp.cols() + Dp.cols());
  Wr << Cr, Dr;
  Wp << Cp, Dp;

  if (performance_factors_through_residual(Wr, Wp)) {
    d.verdict = Boundedness::BoundedBySharedZeros;
    d.detail = "performance output is a linear function of the residual output";
    return d;
  }

  ZeroSet zr;
  try {
    zr = invariant_zeros(A, B, Cr, Dr, opt.zeros);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegeneratePencil) throw;
    d.residual.degenerate = true;
    d.verdict = Boundedness::Inconclusive;
    d.detail = "residual pencil is degenerate";
    return d;
  }
  d.residual = summarize(zr);
  try {
    d.performance = summarize(invariant_zeros(A, B, Cp, Dp, opt.zeros));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegeneratePencil) throw;
    d.performance.degenerate = true;
  }

  if (zr.on_unit_circle.empty()) {
    for (const auto& z : zr.zeros) {
      if (std::abs(std::abs(z.z) - 1.0) <= 10.0 * opt.zeros.circle_tol) {
        d.verdict = Boundedness::Inconclusive;
        d.detail = "residual zero " + fmt(z.z) + " lies within tolerance of the unit circle";
        return d;
      }
    }
    d.verdict = Boundedness::BoundedByNoUnitCircleZeros;
    d.detail = "no residual zeros on the unit circle";
    return d;
  }

  Matrix Cs(Cr.rows() + Cp.rows(), Cr.cols()), Ds(Dr.rows() + Dp.rows(), Dr.cols());
  Cs << Cr, Cp;
  Ds << Dr, Dp;
  ZeroSet joint;
  try {
    joint = invariant_zeros(A, B, Cs, Ds, opt.zeros);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegeneratePencil) throw;
    d.verdict = Boundedness::Inconclusive;
    d.detail = "joint pencil is degenerate";
    return d;
  }

  for (const auto& z : zr.on_unit_circle) {
    const SystemZero* match = nullptr;
    for (const auto& j : joint.zeros) {
      if (std::abs(j.z - z.z) <= 10.0 * opt.zeros.cluster_tol * std::max(1.0, std::abs(z.z))) {
        match = &j;
        break;
      }
    }
    if (!match) {
      d.verdict = Boundedness::Unbounded;
      d.detail = "residual zero " + fmt(z.z) + " on the unit circle is not a performance zero";
      return d;
    }
    const double overlap = std::min(1.0, std::abs(z.input_direction.dot(match->input_direction)));
    const double angle = std::acos(overlap);
    if (angle > opt.dir_tol) {
      d.verdict = Boundedness::Unbounded;
      d.detail = "unit-circle zero " + fmt(z.z) + " has a different input direction in the performance channel";
      return d;
    }
    if (match->multiplicity < z.multiplicity) {
      d.verdict = Boundedness::Unbounded;
      d.detail = "unit-circle zero " + fmt(z.z) + " has lower multiplicity in the performance channel";
      return d;
    }
  }
  d.verdict = Boundedness::BoundedBySharedZeros;
  d.detail = "every unit-circle residual zero is shared by the performance channel";
  return d;
}

}  // namespace

BoundednessDiagnosis boundedness_single(const ClosedLoopRealization& r, const RiskOptions& opt) {
  return diagnose(r.A_cl, r.B_cl, r.C_r, r.D_r, r.C_p, r.D_p, opt);
}

BoundednessDiagnosis boundedness_coupled(std::span<const ClosedLoopRealization> rs,
                                         const RiskOptions& opt) {
  if (rs.empty()) throw Error(ErrorCode::InvalidArgument, "no scenarios", "scenarios");
  const Eigen::Index n_a = rs.front().n_attacks();
  std::vector<Matrix> A, B, Cr, Dr, Cp, Dp;
  for (size_t i = 0; i < rs.size(); ++i) {
    if (rs[i].n_attacks() != n_a)
      throw Error(ErrorCode::MixedAttackDimensions, "scenarios differ in attack dimension",
                  "scenarios[" + std::to_string(i) + "]");
    A.push_back(rs[i].A_cl);
    B.push_back(rs[i].B_cl);
    Cr.push_back(rs[i].C_r);
    Dr.push_back(rs[i].D_r);
    Cp.push_back(rs[i].C_p);
    Dp.push_back(rs[i].D_p);
  }
  return diagnose(linalg::block_diag(A), linalg::vstack(B), linalg::block_diag(Cr),
                  linalg::vstack(Dr), linalg::block_diag(Cp), linalg::vstack(Dp), opt);
}

}  // namespace oogrisk
