#include "oogrisk/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oogrisk::linalg {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double spectral_radius(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double max_eigenvalue_sym(const Matrix& m) {
  if (m.size() == 0) return -std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double min_eigenvalue_sym(const Matrix& m) {
  if (m.size() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool sqrt_psd(const Matrix& m, double clip_tol, Matrix& out) {
  if (m.size() == 0) {
    out = m;
    return true;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  Vector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -clip_tol) return false;
    ev(i) = std::sqrt(std::max(ev(i), 0.0));
  }
  out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  out = symmetrize(out);
  return true;
}

Matrix block_diag(std::span<const Matrix> blocks) {
  Eigen::Index rows = 0, cols = 0;
  for (const auto& b : blocks) {
    rows += b.rows();
    cols += b.cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Eigen::Index r = 0, c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

Matrix vstack(std::span<const Matrix> blocks) {
  if (blocks.empty()) return {};
  const Eigen::Index cols = blocks.front().cols();
  Eigen::Index rows = 0;
  for (const auto& b : blocks) {
    if (b.cols() != cols) throw std::invalid_argument("vstack: column count mismatch");
    rows += b.rows();
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (const auto& b : blocks) {
    out.middleRows(r, b.rows()) = b;
    r += b.rows();
  }
  return out;
}

bool all_finite(const Matrix& m) { return m.size() == 0 || m.allFinite(); }

Eigen::Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_tol * s(0)) ++r;
  return r;
}

Matrix null_space(const Matrix& m, double rel_tol) {
  if (m.cols() == 0) return Matrix(0, 0);
  if (m.rows() == 0) return Matrix::Identity(m.cols(), m.cols());
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  Eigen::Index r = 0;
  if (s.size() > 0 && s(0) > 0.0)
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s(i) > rel_tol * s(0)) ++r;
  return svd.matrixV().rightCols(m.cols() - r);
}

Matrix discrete_lyapunov(const Matrix& a, const Matrix& q) {
  // W = sum_k A^k Q A^k^T, summed in doubling steps.
  Matrix w = q;
  Matrix ak = a;
  for (int it = 0; it < 200; ++it) {
    Matrix dw = ak * w * ak.transpose();
    w += dw;
    ak = ak * ak;
    if (dw.norm() <= 1e-17 * std::max(1.0, w.norm()) || ak.norm() == 0.0) break;
    if (!ak.allFinite()) throw std::domain_error("discrete_lyapunov: A is not Schur stable");
  }
  return symmetrize(w);
}

Matrix unit_circle_gramian(const Matrix& a, const Matrix& b, double margin) {
  const Eigen::Index n = a.rows();
  if (n == 0) return Matrix(0, 0);
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Matrix>(a, false).eigenvalues();
  bool stable = true;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = std::abs(ev(i));
    if (std::abs(m - 1.0) <= margin) throw std::domain_error("unit_circle_gramian: eigenvalue on the unit circle");
    stable = stable && m < 1.0;
  }
  if (stable) return discrete_lyapunov(a, b * b.transpose());

  // Spectral projector onto the stable part: the Cayley map (A - I)^-1 (A + I)
  // sends the open unit disk to the open left half plane.
  const Matrix I = Matrix::Identity(n, n);
  Matrix z = (a - I).partialPivLu().solve(a + I);
  for (int it = 0; it < 100; ++it) {
    Eigen::PartialPivLU<Matrix> lu(z);
    const double c = std::pow(std::abs(lu.determinant()), -1.0 / static_cast<double>(n));
    const Matrix next = 0.5 * ((std::isfinite(c) && c > 0.0 ? c : 1.0) * z + lu.inverse() / (std::isfinite(c) && c > 0.0 ? c : 1.0));
    const double change = (next - z).norm();
    z = next;
    if (change <= 1e-13 * z.norm()) break;
  }
  const Matrix ps = 0.5 * (I - z);
  const Matrix pu = I - ps;

  // Stable part contributes sum_k A^k Ps B B' Ps' A^k'; the antistable part
  // sum_k Au^-(k+1) Pu B B' Pu' Au^-(k+1)'. Cross terms integrate to zero.
  const Matrix bs = ps * b;
  const Matrix ws = discrete_lyapunov(a * ps, bs * bs.transpose());
  const Matrix ainv_u = (a + ps).partialPivLu().solve(pu);
  const Matrix bu = ainv_u * b;
  const Matrix wu = discrete_lyapunov(ainv_u, bu * bu.transpose());
  return symmetrize(ws + wu);
}

}  // namespace oogrisk::linalg
