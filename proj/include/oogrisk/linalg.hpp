#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oogrisk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

namespace linalg {

Matrix symmetrize(const Matrix& m);

/// Largest |eigenvalue|. Empty matrices have spectral radius 0.
double spectral_radius(const Matrix& a);

/// Largest eigenvalue of the symmetric part of `m`.
double max_eigenvalue_sym(const Matrix& m);
double min_eigenvalue_sym(const Matrix& m);

/// Principal square root of a symmetric PSD matrix. Eigenvalues in
/// [-clip_tol, 0) are clipped to zero; anything below -clip_tol is rejected
/// by returning false.
bool sqrt_psd(const Matrix& m, double clip_tol, Matrix& out);

Matrix block_diag(std::span<const Matrix> blocks);
Matrix vstack(std::span<const Matrix> blocks);

bool all_finite(const Matrix& m);

/// Numerical rank from singular values, relative to the largest one.
Eigen::Index numerical_rank(const Matrix& m, double rel_tol);

/// Orthonormal basis of the null space of `m` (columns), rank decided with
/// `rel_tol` relative to the largest singular value.
Matrix null_space(const Matrix& m, double rel_tol);

/// Solution W of A W A^T - W + Q = 0 by squared Smith iteration. Requires
/// spectral_radius(A) < 1.
Matrix discrete_lyapunov(const Matrix& a, const Matrix& q);

/// (1/2pi) * integral over |z| = 1 of (zI - A)^-1 B B' (zI - A)^-* for A
/// without unit-circle eigenvalues; equals the reachability Gramian when A is
/// Schur stable. Throws std::domain_error when an eigenvalue lies within
/// `margin` of the unit circle.
Matrix unit_circle_gramian(const Matrix& a, const Matrix& b, double margin = 1e-6);

}  // namespace linalg
}  // namespace oogrisk
