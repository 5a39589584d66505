#include <cmath>
#include <limits>

#include "oogrisk/error.hpp"
#include "oogrisk/risk.hpp"

namespace oogrisk {

namespace {

// Block lower-triangular Toeplitz map a[0..T-1] -> y[0..T-1] with x[0] = 0.
Matrix lifted_output(const std::vector<Matrix>& markov, const Matrix& D, int T) {
  const Eigen::Index p = D.rows(), m = D.cols();
  Matrix H = Matrix::Zero(p * T, m * T);
  for (int k = 0; k < T; ++k) {
    H.block(p * k, m * k, p, m) = D;
    for (int j = 0; j < k; ++j) H.block(p * k, m * j, p, m) = markov[static_cast<size_t>(k - 1 - j)];
  }
  return H;
}

}  // namespace

double finite_horizon_oracle(const ClosedLoopRealization& r, int T) {
  const Eigen::Index n = r.n_states();
  const Eigen::Index m = r.n_attacks();
  if (T < n + 1)
    throw Error(ErrorCode::HorizonTooShort,
                "horizon " + std::to_string(T) + " must be at least n_c + 1 = " +
                    std::to_string(n + 1),
                "T");

  // A^k B for k = 0..T-1
  std::vector<Matrix> akb;
  akb.reserve(static_cast<size_t>(T));
  Matrix cur = r.B_cl;
  for (int k = 0; k < T; ++k) {
    akb.push_back(cur);
    cur = r.A_cl * cur;
  }
  std::vector<Matrix> mp, mr;
  for (int k = 0; k < T; ++k) {
    mp.push_back(r.C_p * akb[static_cast<size_t>(k)]);
    mr.push_back(r.C_r * akb[static_cast<size_t>(k)]);
  }
  const Matrix Hp = lifted_output(mp, r.D_p, T);
  const Matrix Hr = lifted_output(mr, r.D_r, T);

  // x[T] = sum_j A^{T-1-j} B a[j]
  Matrix R(n, m * T);
  for (int j = 0; j < T; ++j) R.middleCols(m * j, m) = akb[static_cast<size_t>(T - 1 - j)];
  const Matrix Z = linalg::null_space(R, 1e-13);
  if (Z.cols() == 0) return 0.0;

  const Matrix Gp = Hp * Z;
  const Matrix Gr = Hr * Z;
  const double gp_norm = Gp.norm();
  if (gp_norm == 0.0) return 0.0;

  Eigen::BDCSVD<Matrix> svd(Gr, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const Matrix& V = svd.matrixV();
  const double smax = s.size() > 0 ? s(0) : 0.0;
  const double cut = 1e-12 * std::max(smax, gp_norm);

  // Directions with no residual energy: any performance there means +inf.
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++kept;
  if (V.cols() > kept) {
    const Matrix blind = Gp * V.rightCols(V.cols() - kept);
    if (blind.norm() > 1e-9 * gp_norm) return std::numeric_limits<double>::infinity();
  }
  if (kept == 0) return 0.0;
  const Matrix W = Gp * V.leftCols(kept) * s.head(kept).cwiseInverse().asDiagonal();
  Eigen::BDCSVD<Matrix> ws(W);
  const double g = ws.singularValues()(0);
  return g * g;
}

}  // namespace oogrisk
