#include <algorithm>
#include <cmath>
#include <random>

#include "oogrisk/error.hpp"
#include "oogrisk/sysmodel.hpp"

namespace oogrisk {

namespace {

CMatrix pencil_at(const Matrix& sys, Eigen::Index n, Complex z) {
  CMatrix s = sys.cast<Complex>();
  for (Eigen::Index i = 0; i < n; ++i) s(i, i) -= z;
  return s;
}

double sigma_min(const CMatrix& s) {
  Eigen::BDCSVD<CMatrix> svd(s);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

// Fixed-seed orthonormal p x m matrix used to square a tall pencil. Zeros of
// the tall pencil are zeros of the projected one; spurious extras are
// filtered afterwards by the rank test on the original pencil.
Matrix row_projection(Eigen::Index p, Eigen::Index m) {
  std::mt19937_64 gen(0x5eed2024ULL);
  std::normal_distribution<double> nd;
  Matrix g(p, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < p; ++i) g(i, j) = nd(gen);
  Eigen::HouseholderQR<Matrix> qr(g);
  return qr.householderQ() * Matrix::Identity(p, m);
}

struct Candidate {
  Complex z;
  CMatrix null_basis;  // (n+m) x k
};

}  // namespace

CMatrix transfer_matrix(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                        Complex z) {
  const auto n = A.rows();
  if (n == 0) return D.cast<Complex>();
  CMatrix zi_a = -A.cast<Complex>();
  zi_a.diagonal().array() += z;
  const CMatrix x = zi_a.partialPivLu().solve(B.cast<Complex>());
  return C.cast<Complex>() * x + D.cast<Complex>();
}

ZeroSet invariant_zeros(const Matrix& A, const Matrix& B, const Matrix& C, const Matrix& D,
                        const ZeroOptions& opt) {
  const auto n = A.rows();
  const auto m = B.cols();
  const auto p = C.rows();
  if (A.cols() != n || B.rows() != n || C.cols() != n || D.rows() != p || D.cols() != m)
    throw Error(ErrorCode::DimensionMismatch, "inconsistent system dimensions", "pencil");
  if (p < m)
    throw Error(ErrorCode::DegeneratePencil, "wide system: pencil loses rank for every z",
                "pencil");

  Matrix sys(n + p, n + m);
  sys << A, B, C, D;
  const double scale = 1.0 + sys.norm();

  // Normal rank: two generic points.
  for (Complex z0 : {Complex(0.3713, 0.9127), Complex(-1.618, 0.4142)}) {
    if (sigma_min(pencil_at(sys, n, z0)) <= opt.rank_tol * scale)
      throw Error(ErrorCode::DegeneratePencil, "pencil has deficient normal rank", "pencil");
  }

  ZeroSet out;
  if (n == 0) return out;

  Matrix sq(n + m, n + m);
  if (p == m) {
    sq = sys;
  } else {
    const Matrix q = row_projection(p, m);
    sq << A, B, q.transpose() * C, q.transpose() * D;
  }
  Matrix e = Matrix::Zero(n + m, n + m);
  e.topLeftCorner(n, n).setIdentity();

  Eigen::GeneralizedEigenSolver<Matrix> ges(sq, e, false);
  const auto alphas = ges.alphas();
  const auto betas = ges.betas();

  std::vector<Candidate> cands;
  for (Eigen::Index i = 0; i < alphas.size(); ++i) {
    if (std::abs(betas(i)) <= 1e-10 * std::abs(alphas(i)) || betas(i) == 0.0) continue;
    const Complex z = alphas(i) / betas(i);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) continue;
    if (std::abs(z) > 1e10 * scale) continue;
    cands.push_back({z, {}});
  }

  // Cluster nearby eigenvalues into one zero with multiplicity.
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.z.real() != b.z.real()) return a.z.real() < b.z.real();
    return a.z.imag() < b.z.imag();
  });
  std::vector<std::vector<Complex>> clusters;
  for (const auto& c : cands) {
    bool placed = false;
    for (auto& cl : clusters) {
      if (std::abs(cl.front() - c.z) <= opt.cluster_tol * std::max(1.0, std::abs(c.z))) {
        cl.push_back(c.z);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back({c.z});
  }

  for (const auto& cl : clusters) {
    Complex z(0.0, 0.0);
    for (auto v : cl) z += v;
    z /= static_cast<double>(cl.size());
    if (std::abs(z.imag()) <= 1e-12 * std::max(1.0, std::abs(z))) z = Complex(z.real(), 0.0);

    Eigen::BDCSVD<CMatrix> svd(pencil_at(sys, n, z), Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double tol = opt.rank_tol * scale;
    // columns n+m: singular values beyond the returned ones are structurally zero
    Eigen::Index k = (n + m) - sv.size();
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) <= tol) ++k;
    // A multiple zero computed to ~sqrt(eps) accuracy still shows a small gap.
    if (k == 0 && cl.size() > 1 && sv(sv.size() - 1) <= std::sqrt(opt.rank_tol) * scale) k = 1;
    if (k == 0) continue;

    const CMatrix nb = svd.matrixV().rightCols(k);
    const CMatrix in = nb.bottomRows(m);
    if (m == 0 || in.norm() <= 1e-6) {
      out.decoupling.push_back(z);
      continue;
    }
    Eigen::JacobiSVD<CMatrix> isvd(in, Eigen::ComputeThinU);
    CVector dir = isvd.matrixU().col(0);
    // Fix the phase so the largest component is real positive.
    Eigen::Index imax = 0;
    dir.cwiseAbs().maxCoeff(&imax);
    dir *= std::conj(dir(imax)) / std::abs(dir(imax));
    SystemZero sz{z, dir.normalized(), static_cast<int>(cl.size())};
    out.zeros.push_back(sz);
    if (std::abs(std::abs(z) - 1.0) <= opt.circle_tol) out.on_unit_circle.push_back(sz);
  }
  return out;
}

ZeroSet invariant_zeros(const StateSpaceModel& sys, const ZeroOptions& opt) {
  sys.validate();
  return invariant_zeros(sys.A, sys.B, sys.C, sys.D, opt);
}

}  // namespace oogrisk
