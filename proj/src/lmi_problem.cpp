#include <ostream>

#include "oogrisk/error.hpp"
#include "oogrisk/sdp.hpp"

namespace oogrisk {

Matrix LmiProblem::lyapunov_term(const Matrix& P) const {
  Matrix ab(p_dim, side());
  ab << A_bar, B_bar;
  Matrix out = ab.transpose() * P * ab;
  out.topLeftCorner(p_dim, p_dim) -= P;
  return linalg::symmetrize(out);
}

Matrix LmiProblem::constraint_matrix(const Vector& gamma, const Matrix& P) const {
  if (gamma.size() != n_gamma || P.rows() != p_dim || P.cols() != p_dim)
    throw Error(ErrorCode::DimensionMismatch, "gamma or P has the wrong size", "lmi");
  Matrix m = F0 + lyapunov_term(P);
  for (Eigen::Index i = 0; i < n_gamma; ++i) m += gamma(i) * F[static_cast<size_t>(i)];
  return m;
}

void LmiProblem::validate() const {
  const auto m = side();
  auto check = [&](const Matrix& x, Eigen::Index r, Eigen::Index c, const char* what) {
    if (x.rows() != r || x.cols() != c)
      throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has the wrong size", "lmi");
    if (!linalg::all_finite(x)) throw Error(ErrorCode::InvalidModel, "non-finite entries", what);
  };
  check(A_bar, p_dim, p_dim, "A_bar");
  check(B_bar, p_dim, n_a, "B_bar");
  check(F0, m, m, "F0");
  if (static_cast<Eigen::Index>(F.size()) != n_gamma || c.size() != n_gamma)
    throw Error(ErrorCode::DimensionMismatch, "one F_i and c_i per gamma", "lmi");
  for (const auto& f : F) check(f, m, m, "F_i");
  if (c.size() > 0 && c.minCoeff() < 0.0)
    throw Error(ErrorCode::InvalidModel, "objective coefficients must be nonnegative", "c");
}

LmiProblem build_single_oog_sdp(const ClosedLoopRealization& r) {
  return build_coupled_sdp(std::span<const ClosedLoopRealization>(&r, 1));
}

LmiProblem build_coupled_sdp(std::span<const ClosedLoopRealization> rs) {
  if (rs.empty()) throw Error(ErrorCode::InvalidArgument, "no scenarios", "scenarios");
  const Eigen::Index n_a = rs.front().n_attacks();
  Eigen::Index n_tot = 0;
  for (size_t i = 0; i < rs.size(); ++i) {
    const auto& r = rs[i];
    if (r.n_attacks() != n_a)
      throw Error(ErrorCode::MixedAttackDimensions,
                  "scenario " + std::to_string(i) + " has " + std::to_string(r.n_attacks()) +
                      " attack channels, expected " + std::to_string(n_a),
                  "scenarios[" + std::to_string(i) + "]");
    if (r.B_cl.rows() != r.n_states() || r.C_p.cols() != r.n_states() ||
        r.C_r.cols() != r.n_states() || r.D_p.cols() != n_a || r.D_r.cols() != n_a)
      throw Error(ErrorCode::DimensionMismatch, "inconsistent realization",
                  "scenarios[" + std::to_string(i) + "]");
    n_tot += r.n_states();
  }

  LmiProblem p;
  p.n_gamma = static_cast<Eigen::Index>(rs.size());
  p.p_dim = n_tot;
  p.n_a = n_a;
  p.A_bar = Matrix::Zero(n_tot, n_tot);
  p.B_bar = Matrix::Zero(n_tot, n_a);
  const Eigen::Index m = n_tot + n_a;
  p.F0 = Matrix::Zero(m, m);
  p.c = Vector::Ones(p.n_gamma);
  const double inv_n = 1.0 / static_cast<double>(rs.size());

  Eigen::Index off = 0;
  for (const auto& r : rs) {
    const Eigen::Index n = r.n_states();
    p.A_bar.block(off, off, n, n) = r.A_cl;
    p.B_bar.middleRows(off, n) = r.B_cl;

    Matrix rowp = Matrix::Zero(r.n_performance(), m);
    rowp.middleCols(off, n) = r.C_p;
    rowp.rightCols(n_a) = r.D_p;
    p.F0 += inv_n * (rowp.transpose() * rowp);

    Matrix rowr = Matrix::Zero(r.n_residuals(), m);
    rowr.middleCols(off, n) = r.C_r;
    rowr.rightCols(n_a) = r.D_r;
    p.F.push_back(-(rowr.transpose() * rowr));
    off += n;
  }
  return p;
}

void write_lmi_coo(const LmiProblem& p, std::ostream& os) {
  const auto prec = os.precision(17);
  os << "oogrisk-lmi 1\n";
  os << "n_gamma " << p.n_gamma << " p_dim " << p.p_dim << " n_a " << p.n_a << " side "
     << p.side() << "\n";
  os << "c";
  for (Eigen::Index i = 0; i < p.c.size(); ++i) os << ' ' << p.c(i);
  os << "\n";
  auto block = [&](const std::string& name, const Matrix& m, bool upper) {
    Eigen::Index nnz = 0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = upper ? i : 0; j < m.cols(); ++j)
        if (m(i, j) != 0.0) ++nnz;
    os << "block " << name << ' ' << m.rows() << ' ' << m.cols() << ' ' << nnz << "\n";
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = upper ? i : 0; j < m.cols(); ++j)
        if (m(i, j) != 0.0) os << i << ' ' << j << ' ' << m(i, j) << "\n";
  };
  block("A_bar", p.A_bar, false);
  block("B_bar", p.B_bar, false);
  block("F0", p.F0, true);
  for (size_t i = 0; i < p.F.size(); ++i) block("F" + std::to_string(i + 1), p.F[i], true);
  os.precision(prec);
}

}  // namespace oogrisk
