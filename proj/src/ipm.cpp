#include "ipm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace oogrisk::detail {

namespace {

class Operators {
 public:
  explicit Operators(const IpmData& d)
      : d_(d),
        m_(d.F0.rows()),
        r_(d.AB.rows()),
        ng_(static_cast<Eigen::Index>(d.F.size())),
        ny_(ng_ + r_ * (r_ + 1) / 2) {}

  Eigen::Index m() const { return m_; }
  Eigen::Index r() const { return r_; }
  Eigen::Index ng() const { return ng_; }
  Eigen::Index ny() const { return ny_; }

  Matrix unpack_p(const Vector& y) const {
    Matrix P(r_, r_);
    Eigen::Index t = ng_;
    for (Eigen::Index k = 0; k < r_; ++k)
      for (Eigen::Index l = k; l < r_; ++l) {
        P(k, l) = y(t);
        P(l, k) = y(t);
        ++t;
      }
    return P;
  }

  Matrix lyap(const Matrix& P) const {
    Matrix out = d_.AB.transpose() * P * d_.AB;
    out.topLeftCorner(r_, r_) -= P;
    return out;
  }

  // Block 1 of sum_j y_j A_j; block 2 is -gamma.
  Matrix apply1(const Vector& y) const {
    Matrix out = lyap(unpack_p(y));
    for (Eigen::Index i = 0; i < ng_; ++i) out += y(i) * d_.F[static_cast<size_t>(i)];
    return 0.5 * (out + out.transpose());
  }

  // (<A_j, G>)_j for G = (G1, diag(g2)).
  Vector adjoint(const Matrix& G1, const Vector& g2) const {
    Vector v(ny_);
    for (Eigen::Index i = 0; i < ng_; ++i)
      v(i) = d_.F[static_cast<size_t>(i)].cwiseProduct(G1).sum() - g2(i);
    Matrix H = d_.AB * G1 * d_.AB.transpose();
    H -= G1.topLeftCorner(r_, r_);
    H = linalg::symmetrize(H);
    Eigen::Index t = ng_;
    for (Eigen::Index k = 0; k < r_; ++k)
      for (Eigen::Index l = k; l < r_; ++l) v(t++) = (k == l) ? H(k, k) : 2.0 * H(k, l);
    return v;
  }

  Matrix basis1(Eigen::Index j) const {
    if (j < ng_) return d_.F[static_cast<size_t>(j)];
    Eigen::Index t = j - ng_;
    Eigen::Index k = 0;
    while (t >= r_ - k) {
      t -= r_ - k;
      ++k;
    }
    const Eigen::Index l = k + t;
    Matrix E = Matrix::Zero(r_, r_);
    E(k, l) = 1.0;
    E(l, k) = 1.0;
    return lyap(E);
  }

 private:
  const IpmData& d_;
  Eigen::Index m_, r_, ng_, ny_;
};

// Largest alpha in (0, 1] keeping X + alpha dX PSD given X = L L'.
double max_step(const Eigen::LLT<Matrix>& chol, const Matrix& dX) {
  if (dX.size() == 0) return 1.0;
  Matrix t = chol.matrixL().solve(dX);
  const Matrix u = chol.matrixL().solve(t.transpose());
  t = u.transpose();
  const double lmin = linalg::min_eigenvalue_sym(t);
  if (!std::isfinite(lmin)) return 0.0;
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

double max_step_vec(const Vector& x, const Vector& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (dx(i) < 0.0) a = std::min(a, -x(i) / dx(i));
  return a;
}

IpmResult run_ipm_raw(const IpmData& d, const IpmOptions& opt, IpmResult& best) {
  const Operators ops(d);
  const Eigen::Index m = ops.m();
  const Eigen::Index ng = ops.ng();
  const Eigen::Index ny = ops.ny();
  const double n_cone = static_cast<double>(m + ng);

  const Matrix C1 = -d.F0;
  Vector b = Vector::Zero(ny);
  b.head(ng) = -d.c;
  const double norm_b = b.norm();
  const double norm_c = C1.norm();

  Matrix X1 = opt.init * Matrix::Identity(m, m);
  Matrix S1 = opt.init * Matrix::Identity(m, m);
  Vector x2 = Vector::Constant(ng, opt.init);
  Vector s2 = Vector::Constant(ng, opt.init);
  Vector y = Vector::Zero(ny);

  IpmResult res;
  int stalled = 0;
  double progress_mark = std::numeric_limits<double>::infinity();
  int progress_it = 0;
  for (int it = 0; it <= opt.max_iters; ++it) {
    res.iterations = it;
    const Vector gamma = y.head(ng);

    const Vector rp = b - ops.adjoint(X1, x2);
    const Matrix Rd1 = C1 - S1 - ops.apply1(y);
    const Vector Rd2 = -s2 + gamma;

    const double pobj = C1.cwiseProduct(X1).sum();
    const double dobj = b.dot(y);
    const double xs = X1.cwiseProduct(S1).sum() + x2.dot(s2);
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    res.primal_obj = pobj;
    res.dual_obj = dobj;
    res.pinf = rp.norm() / (1.0 + norm_b);
    res.dinf = std::sqrt(Rd1.squaredNorm() + Rd2.squaredNorm()) / (1.0 + norm_c);
    res.gap = std::max(std::abs(pobj - dobj), std::abs(xs)) / denom;
    res.gamma = gamma;

    if (!X1.allFinite() || !S1.allFinite() || !y.allFinite()) {
      res.status = IpmResult::Status::Trouble;
      res.message = "non-finite iterate";
      return res;
    }
    if (res.pinf <= opt.tol && res.dinf <= opt.tol && res.gap <= opt.tol) {
      res.status = IpmResult::Status::Optimal;
      res.P = ops.unpack_p(y);
      return res;
    }
    const double merit = std::max({res.pinf, res.dinf, res.gap});
    if (merit < 0.5 * progress_mark) {
      progress_mark = merit;
      progress_it = it;
    }
    if (res.dinf <= 10.0 * opt.tol && res.gap <= 10.0 * opt.tol &&
        (best.P.size() == 0 || res.pinf < best.pinf)) {
      best = res;
      best.P = ops.unpack_p(y);
    }
    if (it - progress_it >= 20) {
      res.status = IpmResult::Status::Trouble;
      res.message = "no progress in 20 iterations";
      res.P = ops.unpack_p(y);
      return res;
    }
    for (Eigen::Index i = 0; i < ng; ++i) {
      const double g = gamma(i) * (opt.gamma_to_orig.size() ? opt.gamma_to_orig(i) : 1.0);
      if (g > opt.gamma_cap) {
        res.status = IpmResult::Status::Unbounded;
        res.message = "gamma exceeded the cap";
        res.P = ops.unpack_p(y);
        return res;
      }
    }
    if (res.pinf <= opt.tol && -pobj * opt.obj_to_orig > opt.gamma_cap) {
      res.status = IpmResult::Status::Unbounded;
      res.message = "primal objective diverges";
      res.P = ops.unpack_p(y);
      return res;
    }
    if (it == opt.max_iters) break;

    const double mu = xs / n_cone;
    Eigen::LLT<Matrix> cholX(X1), cholS(S1);
    if (cholX.info() != Eigen::Success || cholS.info() != Eigen::Success) {
      res.status = IpmResult::Status::Trouble;
      res.message = "iterate lost definiteness";
      res.P = ops.unpack_p(y);
      return res;
    }
    const Matrix S1inv = cholS.solve(Matrix::Identity(m, m));

    // Schur complement M_ij = <A_i, X A_j S^-1>.
    Matrix M(ny, ny);
    for (Eigen::Index j = 0; j < ny; ++j) {
      const Matrix G1 = X1 * ops.basis1(j) * S1inv;
      Vector g2 = Vector::Zero(ng);
      if (j < ng) g2(j) = -x2(j) / s2(j);
      M.col(j) = ops.adjoint(G1, g2);
    }
    M = linalg::symmetrize(M);
    Eigen::LLT<Matrix> cholM(M);
    Eigen::LDLT<Matrix> ldltM;
    const bool use_llt = cholM.info() == Eigen::Success;
    if (!use_llt) {
      ldltM.compute(M);
      if (ldltM.info() != Eigen::Success) {
        res.status = IpmResult::Status::Trouble;
        res.message = "Schur complement factorization failed";
        return res;
      }
    }
    auto schur_solve = [&](const Vector& rhs) -> Vector {
      return use_llt ? Vector(cholM.solve(rhs)) : Vector(ldltM.solve(rhs));
    };

    const Matrix XRdSi = X1 * Rd1 * S1inv;
    const Vector xRd2 = x2.cwiseProduct(Rd2).cwiseQuotient(s2);
    const Vector base_rhs = rp + ops.adjoint(XRdSi, xRd2);

    struct Dir {
      Vector dy;
      Matrix dX1, dS1;
      Vector dx2, ds2;
    };
    auto direction = [&](const Matrix& K1, const Vector& K2) {
      Dir dd;
      dd.dy = schur_solve(base_rhs - ops.adjoint(K1, K2));
      dd.dS1 = Rd1 - ops.apply1(dd.dy);
      dd.ds2 = Rd2 + dd.dy.head(ng);
      Matrix dX = K1 - X1 * dd.dS1 * S1inv;
      dd.dX1 = 0.5 * (dX + dX.transpose());
      dd.dx2 = K2 - x2.cwiseProduct(dd.ds2).cwiseQuotient(s2);
      return dd;
    };
    auto steps = [&](const Dir& dd, double& ap, double& ad) {
      ap = std::min(max_step(cholX, dd.dX1), max_step_vec(x2, dd.dx2));
      ad = std::min(max_step(cholS, dd.dS1), max_step_vec(s2, dd.ds2));
    };

    // Predictor.
    const Dir aff = direction(-X1, -x2);
    double ap = 0.0, ad = 0.0;
    steps(aff, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    const double mu_aff = ((X1 + ap * aff.dX1).cwiseProduct(S1 + ad * aff.dS1).sum() +
                           (x2 + ap * aff.dx2).dot(s2 + ad * aff.ds2)) /
                          n_cone;
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3.0);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector.
    const Matrix K1 = sigma * mu * S1inv - X1 - aff.dX1 * aff.dS1 * S1inv;
    const Vector K2 = (sigma * mu * s2.cwiseInverse()) - x2 -
                      aff.dx2.cwiseProduct(aff.ds2).cwiseQuotient(s2);
    const Dir dd = direction(K1, K2);
    if (!dd.dy.allFinite()) {
      res.status = IpmResult::Status::Trouble;
      res.message = "non-finite search direction";
      return res;
    }
    steps(dd, ap, ad);
    ap = std::min(1.0, 0.95 * ap);
    ad = std::min(1.0, 0.95 * ad);

    X1 += ap * dd.dX1;
    x2 += ap * dd.dx2;
    y += ad * dd.dy;
    S1 += ad * dd.dS1;
    s2 += ad * dd.ds2;
    X1 = linalg::symmetrize(X1);
    S1 = linalg::symmetrize(S1);

    stalled = (std::max(ap, ad) < 1e-10) ? stalled + 1 : 0;
    if (stalled >= 5) {
      res.status = IpmResult::Status::Trouble;
      res.message = "step length collapsed";
      res.P = ops.unpack_p(y);
      return res;
    }
  }
  res.status = IpmResult::Status::Trouble;
  res.message = "iteration limit reached";
  res.P = ops.unpack_p(y);
  return res;
}

}  // namespace

IpmResult run_ipm(const IpmData& d, const IpmOptions& opt) {
  IpmResult best;
  IpmResult res = run_ipm_raw(d, opt, best);
  if (res.status != IpmResult::Status::Trouble) return res;
  // The Schur complement loses accuracy near the optimum of degenerate
  // problems. Accept the best iterate when it is dual feasible and optimal to
  // near tolerance and only the primal residual has stalled.
  if (best.P.size() > 0 || best.gamma.size() > 0) {
    if (best.pinf <= std::sqrt(opt.tol)) {
      best.status = IpmResult::Status::Optimal;
      best.iterations = res.iterations;
      char buf[64];
      std::snprintf(buf, sizeof buf, "primal residual stalled at %.2e", best.pinf);
      best.message = buf;
      return best;
    }
  }
  return res;
}

}  // namespace oogrisk::detail
