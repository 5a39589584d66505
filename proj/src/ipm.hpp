#pragma once

#include <string>
#include <vector>

#include "oogrisk/linalg.hpp"

namespace oogrisk::detail {

// max b'y  s.t.  S1 = C1 - sum_j y_j A1_j >= 0,  S2 = diag(gamma) >= 0
// with y = (gamma, svec P), C1 = -F0, A1_gamma_i = F_i, A1_P = L(E_kl),
// L(P) = AB' P AB - J P J', AB = [A B], J = [I; 0]. b = (-c, 0).
struct IpmData {
  Matrix F0;
  std::vector<Matrix> F;
  Matrix AB;  // r x m
  Vector c;
};

struct IpmOptions {
  double tol = 1e-8;
  int max_iters = 200;
  double gamma_cap = 1e9;  // applied to gamma .* gamma_to_orig and -pobj * obj_to_orig
  Vector gamma_to_orig;
  double obj_to_orig = 1.0;
  double init = 10.0;
};

struct IpmResult {
  enum class Status { Optimal, Unbounded, Trouble } status = Status::Trouble;
  Vector gamma;
  Matrix P;
  double primal_obj = 0.0, dual_obj = 0.0;
  double pinf = 0.0, dinf = 0.0, gap = 0.0;
  int iterations = 0;
  std::string message;
};

IpmResult run_ipm(const IpmData& d, const IpmOptions& opt);

}  // namespace oogrisk::detail
