#include "oogrisk/risk.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "oogrisk/error.hpp"

namespace oogrisk {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int resolve_threads(int requested, size_t jobs) {
  int t = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  t = std::max(1, t);
  return static_cast<int>(std::min<size_t>(static_cast<size_t>(t), std::max<size_t>(1, jobs)));
}

// Runs fn(i) for i in [0, n) on `threads` workers. Results are written by
// index, and the first failure by index is rethrown, so the outcome does not
// depend on scheduling.
template <class Fn>
void parallel_for(size_t n, int threads, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  const int t = resolve_threads(threads, n);
  if (t <= 1) {
    for (size_t i = 0; i < n; ++i) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < t; ++w)
      pool.emplace_back([&] {
        for (size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string convention_of(const SystemSpec& spec) {
  return spec.observer ? to_string(spec.observer->residual) : "explicit";
}

void fill_common(RiskReport& rep, const ScenarioSet& sc, const SystemSpec& spec) {
  rep.system = spec.name;
  rep.residual_convention = convention_of(spec);
  rep.allow_unstable = spec.allow_unstable;
  for (const auto& p : spec.uncertainty.params) rep.params.push_back(p.name);
  rep.method = sc.method;
  rep.seed = sc.seed;
  rep.n = static_cast<long long>(sc.count());
  rep.deltas = sc.deltas;
}

void record_stability(RiskReport& rep, const std::vector<ClosedLoopRealization>& rs) {
  rep.assumption1_holds = true;
  rep.max_spectral_radius = 0.0;
  for (const auto& r : rs) {
    rep.assumption1_holds = rep.assumption1_holds && r.schur_stable;
    rep.max_spectral_radius = std::max(rep.max_spectral_radius, r.spectral_radius);
  }
}

std::vector<ClosedLoopRealization> build_all(const ScenarioSet& sc, const SystemSpec& spec,
                                             const RiskOptions& opt) {
  if (sc.count() == 0) throw Error(ErrorCode::InvalidArgument, "empty scenario set", "N");
  const DetectorSpec det = resolve_detector(spec);
  std::vector<ClosedLoopRealization> rs(sc.count());
  parallel_for(sc.count(), opt.threads, [&](size_t i) {
    rs[i] = build_realization(spec, sc.deltas[i], det, opt.sys);
  });
  return rs;
}

}  // namespace

const char* to_string(RiskMode m) { return m == RiskMode::VaR ? "var" : "expected-loss"; }

OogResult oog_single(const ClosedLoopRealization& r, const RiskOptions& opt) {
  OogResult out;
  auto t0 = Clock::now();
  out.evidence = boundedness_single(r, opt);
  out.boundedness = out.evidence.verdict;
  out.time_boundedness = seconds_since(t0);
  if (out.boundedness == Boundedness::Unbounded) return out;

  t0 = Clock::now();
  const LmiProblem p = build_single_oog_sdp(r);
  out.solver = solve(p, opt.solver);
  out.solved = true;
  switch (out.solver.status) {
    case SolveStatus::Optimal:
      out.gamma = std::max(0.0, out.solver.objective_value);
      break;
    case SolveStatus::ObjectiveUnbounded:
    case SolveStatus::Infeasible:
      break;
    case SolveStatus::NumericalTrouble: {
      const BisectionResult b = feasibility_bisection(p, 1.0, opt.solver);
      out.used_bisection = true;
      if (b.status == SolveStatus::Optimal) out.gamma = b.gamma;
      break;
    }
  }
  out.time_solve = seconds_since(t0);
  if (!out.gamma && is_bounded(out.boundedness)) {
    out.boundedness = Boundedness::Inconclusive;
    out.evidence.detail += "; solver reached gamma_cap although the zero test found a bound";
  }
  return out;
}

long long support_count(const Vector& gamma, double supp_tol) {
  const double scale = std::max(1.0, gamma.sum());
  long long k = 0;
  for (Eigen::Index i = 0; i < gamma.size(); ++i)
    if (gamma(i) > supp_tol * scale) ++k;
  return k;
}

long long var_rank(long long n, double beta) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "N must be positive", "N");
  if (!(beta >= 0.0 && beta < 1.0))
    throw Error(ErrorCode::InvalidGuaranteeParams, "beta must lie in [0,1)", "beta");
  const double x = static_cast<double>(n) * (1.0 - beta);
  auto k = static_cast<long long>(std::ceil(x - 1e-9 * std::max(1.0, x)));
  return std::clamp(k, 1LL, n);
}

VarOutcome var_from_gammas(const std::vector<std::optional<double>>& gammas, double beta) {
  VarOutcome out;
  const auto n = static_cast<long long>(gammas.size());
  out.k = var_rank(n, beta);
  std::vector<size_t> idx(gammas.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
    const auto& x = gammas[a];
    const auto& y = gammas[b];
    if (x && y) return *x < *y;
    return x.has_value() && !y.has_value();
  });
  for (const auto& g : gammas)
    if (g) ++out.n_bounded;
  if (out.k <= out.n_bounded) {
    const size_t i = idx[static_cast<size_t>(out.k - 1)];
    out.value = gammas[i];
    out.index = static_cast<long long>(i);
  }
  return out;
}

RiskReport var_assess(const ScenarioSet& scenarios, const SystemSpec& spec, double beta,
                      const RiskOptions& opt) {
  const auto t_total = Clock::now();
  RiskReport rep;
  rep.mode = RiskMode::VaR;
  rep.beta = beta;
  var_rank(std::max<long long>(1, static_cast<long long>(scenarios.count())), beta);
  fill_common(rep, scenarios, spec);

  auto t0 = Clock::now();
  const auto rs = build_all(scenarios, spec, opt);
  rep.timings.assembly = seconds_since(t0);
  record_stability(rep, rs);

  std::vector<OogResult> results(rs.size());
  parallel_for(rs.size(), opt.threads, [&](size_t i) { results[i] = oog_single(rs[i], opt); });

  std::vector<std::optional<double>> gammas;
  int counts[4] = {0, 0, 0, 0};
  for (size_t i = 0; i < results.size(); ++i) {
    const auto& res = results[i];
    ScenarioOutcome so;
    so.delta = scenarios.deltas[i];
    so.gamma = res.gamma;
    so.boundedness = res.boundedness;
    so.solver_status = res.solved ? to_string(res.solver.status) : "NotSolved";
    so.iterations = res.solver.iterations;
    so.used_bisection = res.used_bisection;
    rep.per_scenario.push_back(so);
    gammas.push_back(res.gamma);
    rep.timings.boundedness += res.time_boundedness;
    rep.timings.solve += res.time_solve;
    ++counts[static_cast<int>(res.boundedness)];
  }
  const VarOutcome v = var_from_gammas(gammas, beta);
  rep.gamma_value = v.value;
  rep.var_k = v.k;
  rep.n_bounded = v.n_bounded;
  rep.boundedness = v.value ? Boundedness::BoundedByNoUnitCircleZeros : Boundedness::Unbounded;
  if (v.value) {
    const auto& b = results[static_cast<size_t>(v.index)].boundedness;
    rep.boundedness = b == Boundedness::Inconclusive ? Boundedness::Inconclusive : b;
  }
  rep.boundedness_detail =
      std::to_string(v.n_bounded) + " of " + std::to_string(rep.n) + " scenarios bounded (" +
      std::to_string(counts[0]) + " no unit-circle zeros, " + std::to_string(counts[1]) +
      " shared zeros, " + std::to_string(counts[2]) + " unbounded, " + std::to_string(counts[3]) +
      " inconclusive); VaR needs " + std::to_string(v.k);
  if (v.index >= 0) {
    const auto& sr = results[static_cast<size_t>(v.index)].solver;
    rep.solver_status = results[static_cast<size_t>(v.index)].solved ? to_string(sr.status) : "NotSolved";
    rep.solver_iterations = sr.iterations;
    rep.max_constraint_eig = sr.max_constraint_eig;
    rep.relative_gap = sr.relative_gap;
  } else {
    rep.solver_status = "NotSolved";
  }
  rep.timings.total = seconds_since(t_total);
  return rep;
}

RiskReport expected_loss_assess(const ScenarioSet& scenarios, const SystemSpec& spec,
                                double lambda, const RiskOptions& opt) {
  const auto t_total = Clock::now();
  if (!(lambda > 0.0 && lambda < 1.0))
    throw Error(ErrorCode::InvalidGuaranteeParams, "lambda must lie in (0,1)", "lambda");
  RiskReport rep;
  rep.mode = RiskMode::ExpectedLoss;
  rep.lambda = lambda;
  rep.beta = 0.0;
  fill_common(rep, scenarios, spec);

  auto t0 = Clock::now();
  const auto rs = build_all(scenarios, spec, opt);
  rep.timings.assembly = seconds_since(t0);
  record_stability(rep, rs);

  t0 = Clock::now();
  const BoundednessDiagnosis diag = boundedness_coupled(rs, opt);
  rep.timings.boundedness = seconds_since(t0);
  rep.boundedness = diag.verdict;
  rep.boundedness_detail = diag.detail;
  if (diag.verdict == Boundedness::Unbounded) {
    rep.solver_status = "NotSolved";
    rep.timings.total = seconds_since(t_total);
    return rep;
  }

  t0 = Clock::now();
  const LmiProblem p = build_coupled_sdp(rs);
  const SolveResult sr = solve(p, opt.solver);
  rep.timings.solve = seconds_since(t0);
  rep.solver_status = to_string(sr.status);
  rep.solver_iterations = sr.iterations;
  rep.max_constraint_eig = sr.max_constraint_eig;
  rep.relative_gap = sr.relative_gap;

  if (sr.status == SolveStatus::Optimal) {
    rep.gamma_vector = sr.gamma.cwiseMax(0.0);
    rep.gamma_value = rep.gamma_vector.sum();
    rep.support_count = support_count(rep.gamma_vector, opt.supp_tol);
    rep.epsilon_posteriori = campi_epsilon(rep.n, rep.support_count, lambda);
    const Matrix& T = sr.reach_basis;
    if (T.cols() > 0) {
      const Matrix Pr = linalg::symmetrize(T.transpose() * sr.P * T);
      rep.p_min_eig = linalg::min_eigenvalue_sym(Pr);
      rep.p_max_eig = linalg::max_eigenvalue_sym(Pr);
    }
  } else if (sr.status == SolveStatus::ObjectiveUnbounded) {
    rep.boundedness = Boundedness::Unbounded;
    rep.boundedness_detail += "; solver reached gamma_cap";
  }
  rep.timings.total = seconds_since(t_total);
  return rep;
}

}  // namespace oogrisk
