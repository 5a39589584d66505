#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "oogrisk/modelspec.hpp"
#include "oogrisk/sdp.hpp"
#include "oogrisk/sysmodel.hpp"
#include "oogrisk/uncertainty.hpp"

namespace oogrisk {

enum class Boundedness { BoundedByNoUnitCircleZeros, BoundedBySharedZeros, Unbounded, Inconclusive };
const char* to_string(Boundedness b);
bool is_bounded(Boundedness b);

struct ZeroSummary {
  std::vector<Complex> zeros;
  std::vector<Complex> on_unit_circle;
  bool degenerate = false;
};

struct BoundednessDiagnosis {
  Boundedness verdict = Boundedness::Inconclusive;
  ZeroSummary residual;     ///< zeros of (A, B, C_r, D_r)
  ZeroSummary performance;  ///< zeros of (A, B, C_p, D_p) when computed
  std::string detail;
};

struct RiskOptions {
  ToleranceSet solver;
  ZeroOptions zeros;
  SysTolerances sys;
  double dir_tol = 1e-6;
  double supp_tol = 1e-6;
  int threads = 1;  ///< 0 = hardware concurrency
};

struct OogResult {
  std::optional<double> gamma;  ///< empty = Unbounded
  Boundedness boundedness = Boundedness::Inconclusive;
  BoundednessDiagnosis evidence;
  SolveResult solver;
  bool solved = false;         ///< an SDP or bisection was run
  bool used_bisection = false;
  double time_boundedness = 0.0;
  double time_solve = 0.0;
};

BoundednessDiagnosis boundedness_single(const ClosedLoopRealization& r,
                                        const RiskOptions& opt = {});

/// Same test on the aggregate systems (blockdiag A, stacked B, blockdiag C,
/// stacked D) of all scenarios.
BoundednessDiagnosis boundedness_coupled(std::span<const ClosedLoopRealization> rs,
                                         const RiskOptions& opt = {});

/// Squared output-to-output gain of one realization.
OogResult oog_single(const ClosedLoopRealization& r, const RiskOptions& opt = {});

/// Worst ratio |y_p|^2 / |y_r|^2 over attacks of length T starting and ending
/// at x = 0. Returns +inf when some such attack is invisible to the residual.
double finite_horizon_oracle(const ClosedLoopRealization& r, int T);

/// Entries above supp_tol * max(1, sum(gamma)).
long long support_count(const Vector& gamma, double supp_tol = 1e-6);

struct VarOutcome {
  std::optional<double> value;  ///< empty = Unbounded
  long long k = 0;              ///< rank of the order statistic, ceil(N (1 - beta))
  long long n_bounded = 0;
  long long index = -1;         ///< scenario attaining the value
};

/// k-th smallest of the finite entries (empty = Unbounded, sorted last).
VarOutcome var_from_gammas(const std::vector<std::optional<double>>& gammas, double beta);

/// ceil(N (1 - beta)) with a guard against representation error in 1 - beta.
long long var_rank(long long n, double beta);

enum class RiskMode { VaR, ExpectedLoss };
const char* to_string(RiskMode m);

struct Timings {
  double assembly = 0.0;
  double boundedness = 0.0;
  double solve = 0.0;
  double total = 0.0;
};

struct ScenarioOutcome {
  Vector delta;
  std::optional<double> gamma;
  Boundedness boundedness = Boundedness::Inconclusive;
  std::string solver_status;
  int iterations = 0;
  bool used_bisection = false;
};

struct RiskReport {
  int schema = 1;
  RiskMode mode = RiskMode::ExpectedLoss;
  std::string system;
  std::string residual_convention;  ///< literal | innovation | explicit
  bool allow_unstable = false;
  bool assumption1_holds = true;
  double max_spectral_radius = 0.0;

  std::vector<std::string> params;
  SamplingMethod method = SamplingMethod::Grid;
  std::uint64_t seed = 0;
  long long n = 0;
  std::vector<Vector> deltas;

  double beta = 0.0;
  double lambda = 0.0;

  std::optional<double> gamma_value;  ///< VaR_beta or gamma_RA; empty = Unbounded
  Vector gamma_vector;                ///< expected-loss mode
  long long support_count = 0;
  std::optional<double> epsilon_posteriori;

  long long var_k = 0;
  long long n_bounded = 0;
  std::vector<ScenarioOutcome> per_scenario;  ///< VaR mode

  Boundedness boundedness = Boundedness::Inconclusive;
  std::string boundedness_detail;

  std::string solver_status;
  int solver_iterations = 0;
  double max_constraint_eig = 0.0;
  double relative_gap = 0.0;
  double p_min_eig = 0.0;
  double p_max_eig = 0.0;

  std::optional<long long> hoeffding_n1;
  Timings timings;
};

RiskReport var_assess(const ScenarioSet& scenarios, const SystemSpec& spec, double beta,
                      const RiskOptions& opt = {});

RiskReport expected_loss_assess(const ScenarioSet& scenarios, const SystemSpec& spec,
                                double lambda, const RiskOptions& opt = {});

/// JSON text with 17 significant digits per float. Timings are omitted unless
/// requested so that reports are reproducible byte for byte.
std::string report_to_json(const RiskReport& r, bool include_timings = false);
RiskReport report_from_json(const std::string& text);

}  // namespace oogrisk
