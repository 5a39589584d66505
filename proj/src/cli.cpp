#include "oogrisk/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "oogrisk/error.hpp"
#include "oogrisk/risk.hpp"

namespace oogrisk::cli {

namespace {

struct AssessArgs {
  std::string config;
  std::string mode;
  long long samples = 0;
  std::string method = "grid";
  std::uint64_t seed = 0;
  std::optional<double> beta;
  std::optional<double> lambda;
  std::optional<double> epsilon1;
  std::optional<double> beta1;
  std::string out;
  std::string format = "json";
  std::string threads;
  std::string residual;
  bool allow_unstable = false;
  bool timings = false;
  std::string dump_lmi;
};

struct BoundsArgs {
  std::optional<double> epsilon1;
  std::optional<double> beta1;
  std::optional<long long> table_n;
  std::optional<double> lambda;
  std::optional<double> target;
};

const char* remedy(ErrorCode c) {
  switch (c) {
    case ErrorCode::UnstableClosedLoop:
      return "set \"allow_unstable\": true in the config or pass --allow-unstable to proceed";
    case ErrorCode::GridArityMismatch:
      return "use a perfect power of the parameter count for --samples, or --method iid";
    case ErrorCode::InvalidGuaranteeParams:
      return "probabilities must lie strictly between 0 and 1";
    case ErrorCode::Io:
      return "check that the file exists and is readable";
    case ErrorCode::SyntaxError:
      return "fix the JSON or expression syntax at the reported position";
    case ErrorCode::UnknownParameter:
    case ErrorCode::UnboundIdentifier:
      return "declare every identifier under uncertainty.params";
    case ErrorCode::RankDeficientInput:
      return "attack channels must enter the closed loop independently";
    default:
      return nullptr;
  }
}

void report_error(const Error& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  if (const char* r = remedy(e.code())) err << "hint: " << r << "\n";
}

int resolve_threads(const std::string& flag) {
  std::string v = flag;
  if (v.empty()) {
    const char* env = std::getenv("OOG_RISK_THREADS");
    v = env ? env : "auto";
  }
  if (v == "auto") return 0;
  try {
    size_t used = 0;
    const int t = std::stoi(v, &used);
    if (used == v.size() && t >= 1) return t;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::InvalidArgument, "threads must be 'auto' or a positive integer, got '" + v + "'",
              "--threads");
}

std::string fixed(double v, int prec) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

std::string text_report(const RiskReport& r) {
  std::ostringstream os;
  os << "system: " << r.system << "  (residual " << r.residual_convention << ")\n";
  if (!r.assumption1_holds)
    os << "warning: closed loop not Schur stable for every scenario (max spectral radius "
       << fixed(r.max_spectral_radius, 4) << ")\n";
  os << "boundedness: " << to_string(r.boundedness) << "  " << r.boundedness_detail << "\n";
  os << "solver: " << r.solver_status << " after " << r.solver_iterations << " iterations\n\n";
  const std::string g = r.gamma_value                           ? fixed(*r.gamma_value, 2)
                        : r.boundedness == Boundedness::Unbounded ? "unbounded"
                                                                  : "not solved";
  if (r.mode == RiskMode::ExpectedLoss) {
    os << std::left << std::setw(6) << "N2" << std::setw(11) << "|supp(g)|" << std::setw(9)
       << "eps(s*)" << std::setw(12) << "gamma_RA" << "time(s)\n";
    os << std::setw(6) << r.n << std::setw(11) << r.support_count << std::setw(9)
       << (r.epsilon_posteriori ? fixed(*r.epsilon_posteriori, 4) : "-") << std::setw(12) << g
       << fixed(r.timings.total, 2) << "\n";
  } else {
    os << std::left << std::setw(6) << "N" << std::setw(8) << "beta" << std::setw(6) << "k"
       << std::setw(10) << "bounded" << std::setw(12) << "VaR" << "time(s)\n";
    os << std::setw(6) << r.n << std::setw(8) << r.beta << std::setw(6) << r.var_k
       << std::setw(10) << r.n_bounded << std::setw(12) << g << fixed(r.timings.total, 2) << "\n";
  }
  if (r.hoeffding_n1) os << "\nrecommended N1 (Hoeffding): " << *r.hoeffding_n1 << "\n";
  return os.str();
}

void dump_lmi(const std::string& path, const SystemSpec& spec, const ScenarioSet& sc,
              bool coupled, const RiskOptions& opt) {
  const DetectorSpec det = resolve_detector(spec);
  std::vector<ClosedLoopRealization> rs;
  for (const auto& d : sc.deltas) {
    rs.push_back(build_realization(spec, d, det, opt.sys));
    if (!coupled) break;
  }
  const LmiProblem p = coupled ? build_coupled_sdp(rs) : build_single_oog_sdp(rs.front());
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path, "--dump-lmi");
  write_lmi_coo(p, f);
}

int cmd_assess(const AssessArgs& a, std::ostream& out, std::ostream& err) {
  RiskMode mode;
  if (a.mode == "var") {
    mode = RiskMode::VaR;
    if (!a.beta) throw Error(ErrorCode::InvalidArgument, "var mode needs --beta", "--beta");
  } else {
    mode = RiskMode::ExpectedLoss;
    if (!a.lambda) throw Error(ErrorCode::InvalidArgument, "expected-loss mode needs --lambda", "--lambda");
  }
  if (a.samples < 1) throw Error(ErrorCode::InvalidArgument, "--samples must be at least 1", "--samples");
  if (a.epsilon1.has_value() != a.beta1.has_value())
    throw Error(ErrorCode::InvalidArgument, "--epsilon1 and --beta1 go together", "--epsilon1");

  RiskOptions opt;
  opt.threads = resolve_threads(a.threads);
  SystemSpec spec = load_config(a.config);
  if (a.allow_unstable) spec.allow_unstable = true;
  if (!a.residual.empty()) {
    if (!spec.observer)
      throw Error(ErrorCode::InvalidArgument, "--residual applies to observer configs only", "--residual");
    spec.observer->residual =
        a.residual == "innovation" ? ResidualConvention::Innovation : ResidualConvention::Literal;
  }
  const SamplingMethod method = a.method == "iid" ? SamplingMethod::IID : SamplingMethod::Grid;
  const ScenarioSet sc = sample_scenarios(spec.uncertainty, a.samples, method, a.seed);

  if (!a.dump_lmi.empty()) dump_lmi(a.dump_lmi, spec, sc, mode == RiskMode::ExpectedLoss, opt);

  RiskReport rep = mode == RiskMode::VaR ? var_assess(sc, spec, *a.beta, opt)
                                         : expected_loss_assess(sc, spec, *a.lambda, opt);
  if (a.epsilon1) rep.hoeffding_n1 = hoeffding_sample_count(*a.epsilon1, *a.beta1);

  const std::string body =
      a.format == "text" ? text_report(rep) : report_to_json(rep, a.timings);
  if (a.out.empty()) {
    out << body;
  } else {
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + a.out, "--out");
    f << body;
    if (!f) throw Error(ErrorCode::Io, "write failed for " + a.out, "--out");
  }
  if (rep.gamma_value) return kOk;
  if (rep.boundedness == Boundedness::Unbounded) return kUnbounded;
  err << "error: no risk value; solver status " << rep.solver_status << "\n";
  return kError;
}

int cmd_bounds(const BoundsArgs& a, std::ostream& out) {
  bool any = false;
  if (a.epsilon1.has_value() != a.beta1.has_value())
    throw Error(ErrorCode::InvalidArgument, "--epsilon1 and --beta1 go together", "--epsilon1");
  if (a.epsilon1) {
    out << "N1 = " << hoeffding_sample_count(*a.epsilon1, *a.beta1) << "  (epsilon1 = "
        << *a.epsilon1 << ", beta1 = " << *a.beta1 << ")\n";
    any = true;
  }
  if ((a.table_n || a.target) && !a.lambda)
    throw Error(ErrorCode::InvalidArgument, "--lambda is required", "--lambda");
  if (a.table_n) {
    const long long n = *a.table_n;
    out << "epsilon(k) for N2 = " << n << ", lambda = " << *a.lambda << "\n";
    out << std::left << std::setw(4) << "k" << "epsilon\n";
    for (long long k = 0; k <= std::min<long long>(n, 5); ++k)
      out << std::setw(4) << k << fixed(campi_epsilon(n, k, *a.lambda), 4) << "\n";
    any = true;
  }
  if (a.target) {
    out << "N2 = " << min_samples_for_epsilon(*a.target, *a.lambda) << "  (target epsilon = "
        << *a.target << ", lambda = " << *a.lambda << ")\n";
    any = true;
  }
  if (!any)
    throw Error(ErrorCode::InvalidArgument,
                "nothing to compute; pass --epsilon1/--beta1, --epsilon-table or --target-epsilon",
                "bounds");
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Risk of stealthy data-injection attacks on uncertain control loops", "oogrisk"};
  app.require_subcommand(1);

  AssessArgs aa;
  auto* assess = app.add_subcommand("assess", "Run a VaR or expected-loss assessment");
  assess->add_option("--config", aa.config, "System description (JSON)")->required();
  assess->add_option("--mode", aa.mode, "var | expected-loss")
      ->required()
      ->check(CLI::IsMember({"var", "expected-loss"}));
  assess->add_option("--samples,-N", aa.samples, "Number of scenarios")->required();
  assess->add_option("--method", aa.method, "grid | iid")->check(CLI::IsMember({"grid", "iid"}));
  assess->add_option("--seed", aa.seed, "Seed for iid sampling");
  assess->add_option("--beta", aa.beta, "VaR level in [0,1)");
  assess->add_option("--lambda", aa.lambda, "Confidence parameter in (0,1)");
  assess->add_option("--epsilon1", aa.epsilon1, "Accuracy for the N1 recommendation");
  assess->add_option("--beta1", aa.beta1, "Confidence for the N1 recommendation");
  assess->add_option("--out,-o", aa.out, "Write the report here instead of stdout");
  assess->add_option("--format", aa.format, "json | text")->check(CLI::IsMember({"json", "text"}));
  assess->add_option("--threads", aa.threads, "auto | k (default: $OOG_RISK_THREADS or auto)");
  assess->add_option("--residual", aa.residual, "Override the observer residual: literal | innovation")
      ->check(CLI::IsMember({"literal", "innovation"}));
  assess->add_flag("--allow-unstable", aa.allow_unstable, "Accept closed loops that are not Schur stable");
  assess->add_flag("--timings", aa.timings, "Include wall-clock timings in the JSON report");
  assess->add_option("--dump-lmi", aa.dump_lmi, "Write the LMI data in COO form");

  BoundsArgs ba;
  auto* bounds = app.add_subcommand("bounds", "Sample-size and violation-level calculator");
  bounds->add_option("--epsilon1", ba.epsilon1, "Hoeffding accuracy");
  bounds->add_option("--beta1", ba.beta1, "Hoeffding confidence");
  bounds->add_option("--epsilon-table", ba.table_n, "Print epsilon(k) for this N2");
  bounds->add_option("--lambda", ba.lambda, "Confidence parameter in (0,1)");
  bounds->add_option("--target-epsilon", ba.target, "Smallest N2 reaching this epsilon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*assess) return cmd_assess(aa, out, err);
    return cmd_bounds(ba, out);
  } catch (const Error& e) {
    report_error(e, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kError;
}

}  // namespace oogrisk::cli
