#include "oogrisk/uncertainty.hpp"

#include <cmath>
#include <set>

#include "oogrisk/error.hpp"

namespace oogrisk {

namespace {

bool in_open_unit(double x) { return x > 0.0 && x < 1.0; }

std::uint64_t splitmix_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

int UncertaintySpec::index_of(const std::string& name) const {
  for (size_t i = 0; i < params.size(); ++i)
    if (params[i].name == name) return static_cast<int>(i);
  return -1;
}

bool UncertaintySpec::contains(const Vector& delta) const {
  if (static_cast<size_t>(delta.size()) != params.size()) return false;
  for (size_t i = 0; i < params.size(); ++i) {
    const double v = delta(static_cast<Eigen::Index>(i));
    if (!(v >= params[i].low && v <= params[i].high)) return false;
  }
  return true;
}

void UncertaintySpec::finalize() {
  std::set<std::string> seen;
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    const std::string path = "uncertainty.params[" + std::to_string(i) + "]";
    if (!seen.insert(p.name).second)
      throw Error(ErrorCode::InvalidModel, "duplicate parameter '" + p.name + "'", path);
    if (!std::isfinite(p.low) || !std::isfinite(p.high) || p.low > p.high)
      throw Error(ErrorCode::InvalidModel, "need finite low <= high", path);
  }
  if (nominal.size() == 0 && !params.empty()) {
    nominal.resize(static_cast<Eigen::Index>(params.size()));
    for (size_t i = 0; i < params.size(); ++i)
      nominal(static_cast<Eigen::Index>(i)) = 0.5 * (params[i].low + params[i].high);
  }
  if (!contains(nominal))
    throw Error(ErrorCode::ParameterOutOfRange, "nominal point lies outside the box",
                "uncertainty.nominal");
}

void GuaranteeParams::validate() const {
  if (!in_open_unit(epsilon1))
    throw Error(ErrorCode::InvalidGuaranteeParams, "epsilon1 must lie in (0,1)", "epsilon1");
  if (!in_open_unit(beta1))
    throw Error(ErrorCode::InvalidGuaranteeParams, "beta1 must lie in (0,1)", "beta1");
  if (!in_open_unit(lambda))
    throw Error(ErrorCode::InvalidGuaranteeParams, "lambda must lie in (0,1)", "lambda");
  if (!(beta >= 0.0 && beta < 1.0))
    throw Error(ErrorCode::InvalidGuaranteeParams, "beta must lie in [0,1)", "beta");
}

long long hoeffding_sample_count(double epsilon1, double beta1) {
  if (!in_open_unit(epsilon1))
    throw Error(ErrorCode::InvalidGuaranteeParams, "epsilon1 must lie in (0,1)", "epsilon1");
  if (!in_open_unit(beta1))
    throw Error(ErrorCode::InvalidGuaranteeParams, "beta1 must lie in (0,1)", "beta1");
  const double bound = std::log(2.0 / beta1) / (2.0 * epsilon1 * epsilon1);
  return std::max(1LL, static_cast<long long>(std::ceil(bound)));
}

double campi_epsilon(long long n, long long k, double lambda) {
  if (!in_open_unit(lambda))
    throw Error(ErrorCode::InvalidGuaranteeParams, "lambda must lie in (0,1)", "lambda");
  if (n < 1) throw Error(ErrorCode::InvalidSupport, "N must be positive", "N");
  if (k < 0 || k > n)
    throw Error(ErrorCode::InvalidSupport,
                "support size " + std::to_string(k) + " outside 0.." + std::to_string(n), "k");
  if (k == n) return 1.0;
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  const double log_binom = std::lgamma(nn + 1.0) - std::lgamma(kk + 1.0) - std::lgamma(nn - kk + 1.0);
  const double log_one_minus = (std::log(lambda) - std::log(nn) - log_binom) / (nn - kk);
  return -std::expm1(log_one_minus);
}

long long min_samples_for_epsilon(double target_epsilon, double lambda) {
  if (!in_open_unit(target_epsilon))
    throw Error(ErrorCode::InvalidGuaranteeParams, "target epsilon must lie in (0,1)",
                "target_epsilon");
  if (!in_open_unit(lambda))
    throw Error(ErrorCode::InvalidGuaranteeParams, "lambda must lie in (0,1)", "lambda");
  const double log_target = std::log1p(-target_epsilon);
  for (long long n = 2;; ++n) {
    const double nn = static_cast<double>(n);
    if ((std::log(lambda) - 2.0 * std::log(nn)) / (nn - 1.0) >= log_target) return n;
  }
}

double uniform01(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t x = splitmix_mix(seed + kGolden * (counter + 1));
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

ScenarioSet sample_scenarios(const UncertaintySpec& spec, long long n, SamplingMethod method,
                             std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "scenario count must be positive", "N");
  const auto dim = static_cast<Eigen::Index>(spec.dim());
  ScenarioSet out;
  out.method = method;
  out.seed = method == SamplingMethod::IID ? seed : 0;
  out.deltas.reserve(static_cast<size_t>(n));

  if (dim == 0) {
    out.deltas.assign(static_cast<size_t>(n), Vector());
    return out;
  }

  if (method == SamplingMethod::Grid) {
    const long long per_axis = std::llround(std::pow(static_cast<double>(n), 1.0 / dim));
    long long total = 1;
    for (Eigen::Index j = 0; j < dim; ++j) total *= per_axis;
    if (total != n)
      throw Error(ErrorCode::GridArityMismatch,
                  "grid needs N to be a perfect power of the parameter count (" +
                      std::to_string(dim) + ")",
                  "N");
    std::vector<long long> idx(static_cast<size_t>(dim), 0);
    for (long long s = 0; s < n; ++s) {
      Vector d(dim);
      for (Eigen::Index j = 0; j < dim; ++j) {
        const auto& p = spec.params[static_cast<size_t>(j)];
        const long long i = idx[static_cast<size_t>(j)];
        if (per_axis == 1)
          d(j) = 0.5 * (p.low + p.high);
        else if (i == per_axis - 1)
          d(j) = p.high;
        else
          d(j) = p.low + (p.high - p.low) * static_cast<double>(i) / static_cast<double>(per_axis - 1);
      }
      out.deltas.push_back(std::move(d));
      // lexicographic: last axis varies fastest
      for (Eigen::Index j = dim - 1; j >= 0; --j) {
        if (++idx[static_cast<size_t>(j)] < per_axis) break;
        idx[static_cast<size_t>(j)] = 0;
      }
    }
    return out;
  }

  for (long long s = 0; s < n; ++s) {
    Vector d(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      const auto& p = spec.params[static_cast<size_t>(j)];
      const auto pos = static_cast<std::uint64_t>(s) * static_cast<std::uint64_t>(dim) +
                       static_cast<std::uint64_t>(j);
      const double u = uniform01(seed, pos);
      d(j) = std::min(p.high, p.low + (p.high - p.low) * u);
    }
    out.deltas.push_back(std::move(d));
  }
  return out;
}

const char* to_string(SamplingMethod m) { return m == SamplingMethod::Grid ? "grid" : "iid"; }

}  // namespace oogrisk
