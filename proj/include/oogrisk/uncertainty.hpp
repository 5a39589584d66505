#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oogrisk/linalg.hpp"

namespace oogrisk {

/// One uncertain parameter, uniformly distributed on [low, high].
struct ParamRange {
  std::string name;
  double low = 0.0;
  double high = 0.0;
};

/// Box uncertainty set. `nominal` is the parameter vector regarded as the
/// zero-uncertainty point; it defaults to the box midpoint.
struct UncertaintySpec {
  std::vector<ParamRange> params;
  Vector nominal;

  size_t dim() const { return params.size(); }
  /// Index of `name` or -1.
  int index_of(const std::string& name) const;
  bool contains(const Vector& delta) const;
  /// Fills a missing nominal with midpoints and checks names/bounds.
  void finalize();
};

enum class SamplingMethod { Grid, IID };

struct ScenarioSet {
  std::vector<Vector> deltas;
  SamplingMethod method = SamplingMethod::Grid;
  std::uint64_t seed = 0;

  size_t count() const { return deltas.size(); }
};

struct GuaranteeParams {
  double epsilon1 = 0.1;
  double beta1 = 0.05;
  double lambda = 0.01;
  double beta = 0.0;

  void validate() const;
};

/// Smallest N1 with N1 >= ln(2/beta1) / (2 epsilon1^2), at least 1.
long long hoeffding_sample_count(double epsilon1, double beta1);

/// Violation level eps(k) solving C(N,k) (1-eps)^(N-k) = lambda/N; eps(N) = 1.
double campi_epsilon(long long n, long long k, double lambda);

/// Smallest N2 >= 2 with (lambda/N2^2)^(1/(N2-1)) >= 1 - target_epsilon.
long long min_samples_for_epsilon(double target_epsilon, double lambda);

/// Grid: lexicographic lattice with N^(1/dim) equally spaced points per axis,
/// endpoints included (a single point per axis sits at the midpoint).
/// IID: uniform draws, scenario i uses its own substream of `seed`.
ScenarioSet sample_scenarios(const UncertaintySpec& spec, long long n, SamplingMethod method,
                             std::uint64_t seed = 0);

/// SplitMix64 in counter mode: the uniform [0,1) value at position `counter`
/// of the stream defined by `seed`. Scenario i of a d-parameter set uses
/// counters i*d .. i*d+d-1, so scenarios can be drawn in any order.
double uniform01(std::uint64_t seed, std::uint64_t counter);

const char* to_string(SamplingMethod m);

}  // namespace oogrisk
