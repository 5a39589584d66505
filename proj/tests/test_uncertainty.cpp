#include <doctest.h>

#include <cmath>

#include "oogrisk/error.hpp"
#include "support.hpp"

using namespace oogrisk;
using namespace oogrisk::test;

namespace {

UncertaintySpec box(std::vector<ParamRange> p) {
  UncertaintySpec u;
  u.params = std::move(p);
  u.finalize();
  return u;
}

double round4(double v) { return std::round(v * 1e4) / 1e4; }

}  // namespace

TEST_CASE("Hoeffding sample count") {
  CHECK(hoeffding_sample_count(0.1, 0.05) == 185);
  CHECK(hoeffding_sample_count(0.05, 0.01) == 1060);
  for (double e : {0.02, 0.07, 0.2, 0.5})
    for (double b : {0.001, 0.05, 0.3}) CHECK(hoeffding_sample_count(e, b) == hoeffding_loop(e, b));
  CHECK_THROWS_AS(hoeffding_sample_count(0.0, 0.05), Error);
  CHECK_THROWS_AS(hoeffding_sample_count(0.1, 1.0), Error);
}

TEST_CASE("a-posteriori violation level") {
  CHECK(round4(campi_epsilon(8, 1, 0.01)) == doctest::Approx(0.7141));
  CHECK(round4(campi_epsilon(15, 1, 0.01)) == doctest::Approx(0.5112));
  CHECK(round4(campi_epsilon(21, 1, 0.01)) == doctest::Approx(0.4142));
  for (long long n : {2LL, 5LL, 21LL, 100LL, 1000LL})
    for (long long k = 0; k < std::min<long long>(n, 6); ++k)
      CHECK(campi_epsilon(n, k, 0.01) == doctest::Approx(campi_bisection(n, k, 0.01)).epsilon(1e-9));
  CHECK(campi_epsilon(10, 10, 0.01) == 1.0);
  CHECK(campi_epsilon(21, 2, 0.01) > campi_epsilon(21, 1, 0.01));
  CHECK_THROWS_AS(campi_epsilon(10, 11, 0.01), Error);
  CHECK_THROWS_AS(campi_epsilon(10, 1, 1.0), Error);
}

TEST_CASE("sample count for a target violation level") {
  // Four-decimal values stand for everything that rounds to them.
  CHECK(min_samples_for_epsilon(0.7141 + 5e-5, 0.01) == 8);
  CHECK(min_samples_for_epsilon(0.5112 + 5e-5, 0.01) == 15);
  CHECK(min_samples_for_epsilon(0.4142 + 5e-5, 0.01) == 21);
  for (double t : {0.05, 0.1, 0.3, 0.6}) {
    const long long n = min_samples_for_epsilon(t, 0.01);
    CHECK(campi_bisection(n, 1, 0.01) <= t + 1e-12);
    if (n > 2) CHECK(campi_bisection(n - 1, 1, 0.01) > t);
  }
}

TEST_CASE("grid sampling") {
  const auto u = box({{"Th", 4.0, 6.0}});
  const auto g = sample_scenarios(u, 21, SamplingMethod::Grid);
  REQUIRE(g.count() == 21);
  for (size_t i = 0; i < g.count(); ++i) CHECK(g.deltas[i](0) == doctest::Approx(4.0 + 0.1 * i));
  CHECK(sample_scenarios(u, 1, SamplingMethod::Grid).deltas[0](0) == 5.0);

  const auto u2 = box({{"a", 0.0, 1.0}, {"b", -1.0, 1.0}});
  const auto g2 = sample_scenarios(u2, 9, SamplingMethod::Grid);
  REQUIRE(g2.count() == 9);
  CHECK(g2.deltas[1](0) == 0.0);
  CHECK(g2.deltas[1](1) == 0.0);
  CHECK(g2.deltas[3](0) == 0.5);
  try {
    sample_scenarios(u2, 5, SamplingMethod::Grid);
    FAIL("expected GridArityMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridArityMismatch);
  }
}

TEST_CASE("iid sampling is reproducible and order independent") {
  const auto u = box({{"a", 0.0, 1.0}, {"b", 10.0, 20.0}});
  const auto s1 = sample_scenarios(u, 50, SamplingMethod::IID, 42);
  const auto s2 = sample_scenarios(u, 50, SamplingMethod::IID, 42);
  const auto s3 = sample_scenarios(u, 50, SamplingMethod::IID, 43);
  const auto prefix = sample_scenarios(u, 10, SamplingMethod::IID, 42);
  bool differs = false;
  for (size_t i = 0; i < 50; ++i) {
    CHECK(s1.deltas[i] == s2.deltas[i]);
    CHECK(u.contains(s1.deltas[i]));
    differs = differs || s1.deltas[i] != s3.deltas[i];
    if (i < 10) CHECK(prefix.deltas[i] == s1.deltas[i]);
  }
  CHECK(differs);
  CHECK(s1.deltas[7](1) == doctest::Approx(10.0 + 10.0 * uniform01(42, 7 * 2 + 1)));

  double mean = 0.0;
  for (std::uint64_t i = 0; i < 20000; ++i) mean += uniform01(9, i);
  CHECK(mean / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("uncertainty box validation") {
  UncertaintySpec u;
  u.params = {{"a", 1.0, 0.0}};
  CHECK_THROWS_AS(u.finalize(), Error);
  GuaranteeParams g;
  g.lambda = 0.0;
  CHECK_THROWS_AS(g.validate(), Error);
}
