#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pulseuq/inflow.hpp"

using namespace pulseuq;

namespace {

/// Cycle mean by composite Simpson on 10^4 intervals.
double numeric_mean(const InflowParams& p) {
  const int n = 10000;
  const double h = p.period / n;
  double acc = q_inlet(0.0, p) + q_inlet(p.period, p);
  for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * q_inlet(k * h, p);
  return acc * h / 3.0 / p.period;
}

double numeric_min(const InflowParams& p) {
  double mn = 1e300;
  for (int k = 0; k <= 4000; ++k) mn = std::min(mn, q_inlet(k * p.period / 4000.0, p));
  return mn;
}

}  // namespace

TEST_CASE("normalization constants") {
  // n = 13: the mean-exact constant is the rational 14336/3003 (factorials),
  // while the Gamma-ratio prefactor sqrt(pi) G(8)/G(7) equals 7 sqrt(pi).
  REQUIRE_THAT(detail::mean_normalization_prefactor(13),
               Catch::Matchers::WithinRel(14336.0 / 3003.0, 1e-14));
  REQUIRE_THAT(detail::gamma_ratio_prefactor(13),
               Catch::Matchers::WithinRel(7.0 * std::sqrt(M_PI), 1e-14));
  // generic (even) n goes through lgamma; check against the odd-n exact path
  // via the recurrence Gamma(x+1) = x Gamma(x): prefactor(n)/prefactor(n-2) =
  // (n+1)/n * ... spot-check numerically instead at n = 13 +- 0.
  REQUIRE_THAT(detail::mean_normalization_prefactor(14),
               Catch::Matchers::WithinRel(
                   std::sqrt(M_PI) * std::exp(std::lgamma(8.5) - std::lgamma(8.0)), 1e-12));
}

TEST_CASE("solved phase reproduces mean and peak") {
  SECTION("nominal triplet") {
    const auto p = solve_inflow_params(0.86, 1.0e-4, 6.5e-4, 13);
    REQUIRE(p.phase > 0.0);
    REQUIRE(p.phase <= 0.5 * M_PI);
    REQUIRE_THAT(numeric_mean(p), Catch::Matchers::WithinRel(p.mean_flow, 1e-10));
    REQUIRE_THAT(q_inlet(p.peak_time, p), Catch::Matchers::WithinRel(6.5e-4, 1e-8));
    REQUIRE(p.peak_flow / p.mean_flow == Catch::Approx(6.5));
    REQUIRE(q_inlet(0.0, p) == 0.0);
    // periodic continuation
    REQUIRE_THAT(q_inlet(4.0 * p.period + 0.123, p),
                 Catch::Matchers::WithinRel(q_inlet(0.123, p), 1e-9));
  }

  SECTION("phase-aligned limit: Qmax at the attainable minimum gives phi = pi/2") {
    const double qbar = 1e-4;
    const double qmin = min_attainable_peak(qbar, 13);
    const auto p = solve_inflow_params(0.86, qbar, qmin, 13);
    REQUIRE_THAT(p.phase, Catch::Matchers::WithinAbs(0.5 * M_PI, 1e-6));
    REQUIRE_THAT(p.peak_time, Catch::Matchers::WithinRel(0.43, 1e-6));  // T/2
    REQUIRE_THAT(p.normalization * qbar, Catch::Matchers::WithinRel(qmin, 1e-9));
  }

  SECTION("100 randomized triplets within the campaign ranges") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const double s3 = std::sqrt(3.0);
    for (int k = 0; k < 100; ++k) {
      const double T = 0.86 * (1.0 + 0.1155 * s3 * uni(rng));
      const double qb = 1.0e-4 * (1.0 + 0.0577 * s3 * uni(rng));
      const double qm = 6.5e-4 * (1.0 + 0.0577 * s3 * uni(rng));
      const auto p = solve_inflow_params(T, qb, qm, 13);
      REQUIRE_THAT(numeric_mean(p), Catch::Matchers::WithinRel(qb, 1e-10));
      REQUIRE_THAT(q_inlet(p.peak_time, p), Catch::Matchers::WithinRel(qm, 1e-8));
    }
  }

  SECTION("infeasible peak reports the attainable bound") {
    try {
      solve_inflow_params(0.86, 1e-4, 1.01e-4, 13);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      REQUIRE_THAT(e.what(), Catch::Matchers::ContainsSubstring("attainable"));
    }
  }
}

TEST_CASE("reverse-flow monotonicity") {
  // fixed (T, Qbar): larger Qmax deepens the reverse lobe
  double prev = 0.0;
  bool first = true;
  for (double qm : {5.2e-4, 6.0e-4, 6.8e-4, 7.6e-4}) {
    const auto p = solve_inflow_params(0.86, 1e-4, qm, 13);
    const double mn = numeric_min(p);
    if (!first) REQUIRE(mn < prev);
    prev = mn;
    first = false;
  }
  // fixed (T, Qmax): larger Qbar reduces the reverse-flow magnitude
  first = true;
  for (double qb : {0.85e-4, 1.0e-4, 1.15e-4}) {
    const auto p = solve_inflow_params(0.86, qb, 6.5e-4, 13);
    const double mn = numeric_min(p);
    if (!first) REQUIRE(mn > prev);
    prev = mn;
    first = false;
  }
}

TEST_CASE("tabulated inflow wraps periodically and reports its mean") {
  const auto f = make_tabulated_inflow({0.0, 0.25, 0.5, 1.0}, {0.0, 2.0, 1.0, 0.0});
  REQUIRE(f.period == Catch::Approx(1.0));
  REQUIRE_THAT(f.flow(1.25), Catch::Matchers::WithinAbs(2.0, 1e-14));
  REQUIRE_THAT(f.flow(-0.75), Catch::Matchers::WithinAbs(2.0, 1e-14));
  // trapezoid: 0.25 + 0.375 + 0.25 = 0.875
  REQUIRE_THAT(f.mean, Catch::Matchers::WithinAbs(0.875, 1e-14));
}
