#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "pulseuq/math/gauss_patterson.hpp"
#include "pulseuq/math/quadrature.hpp"

using namespace pulseuq;

namespace {

double monomial_integral(int k) { return k % 2 == 0 ? 2.0 / (k + 1) : 0.0; }

}  // namespace

TEST_CASE("Gauss-Legendre rules integrate monomials exactly") {
  for (int n : {1, 2, 3, 4, 6, 8, 12, 31, 96}) {
    const auto r = math::gauss_legendre(n);
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    REQUIRE(wsum == Catch::Approx(2.0).epsilon(1e-14));
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += r.weights[i] * std::pow(r.nodes[i], k);
      REQUIRE_THAT(acc, Catch::Matchers::WithinAbs(monomial_integral(k), 1e-13));
    }
  }
}

TEST_CASE("Gauss-Lobatto rules include endpoints and integrate to degree 2n-3") {
  for (int n : {2, 3, 4, 5, 7}) {
    const auto r = math::gauss_lobatto(n);
    REQUIRE(r.nodes.front() == -1.0);
    REQUIRE(r.nodes.back() == 1.0);
    for (int k = 0; k <= 2 * n - 3; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += r.weights[i] * std::pow(r.nodes[i], k);
      REQUIRE_THAT(acc, Catch::Matchers::WithinAbs(monomial_integral(k), 1e-13));
    }
  }
}

TEST_CASE("differentiation matrix is exact for polynomials and kills constants") {
  const auto lgl = math::gauss_lobatto(4);
  const auto D = math::differentiation_matrix(lgl.nodes);
  const int n = 4;
  // constants differentiate to (numerically) zero
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += D[i * n + j];
    REQUIRE_THAT(acc, Catch::Matchers::WithinAbs(0.0, 1e-13));
  }
  // derivative of x^2 is 2x
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += D[i * n + j] * lgl.nodes[j] * lgl.nodes[j];
    REQUIRE_THAT(acc, Catch::Matchers::WithinAbs(2.0 * lgl.nodes[i], 1e-13));
  }
}

TEST_CASE("Gauss-Patterson rules: nesting, normalization, exactness") {
  using namespace pulseuq::detail;
  for (int idx = 1; idx <= kGaussPattersonMaxIndex; ++idx) {
    const int m = gp_rule_size(idx);
    REQUIRE(m == (1 << idx) - 1);
    const double* w = gp_rule_weights(idx);
    double wsum = 0.0;
    for (int j = 0; j < m; ++j) wsum += w[j];
    REQUIRE_THAT(wsum, Catch::Matchers::WithinAbs(1.0, 1e-14));

    // probabilists' monomial moments: E[x^k] = 1/(k+1) for even k
    const int exact_deg = idx == 1 ? 1 : 3 * (1 << (idx - 1)) - 1;
    for (int k = 0; k <= exact_deg; ++k) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j) acc += w[j] * std::pow(kGaussPattersonNodes[j], k);
      const double ref = k % 2 == 0 ? 1.0 / (k + 1) : 0.0;
      REQUIRE_THAT(acc, Catch::Matchers::WithinAbs(ref, 5e-14));
    }
  }

  SECTION("the 3-point rule is the Gauss-Legendre rule, exact through degree 5") {
    REQUIRE_THAT(std::abs(kGaussPattersonNodes[1]),
                 Catch::Matchers::WithinAbs(std::sqrt(3.0 / 5.0), 1e-15));
    const double* w = gp_rule_weights(2);
    // degree 6 is the first miss
    double acc = 0.0;
    for (int j = 0; j < 3; ++j) acc += w[j] * std::pow(kGaussPattersonNodes[j], 6);
    REQUIRE(std::abs(acc - 1.0 / 7.0) > 1e-3);
  }
}
