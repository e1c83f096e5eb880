#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pulseuq/kl_field.hpp"
#include "pulseuq/network.hpp"

using namespace pulseuq;

namespace {

const std::string kDataDir = PULSEUQ_DATA_DIR;
constexpr double kAortaSpan = 0.70;

LinearProfile default_mu() { return LinearProfile({0.0, kAortaSpan}, {4.2, 6.2}); }
LinearProfile default_sigma() { return LinearProfile({0.0, kAortaSpan}, {0.45, 0.15}); }

}  // namespace

TEST_CASE("fully correlated limit: one dominant constant mode") {
  const double sigma = 0.3, L = kAortaSpan;
  const auto f = solve_kl(LinearProfile::constant(5.0), LinearProfile::constant(sigma), L,
                          1e3 * L, 3, 64);
  REQUIRE_THAT(f.eigenvalues[0], Catch::Matchers::WithinRel(sigma * sigma * L, 1e-4));
  REQUIRE(f.eigenvalues[1] < 1e-6 * f.eigenvalues[0]);
  const double r_const = 1.0 / std::sqrt(L);
  for (double x : {0.05, 0.3, 0.65})
    REQUIRE_THAT(std::abs(f.eigenfunction(0, x)), Catch::Matchers::WithinRel(r_const, 1e-4));
}

TEST_CASE("eigenpairs: ordering, orthonormality, Nystrom convergence") {
  const auto f = solve_kl(default_mu(), default_sigma(), kAortaSpan, kAortaSpan / 3.0, 5, 96);
  SECTION("nonincreasing positive eigenvalues") {
    for (int i = 0; i + 1 < 5; ++i) {
      REQUIRE(f.eigenvalues[i] > 0.0);
      REQUIRE(f.eigenvalues[i] >= f.eigenvalues[i + 1]);
    }
  }
  SECTION("continuous-L2 orthonormality on the quadrature") {
    for (int i = 0; i < 5; ++i)
      for (int j = i; j < 5; ++j) {
        double acc = 0.0;
        for (std::size_t q = 0; q < f.quad_x.size(); ++q)
          acc += f.quad_w[q] * f.eigenvectors[i][q] * f.eigenvectors[j][q];
        REQUIRE_THAT(acc, Catch::Matchers::WithinAbs(i == j ? 1.0 : 0.0, 1e-10));
      }
  }
  SECTION("doubling the quadrature changes the leading eigenvalues by < 1e-8") {
    const auto f64 = solve_kl(default_mu(), default_sigma(), kAortaSpan, kAortaSpan / 3.0, 3, 64);
    const auto f128 = solve_kl(default_mu(), default_sigma(), kAortaSpan, kAortaSpan / 3.0, 3, 128);
    for (int i = 0; i < 3; ++i)
      REQUIRE_THAT(f64.eigenvalues[i],
                   Catch::Matchers::WithinRel(f128.eigenvalues[i], 1e-8));
  }
  SECTION("three modes capture at least 95% of the integrated variance") {
    const double captured = f.eigenvalues[0] + f.eigenvalues[1] + f.eigenvalues[2];
    REQUIRE(captured / f.trace() >= 0.95);
  }
}

TEST_CASE("realizations") {
  const auto f = solve_kl(default_mu(), default_sigma(), kAortaSpan, kAortaSpan / 3.0, 3, 96);
  SECTION("xi = 0 recovers the mean profile exactly") {
    const double xi[3] = {0.0, 0.0, 0.0};
    for (double x : {0.0, 0.2, 0.55, kAortaSpan})
      REQUIRE_THAT(f.value(x, xi), Catch::Matchers::WithinRel(default_mu()(x), 1e-14));
  }
  SECTION("pointwise Monte Carlo variance matches the truncated kernel within 2%") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(-std::sqrt(3.0), std::sqrt(3.0));
    for (double x : {0.1, 0.35, 0.6}) {
      const int n = 100000;
      double scaled[3];
      for (int i = 0; i < 3; ++i)
        scaled[i] = std::sqrt(f.eigenvalues[i]) * f.eigenfunction(i, x);
      // sanity: the per-sample formula below is value(x, xi) - mu(x)
      const double xi_probe[3] = {0.4, -1.1, 0.8};
      REQUIRE_THAT(scaled[0] * 0.4 - scaled[1] * 1.1 + scaled[2] * 0.8,
                   Catch::Matchers::WithinRel(f.value(x, xi_probe) - default_mu()(x), 1e-12));
      double acc = 0.0, acc2 = 0.0;
      for (int k = 0; k < n; ++k) {
        double v = 0.0;
        for (int i = 0; i < 3; ++i) v += scaled[i] * uni(rng);
        acc += v;
        acc2 += v * v;
      }
      const double var_mc = acc2 / n - (acc / n) * (acc / n);
      REQUIRE_THAT(var_mc, Catch::Matchers::WithinRel(f.truncated_variance(x), 0.02));
    }
  }
  SECTION("uniform coordinates have zero mean, unit variance to 1e-3") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(-std::sqrt(3.0), std::sqrt(3.0));
    double acc = 0.0, acc2 = 0.0;
    const int n = 1000000;
    for (int k = 0; k < n; ++k) {
      const double v = uni(rng);
      acc += v;
      acc2 += v * v;
    }
    REQUIRE_THAT(acc / n, Catch::Matchers::WithinAbs(0.0, 1e-3));
    REQUIRE_THAT(acc2 / n, Catch::Matchers::WithinAbs(1.0, 1e-3));
  }
  SECTION("positivity is guarded") {
    // absurd std would allow negative c0 somewhere in the support
    const auto bad = solve_kl(LinearProfile::constant(1.0), LinearProfile::constant(3.0),
                              kAortaSpan, kAortaSpan / 3.0, 3, 64);
    REQUIRE(bad.min_possible_value() < 0.0);
  }
}

TEST_CASE("truncated covariance error decreases monotonically in n") {
  const auto full = solve_kl(default_mu(), default_sigma(), kAortaSpan, kAortaSpan / 3.0, 8, 96);
  // relative L2(DxD) error of the rank-n kernel against the target kernel
  auto error_at = [&](int n_modes) {
    double num = 0.0, den = 0.0;
    for (std::size_t a = 0; a < full.quad_x.size(); ++a)
      for (std::size_t b = 0; b < full.quad_x.size(); ++b) {
        const double target = full.kernel(full.quad_x[a], full.quad_x[b]);
        double approx = 0.0;
        for (int i = 0; i < n_modes; ++i)
          approx += full.eigenvalues[i] * full.eigenvectors[i][a] * full.eigenvectors[i][b];
        const double d = target - approx;
        const double w = full.quad_w[a] * full.quad_w[b];
        num += w * d * d;
        den += w * target * target;
      }
    return std::sqrt(num / den);
  };
  double prev = 1e300;
  for (int n = 1; n <= 6; ++n) {
    const double e = error_at(n);
    REQUIRE(e < prev);
    prev = e;
  }
  REQUIRE_THAT(error_at(8), Catch::Matchers::WithinAbs(0.0, 0.02));

  // KL optimality proxy: the integrated truncation variance trace - sum lambda
  // matches Monte Carlo on the residual modes (here via mode 4..8 energy).
  double lam3 = 0.0, lam8 = 0.0;
  for (int i = 0; i < 3; ++i) lam3 += full.eigenvalues[i];
  for (int i = 0; i < 8; ++i) lam8 += full.eigenvalues[i];
  REQUIRE(full.trace() - lam3 >= 0.0);
  REQUIRE(full.trace() - lam3 >= lam8 - lam3);
}

TEST_CASE("field application to the sample network") {
  const auto net = load_network(kDataDir + "/networks/sample55.json");
  const auto [offsets, span] = net.aorta_arclength();
  const auto f = solve_kl(default_mu(), default_sigma(), span, span / 3.0, 3, 96);

  SECTION("realized c0 is continuous across junctions to machine precision") {
    const double xi[3] = {0.9, -0.4, 1.2};
    const auto realized = apply_stiffness_field(net, f, xi);
    for (std::size_t k = 0; k + 1 < net.aorta_path.size(); ++k) {
      const auto& a = realized.segment(net.aorta_path[k]);
      const auto& b = realized.segment(net.aorta_path[k + 1]);
      // the shared arclength value is sampled once; only the beta <-> c0
      // round trip (a few ulp) separates the two sides
      REQUIRE_THAT(a.c0_at(a.length, net.fluid.rho),
                   Catch::Matchers::WithinRel(b.c0_at(0.0, net.fluid.rho), 1e-14));
    }
  }
  SECTION("non-aortic segments keep their stiffness") {
    const double xi[3] = {1.0, 1.0, -1.0};
    const auto realized = apply_stiffness_field(net, f, xi);
    const auto& before = net.segment(5);
    const auto& after = realized.segment(5);
    REQUIRE(before.beta(0.05) == after.beta(0.05));
  }
  SECTION("out-of-support coordinates are rejected") {
    const double xi[3] = {2.0, 0.0, 0.0};
    REQUIRE_THROWS_AS(apply_stiffness_field(net, f, xi), ValidationError);
  }
  SECTION("proximal (single-variable) degenerate field") {
    const auto pf = proximal_field(net, default_mu(), default_sigma());
    REQUIRE(pf.n_modes == 1);
    // value(x, xi) = mean + sigma * xi uniformly over the segment span
    const double span1 = net.segment(1).length;
    const double mu_avg = 4.2 + 0.5 * (6.2 - 4.2) * span1 / span;  // linear profile average
    const double xi[1] = {1.0};
    REQUIRE_THAT(pf.value(0.3 * span1, xi),
                 Catch::Matchers::WithinRel(mu_avg + pf.std_profile(0.0), 1e-9));
    const auto realized = apply_proximal_field(net, pf, 0.7);
    REQUIRE(realized.segment(1).beta.is_constant());
    REQUIRE(realized.segment(2).beta(0.0) == net.segment(2).beta(0.0));
  }
}
