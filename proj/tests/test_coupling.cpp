#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pulseuq/network.hpp"
#include "pulseuq/solver/coupling.hpp"

using namespace pulseuq;
using namespace pulseuq::solver;

namespace {

constexpr double kRho = 1060.0;

VesselEnd make_end(double A0, double c0, double A = 0.0, double u = 0.0, double p0 = 0.0) {
  VesselEnd v;
  v.A0 = A0;
  v.beta = beta_from_c0(c0, A0, kRho);
  v.A = A > 0.0 ? A : A0;
  v.u = u;
  v.p0 = p0;
  return v;
}

}  // namespace

TEST_CASE("inlet coupling") {
  const auto rest = make_end(1e-4, 5.0);

  SECTION("target equal to the interior flow returns the interior state") {
    const auto r = inlet_upwind(rest, kRho, 0.0);
    REQUIRE(r.up.A == rest.A);
    REQUIRE(r.up.u == 0.0);
  }
  SECTION("flow step from rest satisfies A u = Q to 1e-10 relative") {
    for (double q : {1e-5, 8e-5, 5e-4}) {
      const auto r = inlet_upwind(rest, kRho, q);
      REQUIRE_THAT(r.up.A * r.up.u, Catch::Matchers::WithinRel(q, 1e-10));
      REQUIRE(r.up.A > 0.0);
    }
  }
  SECTION("physiological reverse flow converges with positive area") {
    const auto r = inlet_upwind(rest, kRho, -1e-4);
    REQUIRE(r.up.A > 0.0);
    REQUIRE_THAT(r.up.A * r.up.u, Catch::Matchers::WithinRel(-1e-4, 1e-10));
  }
}

TEST_CASE("Windkessel outlet coupling") {
  const double A0 = 1e-4, c0 = 5.0;
  const auto rest = make_end(A0, c0, 0.0, 0.0, /*p0=*/9000.0);
  WindkesselOutlet wk;
  wk.R2 = 1.5e9;
  wk.C = 1e-9;
  wk.p_v = 600.0;
  const double R1 = kRho * c0 / A0;

  SECTION("zero pressure difference and zero velocity is a fixed point") {
    // p(A_l) = p_C with u_l = 0 gives Q^u = 0 and a rest ghost
    const auto r = outlet_upwind(rest, kRho, wk, R1, /*p_C=*/9000.0);
    REQUIRE_THAT(r.up.A, Catch::Matchers::WithinRel(rest.A, 1e-14));
    REQUIRE_THAT(r.up.u, Catch::Matchers::WithinAbs(0.0, 1e-14));
    REQUIRE_THAT(r.q_up, Catch::Matchers::WithinAbs(0.0, 1e-16));
    REQUIRE_THAT(r.ghost_u, Catch::Matchers::WithinAbs(0.0, 1e-14));
    REQUIRE(r.ghost_A == rest.A);
    // and the capacitor only drains toward p_v
    REQUIRE_THAT(r.dpC_dt,
                 Catch::Matchers::WithinRel((wk.p_v - 9000.0) / (wk.R2 * wk.C), 1e-12));
  }

  SECTION("the returned area zeroes the coupling residual for randomized states") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      VesselEnd v = make_end(A0 * (0.5 + uni(rng)), 4.0 + 6.0 * uni(rng));
      v.A = v.A0 * (0.85 + 0.4 * uni(rng));
      v.u = -0.3 + 1.3 * uni(rng);
      v.p0 = 8000.0 + 3000.0 * uni(rng);
      const double p_C = v.p0 + 4000.0 * (uni(rng) - 0.2);
      const double r1 = kRho * std::sqrt(v.beta * std::sqrt(v.A0) / (2.0 * kRho)) / v.A0;
      const auto r = outlet_upwind(v, kRho, wk, r1, p_C);
      const double gamma = std::sqrt(v.beta / (2.0 * kRho));
      const double w_plus = v.u + 4.0 * gamma * std::pow(v.A, 0.25);
      const double residual =
          r1 * (w_plus * r.up.A - 4.0 * gamma * std::pow(r.up.A, 1.25)) -
          v.beta * (std::sqrt(r.up.A) - std::sqrt(v.A0)) - v.p0 + p_C;
      REQUIRE(std::abs(residual) / (v.beta * std::sqrt(v.A0)) < 1e-10);
      REQUIRE_THAT(r.ghost_u, Catch::Matchers::WithinRel(2.0 * r.up.u - v.u, 1e-12));
    }
  }
}

TEST_CASE("bifurcation coupling") {
  SECTION("identical vessels at rest stay at rest") {
    const auto p = make_end(3e-4, 5.0);
    const auto d = make_end(1.5e-4, 5.0);
    const auto r = bifurcation_upwind(p, d, d, kRho);
    REQUIRE_THAT(r.parent.A, Catch::Matchers::WithinRel(3e-4, 1e-13));
    REQUIRE_THAT(r.parent.u, Catch::Matchers::WithinAbs(0.0, 1e-13));
    REQUIRE_THAT(r.daughter1.A, Catch::Matchers::WithinRel(1.5e-4, 1e-13));
    REQUIRE(r.mass_defect < 1e-18);
  }

  SECTION("converged solutions conserve mass and total pressure tightly") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      auto p = make_end(2e-4 + 3e-4 * uni(rng), 4.0 + 3.0 * uni(rng), 0.0, 0.0, 9333.0);
      auto d1 = make_end(0.6e-4 + 2e-4 * uni(rng), 5.0 + 3.0 * uni(rng), 0.0, 0.0, 9333.0);
      auto d2 = make_end(0.6e-4 + 2e-4 * uni(rng), 5.0 + 3.0 * uni(rng), 0.0, 0.0, 9333.0);
      p.A = p.A0 * (0.9 + 0.3 * uni(rng));
      p.u = 1.2 * uni(rng);
      d1.A = d1.A0 * (0.9 + 0.3 * uni(rng));
      d1.u = 0.8 * uni(rng);
      d2.A = d2.A0 * (0.9 + 0.3 * uni(rng));
      d2.u = 0.8 * uni(rng);
      const auto r = bifurcation_upwind(p, d1, d2, kRho);

      const double q_p = r.parent.A * r.parent.u;
      REQUIRE(r.mass_defect <= 1e-12 * std::abs(q_p) + 1e-15);
      auto ptot = [&](const VesselEnd& v, const UpwindState& s) {
        return v.p0 + v.beta * (std::sqrt(s.A) - std::sqrt(v.A0)) + 0.5 * kRho * s.u * s.u;
      };
      const double scale = p.beta * std::sqrt(p.A0);
      REQUIRE(std::abs(ptot(p, r.parent) - ptot(d1, r.daughter1)) / scale < 1e-10);
      REQUIRE(std::abs(ptot(p, r.parent) - ptot(d2, r.daughter2)) / scale < 1e-10);
    }
  }

  SECTION("warm start reproduces the cold solve") {
    auto p = make_end(3e-4, 5.0);
    auto d1 = make_end(1.4e-4, 5.5);
    auto d2 = make_end(1.7e-4, 5.2);
    p.A = 1.05 * p.A0;
    p.u = 0.6;
    d1.A = 0.98 * d1.A0;
    d2.A = 1.02 * d2.A0;
    const auto cold = bifurcation_upwind(p, d1, d2, kRho);
    std::array<double, 6> warm{cold.parent.A, cold.parent.u, cold.daughter1.A,
                               cold.daughter1.u, cold.daughter2.A, cold.daughter2.u};
    const auto rewarmed = bifurcation_upwind(p, d1, d2, kRho, &warm);
    REQUIRE_THAT(rewarmed.parent.A, Catch::Matchers::WithinRel(cold.parent.A, 1e-12));
    REQUIRE(rewarmed.iterations <= cold.iterations);
  }
}
