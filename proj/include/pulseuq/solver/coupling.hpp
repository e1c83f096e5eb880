#pragma once

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "pulseuq/common.hpp"
#include "pulseuq/network.hpp"
#include "pulseuq/solver/riemann.hpp"

namespace pulseuq::solver {

struct NewtonOptions {
  double tolerance = 1e-10;  // on nondimensionalized residuals
  int max_iterations = 50;
};

namespace detail_newton {

// After reaching `tolerance`, keep iterating while the residual still drops,
// so downstream conservation audits see the quadratic-convergence floor.
inline constexpr double kPolishFloor = 1e-15;

}  // namespace detail_newton

/// Vessel end state plus the wall parameters at the coupling location.
struct VesselEnd {
  double A = 0.0;
  double u = 0.0;
  double beta = 0.0;
  double A0 = 0.0;
  double p0 = 0.0;
};

struct InletResult {
  UpwindState up;
  int iterations = 0;
};

/// Upwinded state at the inlet face: the prescribed flow rate A u = Q together
/// with the outgoing interior invariant W- = u - 4c. Newton from A = A_interior.
inline InletResult inlet_upwind(const VesselEnd& interior, double rho, double q_target,
                                const NewtonOptions& opt = {}) {
  if (!std::isfinite(q_target)) throw SolverError("inlet: non-finite target flow rate");
  const double gamma = std::sqrt(interior.beta / (2.0 * rho));
  const double w_minus = interior.u - 4.0 * gamma * std::pow(interior.A, 0.25);
  const double scale = interior.A0 * wave_speed(interior.A0, interior.beta, rho);

  double A = interior.A;
  double res = 1e300;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const double g = A * (w_minus + 4.0 * gamma * std::pow(A, 0.25)) - q_target;
    const double r = std::abs(g) / scale;
    if (r < detail_newton::kPolishFloor) { res = r; break; }
    if (r >= res && res < opt.tolerance) break;  // converged, no further progress
    res = std::min(res, r);
    const double dg = w_minus + 5.0 * gamma * std::pow(A, 0.25);
    double step = -g / dg;
    int halvings = 0;
    while (!(A + step > 0.0) && halvings++ < 64) step *= 0.5;
    if (!(A + step > 0.0)) throw SolverError("inlet: Newton drove the area negative");
    A += step;
  }
  const double g_final = A * (w_minus + 4.0 * gamma * std::pow(A, 0.25)) - q_target;
  if (!(std::abs(g_final) / scale < opt.tolerance) || !(A > 0.0))
    throw SolverError("inlet: Newton failed to converge to tolerance");
  InletResult out;
  out.up.A = A;
  out.up.u = w_minus + 4.0 * gamma * std::pow(A, 0.25);
  out.iterations = it;
  return out;
}

struct OutletResult {
  UpwindState up;       // state whose flux leaves the 1-D domain
  double ghost_A = 0.0; // virtual exterior state (A_r = A_l, u_r = 2 u^u - u_l)
  double ghost_u = 0.0;
  double q_up = 0.0;    // A^u u^u fed to the lumped model
  double dpC_dt = 0.0;
  int iterations = 0;
};

/// Windkessel coupling at a terminal: solve the scalar nonlinear equation for
/// the upwinded area,
///   R1 (u_l + 4 gamma A_l^(1/4)) A - 4 R1 gamma A^(5/4)
///     - beta (sqrt(A) - sqrt(A0)) - p0 + p_C = 0,
/// (residual nondimensionalized by beta sqrt(A0)), then u^u from the R1 law
/// and the rate of change of the capacitor pressure from the R2-C branch.
inline OutletResult outlet_upwind(const VesselEnd& v, double rho, const WindkesselOutlet& wk,
                                  double R1, double p_C, const NewtonOptions& opt = {}) {
  if (!(v.A > 0.0)) throw SolverError("outlet: non-positive interior area");
  const double gamma = std::sqrt(v.beta / (2.0 * rho));
  const double w_plus = v.u + 4.0 * gamma * std::pow(v.A, 0.25);
  const double scale = v.beta * std::sqrt(v.A0);

  auto residual = [&](double A) {
    return R1 * (w_plus * A - 4.0 * gamma * std::pow(A, 1.25)) -
           v.beta * (std::sqrt(A) - std::sqrt(v.A0)) - v.p0 + p_C;
  };

  double A = v.A;
  double res = 1e300;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const double g = residual(A);
    const double r = std::abs(g) / scale;
    if (r < detail_newton::kPolishFloor) { res = r; break; }
    if (r >= res && res < opt.tolerance) break;
    res = std::min(res, r);
    const double dg = R1 * (w_plus - 5.0 * gamma * std::pow(A, 0.25)) -
                      0.5 * v.beta / std::sqrt(A);
    double step = -g / dg;
    int halvings = 0;
    while (A + step <= 0.0 && halvings++ < 64) step *= 0.5;
    if (A + step <= 0.0) throw SolverError("outlet: Newton drove the area negative");
    A += step;
  }
  if (!(std::abs(residual(A)) / scale < opt.tolerance) || !(A > 0.0))
    throw SolverError("outlet: Newton failed to converge to tolerance");

  OutletResult out;
  out.up.A = A;
  out.up.u = w_plus - 4.0 * gamma * std::pow(A, 0.25);
  out.q_up = out.up.A * out.up.u;
  out.ghost_A = v.A;
  out.ghost_u = 2.0 * out.up.u - v.u;
  out.dpC_dt = (out.q_up + (wk.p_v - p_C) / wk.R2) / wk.C;
  out.iterations = it;
  return out;
}

struct BifurcationResult {
  UpwindState parent, daughter1, daughter2;
  double mass_defect = 0.0;          // |Q_p - Q_1 - Q_2| after convergence
  double scaled_residual = 0.0;      // max nondimensional residual
  int iterations = 0;
};

/// Bifurcation coupling: six unknowns (upwinded A, u of the parent outlet and
/// both daughter inlets) closed by three outgoing characteristic invariants,
/// conservation of mass and continuity of total pressure p + rho u^2 / 2.
/// Newton with analytic Jacobian, warm-started from `warm` when finite.
inline BifurcationResult bifurcation_upwind(const VesselEnd& p, const VesselEnd& d1,
                                            const VesselEnd& d2, double rho,
                                            std::array<double, 6>* warm = nullptr,
                                            const NewtonOptions& opt = {}) {
  const double g_p = std::sqrt(p.beta / (2.0 * rho));
  const double g_1 = std::sqrt(d1.beta / (2.0 * rho));
  const double g_2 = std::sqrt(d2.beta / (2.0 * rho));
  const double w_p = p.u + 4.0 * g_p * std::pow(p.A, 0.25);
  const double w_1 = d1.u - 4.0 * g_1 * std::pow(d1.A, 0.25);
  const double w_2 = d2.u - 4.0 * g_2 * std::pow(d2.A, 0.25);

  const double c0_p = wave_speed(p.A0, p.beta, rho);
  const double c0_1 = wave_speed(d1.A0, d1.beta, rho);
  const double c0_2 = wave_speed(d2.A0, d2.beta, rho);
  const double s_mass = p.A0 * c0_p;
  const double s_press = p.beta * std::sqrt(p.A0);

  Eigen::Matrix<double, 6, 1> X;
  if (warm && std::isfinite((*warm)[0]) && (*warm)[0] > 0.0) {
    for (int i = 0; i < 6; ++i) X(i) = (*warm)[i];
  } else {
    X << p.A, p.u, d1.A, d1.u, d2.A, d2.u;
  }

  auto pressure_total = [&](const VesselEnd& v, double A, double u) {
    return v.p0 + v.beta * (std::sqrt(A) - std::sqrt(v.A0)) + 0.5 * rho * u * u;
  };

  Eigen::Matrix<double, 6, 1> R;
  Eigen::Matrix<double, 6, 6> J;
  auto eval_residual = [&](const Eigen::Matrix<double, 6, 1>& x,
                           Eigen::Matrix<double, 6, 1>& r) {
    const double Ap = x(0), up = x(1), A1 = x(2), u1 = x(3), A2 = x(4), u2 = x(5);
    r(0) = (up + 4.0 * g_p * std::pow(Ap, 0.25) - w_p) / c0_p;
    r(1) = (u1 - 4.0 * g_1 * std::pow(A1, 0.25) - w_1) / c0_1;
    r(2) = (u2 - 4.0 * g_2 * std::pow(A2, 0.25) - w_2) / c0_2;
    r(3) = (Ap * up - A1 * u1 - A2 * u2) / s_mass;
    r(4) = (pressure_total(p, Ap, up) - pressure_total(d1, A1, u1)) / s_press;
    r(5) = (pressure_total(p, Ap, up) - pressure_total(d2, A2, u2)) / s_press;
  };

  double res = 1e300;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    for (int i = 0; i < 6; ++i)
      if (!(i % 2 == 1) && !(X(i) > 0.0))
        throw SolverError("bifurcation: Newton drove an area negative");
    eval_residual(X, R);
    const double r = R.cwiseAbs().maxCoeff();
    if (r < detail_newton::kPolishFloor) { res = r; break; }
    if (r >= res && res < opt.tolerance) break;
    res = std::min(res, r);

    const double Ap = X(0), up = X(1), A1 = X(2), u1 = X(3), A2 = X(4), u2 = X(5);
    J.setZero();
    J(0, 0) = g_p * std::pow(Ap, -0.75) / c0_p;
    J(0, 1) = 1.0 / c0_p;
    J(1, 2) = -g_1 * std::pow(A1, -0.75) / c0_1;
    J(1, 3) = 1.0 / c0_1;
    J(2, 4) = -g_2 * std::pow(A2, -0.75) / c0_2;
    J(2, 5) = 1.0 / c0_2;
    J(3, 0) = up / s_mass;
    J(3, 1) = Ap / s_mass;
    J(3, 2) = -u1 / s_mass;
    J(3, 3) = -A1 / s_mass;
    J(3, 4) = -u2 / s_mass;
    J(3, 5) = -A2 / s_mass;
    J(4, 0) = 0.5 * p.beta / std::sqrt(Ap) / s_press;
    J(4, 1) = rho * up / s_press;
    J(4, 2) = -0.5 * d1.beta / std::sqrt(A1) / s_press;
    J(4, 3) = -rho * u1 / s_press;
    J(5, 0) = 0.5 * p.beta / std::sqrt(Ap) / s_press;
    J(5, 1) = rho * up / s_press;
    J(5, 4) = -0.5 * d2.beta / std::sqrt(A2) / s_press;
    J(5, 5) = -rho * u2 / s_press;

    Eigen::Matrix<double, 6, 1> dx = J.partialPivLu().solve(-R);
    double damp = 1.0;
    for (int i : {0, 2, 4}) {
      int halvings = 0;
      while (!(X(i) + damp * dx(i) > 0.0) && halvings++ < 64) damp *= 0.5;
      if (!(X(i) + damp * dx(i) > 0.0))
        throw SolverError("bifurcation: Newton drove an area negative");
    }
    X += damp * dx;
  }

  eval_residual(X, R);
  const double final_res = R.cwiseAbs().maxCoeff();
  if (!(final_res < opt.tolerance))
    throw SolverError("bifurcation: Newton failed to converge to tolerance");

  if (warm)
    for (int i = 0; i < 6; ++i) (*warm)[i] = X(i);

  BifurcationResult out;
  out.parent = {X(0), X(1)};
  out.daughter1 = {X(2), X(3)};
  out.daughter2 = {X(4), X(5)};
  out.mass_defect = std::abs(X(0) * X(1) - X(2) * X(3) - X(4) * X(5));
  out.scaled_residual = final_res;
  out.iterations = it;
  return out;
}

}  // namespace pulseuq::solver
