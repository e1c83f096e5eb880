#pragma once

#include <cmath>
#include <string>

#include "pulseuq/common.hpp"

namespace pulseuq::solver {

/// Wave speed c(A) = sqrt(beta sqrt(A) / (2 rho)).
inline double wave_speed(double A, double beta, double rho) {
  return std::sqrt(beta * std::sqrt(A) / (2.0 * rho));
}

/// Riemann invariants W+- = u +- 4 (c - c0) (zero at rest).
inline double char_plus(double A, double u, double beta, double A0, double rho) {
  return u + 4.0 * (wave_speed(A, beta, rho) - wave_speed(A0, beta, rho));
}

inline double char_minus(double A, double u, double beta, double A0, double rho) {
  return u - 4.0 * (wave_speed(A, beta, rho) - wave_speed(A0, beta, rho));
}

struct UpwindState {
  double A = 0.0;
  double u = 0.0;
};

/// Physical flux of the (A, u) system:
///   F = [A u, u^2/2 + (p0 + beta (sqrt(A) - sqrt(A0))) / rho].
struct Flux {
  double mass = 0.0;
  double momentum = 0.0;
};

inline Flux physical_flux(double A, double u, double beta, double A0, double p0, double rho) {
  return {A * u,
          0.5 * u * u + (p0 + beta * (std::sqrt(A) - std::sqrt(A0))) / rho};
}

/// Roe-type linearized interface solve: characteristics of the quasilinear
/// matrix at the arithmetic-average state carry W+ from the left and W- from
/// the right onto a single upwinded state shared by both sides. Equal states
/// return themselves exactly. Requires a subcritical interface.
inline UpwindState roe_interface(double A_l, double u_l, double A_r, double u_r,
                                 double beta, double rho) {
  const double A_hat = 0.5 * (A_l + A_r);
  const double u_hat = 0.5 * (u_l + u_r);
  if (!(A_hat > 0.0) || !std::isfinite(A_hat) || !std::isfinite(u_hat))
    throw SolverError("roe_interface: hyperbolicity lost (non-positive average area)");
  const double c_hat = wave_speed(A_hat, beta, rho);
  if (!(std::abs(u_hat) < c_hat))
    throw SolverError("roe_interface: supercritical interface state (|u| >= c)");
  UpwindState up;
  up.A = A_hat + 0.5 * (A_hat / c_hat) * (u_l - u_r);
  up.u = u_hat + 0.5 * (c_hat / A_hat) * (A_l - A_r);
  if (!(up.A > 0.0))
    throw SolverError("roe_interface: upwinded area not positive");
  return up;
}

}  // namespace pulseuq::solver
