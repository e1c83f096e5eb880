#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pulseuq/common.hpp"
#include "pulseuq/math/quadrature.hpp"
#include "pulseuq/network.hpp"

namespace pulseuq {

/// Truncated Karhunen-Loeve representation of the aortic pulse-wave-velocity
/// field on the arclength interval [0, L]:
///
///   c0(x, xi) = mu(x) + sum_i sqrt(lambda_i) r_i(x) xi_i,
///
/// with xi_i independent uniform on [-sqrt(3), sqrt(3)] (zero mean, unit
/// variance). The eigenpairs solve the Fredholm problem for the covariance
/// kernel sigma(x1) sigma(x2) exp(-(x2-x1)^2 / (2 Cl^2)), discretized by
/// Nystrom collocation on an M-point Gauss-Legendre grid; eigenfunctions are
/// orthonormal in continuous L2 and extend off-grid by the Nystrom formula.
/// The sigma(x) amplitude lives inside the kernel, so it is carried by the
/// eigenfunctions themselves and the realized pointwise std approaches
/// sigma(x) as the truncation grows.
struct StiffnessField {
  double domain_length = 0.0;
  LinearProfile mean_profile;
  LinearProfile std_profile;
  double correlation_length = 0.0;
  int n_modes = 0;

  std::vector<double> quad_x, quad_w;                 // M-point grid on [0, L]
  std::vector<double> eigenvalues;                    // descending, > 0
  std::vector<std::vector<double>> eigenvectors;      // [mode][quad node], L2-normalized

  static double xi_support() { return std::sqrt(3.0); }

  double kernel(double x1, double x2) const {
    const double d = (x2 - x1) / correlation_length;
    return std_profile(x1) * std_profile(x2) * std::exp(-0.5 * d * d);
  }

  /// Nystrom extension of eigenfunction i to arbitrary x (exact at the nodes).
  double eigenfunction(int i, double x) const {
    double acc = 0.0;
    for (std::size_t q = 0; q < quad_x.size(); ++q)
      acc += kernel(x, quad_x[q]) * quad_w[q] * eigenvectors[i][q];
    return acc / eigenvalues[i];
  }

  double value(double x, std::span<const double> xi) const {
    double fluct = 0.0;
    for (int i = 0; i < n_modes; ++i)
      fluct += std::sqrt(eigenvalues[i]) * eigenfunction(i, x) * xi[i];
    return mean_profile(x) + fluct;
  }

  /// Variance of the truncated field at x: sum lambda_i r_i(x)^2 (the diagonal
  /// of the rank-n kernel, which approaches sigma(x)^2).
  double truncated_variance(double x) const {
    double acc = 0.0;
    for (int i = 0; i < n_modes; ++i) {
      const double r = eigenfunction(i, x);
      acc += eigenvalues[i] * r * r;
    }
    return acc;
  }

  /// Integrated variance of the target field, int sigma^2 dx (= kernel trace).
  double trace() const {
    double acc = 0.0;
    for (std::size_t q = 0; q < quad_x.size(); ++q) {
      const double s = std_profile(quad_x[q]);
      acc += quad_w[q] * s * s;
    }
    return acc;
  }

  /// Worst-case lower bound of c0 over the xi support (realizations are
  /// rejected individually as well; this gates construction).
  double min_possible_value(int n_check = 257) const {
    double worst = 1e300;
    for (int k = 0; k < n_check; ++k) {
      const double x = domain_length * k / (n_check - 1.0);
      double amp = 0.0;
      for (int i = 0; i < n_modes; ++i)
        amp += std::sqrt(eigenvalues[i]) * std::abs(eigenfunction(i, x));
      worst = std::min(worst, mean_profile(x) - xi_support() * amp);
    }
    return worst;
  }
};

/// Nystrom solve of the Fredholm eigenproblem; returns the n largest
/// eigenpairs with continuous-L2-normalized eigenfunctions.
inline StiffnessField solve_kl(const LinearProfile& mean_profile,
                               const LinearProfile& std_profile, double domain_length,
                               double correlation_length, int n_modes, int quadrature_size) {
  if (!(correlation_length > 0.0)) throw ValidationError("kl: correlation length > 0 required");
  if (!(domain_length > 0.0)) throw ValidationError("kl: domain length > 0 required");
  if (n_modes < 1) throw ValidationError("kl: n >= 1 modes required");
  if (quadrature_size < 4 * n_modes)
    throw ValidationError("kl: quadrature size M >= 4n required");

  StiffnessField f;
  f.domain_length = domain_length;
  f.mean_profile = mean_profile;
  f.std_profile = std_profile;
  f.correlation_length = correlation_length;
  f.n_modes = n_modes;

  const auto rule = math::gauss_legendre(quadrature_size);
  f.quad_x.resize(quadrature_size);
  f.quad_w.resize(quadrature_size);
  for (int q = 0; q < quadrature_size; ++q) {
    f.quad_x[q] = 0.5 * domain_length * (rule.nodes[q] + 1.0);
    f.quad_w[q] = 0.5 * domain_length * rule.weights[q];
  }

  // Symmetrized Nystrom matrix B = W^(1/2) K W^(1/2)
  Eigen::MatrixXd B(quadrature_size, quadrature_size);
  for (int i = 0; i < quadrature_size; ++i)
    for (int j = 0; j <= i; ++j) {
      const double v = std::sqrt(f.quad_w[i] * f.quad_w[j]) * f.kernel(f.quad_x[i], f.quad_x[j]);
      B(i, j) = v;
      B(j, i) = v;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(B);
  if (eig.info() != Eigen::Success) throw SolverError("kl: eigensolve failed to converge");

  // Eigen returns ascending order; take the top n.
  for (int k = 0; k < n_modes; ++k) {
    const int col = quadrature_size - 1 - k;
    const double lam = eig.eigenvalues()(col);
    if (!(lam > 0.0))
      throw ValidationError("kl: requested mode " + std::to_string(k + 1) +
                            " is not numerically resolvable (eigenvalue <= 0)");
    f.eigenvalues.push_back(lam);
    std::vector<double> r(quadrature_size);
    for (int q = 0; q < quadrature_size; ++q)
      r[q] = eig.eigenvectors()(q, col) / std::sqrt(f.quad_w[q]);
    // Fix an orientation so results are reproducible across solvers.
    double skew = 0.0;
    for (int q = 0; q < quadrature_size; ++q) skew += f.quad_w[q] * r[q] * (q + 1.0);
    if (skew < 0.0)
      for (auto& v : r) v = -v;
    f.eigenvectors.push_back(std::move(r));
  }
  return f;
}

/// Map KL coordinates to per-segment beta profiles along the aorta path.
/// Sampling includes both segment endpoints evaluated at the shared global
/// arclength, so realizations are continuous across junctions by construction.
inline NetworkTopology apply_stiffness_field(const NetworkTopology& net,
                                             const StiffnessField& field,
                                             std::span<const double> xi,
                                             int samples_per_cell = 8) {
  if (static_cast<int>(xi.size()) != field.n_modes)
    throw ConfigError("stiffness field: xi has wrong dimension");
  for (double v : xi)
    if (std::abs(v) > StiffnessField::xi_support() * (1.0 + 1e-9))
      throw ValidationError("stiffness field: xi outside the uniform support");

  NetworkTopology out = net;
  const auto [offsets, total] = net.aorta_arclength();
  if (std::abs(total - field.domain_length) > 1e-9 * std::max(1.0, total))
    throw ConfigError("stiffness field domain length does not match the aorta path span");

  for (std::size_t k = 0; k < net.aorta_path.size(); ++k) {
    auto& seg = out.segment(net.aorta_path[k]);
    const int n_samples = std::max(9, samples_per_cell * seg.cells + 1);
    std::vector<double> xs(n_samples), bs(n_samples);
    for (int s = 0; s < n_samples; ++s) {
      const double xl = seg.length * s / (n_samples - 1.0);
      const double c0 = field.value(offsets[k] + xl, xi);
      if (!(c0 > 0.0))
        throw ValidationError("stiffness realization produced non-positive c0 = " +
                              std::to_string(c0) + " on segment " +
                              std::to_string(seg.id));
      xs[s] = xl;
      bs[s] = beta_from_c0(c0, seg.reference_area, net.fluid.rho);
    }
    seg.beta = LinearProfile(std::move(xs), std::move(bs));
  }
  return out;
}

/// Degenerate single-mode field for the "proximal" uncertainty case: one
/// uniform variable scales c0 of the first aorta segment, with mean and std
/// equal to the field's profile statistics averaged over that segment's span.
inline StiffnessField proximal_field(const NetworkTopology& net,
                                     const LinearProfile& mean_profile,
                                     const LinearProfile& std_profile) {
  if (net.aorta_path.empty()) throw ConfigError("proximal field: aorta_path is empty");
  const double span = net.segment(net.aorta_path.front()).length;
  const int n_avg = 129;
  double mu = 0.0, sig = 0.0;
  for (int k = 0; k < n_avg; ++k) {
    const double x = span * k / (n_avg - 1.0);
    const double w = (k == 0 || k == n_avg - 1) ? 0.5 : 1.0;  // trapezoid
    mu += w * mean_profile(x);
    sig += w * std_profile(x);
  }
  mu /= (n_avg - 1.0);
  sig /= (n_avg - 1.0);

  StiffnessField f;
  f.domain_length = span;
  f.mean_profile = LinearProfile::constant(mu);
  f.std_profile = LinearProfile::constant(sig);
  f.correlation_length = 1e6 * span;  // fully correlated limit
  f.n_modes = 1;
  f.quad_x = {0.5 * span};
  f.quad_w = {span};
  f.eigenvalues = {sig * sig * span};  // sqrt(lambda) r(x) = sigma
  f.eigenvectors = {{1.0 / std::sqrt(span)}};
  return f;
}

/// Variant of apply_stiffness_field for the proximal case: only the first
/// aorta segment is touched.
inline NetworkTopology apply_proximal_field(const NetworkTopology& net,
                                            const StiffnessField& field, double xi) {
  if (std::abs(xi) > StiffnessField::xi_support() * (1.0 + 1e-9))
    throw ValidationError("stiffness field: xi outside the uniform support");
  NetworkTopology out = net;
  auto& seg = out.segment(net.aorta_path.front());
  const double c0 = field.mean_profile(0.0) + field.std_profile(0.0) * xi;
  if (!(c0 > 0.0))
    throw ValidationError("stiffness realization produced non-positive c0");
  seg.beta = LinearProfile::constant(beta_from_c0(c0, seg.reference_area, net.fluid.rho));
  return out;
}

}  // namespace pulseuq
