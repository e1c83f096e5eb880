#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

namespace pulseuq::math {

/// Legendre polynomial P_n and its derivative at x, by the three-term recurrence.
inline std::pair<double, double> legendre_with_derivative(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double pm1 = 1.0, p = x;
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p - (k - 1.0) * pm1) / k;
    pm1 = p;
    p = pk;
  }
  // (1-x^2) P_n' = n (P_{n-1} - x P_n)
  const double denom = 1.0 - x * x;
  double dp;
  if (std::abs(denom) > 1e-14) {
    dp = n * (pm1 - x * p) / denom;
  } else {
    dp = 0.5 * n * (n + 1.0) * (x > 0 ? 1.0 : (n % 2 == 0 ? -1.0 : 1.0));
  }
  return {p, dp};
}

inline double legendre(int n, double x) { return legendre_with_derivative(n, x).first; }

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1,1], weights summing to 2.
inline Rule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n >= 1 required");
  Rule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Chebyshev initial guess, Newton refinement.
    double x = -std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre_with_derivative(n, x);
      const double dx = -p / dp;
      x += dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const auto [p, dp] = legendre_with_derivative(n, x);
    (void)p;
    r.nodes[i] = x;
    r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // Symmetrize to kill the last rounding bit.
  for (int i = 0; i < n / 2; ++i) {
    const double a = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    r.nodes[i] = -a;
    r.nodes[n - 1 - i] = a;
    const double w = 0.5 * (r.weights[i] + r.weights[n - 1 - i]);
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

/// n-point Gauss-Lobatto-Legendre rule on [-1,1] (n >= 2), weights summing to 2.
/// Interior nodes are the roots of P'_{n-1}.
inline Rule1D gauss_lobatto(int n) {
  if (n < 2) throw std::invalid_argument("gauss_lobatto: n >= 2 required");
  const int m = n - 1;
  Rule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  r.nodes[0] = -1.0;
  r.nodes[m] = 1.0;
  for (int i = 1; i < m; ++i) {
    // Interlacing initial guess between GL nodes of P_m.
    double x = -std::cos(M_PI * i / m);
    for (int it = 0; it < 100; ++it) {
      // Newton on g(x) = P'_m(x); g'(x) = P''_m from the ODE
      // (1-x^2) P'' - 2x P' + m(m+1) P = 0.
      const auto [p, dp] = legendre_with_derivative(m, x);
      const double d2p = (2.0 * x * dp - m * (m + 1.0) * p) / (1.0 - x * x);
      const double dx = -dp / d2p;
      x += dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = x;
  }
  for (int i = 1; i < n / 2; ++i) {
    const double a = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    r.nodes[i] = -a;
    r.nodes[n - 1 - i] = a;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  for (int i = 0; i < n; ++i) {
    const double p = legendre(m, r.nodes[i]);
    r.weights[i] = 2.0 / (m * (m + 1.0) * p * p);
  }
  return r;
}

/// Value of the Lagrange cardinal polynomial through `nodes`, index j, at x.
inline double lagrange_basis(const std::vector<double>& nodes, std::size_t j, double x) {
  double v = 1.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (k == j) continue;
    v *= (x - nodes[k]) / (nodes[j] - nodes[k]);
  }
  return v;
}

/// Nodal differentiation matrix (row-major, n x n) for Lagrange basis on `nodes`.
/// Rows are corrected to sum to zero so constants differentiate to exactly zero.
inline std::vector<double> differentiation_matrix(const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  std::vector<double> bary(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k)
      if (k != j) bary[j] *= (nodes[j] - nodes[k]);
  for (auto& b : bary) b = 1.0 / b;

  std::vector<double> D(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      D[i * n + j] = bary[j] / (bary[i] * (nodes[i] - nodes[j]));
      diag -= D[i * n + j];
    }
    D[i * n + i] = diag;
  }
  return D;
}

}  // namespace pulseuq::math
