#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "pulseuq/common.hpp"
#include "pulseuq/math/quadrature.hpp"
#include "pulseuq/uq/sparse_grid.hpp"

namespace pulseuq::uq {

/// Legendre polynomial orthonormal under the uniform probability measure on
/// [-1,1]: sqrt(2k+1) P_k.
inline double legendre_orthonormal(int k, double x) {
  return std::sqrt(2.0 * k + 1.0) * math::legendre(k, x);
}

/// All multi-indices in N variables with total degree <= P, graded
/// lexicographic order (constant term first).
inline std::vector<std::vector<int>> total_degree_multi_indices(int dimension, int order) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(dimension, 0);
  for (int deg = 0; deg <= order; ++deg) {
    // lexicographic enumeration of compositions of `deg` into `dimension` parts
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
      if (pos == dimension - 1) {
        idx[pos] = remaining;
        out.push_back(idx);
        return;
      }
      for (int v = remaining; v >= 0; --v) {
        idx[pos] = v;
        self(self, pos + 1, remaining - v);
      }
    };
    rec(rec, 0, deg);
  }
  return out;
}

/// Pseudospectral polynomial-chaos surrogate of one scalar QoI: orthonormal
/// multivariate Legendre basis on [-1,1]^N, total-degree truncation. With this
/// normalization coeffs[0] is the mean and the sum of the squared remaining
/// coefficients is the variance.
struct PceSurrogate {
  int dimension = 0;
  int order = 0;
  std::vector<std::vector<int>> basis;  // multi-indices
  std::vector<double> coeffs;

  double evaluate(std::span<const double> xi) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < basis.size(); ++j) {
      double phi = 1.0;
      for (int d = 0; d < dimension; ++d)
        if (basis[j][d] > 0) phi *= legendre_orthonormal(basis[j][d], xi[d]);
      acc += coeffs[j] * phi;
    }
    return acc;
  }

  double mean() const { return coeffs.empty() ? 0.0 : coeffs[0]; }

  double variance() const {
    double v = 0.0;
    for (std::size_t j = 1; j < coeffs.size(); ++j) v += coeffs[j] * coeffs[j];
    return v;
  }
};

/// Discrete projection u_j = sum_k w_k f(xi_k) phi_j(xi_k) over the cubature.
inline PceSurrogate project(std::span<const double> samples, const SparseGrid& grid,
                            int order) {
  if (samples.size() != grid.size())
    throw ConfigError("pce projection: sample count " + std::to_string(samples.size()) +
                      " does not match grid cardinality " + std::to_string(grid.size()));
  PceSurrogate s;
  s.dimension = grid.dimension;
  s.order = order;
  s.basis = total_degree_multi_indices(grid.dimension, order);
  s.coeffs.assign(s.basis.size(), 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double wf = grid.weights[k] * samples[k];
    for (std::size_t j = 0; j < s.basis.size(); ++j) {
      double phi = 1.0;
      for (int d = 0; d < s.dimension; ++d)
        if (s.basis[j][d] > 0)
          phi *= legendre_orthonormal(s.basis[j][d], grid.nodes[k][d]);
      s.coeffs[j] += wf * phi;
    }
  }
  return s;
}

/// Normalized Sobol' indices from the PCE coefficients: S_s is the squared
/// coefficient mass whose multi-index support is exactly the subset s, over
/// the total variance. Subsets of cardinality 1 and 2 are reported; the rest
/// is aggregated into `remainder`, so everything sums to 1.
struct SobolIndices {
  std::map<std::vector<int>, double> indices;  // sorted dim subsets, |s| <= 2
  double remainder = 0.0;
  double variance = 0.0;

  double first_order(int dim) const {
    auto it = indices.find(std::vector<int>{dim});
    return it == indices.end() ? 0.0 : it->second;
  }
};

inline SobolIndices sobol_indices(const PceSurrogate& s) {
  SobolIndices out;
  out.variance = s.variance();
  if (out.variance <= 1e-24 * std::max(s.mean() * s.mean(), 1e-300))
    throw ConfigError("sobol indices undefined: surrogate has zero variance");
  for (int d = 0; d < s.dimension; ++d) out.indices[{d}] = 0.0;
  for (int d1 = 0; d1 < s.dimension; ++d1)
    for (int d2 = d1 + 1; d2 < s.dimension; ++d2) out.indices[{d1, d2}] = 0.0;

  for (std::size_t j = 1; j < s.basis.size(); ++j) {
    std::vector<int> support;
    for (int d = 0; d < s.dimension; ++d)
      if (s.basis[j][d] > 0) support.push_back(d);
    const double mass = s.coeffs[j] * s.coeffs[j] / out.variance;
    if (support.size() <= 2)
      out.indices[support] += mass;
    else
      out.remainder += mass;
  }
  return out;
}

/// Surrogate moments and input-output summaries. The correlation with each
/// input is closed-form (linear-mode coefficient over the output std, since
/// the basis is orthonormal and inputs are standardized); quantiles and the
/// cross-check moments come from seeded Monte Carlo on the surrogate.
struct SurrogateStatistics {
  double mean = 0.0;
  double std_dev = 0.0;
  std::vector<double> correlation;  // rho(QoI, xi_d)
  double q05 = 0.0, q50 = 0.0, q95 = 0.0;
  double mc_mean = 0.0;
  double mc_std = 0.0;
};

inline SurrogateStatistics statistics(const PceSurrogate& s, std::uint64_t seed = 42,
                                      std::size_t n_samples = 100000) {
  SurrogateStatistics st;
  st.mean = s.mean();
  const double var = s.variance();
  if (var <= 1e-24 * std::max(st.mean * st.mean, 1e-300))
    throw ConfigError("statistics undefined: surrogate has zero variance");
  st.std_dev = std::sqrt(var);

  st.correlation.assign(s.dimension, 0.0);
  for (std::size_t j = 0; j < s.basis.size(); ++j) {
    int deg = 0, dim = -1;
    for (int d = 0; d < s.dimension; ++d) {
      deg += s.basis[j][d];
      if (s.basis[j][d] > 0) dim = d;
    }
    if (deg == 1) st.correlation[dim] = s.coeffs[j] / st.std_dev;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> xi(s.dimension), vals(n_samples);
  double acc = 0.0, acc2 = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    for (int d = 0; d < s.dimension; ++d) xi[d] = uni(rng);
    const double v = s.evaluate(xi);
    vals[k] = v;
    acc += v;
    acc2 += v * v;
  }
  st.mc_mean = acc / n_samples;
  st.mc_std = std::sqrt(std::max(0.0, acc2 / n_samples - st.mc_mean * st.mc_mean));
  std::sort(vals.begin(), vals.end());
  auto quantile = [&](double p) {
    const double pos = p * (n_samples - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - i;
    return i + 1 < n_samples ? vals[i] * (1.0 - frac) + vals[i + 1] * frac : vals[i];
  };
  st.q05 = quantile(0.05);
  st.q50 = quantile(0.50);
  st.q95 = quantile(0.95);
  return st;
}

/// Affine map between a physical uniform variable with given mean and std and
/// the standard coordinate on [-1,1]: x = mean + sqrt(3) std xi.
struct UniformDimension {
  std::string name;
  double mean = 0.0;
  double std_dev = 0.0;

  double to_physical(double xi) const { return mean + std::sqrt(3.0) * std_dev * xi; }
  double to_standard(double x) const { return (x - mean) / (std::sqrt(3.0) * std_dev); }
};

}  // namespace pulseuq::uq
