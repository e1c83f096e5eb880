#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "pulseuq/common.hpp"
#include "pulseuq/math/gauss_patterson.hpp"

namespace pulseuq::uq {

/// Smolyak sparse cubature on [-1,1]^N under the uniform probability measure
/// (weights sum to 1, possibly with negative entries from the combination).
/// Built from the nested Gauss-Patterson sequence; level l corresponds to the
/// Smolyak sum over 1-D index vectors with |i| <= N + l - 1, which reproduces
/// the cardinalities 351 (N=3,l=5), 769 (N=4,l=5), 545 (N=6,l=4).
struct SparseGrid {
  int dimension = 0;
  int level = 0;
  std::vector<std::vector<double>> nodes;    // [node][dim]
  std::vector<double> weights;               // aligned with nodes
  std::vector<std::vector<int>> node_keys;   // GP sequence indices (exact identity)

  std::size_t size() const { return nodes.size(); }
};

namespace detail_sg {

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double v = 1.0;
  for (int i = 0; i < k; ++i) v = v * (n - i) / (i + 1);
  return std::round(v);
}

template <class F>
void for_each_composition(int dims, int remaining, std::vector<int>& idx, int pos, F&& f) {
  if (pos == dims - 1) {
    if (remaining >= 1) {
      idx[pos] = remaining;
      f(idx);
    }
    return;
  }
  const int tail_min = dims - 1 - pos;
  for (int v = 1; v <= remaining - tail_min; ++v) {
    idx[pos] = v;
    for_each_composition(dims, remaining - v, idx, pos + 1, f);
  }
}

}  // namespace detail_sg

inline SparseGrid build_sparse_grid(int dimension, int level) {
  using namespace pulseuq::detail;
  if (dimension < 1 || level < 1)
    throw ConfigError("sparse grid: dimension >= 1 and level >= 1 required");
  const int q = dimension + level - 1;
  const int max_rule = q - dimension + 1;
  if (max_rule > kGaussPattersonMaxIndex)
    throw ConfigError("sparse grid: level " + std::to_string(level) +
                      " exceeds tabulated Gauss-Patterson rules (max 1-D index " +
                      std::to_string(kGaussPattersonMaxIndex) + ")");

  std::map<std::vector<int>, double> accum;  // GP sequence key -> weight
  std::vector<int> rule_index(dimension);
  const int lo = std::max(dimension, q - dimension + 1);
  for (int total = lo; total <= q; ++total) {
    const double coeff = ((q - total) % 2 == 0 ? 1.0 : -1.0) *
                         detail_sg::binomial(dimension - 1, q - total);
    if (coeff == 0.0) continue;
    detail_sg::for_each_composition(dimension, total, rule_index, 0, [&](const std::vector<int>& ri) {
      // tensor product over the per-dimension rules, iterating sequence indices
      std::vector<int> key(dimension, 0);
      std::vector<const double*> w(dimension);
      std::vector<int> sz(dimension);
      for (int d = 0; d < dimension; ++d) {
        w[d] = gp_rule_weights(ri[d]);
        sz[d] = gp_rule_size(ri[d]);
      }
      while (true) {
        double wt = coeff;
        for (int d = 0; d < dimension; ++d) wt *= w[d][key[d]];
        accum[key] += wt;
        int d = dimension - 1;
        while (d >= 0 && ++key[d] == sz[d]) key[d--] = 0;
        if (d < 0) break;
      }
    });
  }

  SparseGrid grid;
  grid.dimension = dimension;
  grid.level = level;
  grid.nodes.reserve(accum.size());
  grid.weights.reserve(accum.size());
  for (const auto& [key, wt] : accum) {
    std::vector<double> x(dimension);
    for (int d = 0; d < dimension; ++d) x[d] = kGaussPattersonNodes[key[d]];
    grid.node_keys.push_back(key);
    grid.nodes.push_back(std::move(x));
    grid.weights.push_back(wt);
  }
  return grid;
}

}  // namespace pulseuq::uq
