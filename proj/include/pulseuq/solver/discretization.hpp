#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "pulseuq/math/quadrature.hpp"
#include "pulseuq/network.hpp"

namespace pulseuq::solver {

/// Reference-element operators for a nodal Legendre-Gauss-Lobatto basis of
/// order p with ceil(3(p+1)/2)-point Gauss-Legendre over-integration. All
/// matrices are row-major and independent of the element size; physical
/// scalings carry the h/2 Jacobian explicitly.
struct Basis {
  int order = 0;
  int n = 0;        // nodes per element, p+1
  int nq = 0;       // quadrature points per element
  std::vector<double> nodes;        // LGL nodes on [-1,1]
  std::vector<double> quad_r;       // Gauss nodes
  std::vector<double> quad_w;       // Gauss weights (sum 2)
  std::vector<double> Dr;           // n x n nodal differentiation
  std::vector<double> Vq;           // nq x n interpolation to quadrature
  std::vector<double> VqDr;         // nq x n, derivative at quadrature (ref coords)
  std::vector<double> MinvVqtW;     // n x nq, Mref^-1 Vq^T diag(w): quadrature projection
  std::vector<double> minv_first;   // Mref^-1 e_0   (left-face lift)
  std::vector<double> minv_last;    // Mref^-1 e_n-1 (right-face lift)

  static Basis build(int p) {
    Basis b;
    b.order = p;
    b.n = p + 1;
    b.nq = (3 * (p + 1) + 1) / 2;
    const auto lgl = math::gauss_lobatto(b.n);
    b.nodes = lgl.nodes;
    const auto gq = math::gauss_legendre(b.nq);
    b.quad_r = gq.nodes;
    b.quad_w = gq.weights;
    b.Dr = math::differentiation_matrix(b.nodes);

    b.Vq.assign(b.nq * b.n, 0.0);
    for (int q = 0; q < b.nq; ++q)
      for (int j = 0; j < b.n; ++j)
        b.Vq[q * b.n + j] = math::lagrange_basis(b.nodes, j, b.quad_r[q]);

    b.VqDr.assign(b.nq * b.n, 0.0);
    for (int q = 0; q < b.nq; ++q)
      for (int j = 0; j < b.n; ++j) {
        double acc = 0.0;
        for (int k = 0; k < b.n; ++k) acc += b.Vq[q * b.n + k] * b.Dr[k * b.n + j];
        b.VqDr[q * b.n + j] = acc;
      }

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(b.n, b.n);
    for (int i = 0; i < b.n; ++i)
      for (int j = 0; j < b.n; ++j) {
        double acc = 0.0;
        for (int q = 0; q < b.nq; ++q)
          acc += b.quad_w[q] * b.Vq[q * b.n + i] * b.Vq[q * b.n + j];
        M(i, j) = acc;
      }
    const Eigen::MatrixXd Minv = M.inverse();

    b.MinvVqtW.assign(b.n * b.nq, 0.0);
    for (int i = 0; i < b.n; ++i)
      for (int q = 0; q < b.nq; ++q) {
        double acc = 0.0;
        for (int k = 0; k < b.n; ++k) acc += Minv(i, k) * b.Vq[q * b.n + k];
        b.MinvVqtW[i * b.nq + q] = acc * b.quad_w[q];
      }

    b.minv_first.resize(b.n);
    b.minv_last.resize(b.n);
    for (int i = 0; i < b.n; ++i) {
      b.minv_first[i] = Minv(i, 0);
      b.minv_last[i] = Minv(i, b.n - 1);
    }
    return b;
  }
};

/// Per-segment grid: uniform elements with the wall-law tables evaluated once
/// at quadrature points, nodes and faces.
struct SegmentDisc {
  int segment_id = 0;
  int n_elem = 0;
  double h = 0.0;          // element size
  double length = 0.0;
  double A0 = 0.0;
  double p0 = 0.0;
  const Basis* basis = nullptr;

  std::vector<double> node_x;     // [elem * n + i], physical positions
  std::vector<double> beta_quad;  // [elem * nq + q]
  std::vector<double> src_quad;   // [elem * nq + q]: beta'(x) sqrt(A0) / rho
  std::vector<double> beta_face;  // [n_elem + 1]

  int n_nodes() const { return n_elem * basis->n; }
};

struct Discretization {
  std::map<int, Basis> bases;            // keyed by polynomial order
  std::vector<SegmentDisc> segs;         // aligned with net.segments
  std::map<int, std::size_t> index_of;   // segment id -> position in segs

  const SegmentDisc& of(int segment_id) const { return segs[index_of.at(segment_id)]; }
};

inline Discretization build_discretization(const NetworkTopology& net) {
  Discretization d;
  for (const auto& s : net.segments)
    if (!d.bases.count(s.poly_order)) d.bases[s.poly_order] = Basis::build(s.poly_order);

  for (const auto& s : net.segments) {
    SegmentDisc g;
    g.segment_id = s.id;
    g.n_elem = s.cells;
    g.length = s.length;
    g.h = s.length / s.cells;
    g.A0 = s.reference_area;
    g.p0 = s.external_pressure;
    g.basis = &d.bases.at(s.poly_order);
    const Basis& b = *g.basis;

    g.node_x.resize(g.n_elem * b.n);
    g.beta_quad.resize(g.n_elem * b.nq);
    g.src_quad.resize(g.n_elem * b.nq);
    g.beta_face.resize(g.n_elem + 1);
    for (int e = 0; e < g.n_elem; ++e) {
      const double x0 = e * g.h;
      for (int i = 0; i < b.n; ++i)
        g.node_x[e * b.n + i] = x0 + 0.5 * g.h * (b.nodes[i] + 1.0);
      for (int q = 0; q < b.nq; ++q) {
        const double xq = x0 + 0.5 * g.h * (b.quad_r[q] + 1.0);
        g.beta_quad[e * b.nq + q] = s.beta(xq);
        g.src_quad[e * b.nq + q] =
            s.beta.derivative(xq) * std::sqrt(s.reference_area) / net.fluid.rho;
      }
      g.beta_face[e] = s.beta(x0);
    }
    g.beta_face[g.n_elem] = s.beta(s.length);
    d.index_of[s.id] = d.segs.size();
    d.segs.push_back(std::move(g));
  }
  return d;
}

}  // namespace pulseuq::solver
