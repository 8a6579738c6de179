#ifndef MCSBP_QUADRATURE_HPP
#define MCSBP_QUADRATURE_HPP

#include <array>
#include <cstddef>
#include <vector>

#include "mcsbp/basis.hpp"

namespace mcsbp::quadrature {

/// 1D rule on [-1, 1].
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule: exact for polynomials of degree <= 2n-1.  Nodes by
/// Newton iteration on P_n from the Chebyshev initial guess, symmetrized.
Rule1D gauss_legendre(int n);

/// Volume rule on the reference triangle (-1,-1), (1,-1), (-1,1).
struct TriQuadrature {
  std::vector<basis::Point> nodes;
  std::vector<double> weights;
  int verified_degree = -1;
  bool strictly_positive = true;
  /// Non-empty only for collapsed tensor-product rules: the underlying 1D
  /// Gauss-Legendre rule.  Node ordering is then xi2-major: node i2*n1+i1 sits
  /// at (xi1, xi2) = (collapsed_1d.nodes[i1], collapsed_1d.nodes[i2]).
  Rule1D collapsed_1d;

  std::size_t size() const { return nodes.size(); }
  bool is_collapsed() const { return !collapsed_1d.nodes.empty(); }
};

/// One edge of the reference triangle with its rule and constant outward
/// normal; nodes are ordered by the segment parameter t ascending.
struct Edge {
  basis::Segment segment;
  std::vector<basis::Point> nodes;
  std::vector<double> weights;  // length units, sum = edge length
  double normal_x1 = 0.0;
  double normal_x2 = 0.0;
  double length = 0.0;
  std::size_t size() const { return nodes.size(); }
};

/// The three edges in the fixed order bottom, left, hypotenuse.
struct FaceSet {
  std::array<Edge, 3> edges;
  std::size_t total_nodes() const {
    return edges[0].size() + edges[1].size() + edges[2].size();
  }
};

enum EdgeIndex { kEdgeBottom = 0, kEdgeLeft = 1, kEdgeHypotenuse = 2 };

/// Collapsed tensor-product rule with (q/2+1)^2 nodes, exact for total degree
/// q in physical coordinates (verified).  q must be even and >= 2.
TriQuadrature collapsed_tri_rule(int q);

/// Gauss-Legendre rules with q/2+1 nodes mapped to each edge; exact for
/// degree <= q+1 along the edge.  q must be even and >= 2.
FaceSet tri_edge_rules(int q);

/// 10-point degree-4 rule containing the three vertices with weight -1/30
/// each (area-2 normalization); mid-edges 4/25, median orbit (5/6,1/12,1/12)
/// with 64/225, centroid 23/30.
TriQuadrature liu_4c_rule();

/// Analytic moment of x1^a x2^b over the reference triangle.
double tri_monomial_moment(int a, int b);

/// Largest d <= cap such that every monomial moment of total degree <= d is
/// reproduced within 1e-12 * max(1, sum |w| |x1^a x2^b|).
int max_exact_degree(const TriQuadrature& rule, int cap);

/// Edge variant: exactness in the arc-length parameter t in [-1, 1].
int max_exact_degree(const Edge& edge, int cap);

}  // namespace mcsbp::quadrature

#endif  // MCSBP_QUADRATURE_HPP
