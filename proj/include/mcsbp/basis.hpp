#ifndef MCSBP_BASIS_HPP
#define MCSBP_BASIS_HPP

#include <span>
#include <utility>
#include <vector>

#include "mcsbp/densela.hpp"

namespace mcsbp::basis {

/// Point on the reference right triangle with vertices (-1,-1), (1,-1), (-1,1).
struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Dimension of the total-degree-P polynomial space on a triangle.
int basis_dim(int p);

/// Index bookkeeping for the orthonormal Proriol-Koornwinder-Dubiner (PKD)
/// basis.  Columns are ordered by ascending total degree, then by ascending
/// second index j within a degree: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
struct PolyBasis {
  int degree = 0;
  std::vector<std::pair<int, int>> index_pairs;
  int dim() const { return static_cast<int>(index_pairs.size()); }
};

PolyBasis make_basis(int p);

/// Basis values (and optionally both gradients) at a point set.
struct VandermondeSet {
  densela::Matrix v;     // N x N_P values
  densela::Matrix v_x1;  // N x N_P d/dx1 (empty unless gradients requested)
  densela::Matrix v_x2;  // N x N_P d/dx2
  std::vector<Point> points;
};

/// PKD values at pts.  Points must lie in the closed reference triangle
/// (tolerance 1e-12); anything farther outside raises std::domain_error.
VandermondeSet eval_vandermonde(int p, std::span<const Point> pts);

/// PKD values plus both first derivatives at pts.
VandermondeSet eval_grad_vandermonde(int p, std::span<const Point> pts);

/// Affine segment inside the triangle, parametrized by t in [-1, 1].
struct Segment {
  Point a;  // t = -1
  Point b;  // t = +1
  Point at(double t) const {
    return {0.5 * (1.0 - t) * a.x1 + 0.5 * (1.0 + t) * b.x1,
            0.5 * (1.0 - t) * a.x2 + 0.5 * (1.0 + t) * b.x2};
  }
};

/// Basis values along an affine segment: row k is the basis evaluated at
/// seg.at(params[k]).  Equivalent to eval_vandermonde at the mapped points.
densela::Matrix eval_on_curve(int p, std::span<const double> params, const Segment& seg);

}  // namespace mcsbp::basis

#endif  // MCSBP_BASIS_HPP
