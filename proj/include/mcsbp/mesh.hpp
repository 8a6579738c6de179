#ifndef MCSBP_MESH_HPP
#define MCSBP_MESH_HPP

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mcsbp/operators.hpp"

namespace mcsbp::mesh {

/// Affine element map x = A xi + b from the reference triangle.
struct AffineMap {
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;
  double b1 = 0.0, b2 = 0.0;
  double det() const { return a11 * a22 - a12 * a21; }
  basis::Point apply(const basis::Point& xi) const {
    return {a11 * xi.x1 + a12 * xi.x2 + b1, a21 * xi.x1 + a22 * xi.x2 + b2};
  }
};

/// One interior face: element/edge pair on both sides.  Matched Gauss-Legendre
/// face nodes are traversed in opposite directions, so node m on one side
/// coincides with node M_e-1-m on the other (verified at build time).
struct FaceRecord {
  int elem = -1, edge = -1;
  int nbr_elem = -1, nbr_edge = -1;
};

/// Periodic triangulation of [0, 2pi]^2: an n1d x n1d quad grid with every
/// quad split along the lower-left to upper-right diagonal.  Exactly two
/// congruence classes: class 0 (lower-right triangles) and class 1
/// (upper-left triangles, the point reflection of class 0).
struct PeriodicTriMesh {
  int n1d = 0;
  int num_elements = 0;  // K = 2 n1d^2
  double h = 0.0;        // 2 pi / n1d
  std::vector<AffineMap> maps;
  std::vector<int> elem_class;
  std::array<AffineMap, 2> class_maps;  // linear parts; offsets vary per element
  std::vector<FaceRecord> faces;        // each interior face exactly once (3K/2)
  /// per element and local edge: (neighbor element, neighbor edge)
  std::vector<std::array<std::pair<int, int>, 3>> neighbor;

  int lower_elem(int i, int j) const { return 2 * (j * n1d + i); }
  int upper_elem(int i, int j) const { return lower_elem(i, j) + 1; }
};

PeriodicTriMesh build_periodic_mesh(int n1d);

/// Debugging summary (counts, spacing, class map, face records) as JSON.
std::string mesh_summary_json(const PeriodicTriMesh& mesh);

/// Check that matched face quadrature nodes coincide physically (modulo the
/// period) under the reversal permutation; throws on mismatch.
void validate_face_alignment(const PeriodicTriMesh& mesh,
                             const quadrature::FaceSet& faces, double tol = 1e-11);

/// Push a reference operator set through an affine map: derivative operators
/// by the inverse-transpose metric, the norm by the Jacobian determinant, face
/// weights by the physical/reference edge-length ratio, normals rotated and
/// renormalized.  R_gamma and the basis-value blocks are map-invariant.
operators::OperatorSet physical_operators(const operators::OperatorSet& ref,
                                          const AffineMap& map);

/// Per-element nodal (or modal) coefficients, K x stride row-major.
struct Field {
  std::size_t num_elements = 0;
  std::size_t stride = 0;
  std::vector<double> values;

  Field() = default;
  Field(std::size_t k, std::size_t n) : num_elements(k), stride(n), values(k * n, 0.0) {}
  double at(std::size_t k, std::size_t i) const { return values[k * stride + i]; }
  double& at(std::size_t k, std::size_t i) { return values[k * stride + i]; }
  std::span<const double> element(std::size_t k) const {
    return {values.data() + k * stride, stride};
  }
  std::span<double> element(std::size_t k) {
    return {values.data() + k * stride, stride};
  }
};

/// Traces of a nodal field at the face nodes of every element: K x M.
Field face_traces(const Field& u, const operators::OperatorSet& ref_ops);

/// Neighbor-side traces aligned with each element's own face-node order:
/// entry (k, m) is the neighboring element's trace at the physical point of
/// face node m of element k.
Field exchange_traces(const Field& u, const PeriodicTriMesh& mesh,
                      const operators::OperatorSet& ref_ops);

}  // namespace mcsbp::mesh

#endif  // MCSBP_MESH_HPP
