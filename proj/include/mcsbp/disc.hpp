#ifndef MCSBP_DISC_HPP
#define MCSBP_DISC_HPP

#include <array>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "mcsbp/mesh.hpp"
#include "mcsbp/operators.hpp"

namespace mcsbp::disc {

using mesh::Field;

/// Boundary/exact data for the advection problem, evaluated at (x, t).
using SpaceTimeFn = std::function<double(basis::Point, double)>;

/// Linear advection semi-discretization du/dt = A u + b(t) on one element,
/// upwind flux at the boundary: A = -sum_d alpha_d D_d + W^{-1} R^T W_G N_- R,
/// b(t) = -W^{-1} R^T W_G N_- g(t).
struct AdvectionSystem {
  densela::Matrix a;
  densela::Matrix boundary_lift;  // -W^{-1} R^T W_G N_-, applied to g(t)
  std::vector<basis::Point> face_nodes;
  std::vector<double> n_minus, n_plus;  // inflow/outflow parts of alpha.n
  SpaceTimeFn boundary_data;

  std::vector<double> forcing(double t) const;  // b(t)
  void rhs(std::span<const double> u, double t, std::span<double> dudt) const;
};

AdvectionSystem advection_system(const operators::OperatorSet& ops,
                                 std::array<double, 2> alpha, SpaceTimeFn g);

/// Galerkin reduction to the modal space: A_tilde = V^T W A V (requires a
/// modal-collocation operator set).
densela::Matrix dg_reduce_matrix(const densela::Matrix& a,
                                 const operators::OperatorSet& ops);
std::vector<double> dg_reduce_vector(std::span<const double> b,
                                     const operators::OperatorSet& ops);

struct SpectrumReport {
  densela::ComplexList eigenvalues;
  double spectral_radius = 0.0;
  double zero_tol = 0.0;      // |lambda| threshold used for the zero count
  std::size_t zero_count = 0;
};

SpectrumReport spectrum(const densela::Matrix& a);

/// Root of g - sin(x1 - t g) = 0 (Newton from sin(x1), bisection fallback);
/// valid for 0 <= t <= 1, residual below 1e-13.
double exact_burgers(double x1, double t);

enum class BurgersVariant { kStandard, kEntropyConservative, kEntropyConservativeProjected };

/// Periodic-mesh Burgers semi-discretization with per-class physical operator
/// caching.  The entropy-conservative variant couples volume and face nodes
/// through the two-point flux F(a, b) = (a^2 + a b + b^2)/6.
class BurgersScheme {
public:
  BurgersScheme(BurgersVariant variant, const mesh::PeriodicTriMesh& grid,
                operators::OperatorSet ref_ops);

  BurgersVariant variant() const { return variant_; }
  const mesh::PeriodicTriMesh& grid() const { return *grid_; }
  const operators::OperatorSet& ref_ops() const { return ref_ops_; }
  const operators::OperatorSet& phys_ops(int cls) const { return phys_[cls]; }

  std::size_t nodes_per_element() const { return ref_ops_.num_nodes(); }
  std::size_t modal_dim() const { return ref_ops_.poly_dim(); }

  /// Nodal rate of change du/dt for the chosen variant.
  void rhs(const Field& u, double t, Field& dudt) const;
  /// Modal counterpart: out = V^T W rhs(V u_modal) per element.
  void rhs_modal(const Field& u_modal, double t, Field& out) const;

  Field nodal_from_modal(const Field& u_modal) const;
  Field modal_from_nodal(const Field& u) const;

  /// Exact solution sampled at the physical volume nodes.
  Field exact_field(double t) const;
  /// Physical node coordinates of element k.
  basis::Point node_position(int k, std::size_t i) const;

  /// sum_k u_k^T W_k J_k u_k (the discrete squared L2 norm).
  double l2_norm_squared(const Field& u) const;

private:
  void rhs_nodal_impl(const Field& u, double t, Field& dudt, bool project) const;

  BurgersVariant variant_;
  const mesh::PeriodicTriMesh* grid_;
  operators::OperatorSet ref_ops_;
  std::array<operators::OperatorSet, 2> phys_;
  std::array<densela::Matrix, 2> skew_x1_;  // (Q_x1 - Q_x1^T)/2, physical
  std::array<densela::Matrix, 2> lift_;     // W^{-1} R^T, physical
  densela::Matrix projection_;              // V V^T W (reference)
};

/// Per-element modal projection V V^T W of a nodal field.
Field project_field(const Field& u, const operators::OperatorSet& ops);

/// RHS callback for the low-storage integrator.
using RhsFn = std::function<void(std::span<const double>, double, std::span<double>)>;

/// Five-stage fourth-order low-storage Runge-Kutta march to t_final.  The
/// step count is rounded so the step divides t_final; NaN in the state aborts
/// with the step index.
std::vector<double> lsrk45_integrate(const RhsFn& rhs, std::vector<double> state,
                                     double dt, double t_final);

/// sqrt( sum_k (a_k - b_k)^T W J_k (a_k - b_k) ) over a periodic mesh.
double l2_diff(const Field& a, const Field& b, const mesh::PeriodicTriMesh& mesh,
               const operators::OperatorSet& ref_ops);

/// Single-element version with the given diagonal norm (clamped at zero for
/// indefinite norms, where the form is a machine-precision residual anyway).
double l2_diff_element(std::span<const double> a, std::span<const double> b,
                       std::span<const double> w);

}  // namespace mcsbp::disc

#endif  // MCSBP_DISC_HPP
