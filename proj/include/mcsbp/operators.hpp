#ifndef MCSBP_OPERATORS_HPP
#define MCSBP_OPERATORS_HPP

#include <filesystem>
#include <span>
#include <string>
#include <utility>

#include "mcsbp/basis.hpp"
#include "mcsbp/densela.hpp"
#include "mcsbp/quadrature.hpp"

namespace mcsbp::operators {

enum class Kind { ModalCollocation, SbpMinNorm };

/// One element operator family on the reference triangle: the diagonal norm,
/// Vandermonde blocks, derivative/boundary operators, and the face projection
/// R_gamma, together with the quadrature data that produced them.
struct OperatorSet {
  Kind kind = Kind::ModalCollocation;
  int degree = 0;

  quadrature::TriQuadrature vol;
  quadrature::FaceSet faces;

  std::vector<double> w;        // diagonal norm, size N
  std::vector<double> w_gamma;  // face weights, size M (bottom|left|hypotenuse)
  std::vector<double> n_x1;     // face-node normal components, size M
  std::vector<double> n_x2;

  densela::Matrix v, v_x1, v_x2;        // N x N_P
  densela::Matrix v_gamma;              // M x N_P, basis at the face nodes
  densela::Matrix d_x1, d_x2;           // N x N
  densela::Matrix q_x1, q_x2;           // N x N, Q_d = W D_d
  densela::Matrix e_x1, e_x2;           // N x N, E_d = Q_d + Q_d^T
  densela::Matrix r_gamma;              // M x N

  std::size_t num_nodes() const { return w.size(); }
  std::size_t num_face_nodes() const { return w_gamma.size(); }
  std::size_t poly_dim() const { return v.cols(); }

  const densela::Matrix& d(int dir) const { return dir == 0 ? d_x1 : d_x2; }
  const densela::Matrix& q(int dir) const { return dir == 0 ? q_x1 : q_x2; }
  const densela::Matrix& e(int dir) const { return dir == 0 ? e_x1 : e_x2; }
  const densela::Matrix& vx(int dir) const { return dir == 0 ? v_x1 : v_x2; }
  std::span<const double> n(int dir) const { return dir == 0 ? n_x1 : n_x2; }
};

struct BuildOptions {
  /// Residual tolerances scale as tol * max(1, magnitude of the checked term).
  double tol = 1e-10;
};

/// Modal-collocation operators D_d = V_xd V^T W with R_gamma = V_gamma V^T W.
/// Requires a volume rule exact to degree >= 2P (positivity not required) and
/// faces degree-P compatible with it.
OperatorSet build_mc(int p, const quadrature::TriQuadrature& vol,
                     const quadrature::FaceSet& faces, const BuildOptions& opts = {});

/// Modal collocation from an arbitrary (nonorthogonal) degree-P basis given by
/// its values/gradients at the volume nodes and values at the face nodes.  The
/// mass matrix M = Vhat^T W Vhat is inverted through its Cholesky factor,
/// which identifies the implicit orthonormal basis V = Vhat L^{-T}.
OperatorSet build_mc_general(int p, const densela::Matrix& vhat,
                             const densela::Matrix& vhat_x1, const densela::Matrix& vhat_x2,
                             const densela::Matrix& vhat_gamma,
                             const quadrature::TriQuadrature& vol,
                             const quadrature::FaceSet& faces,
                             const BuildOptions& opts = {});

/// Projection of a degree-P exact nodal derivative onto the modal-collocation
/// family: returns (V V^T W) D_nodal (V V^T W).  The input must satisfy
/// D_nodal V = V_x within 1e-10 (scaled); otherwise std::invalid_argument.
densela::Matrix nodal_to_mc(const densela::Matrix& d_nodal, const densela::Matrix& v,
                            const densela::Matrix& v_x, std::span<const double> w);

/// Min-norm SBP operators on the collapsed tensor-product rule: E_d built from
/// 1D Lagrange extrapolation along collinear node lines, Q_d = S_d + E_d/2
/// with S_d the minimum-Frobenius-norm skew solution of the accuracy system
/// S_d V = W V_xd - E_d V / 2.
OperatorSet build_sbp_minnorm(int p, const quadrature::TriQuadrature& vol,
                              const quadrature::FaceSet& faces,
                              const BuildOptions& opts = {});

/// Local-projection stabilization P = Pi^T W Lambda Pi, Pi = I - V V^T W.
/// An empty lambda means the identity scaling; entries must be positive.
densela::Matrix build_lps(const densela::Matrix& v, std::span<const double> w,
                          std::span<const double> lambda = {});

/// Upwind pair D^{+-} = W^{-1}(Q_d +- P) for direction dir in {0, 1}.
std::pair<densela::Matrix, densela::Matrix> build_upwind(const OperatorSet& ops,
                                                         const densela::Matrix& lps,
                                                         int dir);

/// W-orthonormal nullspace basis Z of a modal-collocation set: D_d Z = 0,
/// Z^T W Z = I.  Refuses indefinite norms.
densela::Matrix nullspace(const OperatorSet& ops);

struct VerificationReport {
  double accuracy_residual = 0.0;       // max_d |D_d V - V_xd|
  double sbp_residual = 0.0;            // factorization + E-symmetry defects
  double boundary_accuracy_residual = 0.0;  // max_d |V^T E_d V - edge integrals|
  double compatibility_residual = 0.0;  // volume/boundary integration by parts
  std::size_t nullspace_dim = 0;        // N - rank([D_x1; D_x2])
  double max_residual() const;
};

/// Evaluates the defining identities; reports, never throws.
VerificationReport verify_operator(const OperatorSet& ops, double rank_tol = 1e-10);

/// JSON bundle (documented schema, lossless round-trip, deterministic bytes).
std::string to_json_string(const OperatorSet& ops);
OperatorSet from_json_string(const std::string& text);
void save_json(const OperatorSet& ops, const std::filesystem::path& path);
OperatorSet load_json(const std::filesystem::path& path);

}  // namespace mcsbp::operators

#endif  // MCSBP_OPERATORS_HPP
