#include "mcsbp/operators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mcsbp::operators {

using densela::Matrix;

namespace {

/// Concatenated face-node data in the fixed edge order.
struct FaceData {
  std::vector<basis::Point> nodes;
  std::vector<double> w_gamma, n_x1, n_x2;
};

FaceData gather_faces(const quadrature::FaceSet& faces) {
  FaceData fd;
  for (const auto& e : faces.edges) {
    fd.nodes.insert(fd.nodes.end(), e.nodes.begin(), e.nodes.end());
    fd.w_gamma.insert(fd.w_gamma.end(), e.weights.begin(), e.weights.end());
    fd.n_x1.insert(fd.n_x1.end(), e.size(), e.normal_x1);
    fd.n_x2.insert(fd.n_x2.end(), e.size(), e.normal_x2);
  }
  return fd;
}

void check_volume_exactness(const quadrature::TriQuadrature& vol, int p) {
  const int needed = 2 * p;
  int have = vol.verified_degree;
  if (have < needed) have = quadrature::max_exact_degree(vol, needed);
  if (have < needed)
    throw std::runtime_error("operator build: volume quadrature exact only to degree " +
                             std::to_string(have) + ", need 2P = " +
                             std::to_string(needed));
}

/// V^T W as an N_P x N matrix.
Matrix vt_w(const Matrix& v, std::span<const double> w) {
  Matrix m(v.cols(), v.rows());
  for (std::size_t k = 0; k < v.rows(); ++k)
    for (std::size_t i = 0; i < v.cols(); ++i) m(i, k) = v(k, i) * w[k];
  return m;
}

/// max_d | V^T W V_xd + V_xd^T W V - V_G^T W_G N_d V_G |: volume and boundary
/// rules jointly mimic integration by parts on the polynomial space.
double compatibility_residual(const Matrix& v, const Matrix& v_x1, const Matrix& v_x2,
                              std::span<const double> w, const Matrix& v_gamma,
                              const FaceData& fd, double* scale_out = nullptr) {
  double res = 0.0, scale = 1.0;
  for (int dir = 0; dir < 2; ++dir) {
    const Matrix& vx = dir == 0 ? v_x1 : v_x2;
    Matrix wvx = vx;
    wvx.scale_rows(w);
    Matrix lhs = multiply_at_b(v, wvx);           // V^T W V_x
    scale = std::max(scale, lhs.max_abs());
    lhs += multiply_at_b(wvx, v);                 // + V_x^T W V
    std::vector<double> wn(fd.w_gamma.size());
    const auto& nd = dir == 0 ? fd.n_x1 : fd.n_x2;
    for (std::size_t m = 0; m < wn.size(); ++m) wn[m] = fd.w_gamma[m] * nd[m];
    Matrix vg_scaled = v_gamma;
    vg_scaled.scale_rows(wn);
    lhs -= multiply_at_b(v_gamma, vg_scaled);     // - V_G^T W_G N_d V_G
    res = std::max(res, lhs.max_abs());
  }
  if (scale_out) *scale_out = scale;
  return res;
}

/// Common assembly once V, V_x1, V_x2, V_gamma are known: the projection-based
/// derivative family D_d = V_xd V^T W, R = V_G V^T W, E_d = Q_d + Q_d^T.
OperatorSet assemble_mc(int p, const quadrature::TriQuadrature& vol,
                        const quadrature::FaceSet& faces, Matrix v, Matrix v_x1,
                        Matrix v_x2, Matrix v_gamma, const BuildOptions& opts) {
  FaceData fd = gather_faces(faces);

  double scale = 1.0;
  const double compat =
      compatibility_residual(v, v_x1, v_x2, vol.weights, v_gamma, fd, &scale);
  if (compat > opts.tol * scale)
    throw std::runtime_error(
        "build_mc: volume and boundary quadratures are not degree-P compatible "
        "(residual " + std::to_string(compat) + ")");

  OperatorSet ops;
  ops.kind = Kind::ModalCollocation;
  ops.degree = p;
  ops.vol = vol;
  ops.faces = faces;
  ops.w = vol.weights;
  ops.w_gamma = std::move(fd.w_gamma);
  ops.n_x1 = std::move(fd.n_x1);
  ops.n_x2 = std::move(fd.n_x2);

  const Matrix vtw = vt_w(v, ops.w);
  ops.d_x1 = v_x1 * vtw;
  ops.d_x2 = v_x2 * vtw;
  ops.r_gamma = v_gamma * vtw;
  ops.q_x1 = ops.d_x1;
  ops.q_x1.scale_rows(ops.w);
  ops.q_x2 = ops.d_x2;
  ops.q_x2.scale_rows(ops.w);
  ops.e_x1 = ops.q_x1 + ops.q_x1.transposed();
  ops.e_x2 = ops.q_x2 + ops.q_x2.transposed();
  ops.v = std::move(v);
  ops.v_x1 = std::move(v_x1);
  ops.v_x2 = std::move(v_x2);
  ops.v_gamma = std::move(v_gamma);
  return ops;
}

/// Lagrange basis value l_j(t) over the given nodes.
double lagrange_weight(std::span<const double> nodes, std::size_t j, double t) {
  double r = 1.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (k == j) continue;
    r *= (t - nodes[k]) / (nodes[j] - nodes[k]);
  }
  return r;
}

/// Right-multiply by the inverse of an upper-triangular G: solves X G = B.
Matrix solve_right_upper(const Matrix& b, const Matrix& g) {
  Matrix x(b.rows(), b.cols());
  for (std::size_t i = 0; i < b.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = b(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= x(i, k) * g(k, j);
      x(i, j) = s / g(j, j);
    }
  }
  return x;
}

/// Thin Householder QR: a = q * r with q having orthonormal columns.
void qr_thin(const Matrix& a, Matrix& q, Matrix& r) {
  const std::size_t n = a.rows(), m = a.cols();
  Matrix f = a;
  std::vector<double> tau(m, 0.0), col(n), vtail(n);
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = k; i < n; ++i) col[i - k] = f(i, k);
    // reflector computed in place, beta lands in col[0]
    double xnorm2 = 0.0;
    for (std::size_t i = 1; i < n - k; ++i) xnorm2 += col[i] * col[i];
    const double alpha = col[0];
    if (xnorm2 != 0.0) {
      const double beta = -std::copysign(std::sqrt(alpha * alpha + xnorm2), alpha);
      tau[k] = (beta - alpha) / beta;
      const double inv = 1.0 / (alpha - beta);
      for (std::size_t i = 1; i < n - k; ++i) col[i] *= inv;
      col[0] = beta;
    }
    for (std::size_t i = k; i < n; ++i) f(i, k) = col[i - k];
    if (tau[k] != 0.0) {
      for (std::size_t j = k + 1; j < m; ++j) {
        double s = f(k, j);
        for (std::size_t i = k + 1; i < n; ++i) s += f(i, k) * f(i, j);
        s *= tau[k];
        f(k, j) -= s;
        for (std::size_t i = k + 1; i < n; ++i) f(i, j) -= s * f(i, k);
      }
    }
  }
  r = Matrix(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) r(i, j) = f(i, j);
  // q = reflectors applied to the leading columns of the identity
  q = Matrix(n, m);
  for (std::size_t j = 0; j < m; ++j) q(j, j) = 1.0;
  for (std::size_t kk = m; kk-- > 0;) {
    if (tau[kk] == 0.0) continue;
    for (std::size_t j = 0; j < m; ++j) {
      double s = q(kk, j);
      for (std::size_t i = kk + 1; i < n; ++i) s += f(i, kk) * q(i, j);
      s *= tau[kk];
      q(kk, j) -= s;
      for (std::size_t i = kk + 1; i < n; ++i) q(i, j) -= s * f(i, kk);
    }
  }
}

}  // namespace

double VerificationReport::max_residual() const {
  return std::max({accuracy_residual, sbp_residual, boundary_accuracy_residual,
                   compatibility_residual});
}

OperatorSet build_mc(int p, const quadrature::TriQuadrature& vol,
                     const quadrature::FaceSet& faces, const BuildOptions& opts) {
  if (p < 0) throw std::invalid_argument("build_mc: degree must be >= 0");
  check_volume_exactness(vol, p);
  basis::VandermondeSet vs = basis::eval_grad_vandermonde(p, vol.nodes);
  const FaceData fd = gather_faces(faces);
  const Matrix v_gamma = basis::eval_vandermonde(p, fd.nodes).v;
  return assemble_mc(p, vol, faces, std::move(vs.v), std::move(vs.v_x1),
                     std::move(vs.v_x2), v_gamma, opts);
}

OperatorSet build_mc_general(int p, const Matrix& vhat, const Matrix& vhat_x1,
                             const Matrix& vhat_x2, const Matrix& vhat_gamma,
                             const quadrature::TriQuadrature& vol,
                             const quadrature::FaceSet& faces, const BuildOptions& opts) {
  if (vhat.rows() != vol.size() || vhat.cols() != static_cast<std::size_t>(basis::basis_dim(p)))
    throw std::invalid_argument("build_mc_general: Vhat shape mismatch");

  Matrix wvhat = vhat;
  wvhat.scale_rows(vol.weights);
  const Matrix mass = multiply_at_b(vhat, wvhat);
  Matrix l;
  try {
    l = densela::cholesky(mass);
  } catch (const std::exception&) {
    throw std::runtime_error("build_mc_general: singular (non-SPD) mass matrix");
  }

  // V = Vhat L^{-T}: columns solve L^T x = vhat row, i.e. rows solve x L^T = r
  auto right_solve_lt = [&l](const Matrix& b) {
    const std::size_t np = l.rows();
    Matrix x(b.rows(), np);
    for (std::size_t i = 0; i < b.rows(); ++i) {
      for (std::size_t j = 0; j < np; ++j) {
        double s = b(i, j);
        for (std::size_t k = 0; k < j; ++k) s -= x(i, k) * l(j, k);
        x(i, j) = s / l(j, j);
      }
    }
    return x;
  };
  Matrix v = right_solve_lt(vhat);
  Matrix v_x1 = right_solve_lt(vhat_x1);
  Matrix v_x2 = right_solve_lt(vhat_x2);
  const Matrix v_gamma = right_solve_lt(vhat_gamma);
  return assemble_mc(p, vol, faces, std::move(v), std::move(v_x1), std::move(v_x2),
                     v_gamma, opts);
}

Matrix nodal_to_mc(const Matrix& d_nodal, const Matrix& v, const Matrix& v_x,
                   std::span<const double> w) {
  Matrix defect = d_nodal * v - v_x;
  const double scale = std::max(1.0, v_x.max_abs());
  if (defect.max_abs() > 1e-10 * scale)
    throw std::invalid_argument(
        "nodal_to_mc: input operator is not degree-P exact (residual " +
        std::to_string(defect.max_abs()) + ")");
  const Matrix proj = v * vt_w(v, w);
  return proj * d_nodal * proj;
}

OperatorSet build_sbp_minnorm(int p, const quadrature::TriQuadrature& vol,
                              const quadrature::FaceSet& faces, const BuildOptions& opts) {
  if (!vol.is_collapsed())
    throw std::runtime_error(
        "build_sbp_minnorm: requires a collapsed tensor-product rule (collinear "
        "node structure unavailable)");
  check_volume_exactness(vol, p);
  const std::size_t n1 = vol.collapsed_1d.size();
  for (const auto& e : faces.edges)
    if (e.size() != n1)
      throw std::invalid_argument(
          "build_sbp_minnorm: face rules must carry q/2+1 nodes per edge");

  const std::size_t n = vol.size();
  const basis::VandermondeSet vs = basis::eval_grad_vandermonde(p, vol.nodes);
  const FaceData fd = gather_faces(faces);

  // Sparse boundary extrapolation along collinear lines of the tensor grid:
  // constant-xi1 columns hit the bottom edge at x1 = xi1, constant-xi2 rows
  // hit the left edge (xi1 -> -1) and the hypotenuse (xi1 -> +1) at the face
  // Gauss-Legendre nodes.
  const std::span<const double> xi = vol.collapsed_1d.nodes;
  Matrix r_sparse(3 * n1, n);
  for (std::size_t m = 0; m < n1; ++m) {
    for (std::size_t j = 0; j < n1; ++j) {
      r_sparse(m, j * n1 + m) = lagrange_weight(xi, j, -1.0);           // bottom
      r_sparse(n1 + m, m * n1 + j) = lagrange_weight(xi, j, -1.0);      // left
      r_sparse(2 * n1 + m, m * n1 + j) = lagrange_weight(xi, j, 1.0);   // hypotenuse
    }
  }

  OperatorSet ops;
  ops.kind = Kind::SbpMinNorm;
  ops.degree = p;
  ops.vol = vol;
  ops.faces = faces;
  ops.w = vol.weights;
  ops.w_gamma = fd.w_gamma;
  ops.n_x1 = fd.n_x1;
  ops.n_x2 = fd.n_x2;
  ops.v = vs.v;
  ops.v_x1 = vs.v_x1;
  ops.v_x2 = vs.v_x2;
  ops.v_gamma = basis::eval_vandermonde(p, fd.nodes).v;
  ops.r_gamma = r_sparse;

  // minimum-Frobenius-norm skew part: with the thin QR V = U G and
  // C = B G^{-1}, the minimizer of ||S||_F s.t. S skew, S V ~= B is
  // S = C U^T - U C^T - U skew(U^T C) U^T.
  Matrix u, g;
  qr_thin(ops.v, u, g);
  for (int dir = 0; dir < 2; ++dir) {
    std::vector<double> wn(ops.w_gamma.size());
    const auto& nd = dir == 0 ? ops.n_x1 : ops.n_x2;
    for (std::size_t m = 0; m < wn.size(); ++m) wn[m] = ops.w_gamma[m] * nd[m];
    Matrix rw = r_sparse;
    rw.scale_rows(wn);
    Matrix e_d = multiply_at_b(r_sparse, rw);

    Matrix b_d = dir == 0 ? ops.v_x1 : ops.v_x2;
    b_d.scale_rows(ops.w);
    b_d -= (e_d * ops.v) * 0.5;

    const Matrix c = solve_right_upper(b_d, g);
    const Matrix t1 = multiply_at_b(u, c);
    Matrix s11(t1.rows(), t1.cols());
    for (std::size_t i = 0; i < t1.rows(); ++i)
      for (std::size_t j = 0; j < t1.cols(); ++j)
        s11(i, j) = 0.5 * (t1(i, j) - t1(j, i));

    Matrix s = c * u.transposed();
    s -= u * c.transposed();
    s -= u * s11 * u.transposed();
    // enforce exact skewness against roundoff
    for (std::size_t i = 0; i < n; ++i) {
      s(i, i) = 0.0;
      for (std::size_t j = i + 1; j < n; ++j) {
        const double sk = 0.5 * (s(i, j) - s(j, i));
        s(i, j) = sk;
        s(j, i) = -sk;
      }
    }

    // gate the accuracy system in its well-conditioned Q-form; the strong-form
    // residual picks up a 1/min(w) factor that verify_operator reports
    const double ls_residual = (s * ops.v - b_d).max_abs();
    if (ls_residual > opts.tol * std::max(1.0, b_d.max_abs()))
      throw std::runtime_error(
          "build_sbp_minnorm: accuracy system not solved (residual " +
          std::to_string(ls_residual) + ")");

    Matrix q_d = s + e_d * 0.5;
    Matrix d_d = q_d;
    std::vector<double> winv(n);
    for (std::size_t i = 0; i < n; ++i) winv[i] = 1.0 / ops.w[i];
    d_d.scale_rows(winv);
    if (dir == 0) {
      ops.e_x1 = std::move(e_d);
      ops.q_x1 = std::move(q_d);
      ops.d_x1 = std::move(d_d);
    } else {
      ops.e_x2 = std::move(e_d);
      ops.q_x2 = std::move(q_d);
      ops.d_x2 = std::move(d_d);
    }
  }

  const VerificationReport rep = verify_operator(ops);
  const double scale = std::max(1.0, ops.e_x1.max_abs());
  if (rep.boundary_accuracy_residual > opts.tol * scale ||
      rep.sbp_residual > opts.tol * scale)
    throw std::runtime_error(
        "build_sbp_minnorm: boundary accuracy conditions not met (residual " +
        std::to_string(rep.max_residual()) + ")");
  return ops;
}

Matrix build_lps(const Matrix& v, std::span<const double> w, std::span<const double> lambda) {
  const std::size_t n = v.rows();
  if (w.size() != n) throw std::invalid_argument("build_lps: weight size mismatch");
  if (!lambda.empty() && lambda.size() != n)
    throw std::invalid_argument("build_lps: lambda size mismatch");
  for (double l : lambda)
    if (l <= 0.0) throw std::runtime_error("build_lps: scaling matrix must be positive");
  {
    Matrix wv = v;
    wv.scale_rows(w);
    if ((multiply_at_b(v, wv) - Matrix::identity(v.cols())).max_abs() > 1e-11)
      throw std::invalid_argument("build_lps: V is not W-orthonormal");
  }

  Matrix pi = Matrix::identity(n) - v * vt_w(v, w);
  std::vector<double> wl(n);
  for (std::size_t i = 0; i < n; ++i) wl[i] = w[i] * (lambda.empty() ? 1.0 : lambda[i]);
  Matrix scaled = pi;
  scaled.scale_rows(wl);
  Matrix p = multiply_at_b(pi, scaled);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double sym = 0.5 * (p(i, j) + p(j, i));
      p(i, j) = sym;
      p(j, i) = sym;
    }
  return p;
}

std::pair<Matrix, Matrix> build_upwind(const OperatorSet& ops, const Matrix& lps, int dir) {
  const std::size_t n = ops.num_nodes();
  if (lps.rows() != n || lps.cols() != n)
    throw std::invalid_argument("build_upwind: LPS size mismatch");
  std::vector<double> winv(n);
  for (std::size_t i = 0; i < n; ++i) winv[i] = 1.0 / ops.w[i];
  Matrix dp = ops.q(dir) + lps;
  Matrix dm = ops.q(dir) - lps;
  dp.scale_rows(winv);
  dm.scale_rows(winv);
  return {std::move(dp), std::move(dm)};
}

Matrix nullspace(const OperatorSet& ops) {
  if (ops.kind != Kind::ModalCollocation)
    throw std::invalid_argument("nullspace: requires a modal-collocation operator set");
  return densela::w_orthonormal_complement(ops.v, ops.w);
}

VerificationReport verify_operator(const OperatorSet& ops, double rank_tol) {
  VerificationReport rep;
  const std::size_t n = ops.num_nodes();

  const Matrix& v_gamma = ops.v_gamma;

  for (int dir = 0; dir < 2; ++dir) {
    rep.accuracy_residual =
        std::max(rep.accuracy_residual, (ops.d(dir) * ops.v - ops.vx(dir)).max_abs());

    Matrix wd = ops.d(dir);
    wd.scale_rows(ops.w);
    rep.sbp_residual = std::max(rep.sbp_residual, (wd - ops.q(dir)).max_abs());
    rep.sbp_residual = std::max(
        rep.sbp_residual, (ops.q(dir) + ops.q(dir).transposed() - ops.e(dir)).max_abs());

    // E_d = R^T W_G N_d R (projection form for MC, assembly identity for SBP)
    std::vector<double> wn(ops.w_gamma.size());
    for (std::size_t m = 0; m < wn.size(); ++m) wn[m] = ops.w_gamma[m] * ops.n(dir)[m];
    Matrix rw = ops.r_gamma;
    rw.scale_rows(wn);
    rep.sbp_residual =
        std::max(rep.sbp_residual, (multiply_at_b(ops.r_gamma, rw) - ops.e(dir)).max_abs());

    // boundary accuracy: V^T E_d V vs edge quadrature of V_i V_j n_d
    Matrix vg_scaled = v_gamma;
    vg_scaled.scale_rows(wn);
    const Matrix surface = multiply_at_b(v_gamma, vg_scaled);
    rep.boundary_accuracy_residual = std::max(
        rep.boundary_accuracy_residual,
        (multiply_at_b(ops.v, ops.e(dir) * ops.v) - surface).max_abs());
  }

  FaceData fd;
  fd.w_gamma = ops.w_gamma;
  fd.n_x1 = ops.n_x1;
  fd.n_x2 = ops.n_x2;
  rep.compatibility_residual =
      compatibility_residual(ops.v, ops.v_x1, ops.v_x2, ops.w, v_gamma, fd);

  Matrix stacked(2 * n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      stacked(i, j) = ops.d_x1(i, j);
      stacked(n + i, j) = ops.d_x2(i, j);
    }
  rep.nullspace_dim = n - densela::rank_estimate(stacked, rank_tol);
  return rep;
}

}  // namespace mcsbp::operators
