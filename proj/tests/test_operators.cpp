#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "doctest.h"
#include "mcsbp/operators.hpp"
#include "test_util.hpp"

using namespace mcsbp;
using densela::Matrix;

namespace {

operators::OperatorSet mc_ops(int p, int q) {
  return operators::build_mc(p, quadrature::collapsed_tri_rule(q),
                             quadrature::tri_edge_rules(q));
}

operators::OperatorSet sbp_ops(int p, int q) {
  return operators::build_sbp_minnorm(p, quadrature::collapsed_tri_rule(q),
                                      quadrature::tri_edge_rules(q));
}

std::vector<double> ones(std::size_t n) { return std::vector<double>(n, 1.0); }

}  // namespace

TEST_CASE("build_mc: derivative accuracy and constant annihilation") {
  const auto ops = mc_ops(3, 6);
  REQUIRE(ops.num_nodes() == 16);
  REQUIRE(ops.poly_dim() == 10);

  CHECK((ops.d_x1 * ops.v - ops.v_x1).max_abs() <= 1e-12);
  CHECK((ops.d_x2 * ops.v - ops.v_x2).max_abs() <= 1e-12);

  const auto d1 = densela::matvec(ops.d_x1, ones(16));
  for (double v : d1) CHECK(std::fabs(v) <= 1e-13);

  // rank bounded by the polynomial dimension (singular-value count oracle)
  CHECK(densela::rank_estimate(ops.d_x1, 1e-10) <= 10);
  CHECK(densela::rank_estimate(ops.d_x2, 1e-10) <= 10);
}

TEST_CASE("build_mc: insufficient volume exactness is rejected with the degree") {
  CHECK_THROWS_WITH_AS(
      operators::build_mc(3, quadrature::liu_4c_rule(), quadrature::tri_edge_rules(4)),
      "operator build: volume quadrature exact only to degree 4, need 2P = 6",
      std::runtime_error);
}

TEST_CASE("build_mc invariants: Q+Q^T assembly, boundary projection form") {
  for (int p : {2, 4}) {
    const auto ops = mc_ops(p, 2 * p);
    const std::size_t n = ops.num_nodes();

    CHECK((ops.q_x1 + ops.q_x1.transposed() - ops.e_x1).max_abs() == 0.0);
    CHECK((ops.q_x2 + ops.q_x2.transposed() - ops.e_x2).max_abs() == 0.0);

    // E_d = R^T W_G N_d R
    for (int dir = 0; dir < 2; ++dir) {
      std::vector<double> wn(ops.num_face_nodes());
      for (std::size_t m = 0; m < wn.size(); ++m)
        wn[m] = ops.w_gamma[m] * ops.n(dir)[m];
      Matrix rw = ops.r_gamma;
      rw.scale_rows(wn);
      CHECK((densela::multiply_at_b(ops.r_gamma, rw) - ops.e(dir)).max_abs() <= 1e-11);
    }

    // modal projection idempotence
    Matrix vtw(ops.poly_dim(), n);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < ops.poly_dim(); ++i)
        vtw(i, k) = ops.v(k, i) * ops.w[k];
    const Matrix proj = ops.v * vtw;
    CHECK((proj * proj - proj).max_abs() <= 1e-12);

    // Q annihilates constants
    const auto q1 = densela::matvec(ops.q_x1, ones(n));
    for (double v : q1) CHECK(std::fabs(v) <= 1e-12);
  }
}

TEST_CASE("build_mc_general: monomial basis reproduces the orthonormal build") {
  const int p = 2;
  const auto vol = quadrature::collapsed_tri_rule(4);
  const auto faces = quadrature::tri_edge_rules(4);
  const auto ref = operators::build_mc(p, vol, faces);

  // monomial basis 1, x1, x2, x1^2, x1 x2, x2^2 with gradients
  std::vector<basis::Point> fnodes;
  for (const auto& e : faces.edges)
    fnodes.insert(fnodes.end(), e.nodes.begin(), e.nodes.end());
  auto fill = [&](const std::vector<basis::Point>& pts, Matrix& v, Matrix* vx1,
                  Matrix* vx2) {
    const int exps[6][2] = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}};
    v = Matrix(pts.size(), 6);
    if (vx1) *vx1 = Matrix(pts.size(), 6);
    if (vx2) *vx2 = Matrix(pts.size(), 6);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      for (int j = 0; j < 6; ++j) {
        const int a = exps[j][0], b = exps[j][1];
        v(k, j) = std::pow(pts[k].x1, a) * std::pow(pts[k].x2, b);
        if (vx1)
          (*vx1)(k, j) = a == 0 ? 0.0 : a * std::pow(pts[k].x1, a - 1) *
                                             std::pow(pts[k].x2, b);
        if (vx2)
          (*vx2)(k, j) = b == 0 ? 0.0 : b * std::pow(pts[k].x1, a) *
                                             std::pow(pts[k].x2, b - 1);
      }
    }
  };
  Matrix vhat, vhat_x1, vhat_x2, vhat_gamma;
  fill(vol.nodes, vhat, &vhat_x1, &vhat_x2);
  fill(fnodes, vhat_gamma, nullptr, nullptr);

  const auto gen =
      operators::build_mc_general(p, vhat, vhat_x1, vhat_x2, vhat_gamma, vol, faces);
  CHECK((gen.d_x1 - ref.d_x1).max_abs() <= 1e-11);
  CHECK((gen.d_x2 - ref.d_x2).max_abs() <= 1e-11);
  CHECK((gen.e_x1 - ref.e_x1).max_abs() <= 1e-11);
  CHECK((gen.r_gamma - ref.r_gamma).max_abs() <= 1e-11);
}

TEST_CASE("build_mc_general: orthonormal input is the identity path") {
  const int p = 3;
  const auto vol = quadrature::collapsed_tri_rule(6);
  const auto faces = quadrature::tri_edge_rules(6);
  const auto ref = operators::build_mc(p, vol, faces);
  const auto gen = operators::build_mc_general(p, ref.v, ref.v_x1, ref.v_x2,
                                               ref.v_gamma, vol, faces);
  CHECK((gen.d_x1 - ref.d_x1).max_abs() <= 1e-12);
  CHECK((gen.d_x2 - ref.d_x2).max_abs() <= 1e-12);
}

TEST_CASE("build_mc_general: basis invariance under random change of basis") {
  const int p = 3;
  const auto vol = quadrature::collapsed_tri_rule(6);
  const auto faces = quadrature::tri_edge_rules(6);
  const auto ref = operators::build_mc(p, vol, faces);

  Matrix t = test_util::random_matrix(10, 10, 303);
  t += Matrix::identity(10) * 3.0;
  const auto gen = operators::build_mc_general(p, ref.v * t, ref.v_x1 * t, ref.v_x2 * t,
                                               ref.v_gamma * t, vol, faces);
  CHECK((gen.d_x1 - ref.d_x1).max_abs() <= 1e-10);
  CHECK((gen.d_x2 - ref.d_x2).max_abs() <= 1e-10);
}

TEST_CASE("nodal_to_mc: fixed point on MC, projection of SBP, nullspace annihilation") {
  const auto mc = mc_ops(3, 6);
  const auto sbp = sbp_ops(3, 6);

  const Matrix back = operators::nodal_to_mc(mc.d_x1, mc.v, mc.v_x1, mc.w);
  CHECK((back - mc.d_x1).max_abs() <= 1e-12);

  const Matrix conv = operators::nodal_to_mc(sbp.d_x1, sbp.v, sbp.v_x1, sbp.w);
  CHECK((conv - mc.d_x1).max_abs() <= 1e-10);

  // perturbation in the nullspace directions leaves the projection unchanged
  const Matrix z = operators::nullspace(mc);
  const Matrix r = test_util::random_matrix(z.cols(), z.cols(), 404);
  Matrix ztw = z.transposed();
  ztw.scale_cols(mc.w);
  const Matrix pert = z * r * ztw;
  const Matrix conv2 = operators::nodal_to_mc(mc.d_x1 + pert, mc.v, mc.v_x1, mc.w);
  CHECK((conv2 - mc.d_x1).max_abs() <= 1e-11);

  // inaccurate input is rejected
  Matrix bad = mc.d_x1;
  bad(0, 0) += 1.0;
  CHECK_THROWS_AS(operators::nodal_to_mc(bad, mc.v, mc.v_x1, mc.w),
                  std::invalid_argument);
}

TEST_CASE("build_sbp_minnorm: SBP definition holds, differs from MC") {
  const auto sbp = sbp_ops(3, 6);
  const auto mc = mc_ops(3, 6);
  const double scale = std::max(1.0, sbp.q_x1.max_abs());

  CHECK((sbp.d_x1 * sbp.v - sbp.v_x1).max_abs() <= 1e-10 * scale);
  CHECK((sbp.d_x2 * sbp.v - sbp.v_x2).max_abs() <= 1e-10 * scale);
  for (double w : sbp.w) CHECK(w > 0.0);

  // boundary accuracy: V^T E V equals the edge quadrature of V_i V_j n_d
  const auto rep = operators::verify_operator(sbp);
  CHECK(rep.boundary_accuracy_residual <= 1e-11 * scale);
  CHECK(rep.sbp_residual <= 1e-12 * scale);

  CHECK((sbp.d_x1 - mc.d_x1).max_abs() > 1e-3);

  CHECK_THROWS_AS(
      operators::build_sbp_minnorm(2, quadrature::liu_4c_rule(),
                                   quadrature::tri_edge_rules(4)),
      std::runtime_error);
}

TEST_CASE("build_sbp_minnorm: matches the strictly-lower-triangle min-norm route") {
  for (int p : {1, 2}) {
    const int q = 2 * p;
    const auto sbp = sbp_ops(p, q);
    const std::size_t n = sbp.num_nodes(), np = sbp.poly_dim();
    const std::size_t nz = n * (n - 1) / 2;

    // accuracy system M z = vec(B), unknowns = strictly lower triangle of S
    Matrix b = sbp.v_x1;
    b.scale_rows(sbp.w);
    b -= (sbp.e_x1 * sbp.v) * 0.5;

    Matrix m(n * np, nz);
    std::size_t col = 0;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t bb = 0; bb < a; ++bb) {
        // S(a,bb) = z, S(bb,a) = -z
        for (std::size_t k = 0; k < np; ++k) {
          m(a * np + k, col) += sbp.v(bb, k);
          m(bb * np + k, col) -= sbp.v(a, k);
        }
        ++col;
      }
    }
    Matrix rhs(n * np, 1);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < np; ++k) rhs(i * np + k, 0) = b(i, k);

    const Matrix z = densela::minnorm_solve(m, rhs);
    Matrix s(n, n);
    col = 0;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t bb = 0; bb < a; ++bb) {
        s(a, bb) = z(col, 0);
        s(bb, a) = -z(col, 0);
        ++col;
      }
    const Matrix q_ref = s + sbp.e_x1 * 0.5;
    CHECK((q_ref - sbp.q_x1).max_abs() <= 1e-10 * std::max(1.0, sbp.q_x1.max_abs()));
  }
}

TEST_CASE("build_lps: exactness, nullspace action, PSD, conservation") {
  const auto ops = mc_ops(3, 6);
  const std::size_t n = ops.num_nodes();
  const Matrix p = operators::build_lps(ops.v, ops.w);

  CHECK((p * ops.v).max_abs() <= 1e-12);

  // identity-scaling closed form P = W (I - V V^T W)
  Matrix vtw(ops.poly_dim(), n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < ops.poly_dim(); ++i)
      vtw(i, k) = ops.v(k, i) * ops.w[k];
  Matrix closed = Matrix::identity(n) - ops.v * vtw;
  closed.scale_rows(ops.w);
  CHECK((p - closed).max_abs() <= 1e-12);

  // P Z = W Z
  const Matrix z = operators::nullspace(ops);
  Matrix wz = z;
  wz.scale_rows(ops.w);
  CHECK((p * z - wz).max_abs() <= 1e-12);

  // PSD sampling and symmetry
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto x = test_util::random_vector(n, 1000 + s);
    const auto px = densela::matvec(p, x);
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) quad += x[i] * px[i];
    CHECK(quad >= -1e-12);
  }
  CHECK((p - p.transposed()).max_abs() == 0.0);

  // conservation: constants lie in the polynomial space
  const auto pt1 = densela::matvec_transposed(p, ones(n));
  for (double v : pt1) CHECK(std::fabs(v) <= 1e-12);

  // scaled variant stays exact and PSD; nonpositive scaling is rejected
  auto lambda = test_util::random_vector(n, 7);
  for (auto& l : lambda) l = 1.5 + l;  // positive
  const Matrix ps = operators::build_lps(ops.v, ops.w, lambda);
  CHECK((ps * ops.v).max_abs() <= 1e-12);
  CHECK((ps - ps.transposed()).max_abs() == 0.0);
  lambda[3] = -1.0;
  CHECK_THROWS_AS(operators::build_lps(ops.v, ops.w, lambda), std::runtime_error);
}

TEST_CASE("build_upwind: split identities") {
  const auto ops = mc_ops(2, 4);
  const std::size_t n = ops.num_nodes();
  const Matrix p = operators::build_lps(ops.v, ops.w);
  const auto [dp, dm] = operators::build_upwind(ops, p, 0);

  // (D+ + D-)/2 differentiates the polynomial space
  CHECK((((dp + dm) * 0.5) * ops.v - ops.v_x1).max_abs() <= 1e-11);

  // W (D+ - D) = P
  Matrix wdiff = dp - ops.d_x1;
  wdiff.scale_rows(ops.w);
  CHECK((wdiff - p).max_abs() <= 1e-12);

  // symmetric part of W D+ minus E/2 equals +P; for D- it is -P (NSD)
  Matrix wdp = dp;
  wdp.scale_rows(ops.w);
  Matrix sym(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) sym(i, j) = 0.5 * (wdp(i, j) + wdp(j, i));
  CHECK((sym - ops.e_x1 * 0.5 - p).max_abs() <= 1e-12);

  Matrix wdm = dm;
  wdm.scale_rows(ops.w);
  CHECK(densela::max_symmetric_eig(wdm - ops.e_x1 * 0.5) <= 1e-12);
}

TEST_CASE("nullspace: dimensions and the SBP contrast") {
  const auto mc = mc_ops(3, 6);
  const Matrix z = operators::nullspace(mc);
  REQUIRE(z.cols() == 6);
  CHECK((mc.d_x1 * z).max_abs() <= 1e-12);
  CHECK((mc.d_x2 * z).max_abs() <= 1e-12);

  Matrix wz = z;
  wz.scale_rows(mc.w);
  CHECK((densela::multiply_at_b(z, wz) - Matrix::identity(6)).max_abs() <= 1e-12);

  // the min-norm SBP operator does not annihilate the MC nullspace
  const auto sbp = sbp_ops(3, 6);
  CHECK((sbp.d_x1 * z).max_abs() > 1e-3);

  // indefinite norms are refused
  const auto neg = operators::build_mc(2, quadrature::liu_4c_rule(),
                                       quadrature::tri_edge_rules(4));
  CHECK_THROWS_AS(operators::nullspace(neg), std::runtime_error);
  CHECK_THROWS_AS(operators::nullspace(sbp), std::invalid_argument);
}

TEST_CASE("verify_operator: clean and corrupted operators") {
  const auto mc = mc_ops(4, 8);
  const auto rep = operators::verify_operator(mc);
  const double scale = std::max(1.0, mc.q_x1.max_abs());
  CHECK(rep.accuracy_residual <= 1e-11 * scale);
  CHECK(rep.sbp_residual <= 1e-11 * scale);
  CHECK(rep.boundary_accuracy_residual <= 1e-11 * scale);
  CHECK(rep.compatibility_residual <= 1e-11 * scale);
  CHECK(rep.nullspace_dim == mc.num_nodes() - mc.poly_dim() + 1);  // +1 for constants

  auto corrupted = mc;
  corrupted.d_x1(2, 3) += 1e-3;
  const auto bad = operators::verify_operator(corrupted);
  CHECK(bad.accuracy_residual >= 1e-4);
  CHECK(bad.accuracy_residual <= 1e-2);

  for (int p = 2; p <= 5; ++p) {
    const auto sbp = sbp_ops(p, 2 * p);
    const auto r = operators::verify_operator(sbp);
    CHECK(r.max_residual() <= 1e-10 * std::max(1.0, sbp.q_x1.max_abs()));
    CHECK(r.nullspace_dim == 1);  // constants only: nullspace consistent
  }
}

TEST_CASE("operator JSON bundle: lossless, deterministic, complete") {
  namespace fs = std::filesystem;
  const auto ops = mc_ops(3, 6);
  const fs::path path = fs::temp_directory_path() / "mcsbp_ops_test.json";

  operators::save_json(ops, path);
  const auto back = operators::load_json(path);
  CHECK(operators::to_json_string(back) == operators::to_json_string(ops));
  CHECK((back.d_x1 - ops.d_x1).max_abs() == 0.0);
  CHECK((back.r_gamma - ops.r_gamma).max_abs() == 0.0);
  CHECK(back.degree == ops.degree);
  CHECK(back.vol.is_collapsed());

  const auto rep = operators::verify_operator(back);
  CHECK(rep.max_residual() <= 1e-10 * std::max(1.0, back.q_x1.max_abs()));

  // schema names every matrix in the set
  const std::string text = operators::to_json_string(ops);
  for (const char* key : {"\"W\"", "\"W_gamma\"", "\"N_x1\"", "\"N_x2\"", "\"V\"",
                          "\"V_x1\"", "\"V_x2\"", "\"V_gamma\"", "\"D_x1\"", "\"D_x2\"",
                          "\"Q_x1\"", "\"Q_x2\"", "\"E_x1\"", "\"E_x2\"", "\"R_gamma\""})
    CHECK(text.find(key) != std::string::npos);

  fs::remove(path);
}
