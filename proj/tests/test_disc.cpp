#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "mcsbp/disc.hpp"
#include "mcsbp/experiments.hpp"
#include "test_util.hpp"

using namespace mcsbp;
using densela::Matrix;
namespace exd = experiments::detail;

namespace {

constexpr double kPi = std::numbers::pi;
const double kIsq2 = 1.0 / std::sqrt(2.0);

operators::OperatorSet mc_ops(int p, int q) {
  return operators::build_mc(p, quadrature::collapsed_tri_rule(q),
                             quadrature::tri_edge_rules(q));
}

disc::BurgersScheme make_scheme(disc::BurgersVariant v, const mesh::PeriodicTriMesh& m,
                                int p, int q) {
  return disc::BurgersScheme(v, m, mc_ops(p, q));
}

}  // namespace

TEST_CASE("advection_system: normal velocity split and boundary structure") {
  const auto ops = mc_ops(3, 6);
  const auto sys = disc::advection_system(ops, {kIsq2, kIsq2}, exd::advection_exact);
  const std::size_t me = ops.faces.edges[0].size();

  for (std::size_t q = 0; q < ops.num_face_nodes(); ++q) {
    const double an = kIsq2 * ops.n_x1[q] + kIsq2 * ops.n_x2[q];
    CHECK(sys.n_minus[q] + sys.n_plus[q] == doctest::Approx(an).epsilon(1e-14));
    if (q < 2 * me) {  // bottom and left edges: inflow at -1/sqrt(2)
      CHECK(sys.n_minus[q] == doctest::Approx(-kIsq2));
      CHECK(sys.n_plus[q] == 0.0);
    } else {  // hypotenuse: outflow at +1
      CHECK(sys.n_minus[q] == 0.0);
      CHECK(sys.n_plus[q] == doctest::Approx(1.0));
    }
  }

  // constants: the interior derivative vanishes, only the boundary term acts
  const std::size_t n = ops.num_nodes();
  std::vector<double> one(n, 1.0);
  const auto a1 = densela::matvec(sys.a, one);
  std::vector<double> wn(ops.num_face_nodes());
  for (std::size_t q = 0; q < wn.size(); ++q)
    wn[q] = ops.w_gamma[q] * sys.n_minus[q];
  Matrix rt = ops.r_gamma.transposed();
  std::vector<double> winv(n);
  for (std::size_t i = 0; i < n; ++i) winv[i] = 1.0 / ops.w[i];
  rt.scale_rows(winv);
  rt.scale_cols(wn);
  const auto boundary_only = densela::matvec(rt * ops.r_gamma, one);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(std::fabs(a1[i] - boundary_only[i]) <= 1e-12 * std::max(1.0, sys.a.max_abs()));

  // energy: W A + A^T W = -R^T W_G |N| R is negative semidefinite
  Matrix wa = sys.a;
  wa.scale_rows(ops.w);
  const Matrix sym = wa + wa.transposed();
  CHECK(densela::max_symmetric_eig(sym) <= 1e-10 * std::max(1.0, sym.max_abs()));
}

TEST_CASE("dg_reduce: identity, spectrum partition, first-mode sources") {
  const auto ops = mc_ops(3, 6);
  const std::size_t n = ops.num_nodes(), np = ops.poly_dim();

  CHECK((disc::dg_reduce_matrix(Matrix::identity(n), ops) - Matrix::identity(np))
            .max_abs() <= 1e-12);

  const auto sys = disc::advection_system(ops, {kIsq2, kIsq2}, exd::advection_exact);
  const Matrix at = disc::dg_reduce_matrix(sys.a, ops);
  const auto full = disc::spectrum(sys.a);
  const auto red = disc::spectrum(at);
  CHECK(full.zero_count == n - np);
  CHECK(red.zero_count == 0);

  // nonzero eigenvalues of A match sigma(A_tilde) by nearest-pair matching
  densela::ComplexList nonzero;
  for (const auto& l : full.eigenvalues)
    if (std::abs(l) > full.zero_tol) nonzero.push_back(l);
  REQUIRE(nonzero.size() == np);
  CHECK(test_util::multiset_distance(nonzero, red.eigenvalues) <=
        1e-8 * std::max(1.0, full.spectral_radius));

  // constant source reduces to the first mode only
  std::vector<double> b(n, 0.7);
  const auto bt = disc::dg_reduce_vector(b, ops);
  CHECK(bt[0] == doctest::Approx(0.7 * std::sqrt(2.0)).epsilon(1e-13));
  for (std::size_t i = 1; i < np; ++i) CHECK(std::fabs(bt[i]) <= 1e-13);
}

TEST_CASE("spectrum: MC nonzero set is quadrature independent; SBP radius grows") {
  const auto s6 = disc::spectrum(
      disc::advection_system(mc_ops(3, 6), {kIsq2, kIsq2}, exd::advection_exact).a);
  const auto s12 = disc::spectrum(
      disc::advection_system(mc_ops(3, 12), {kIsq2, kIsq2}, exd::advection_exact).a);
  CHECK(s6.zero_count == 16 - 10);
  CHECK(s12.zero_count == 49 - 10);

  auto nonzero = [](const disc::SpectrumReport& r) {
    densela::ComplexList out;
    for (const auto& l : r.eigenvalues)
      if (std::abs(l) > r.zero_tol) out.push_back(l);
    return out;
  };
  CHECK(test_util::multiset_distance(nonzero(s6), nonzero(s12)) <=
        1e-8 * std::max(1.0, s6.spectral_radius));

  auto sbp_radius = [](int q) {
    const auto ops = operators::build_sbp_minnorm(
        3, quadrature::collapsed_tri_rule(q), quadrature::tri_edge_rules(q));
    return disc::spectrum(
               disc::advection_system(ops, {kIsq2, kIsq2}, exd::advection_exact).a)
        .spectral_radius;
  };
  const double r6 = sbp_radius(6), r12 = sbp_radius(12), r18 = sbp_radius(18);
  CHECK(r12 > r6);
  CHECK(r18 > r12);
}

TEST_CASE("exact_burgers: closed-form cases and the bisection oracle") {
  for (double x : {0.3, 1.7, 4.0}) CHECK(disc::exact_burgers(x, 0.0) ==
                                         doctest::Approx(std::sin(x)).epsilon(1e-14));
  CHECK(disc::exact_burgers(0.0, 0.7) == doctest::Approx(0.0));

  // independent bisection oracle at (pi/2, 0.5)
  auto residual = [](double g, double x, double t) { return g - std::sin(x - t * g); };
  double lo = -1.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid, kPi / 2.0, 0.5) <= 0.0 ? lo : hi) = mid;
  }
  CHECK(disc::exact_burgers(kPi / 2.0, 0.5) ==
        doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));

  // residual contract across the domain, including the breaking point
  for (double t : {0.0, 0.25, 0.5, 0.9, 1.0})
    for (int i = 0; i <= 40; ++i) {
      const double x = 2.0 * kPi * i / 40.0;
      const double g = disc::exact_burgers(x, t);
      CHECK(std::fabs(residual(g, x, t)) <= 1e-13);
    }
  CHECK_THROWS_AS(disc::exact_burgers(1.0, 1.5), std::invalid_argument);
}

TEST_CASE("burgers_rhs: free-stream preservation for all variants") {
  const auto m = mesh::build_periodic_mesh(3);
  for (auto variant : {disc::BurgersVariant::kStandard,
                       disc::BurgersVariant::kEntropyConservative,
                       disc::BurgersVariant::kEntropyConservativeProjected}) {
    const auto scheme = make_scheme(variant, m, 2, 4);
    mesh::Field u(m.num_elements, scheme.nodes_per_element());
    std::fill(u.values.begin(), u.values.end(), 1.3);
    mesh::Field dudt(m.num_elements, scheme.nodes_per_element());
    scheme.rhs(u, 0.0, dudt);
    for (double v : dudt.values) CHECK(std::fabs(v) <= 1e-12);
  }
}

TEST_CASE("burgers_rhs: entropy conservation and global conservation") {
  const auto m = mesh::build_periodic_mesh(4);
  const auto ec = make_scheme(disc::BurgersVariant::kEntropyConservative, m, 2, 4);
  const std::size_t n = ec.nodes_per_element();

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    mesh::Field u(m.num_elements, n);
    u.values = test_util::random_vector(u.values.size(), 500 + seed);
    mesh::Field dudt(m.num_elements, n);
    ec.rhs(u, 0.0, dudt);

    double entropy_rate = 0.0, mass_rate = 0.0, scale = 0.0;
    for (int k = 0; k < m.num_elements; ++k) {
      const auto& w = ec.phys_ops(m.elem_class[k]).w;
      for (std::size_t i = 0; i < n; ++i) {
        entropy_rate += u.at(k, i) * w[i] * dudt.at(k, i);
        mass_rate += w[i] * dudt.at(k, i);
        scale += u.at(k, i) * u.at(k, i) * w[i];
      }
    }
    CHECK(std::fabs(entropy_rate) <= 1e-11 * std::max(1.0, scale));
    CHECK(std::fabs(mass_rate) <= 1e-11 * std::max(1.0, scale));
  }

  // the other variants conserve mass as well (telescoping symmetric fluxes)
  for (auto variant : {disc::BurgersVariant::kStandard,
                       disc::BurgersVariant::kEntropyConservativeProjected}) {
    const auto scheme = make_scheme(variant, m, 2, 4);
    mesh::Field u(m.num_elements, n);
    u.values = test_util::random_vector(u.values.size(), 906);
    mesh::Field dudt(m.num_elements, n);
    scheme.rhs(u, 0.0, dudt);
    double mass_rate = 0.0, scale = 1.0;
    for (int k = 0; k < m.num_elements; ++k) {
      const auto& w = scheme.phys_ops(m.elem_class[k]).w;
      for (std::size_t i = 0; i < n; ++i) {
        mass_rate += w[i] * dudt.at(k, i);
        scale += u.at(k, i) * u.at(k, i) * w[i];
      }
    }
    CHECK(std::fabs(mass_rate) <= 1e-11 * scale);
  }
}

TEST_CASE("rhs_modal matches the reduction of the nodal rate on modal states") {
  const auto m = mesh::build_periodic_mesh(3);
  const auto scheme = make_scheme(disc::BurgersVariant::kStandard, m, 2, 4);
  const std::size_t np = scheme.modal_dim();

  mesh::Field um(m.num_elements, np);
  um.values = test_util::random_vector(um.values.size(), 321);
  mesh::Field out(m.num_elements, np);
  scheme.rhs_modal(um, 0.0, out);

  const mesh::Field u = scheme.nodal_from_modal(um);
  mesh::Field rate(m.num_elements, scheme.nodes_per_element());
  scheme.rhs(u, 0.0, rate);
  const mesh::Field reduced = scheme.modal_from_nodal(rate);
  double err = 0.0;
  for (std::size_t i = 0; i < out.values.size(); ++i)
    err = std::max(err, std::fabs(out.values[i] - reduced.values[i]));
  CHECK(err <= 1e-13);
}

TEST_CASE("Standard variant: MC nullspace coordinates stay at roundoff") {
  const auto m = mesh::build_periodic_mesh(3);
  const auto scheme = make_scheme(disc::BurgersVariant::kStandard, m, 2, 4);
  const auto& ops = scheme.ref_ops();
  const Matrix z = operators::nullspace(ops);
  const std::size_t n = scheme.nodes_per_element();

  mesh::Field u0 = disc::project_field(scheme.exact_field(0.0), ops);
  disc::RhsFn rhs = [&](std::span<const double> s, double t, std::span<double> out) {
    mesh::Field uf(m.num_elements, n);
    std::copy(s.begin(), s.end(), uf.values.begin());
    mesh::Field rf(m.num_elements, n);
    scheme.rhs(uf, t, rf);
    std::copy(rf.values.begin(), rf.values.end(), out.begin());
  };
  const auto state = disc::lsrk45_integrate(rhs, u0.values, 0.02, 0.2);

  double worst = 0.0;
  for (int k = 0; k < m.num_elements; ++k) {
    std::vector<double> wu(n);
    for (std::size_t i = 0; i < n; ++i) wu[i] = ops.w[i] * state[k * n + i];
    const auto zc = densela::matvec_transposed(z, wu);
    for (double c : zc) worst = std::max(worst, std::fabs(c));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("project_field: constants, nullspace annihilation, spectral decay") {
  const auto m = mesh::build_periodic_mesh(3);
  const auto ops2 = mc_ops(2, 4);
  const std::size_t n = ops2.num_nodes();

  mesh::Field c(m.num_elements, n);
  std::fill(c.values.begin(), c.values.end(), -0.4);
  const auto pc = disc::project_field(c, ops2);
  for (double v : pc.values) CHECK(v == doctest::Approx(-0.4).epsilon(1e-13));

  // fields in the nullspace span project to zero
  const Matrix z = operators::nullspace(ops2);
  mesh::Field uz(m.num_elements, n);
  for (int k = 0; k < m.num_elements; ++k)
    for (std::size_t i = 0; i < n; ++i) uz.at(k, i) = z(i, 0) - 0.5 * z(i, z.cols() - 1);
  const auto pz = disc::project_field(uz, ops2);
  for (double v : pz.values) CHECK(std::fabs(v) <= 1e-12);

  // projection error of a sine field decreases with P at fixed mesh
  double prev = 1e300;
  for (int p : {1, 2, 3, 4}) {
    const auto ops = mc_ops(p, 2 * p);
    const auto scheme = make_scheme(disc::BurgersVariant::kStandard, m, p, 2 * p);
    const auto f = scheme.exact_field(0.0);
    const auto pf = disc::project_field(f, ops);
    const double err = disc::l2_diff(f, pf, m, ops);
    CHECK(err < prev);
    prev = err;
  }
}

TEST_CASE("lsrk45: order oracle, exact freeze, linear equivalence") {
  // fourth-order convergence on u' = -u
  disc::RhsFn decay = [](std::span<const double> u, double, std::span<double> out) {
    out[0] = -u[0];
  };
  double prev_err = 0.0, rate = 0.0;
  for (int halving = 0; halving < 4; ++halving) {
    const double dt = 0.1 / (1 << halving);
    const auto u = disc::lsrk45_integrate(decay, {1.0}, dt, 1.0);
    const double err = std::fabs(u[0] - std::exp(-1.0));
    if (halving > 0) {
      rate = std::log2(prev_err / err);
      CHECK(rate == doctest::Approx(4.0).epsilon(0.025));
    }
    prev_err = err;
  }

  // zero RHS: state unchanged bit-for-bit
  disc::RhsFn zero = [](std::span<const double>, double, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
  };
  const std::vector<double> init = {0.123456, -3.25, 7.0};
  const auto frozen = disc::lsrk45_integrate(zero, init, 0.05, 1.0);
  for (std::size_t i = 0; i < init.size(); ++i) CHECK(frozen[i] == init[i]);

  // NaN abort carries the step index
  disc::RhsFn blow = [](std::span<const double> u, double, std::span<double> out) {
    out[0] = u[0] * u[0] * 1e155;
  };
  CHECK_THROWS_AS(disc::lsrk45_integrate(blow, {1e200}, 0.5, 1.0), std::runtime_error);

  // linear system: integrating the reduction and lifting commutes with
  // integrating the full system
  const auto ops = mc_ops(2, 4);
  const auto sys = disc::advection_system(ops, {kIsq2, kIsq2}, exd::advection_exact);
  const Matrix at = disc::dg_reduce_matrix(sys.a, ops);
  const std::size_t n = ops.num_nodes();
  std::vector<double> g0(n);
  for (std::size_t i = 0; i < n; ++i) g0[i] = exd::advection_exact(ops.vol.nodes[i], 0.0);
  const auto m0 = disc::dg_reduce_vector(g0, ops);
  const auto u0 = densela::matvec(ops.v, m0);

  disc::RhsFn full = [&](std::span<const double> u, double t, std::span<double> out) {
    sys.rhs(u, t, out);
  };
  disc::RhsFn reduced = [&](std::span<const double> um, double t, std::span<double> out) {
    const auto au = densela::matvec(at, um);
    const auto b = disc::dg_reduce_vector(sys.forcing(t), ops);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = au[i] + b[i];
  };
  const double dt = 2.0 / 9.0;
  const auto uf = disc::lsrk45_integrate(full, u0, dt, 2.0);
  const auto mf = disc::lsrk45_integrate(reduced, m0, dt, 2.0);
  const auto lifted = densela::matvec(ops.v, mf);
  CHECK(disc::l2_diff_element(lifted, uf, ops.w) <= 1e-12);
}

TEST_CASE("l2_diff: exact cases and a reference-quadrature cross-check") {
  const auto m = mesh::build_periodic_mesh(3);
  const auto ops = mc_ops(2, 4);
  const std::size_t n = ops.num_nodes();

  mesh::Field a(m.num_elements, n), b(m.num_elements, n);
  a.values = test_util::random_vector(a.values.size(), 31);
  b.values = a.values;
  CHECK(disc::l2_diff(a, b, m, ops) == 0.0);

  for (auto& v : b.values) v += 0.3;
  CHECK(disc::l2_diff(a, b, m, ops) == doctest::Approx(0.3 * 2.0 * kPi).epsilon(1e-12));

  // polynomial difference: the 2P-exact element rule integrates d^2 exactly;
  // cross-check against a degree-20 reference rule mapped per element
  auto dpoly = [](basis::Point x) {
    return 0.05 * (x.x1 - kPi) * (x.x2 - kPi) + 0.2 * x.x1;
  };
  mesh::Field zeros(m.num_elements, n), d(m.num_elements, n);
  for (int k = 0; k < m.num_elements; ++k)
    for (std::size_t i = 0; i < n; ++i)
      d.at(k, i) = dpoly(m.maps[k].apply(ops.vol.nodes[i]));
  const double got = disc::l2_diff(d, zeros, m, ops);

  const auto ref = quadrature::collapsed_tri_rule(20);
  double acc = 0.0;
  for (int k = 0; k < m.num_elements; ++k)
    for (std::size_t q = 0; q < ref.size(); ++q) {
      const double val = dpoly(m.maps[k].apply(ref.nodes[q]));
      acc += val * val * ref.weights[q] * m.maps[k].det();
    }
  CHECK(got == doctest::Approx(std::sqrt(acc)).epsilon(1e-12));
}
