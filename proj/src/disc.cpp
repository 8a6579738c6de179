#include "mcsbp/disc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mcsbp::disc {

using densela::Matrix;

namespace {

/// Entropy-conservative two-point flux for the quadratic flux u^2/2.
inline double ec_flux(double ul, double ur) {
  return (ul * ul + ul * ur + ur * ur) / 6.0;
}

void check_mc(const operators::OperatorSet& ops, const char* who) {
  if (ops.kind != operators::Kind::ModalCollocation)
    throw std::invalid_argument(std::string(who) +
                                ": requires a modal-collocation operator set");
}

}  // namespace

std::vector<double> AdvectionSystem::forcing(double t) const {
  std::vector<double> g(face_nodes.size());
  for (std::size_t m = 0; m < g.size(); ++m) g[m] = boundary_data(face_nodes[m], t);
  return densela::matvec(boundary_lift, g);
}

void AdvectionSystem::rhs(std::span<const double> u, double t,
                          std::span<double> dudt) const {
  const std::vector<double> au = densela::matvec(a, u);
  const std::vector<double> b = forcing(t);
  for (std::size_t i = 0; i < dudt.size(); ++i) dudt[i] = au[i] + b[i];
}

AdvectionSystem advection_system(const operators::OperatorSet& ops,
                                 std::array<double, 2> alpha, SpaceTimeFn g) {
  const std::size_t n = ops.num_nodes(), m = ops.num_face_nodes();

  AdvectionSystem sys;
  sys.boundary_data = std::move(g);
  sys.face_nodes.reserve(m);
  for (const auto& e : ops.faces.edges)
    sys.face_nodes.insert(sys.face_nodes.end(), e.nodes.begin(), e.nodes.end());

  sys.n_minus.resize(m);
  sys.n_plus.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double an = alpha[0] * ops.n_x1[k] + alpha[1] * ops.n_x2[k];
    sys.n_minus[k] = std::min(0.0, an);
    sys.n_plus[k] = std::max(0.0, an);
  }

  std::vector<double> winv(n);
  for (std::size_t i = 0; i < n; ++i) winv[i] = 1.0 / ops.w[i];

  // W^{-1} R^T W_G N_- as the common boundary factor
  std::vector<double> wn(m);
  for (std::size_t k = 0; k < m; ++k) wn[k] = ops.w_gamma[k] * sys.n_minus[k];
  Matrix rt = ops.r_gamma.transposed();
  rt.scale_rows(winv);
  Matrix inflow = rt;
  inflow.scale_cols(wn);

  sys.a = ops.d_x1 * (-alpha[0]) + ops.d_x2 * (-alpha[1]) + inflow * ops.r_gamma;
  sys.boundary_lift = inflow * (-1.0);
  return sys;
}

Matrix dg_reduce_matrix(const Matrix& a, const operators::OperatorSet& ops) {
  check_mc(ops, "dg_reduce_matrix");
  Matrix wav = a * ops.v;
  wav.scale_rows(ops.w);
  return multiply_at_b(ops.v, wav);
}

std::vector<double> dg_reduce_vector(std::span<const double> b,
                                     const operators::OperatorSet& ops) {
  check_mc(ops, "dg_reduce_vector");
  std::vector<double> wb(b.begin(), b.end());
  for (std::size_t i = 0; i < wb.size(); ++i) wb[i] *= ops.w[i];
  return densela::matvec_transposed(ops.v, wb);
}

SpectrumReport spectrum(const Matrix& a) {
  SpectrumReport rep;
  rep.eigenvalues = densela::eig_general(a);
  rep.zero_tol = 1e-8 * std::max(1.0, a.max_abs());
  for (const auto& l : rep.eigenvalues) {
    const double mag = std::abs(l);
    rep.spectral_radius = std::max(rep.spectral_radius, mag);
    if (mag <= rep.zero_tol) ++rep.zero_count;
  }
  return rep;
}

double exact_burgers(double x1, double t) {
  if (t < 0.0 || t > 1.0)
    throw std::invalid_argument("exact_burgers: t must lie in [0, 1]");
  auto residual = [&](double g) { return g - std::sin(x1 - t * g); };

  double g = std::sin(x1);
  bool converged = false;
  for (int it = 0; it < 100; ++it) {
    const double r = residual(g);
    if (std::fabs(r) <= 1e-14) {
      converged = true;
      break;
    }
    const double dr = 1.0 + t * std::cos(x1 - t * g);
    if (std::fabs(dr) < 1e-8) break;  // near-breaking: hand off to bisection
    g -= r / dr;
  }
  if (!converged && std::fabs(residual(g)) > 1e-14) {
    // residual is monotone nondecreasing in g for t <= 1
    double lo = -1.0 - 1e-12, hi = 1.0 + 1e-12;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (residual(mid) <= 0.0)
        lo = mid;
      else
        hi = mid;
    }
    g = 0.5 * (lo + hi);
    if (std::fabs(residual(g)) > 1e-13)
      throw std::runtime_error("exact_burgers: no convergence at x1 = " +
                               std::to_string(x1) + ", t = " + std::to_string(t));
  }
  return g;
}

BurgersScheme::BurgersScheme(BurgersVariant variant, const mesh::PeriodicTriMesh& grid,
                             operators::OperatorSet ref_ops)
    : variant_(variant), grid_(&grid), ref_ops_(std::move(ref_ops)) {
  check_mc(ref_ops_, "BurgersScheme");
  mesh::validate_face_alignment(grid, ref_ops_.faces);

  for (int cls = 0; cls < 2; ++cls) {
    phys_[cls] = mesh::physical_operators(ref_ops_, grid.class_maps[cls]);
    const auto& po = phys_[cls];
    const std::size_t n = po.num_nodes();

    Matrix s(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        s(i, j) = 0.5 * (po.q_x1(i, j) - po.q_x1(j, i));
    skew_x1_[cls] = std::move(s);

    std::vector<double> winv(n);
    for (std::size_t i = 0; i < n; ++i) winv[i] = 1.0 / po.w[i];
    Matrix lift = po.r_gamma.transposed();
    lift.scale_rows(winv);
    lift_[cls] = std::move(lift);
  }

  Matrix vtw(ref_ops_.poly_dim(), ref_ops_.num_nodes());
  for (std::size_t k = 0; k < ref_ops_.num_nodes(); ++k)
    for (std::size_t i = 0; i < ref_ops_.poly_dim(); ++i)
      vtw(i, k) = ref_ops_.v(k, i) * ref_ops_.w[k];
  projection_ = ref_ops_.v * vtw;
}

basis::Point BurgersScheme::node_position(int k, std::size_t i) const {
  return grid_->maps[k].apply(ref_ops_.vol.nodes[i]);
}

Field BurgersScheme::exact_field(double t) const {
  Field f(grid_->num_elements, nodes_per_element());
  for (int k = 0; k < grid_->num_elements; ++k)
    for (std::size_t i = 0; i < nodes_per_element(); ++i)
      f.at(k, i) = exact_burgers(node_position(k, i).x1, t);
  return f;
}

double BurgersScheme::l2_norm_squared(const Field& u) const {
  double s = 0.0;
  for (int k = 0; k < grid_->num_elements; ++k) {
    const auto& w = phys_[grid_->elem_class[k]].w;
    const auto uk = u.element(k);
    for (std::size_t i = 0; i < uk.size(); ++i) s += uk[i] * uk[i] * w[i];
  }
  return s;
}

void BurgersScheme::rhs_nodal_impl(const Field& u, double /*t*/, Field& dudt,
                                   bool project) const {
  const std::size_t n = nodes_per_element();
  const std::size_t m = ref_ops_.num_face_nodes();
  const Field mine = mesh::face_traces(u, ref_ops_);
  const Field uplus = mesh::exchange_traces(u, *grid_, ref_ops_);

  std::vector<double> f(n), facevec(m), rf(m), rate(n), proj_rate(n);
  std::vector<double> fvals(m);

  for (int k = 0; k < grid_->num_elements; ++k) {
    const int cls = grid_->elem_class[k];
    const auto& po = phys_[cls];
    const auto uk = u.element(k);
    auto out = dudt.element(k);

    if (variant_ == BurgersVariant::kStandard) {
      for (std::size_t i = 0; i < n; ++i) f[i] = 0.5 * uk[i] * uk[i];
      // interior divergence
      for (std::size_t i = 0; i < n; ++i) {
        const double* row = po.d_x1.row_ptr(i);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * f[j];
        rate[i] = -s;
      }
      // face flux difference: W_G N_x1 (q* - R f)
      for (std::size_t q = 0; q < m; ++q) {
        const double* row = ref_ops_.r_gamma.row_ptr(q);
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += row[j] * f[j];
        rf[q] = s;
      }
      for (std::size_t q = 0; q < m; ++q) {
        const double ubar = 0.5 * (mine.at(k, q) + uplus.at(k, q));
        const double qstar = 0.5 * ubar * ubar;
        facevec[q] = po.w_gamma[q] * po.n_x1[q] * (qstar - rf[q]);
      }
      const Matrix& lift = lift_[cls];
      for (std::size_t i = 0; i < n; ++i) {
        const double* row = lift.row_ptr(i);
        double s = 0.0;
        for (std::size_t q = 0; q < m; ++q) s += row[q] * facevec[q];
        rate[i] -= s;
      }
    } else {
      // entropy-conservative hybridized form:
      // W du = -2 (S o F_vv) 1 - (R^T B o F_vf) 1 + R^T (B R o F_fv) 1 - R^T B f*
      const Matrix& s = skew_x1_[cls];
      for (std::size_t i = 0; i < n; ++i) {
        const double* srow = s.row_ptr(i);
        const double ui = uk[i];
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j)
          acc += srow[j] * (ui * ui + ui * uk[j] + uk[j] * uk[j]);
        rate[i] = -2.0 * acc / 6.0;
      }
      // volume-face coupling and the face flux, accumulated through R^T B
      for (std::size_t q = 0; q < m; ++q) {
        const double b = po.w_gamma[q] * po.n_x1[q];
        const double um = mine.at(k, q);
        const double* rrow = ref_ops_.r_gamma.row_ptr(q);
        double t3 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double fim = ec_flux(uk[i], um);
          rate[i] -= b * rrow[i] * fim;  // -(R^T B o F_vf) 1
          t3 += rrow[i] * fim;           // (B R o F_fv) 1 entry q, before b
        }
        fvals[q] = b * (t3 - ec_flux(um, uplus.at(k, q)));
      }
      for (std::size_t q = 0; q < m; ++q) {
        const double* rrow = ref_ops_.r_gamma.row_ptr(q);
        for (std::size_t i = 0; i < n; ++i) rate[i] += rrow[i] * fvals[q];
      }
      // scale by W^{-1}
      for (std::size_t i = 0; i < n; ++i) rate[i] /= po.w[i];
    }

    if (project) {
      for (std::size_t i = 0; i < n; ++i) {
        const double* row = projection_.row_ptr(i);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * rate[j];
        proj_rate[i] = acc;
      }
      std::copy(proj_rate.begin(), proj_rate.end(), out.begin());
    } else {
      std::copy(rate.begin(), rate.end(), out.begin());
    }
  }
}

void BurgersScheme::rhs(const Field& u, double t, Field& dudt) const {
  rhs_nodal_impl(u, t, dudt,
                 variant_ == BurgersVariant::kEntropyConservativeProjected);
}

void BurgersScheme::rhs_modal(const Field& u_modal, double t, Field& out) const {
  const Field u = nodal_from_modal(u_modal);
  Field rate(u.num_elements, u.stride);
  rhs(u, t, rate);
  const std::size_t np = modal_dim(), n = nodes_per_element();
  for (std::size_t k = 0; k < u.num_elements; ++k) {
    const auto rk = rate.element(k);
    auto ok = out.element(k);
    for (std::size_t i = 0; i < np; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += ref_ops_.v(j, i) * ref_ops_.w[j] * rk[j];
      ok[i] = s;
    }
  }
}

Field BurgersScheme::nodal_from_modal(const Field& u_modal) const {
  const std::size_t np = modal_dim(), n = nodes_per_element();
  Field u(u_modal.num_elements, n);
  for (std::size_t k = 0; k < u_modal.num_elements; ++k) {
    const auto mk = u_modal.element(k);
    auto uk = u.element(k);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = ref_ops_.v.row_ptr(i);
      double s = 0.0;
      for (std::size_t j = 0; j < np; ++j) s += row[j] * mk[j];
      uk[i] = s;
    }
  }
  return u;
}

Field BurgersScheme::modal_from_nodal(const Field& u) const {
  const std::size_t np = modal_dim(), n = nodes_per_element();
  Field um(u.num_elements, np);
  for (std::size_t k = 0; k < u.num_elements; ++k) {
    const auto uk = u.element(k);
    auto mk = um.element(k);
    for (std::size_t i = 0; i < np; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += ref_ops_.v(j, i) * ref_ops_.w[j] * uk[j];
      mk[i] = s;
    }
  }
  return um;
}

Field project_field(const Field& u, const operators::OperatorSet& ops) {
  check_mc(ops, "project_field");
  const std::size_t n = ops.num_nodes(), np = ops.poly_dim();
  Field out(u.num_elements, n);
  std::vector<double> modal(np);
  for (std::size_t k = 0; k < u.num_elements; ++k) {
    const auto uk = u.element(k);
    for (std::size_t i = 0; i < np; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += ops.v(j, i) * ops.w[j] * uk[j];
      modal[i] = s;
    }
    auto ok = out.element(k);
    for (std::size_t j = 0; j < n; ++j) {
      const double* row = ops.v.row_ptr(j);
      double s = 0.0;
      for (std::size_t i = 0; i < np; ++i) s += row[i] * modal[i];
      ok[j] = s;
    }
  }
  return out;
}

std::vector<double> lsrk45_integrate(const RhsFn& rhs, std::vector<double> state,
                                     double dt, double t_final) {
  // Carpenter-Kennedy five-stage fourth-order low-storage coefficients
  static const double kA[5] = {0.0,
                               -567301805773.0 / 1357537059087.0,
                               -2404267990393.0 / 2016746695238.0,
                               -3550918686646.0 / 2091501179385.0,
                               -1275806237668.0 / 842570457699.0};
  static const double kB[5] = {1432997174477.0 / 9575080441755.0,
                               5161836677717.0 / 13612068292357.0,
                               1720146321549.0 / 2090206949498.0,
                               3134564353537.0 / 4481467310338.0,
                               2277821191437.0 / 14882151754819.0};
  static const double kC[5] = {0.0,
                               1432997174477.0 / 9575080441755.0,
                               2526269341429.0 / 6820363962896.0,
                               2006345519317.0 / 3224310063776.0,
                               2802321613138.0 / 2924317926251.0};

  if (dt <= 0.0 || t_final < 0.0)
    throw std::invalid_argument("lsrk45_integrate: dt and t_final must be positive");
  if (t_final == 0.0) return state;
  const long steps = std::max(1L, std::lround(t_final / dt));
  const double h = t_final / static_cast<double>(steps);

  const std::size_t n = state.size();
  std::vector<double> du(n, 0.0), k(n, 0.0);
  double t = 0.0;
  for (long step = 0; step < steps; ++step) {
    std::fill(du.begin(), du.end(), 0.0);
    for (int stage = 0; stage < 5; ++stage) {
      rhs(state, t + kC[stage] * h, k);
      for (std::size_t i = 0; i < n; ++i) {
        du[i] = kA[stage] * du[i] + h * k[i];
        state[i] += kB[stage] * du[i];
      }
    }
    t += h;
    for (std::size_t i = 0; i < n; ++i)
      if (std::isnan(state[i]))
        throw std::runtime_error("lsrk45_integrate: NaN in state after step " +
                                 std::to_string(step + 1));
  }
  return state;
}

double l2_diff(const Field& a, const Field& b, const mesh::PeriodicTriMesh& mesh,
               const operators::OperatorSet& ref_ops) {
  if (a.num_elements != b.num_elements || a.stride != b.stride)
    throw std::invalid_argument("l2_diff: shape mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.num_elements; ++k) {
    const double jk = mesh.maps[k].det();
    const auto ak = a.element(k);
    const auto bk = b.element(k);
    for (std::size_t i = 0; i < a.stride; ++i) {
      const double d = ak[i] - bk[i];
      s += d * d * ref_ops.w[i] * jk;
    }
  }
  return std::sqrt(std::max(0.0, s));
}

double l2_diff_element(std::span<const double> a, std::span<const double> b,
                       std::span<const double> w) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d * w[i];
  }
  return std::sqrt(std::max(0.0, s));
}

}  // namespace mcsbp::disc
