#include "mcsbp/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "json.hpp"

namespace mcsbp::experiments {

using densela::Matrix;
using disc::Field;

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Stopwatch {
public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

private:
  std::chrono::steady_clock::time_point start_;
};

int quad_degree(int p, int mult) {
  const int q = p * mult;
  if (q % 2 != 0 || q < 2)
    throw std::invalid_argument("quadrature degree P*mult must be even and >= 2, got " +
                                std::to_string(q));
  return q;
}

}  // namespace

std::string RunReport::csv_string() const {
  std::string out;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out += columns[j];
    out += (j + 1 < columns.size()) ? ',' : '\n';
  }
  for (const auto& row : rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      out += format_double(row[j]);
      out += (j + 1 < row.size()) ? ',' : '\n';
    }
  }
  return out;
}

void RunReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_csv: cannot open " + path.string());
  f << csv_string();
}

void RunReport::write_metadata(const std::filesystem::path& path,
                               const std::string& experiment,
                               const std::string& config_summary) const {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["config"] = config_summary;
  j["version"] = kVersion;
  j["seed"] = seed;
  j["wall_seconds"] = wall_seconds;
  j["passed"] = passed;
  j["notes"] = notes;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_metadata: cannot open " + path.string());
  f << j.dump(1);
}

namespace detail {

operators::OperatorSet build_ops(const std::string& kind, int p, int q) {
  const auto vol = quadrature::collapsed_tri_rule(q);
  const auto faces = quadrature::tri_edge_rules(q);
  if (kind == "mc") return operators::build_mc(p, vol, faces);
  if (kind == "sbp") return operators::build_sbp_minnorm(p, vol, faces);
  throw std::invalid_argument("unknown operator kind: " + kind);
}

double advection_exact(basis::Point x, double t) {
  return std::sin(2.0 * std::numbers::pi * ((x.x1 + x.x2) / std::sqrt(2.0) - t));
}

double advect_mc_dg_diff(const operators::OperatorSet& ops, double t_final) {
  const double isq2 = 1.0 / std::sqrt(2.0);
  const disc::AdvectionSystem sys =
      disc::advection_system(ops, {isq2, isq2}, advection_exact);
  const Matrix a_tilde = disc::dg_reduce_matrix(sys.a, ops);

  const std::size_t n = ops.num_nodes();
  std::vector<double> g0(n);
  for (std::size_t i = 0; i < n; ++i) g0[i] = advection_exact(ops.vol.nodes[i], 0.0);

  // identical projected initial data for both systems
  std::vector<double> modal0 = disc::dg_reduce_vector(g0, ops);
  std::vector<double> u0 = densela::matvec(ops.v, modal0);

  const double dt = t_final / ((ops.degree + 1.0) * (ops.degree + 1.0));

  disc::RhsFn mc_rhs = [&sys](std::span<const double> u, double t, std::span<double> out) {
    sys.rhs(u, t, out);
  };
  disc::RhsFn dg_rhs = [&](std::span<const double> um, double t, std::span<double> out) {
    const std::vector<double> au = densela::matvec(a_tilde, um);
    const std::vector<double> b = disc::dg_reduce_vector(sys.forcing(t), ops);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = au[i] + b[i];
  };

  const std::vector<double> u = disc::lsrk45_integrate(mc_rhs, u0, dt, t_final);
  const std::vector<double> um = disc::lsrk45_integrate(dg_rhs, modal0, dt, t_final);
  const std::vector<double> lifted = densela::matvec(ops.v, um);
  return disc::l2_diff_element(lifted, u, ops.w);
}

disc::BurgersVariant parse_variant(const std::string& scheme) {
  if (scheme == "standard") return disc::BurgersVariant::kStandard;
  if (scheme == "ec") return disc::BurgersVariant::kEntropyConservative;
  if (scheme == "ec-projected")
    return disc::BurgersVariant::kEntropyConservativeProjected;
  throw std::invalid_argument("unknown scheme: " + scheme);
}

BurgersCase run_burgers_case(disc::BurgersVariant variant, int p, int q, int n1d,
                             double cfl, double t_final, bool compare_dg) {
  const auto grid = mesh::build_periodic_mesh(n1d);
  auto ops = operators::build_mc(p, quadrature::collapsed_tri_rule(q),
                                 quadrature::tri_edge_rules(q));
  const disc::BurgersScheme scheme(variant, grid, std::move(ops));
  const auto& rops = scheme.ref_ops();
  const std::size_t n = scheme.nodes_per_element(), np = scheme.modal_dim();
  const std::size_t k_elems = grid.num_elements;

  Field u0 = disc::project_field(scheme.exact_field(0.0), rops);
  double gmax = 0.0;
  for (double v : u0.values) gmax = std::max(gmax, v);

  const double dt = cfl * grid.h / ((p + 1.0) * (p + 1.0) * gmax / 2.0);
  BurgersCase result;
  result.steps = static_cast<std::size_t>(std::max(1L, std::lround(t_final / dt)));

  disc::RhsFn nodal_rhs = [&](std::span<const double> s, double t, std::span<double> out) {
    Field uf(k_elems, n);
    std::copy(s.begin(), s.end(), uf.values.begin());
    Field rf(k_elems, n);
    scheme.rhs(uf, t, rf);
    std::copy(rf.values.begin(), rf.values.end(), out.begin());
  };

  const double entropy0 = scheme.l2_norm_squared(u0);
  std::vector<double> state = disc::lsrk45_integrate(nodal_rhs, u0.values, dt, t_final);
  Field u(k_elems, n);
  u.values = state;
  result.entropy_drift = scheme.l2_norm_squared(u) - entropy0;

  const Field g = scheme.exact_field(t_final);
  result.l2_error = disc::l2_diff(u, g, grid, rops);

  if (compare_dg) {
    Field m0 = scheme.modal_from_nodal(u0);
    disc::RhsFn modal_rhs = [&](std::span<const double> s, double t, std::span<double> out) {
      Field mf(k_elems, np);
      std::copy(s.begin(), s.end(), mf.values.begin());
      Field rf(k_elems, np);
      scheme.rhs_modal(mf, t, rf);
      std::copy(rf.values.begin(), rf.values.end(), out.begin());
    };
    std::vector<double> mstate = disc::lsrk45_integrate(modal_rhs, m0.values, dt, t_final);
    Field mfinal(k_elems, np);
    mfinal.values = mstate;
    const Field lifted = scheme.nodal_from_modal(mfinal);
    result.mc_dg_diff = disc::l2_diff(u, lifted, grid, rops);
  }
  return result;
}

}  // namespace detail

RunReport cmd_verify_ops(const VerifyOpsConfig& cfg) {
  Stopwatch watch;
  if (cfg.kind != "mc" && cfg.kind != "sbp" && cfg.kind != "both")
    throw std::invalid_argument("cmd_verify_ops: kind must be mc, sbp, or both");
  if (cfg.volume != "collapsed" && cfg.volume != "liu4c")
    throw std::invalid_argument("cmd_verify_ops: volume must be collapsed or liu4c");
  RunReport rep;
  rep.columns = {"kind", "P",        "Q",         "N",
                 "accuracy", "sbp",  "boundary",  "compatibility",
                 "nullspace_dim", "pass"};
  std::vector<std::string> kinds;
  if (cfg.kind == "both")
    kinds = {"mc", "sbp"};
  else
    kinds = {cfg.kind};

  for (const std::string& kind : kinds) {
    for (int p : cfg.degrees) {
      for (int mult : cfg.quad_mults) {
        double kind_code = kind == "mc" ? 0.0 : 1.0;
        int q = 0;
        try {
          operators::OperatorSet ops;
          if (cfg.volume == "liu4c") {
            if (kind != "mc")
              throw std::runtime_error("liu4c volume supports only the mc kind");
            ops = operators::build_mc(p, quadrature::liu_4c_rule(),
                                      quadrature::tri_edge_rules(4));
            q = 4;
          } else {
            q = quad_degree(p, mult);
            ops = detail::build_ops(kind, p, q);
          }
          const auto v = operators::verify_operator(ops);
          const double scale = std::max(1.0, ops.q_x1.max_abs());
          const bool ok = v.max_residual() <= cfg.tol * scale;
          rep.rows.push_back({kind_code, double(p), double(q), double(ops.num_nodes()),
                              v.accuracy_residual, v.sbp_residual,
                              v.boundary_accuracy_residual, v.compatibility_residual,
                              double(v.nullspace_dim), ok ? 1.0 : 0.0});
          rep.passed = rep.passed && ok;
        } catch (const std::exception& e) {
          rep.notes.push_back("kind=" + kind + " P=" + std::to_string(p) + ": " + e.what());
          rep.rows.push_back({kind_code, double(p), double(q), 0.0, -1.0, -1.0, -1.0,
                              -1.0, -1.0, 0.0});
          rep.passed = false;
        }
      }
    }
  }
  rep.wall_seconds = watch.seconds();
  return rep;
}

RunReport cmd_advect_equiv(const AdvectEquivConfig& cfg) {
  Stopwatch watch;
  RunReport rep;
  rep.columns = {"P", "quad_mult", "Q", "N", "l2_diff", "gate", "pass"};
  for (int p : cfg.degrees) {
    for (int mult : cfg.quad_mults) {
      const int q = quad_degree(p, mult);
      const auto ops = detail::build_ops("mc", p, q);
      const double diff = detail::advect_mc_dg_diff(ops, cfg.t_final);
      const bool ok = diff <= cfg.gate;
      rep.rows.push_back({double(p), double(mult), double(q), double(ops.num_nodes()),
                          diff, cfg.gate, ok ? 1.0 : 0.0});
      rep.passed = rep.passed && ok;
    }
  }
  rep.wall_seconds = watch.seconds();
  return rep;
}

SpectraResult cmd_spectra(const SpectraConfig& cfg) {
  Stopwatch watch;
  if (cfg.kind != "mc" && cfg.kind != "sbp")
    throw std::invalid_argument("cmd_spectra: kind must be mc or sbp");
  SpectraResult res;
  res.summary.columns = {"kind", "P", "Q", "N", "spectral_radius", "zero_count"};
  res.eigenvalues.columns = {"kind", "P", "Q", "index", "re", "im"};
  const double kind_code = cfg.kind == "mc" ? 0.0 : 1.0;
  const double isq2 = 1.0 / std::sqrt(2.0);
  for (int p : cfg.degrees) {
    for (int mult : cfg.quad_mults) {
      const int q = quad_degree(p, mult);
      const auto ops = detail::build_ops(cfg.kind, p, q);
      const auto sys = disc::advection_system(ops, {isq2, isq2}, detail::advection_exact);
      const auto spec = disc::spectrum(sys.a);
      res.summary.rows.push_back({kind_code, double(p), double(q), double(ops.num_nodes()),
                                  spec.spectral_radius, double(spec.zero_count)});
      for (std::size_t i = 0; i < spec.eigenvalues.size(); ++i)
        res.eigenvalues.rows.push_back({kind_code, double(p), double(q), double(i),
                                        spec.eigenvalues[i].real(),
                                        spec.eigenvalues[i].imag()});
    }
  }
  res.summary.wall_seconds = watch.seconds();
  res.eigenvalues.wall_seconds = res.summary.wall_seconds;
  return res;
}

RunReport cmd_negweight_equiv(const NegweightConfig& cfg) {
  Stopwatch watch;
  RunReport rep;
  rep.columns = {"P", "N", "l2_diff", "gate", "zero_count", "energy_ratio", "pass"};
  const int p = 2;
  const auto vol = quadrature::liu_4c_rule();
  const auto faces = quadrature::tri_edge_rules(4);
  const auto ops = operators::build_mc(p, vol, faces);

  const double diff = detail::advect_mc_dg_diff(ops, cfg.t_final);

  const double isq2 = 1.0 / std::sqrt(2.0);
  const auto sys = disc::advection_system(ops, {isq2, isq2}, detail::advection_exact);
  const auto spec = disc::spectrum(sys.a);

  // energy boundedness monitor: march and compare modal norms at 0 and T
  const std::size_t n = ops.num_nodes();
  std::vector<double> g0(n);
  for (std::size_t i = 0; i < n; ++i) g0[i] = detail::advection_exact(ops.vol.nodes[i], 0.0);
  std::vector<double> modal0 = disc::dg_reduce_vector(g0, ops);
  std::vector<double> u0 = densela::matvec(ops.v, modal0);
  const double dt = cfg.t_final / ((p + 1.0) * (p + 1.0));
  disc::RhsFn rhs = [&sys](std::span<const double> u, double t, std::span<double> out) {
    sys.rhs(u, t, out);
  };
  const std::vector<double> u = disc::lsrk45_integrate(rhs, u0, dt, cfg.t_final);
  auto modal_norm2 = [&](std::span<const double> v) {
    const std::vector<double> m = disc::dg_reduce_vector(v, ops);
    double s = 0.0;
    for (double x : m) s += x * x;
    return s;
  };
  const double energy_ratio = modal_norm2(u) / modal_norm2(u0);

  const bool ok = diff <= cfg.gate && spec.zero_count == ops.num_nodes() - ops.poly_dim() &&
                  std::isfinite(energy_ratio) && energy_ratio <= 1.0 + 1e-10;
  rep.rows.push_back({double(p), double(ops.num_nodes()), diff, cfg.gate,
                      double(spec.zero_count), energy_ratio, ok ? 1.0 : 0.0});
  rep.passed = ok;
  rep.wall_seconds = watch.seconds();
  return rep;
}

RunReport cmd_burgers(const BurgersConfig& cfg) {
  Stopwatch watch;
  RunReport rep;
  rep.columns = {"P", "n1d", "Q", "l2_error", "rate", "mc_dg_diff", "entropy_drift",
                 "steps"};
  const disc::BurgersVariant variant = detail::parse_variant(cfg.scheme);
  for (int p : cfg.degrees) {
    const int q = quad_degree(p, cfg.quad_mult);
    double prev_err = 0.0;
    int prev_n = 0;
    for (int n1d : cfg.n1d) {
      const auto r = detail::run_burgers_case(variant, p, q, n1d, cfg.cfl, cfg.t_final,
                                              cfg.compare_dg);
      double rate = 0.0;
      if (prev_n > 0 && r.l2_error > 0.0 && prev_err > 0.0)
        rate = std::log(prev_err / r.l2_error) / std::log(double(n1d) / prev_n);
      rep.rows.push_back({double(p), double(n1d), double(q), r.l2_error, rate,
                          r.mc_dg_diff, r.entropy_drift, double(r.steps)});
      if (cfg.diff_gate && cfg.compare_dg && r.mc_dg_diff > *cfg.diff_gate)
        rep.passed = false;
      prev_err = r.l2_error;
      prev_n = n1d;
    }
  }
  rep.wall_seconds = watch.seconds();
  return rep;
}

RunReport cmd_export_ops(const ExportOpsConfig& cfg) {
  Stopwatch watch;
  RunReport rep;
  rep.columns = {"P", "Q", "N", "roundtrip_ok", "deterministic", "verified", "pass"};
  const int q = quad_degree(cfg.degree, cfg.quad_mult);
  const auto ops = detail::build_ops(cfg.kind, cfg.degree, q);

  const std::string text = operators::to_json_string(ops);
  const std::string text2 = operators::to_json_string(ops);
  const bool deterministic = text == text2;

  operators::save_json(ops, cfg.out_file);
  const auto reloaded = operators::load_json(cfg.out_file);
  const bool roundtrip = operators::to_json_string(reloaded) == text;

  const auto v = operators::verify_operator(reloaded);
  const double scale = std::max(1.0, reloaded.q_x1.max_abs());
  const bool verified = v.max_residual() <= 1e-10 * scale;

  const bool ok = roundtrip && deterministic && verified;
  rep.rows.push_back({double(cfg.degree), double(q), double(ops.num_nodes()),
                      roundtrip ? 1.0 : 0.0, deterministic ? 1.0 : 0.0,
                      verified ? 1.0 : 0.0, ok ? 1.0 : 0.0});
  rep.passed = ok;
  rep.wall_seconds = watch.seconds();
  return rep;
}

}  // namespace mcsbp::experiments
