#include "mcsbp/mesh.hpp"

#include <cmath>
#include <string>
#include <numbers>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace mcsbp::mesh {

using densela::Matrix;

namespace {

constexpr double kPeriod = 2.0 * std::numbers::pi;

double wrap_distance(double d) {
  return d - kPeriod * std::round(d / kPeriod);
}

}  // namespace

PeriodicTriMesh build_periodic_mesh(int n1d) {
  if (n1d < 2) throw std::invalid_argument("build_periodic_mesh: n1d must be >= 2");

  PeriodicTriMesh m;
  m.n1d = n1d;
  m.num_elements = 2 * n1d * n1d;
  m.h = kPeriod / n1d;
  m.maps.resize(m.num_elements);
  m.elem_class.resize(m.num_elements);
  m.neighbor.resize(m.num_elements);
  const double hh = 0.5 * m.h;

  // class 0: reference -> (c00, c10, c11); class 1: reference -> (c11, c01, c00)
  m.class_maps[0] = {hh, hh, 0.0, hh, 0.0, 0.0};
  m.class_maps[1] = {-hh, -hh, 0.0, -hh, 0.0, 0.0};

  for (int j = 0; j < n1d; ++j) {
    for (int i = 0; i < n1d; ++i) {
      const double x0 = i * m.h, y0 = j * m.h;
      const int lo = m.lower_elem(i, j), up = m.upper_elem(i, j);
      // offsets place the reference vertex (-1,-1) at the first map vertex
      m.maps[lo] = m.class_maps[0];
      m.maps[lo].b1 = x0 + m.h;     // c00 + (B-A)/2 + (C-A)/2
      m.maps[lo].b2 = y0 + hh;
      m.maps[up] = m.class_maps[1];
      m.maps[up].b1 = x0;           // c11 + (B-A)/2 + (C-A)/2
      m.maps[up].b2 = y0 + hh;
      m.elem_class[lo] = 0;
      m.elem_class[up] = 1;
    }
  }

  auto add_face = [&m](int e0, int s0, int e1, int s1) {
    m.faces.push_back({e0, s0, e1, s1});
    m.neighbor[e0][s0] = {e1, s1};
    m.neighbor[e1][s1] = {e0, s0};
  };
  for (int j = 0; j < n1d; ++j) {
    for (int i = 0; i < n1d; ++i) {
      const int ip = (i + 1) % n1d, jp = (j + 1) % n1d;
      // diagonal of the quad
      add_face(m.lower_elem(i, j), quadrature::kEdgeLeft,
               m.upper_elem(i, j), quadrature::kEdgeLeft);
      // right side of the quad
      add_face(m.lower_elem(i, j), quadrature::kEdgeHypotenuse,
               m.upper_elem(ip, j), quadrature::kEdgeHypotenuse);
      // top side of the quad
      add_face(m.upper_elem(i, j), quadrature::kEdgeBottom,
               m.lower_elem(i, jp), quadrature::kEdgeBottom);
    }
  }

  validate_face_alignment(m, quadrature::tri_edge_rules(2));
  return m;
}

std::string mesh_summary_json(const PeriodicTriMesh& mesh) {
  nlohmann::json j;
  j["n1d"] = mesh.n1d;
  j["num_elements"] = mesh.num_elements;
  j["h"] = mesh.h;
  j["num_faces"] = mesh.faces.size();
  j["class_map"] = mesh.elem_class;
  nlohmann::json faces = nlohmann::json::array();
  for (const auto& f : mesh.faces)
    faces.push_back({{"elem", f.elem},
                     {"edge", f.edge},
                     {"nbr_elem", f.nbr_elem},
                     {"nbr_edge", f.nbr_edge}});
  j["faces"] = faces;
  return j.dump(1);
}

void validate_face_alignment(const PeriodicTriMesh& mesh,
                             const quadrature::FaceSet& faces, double tol) {
  for (const FaceRecord& f : mesh.faces) {
    const auto& mine = faces.edges[f.edge];
    const auto& theirs = faces.edges[f.nbr_edge];
    if (mine.size() != theirs.size())
      throw std::runtime_error("face alignment: edge rule size mismatch");
    const std::size_t me = mine.size();
    for (std::size_t k = 0; k < me; ++k) {
      const basis::Point a = mesh.maps[f.elem].apply(mine.nodes[k]);
      const basis::Point b = mesh.maps[f.nbr_elem].apply(theirs.nodes[me - 1 - k]);
      if (std::fabs(wrap_distance(a.x1 - b.x1)) > tol ||
          std::fabs(wrap_distance(a.x2 - b.x2)) > tol)
        throw std::runtime_error(
            "face alignment: matched nodes do not coincide (elements " +
            std::to_string(f.elem) + "/" + std::to_string(f.nbr_elem) + ")");
    }
  }
}

operators::OperatorSet physical_operators(const operators::OperatorSet& ref,
                                          const AffineMap& map) {
  const double det = map.det();
  if (std::fabs(det) < 1e-300)
    throw std::invalid_argument("physical_operators: singular element map");
  if (det <= 0.0)
    throw std::invalid_argument("physical_operators: element map must be orientation-preserving");

  // A^{-1}; derivative push-forward uses d xi_e / d x_d = (A^{-1})_{ed}
  const double ia11 = map.a22 / det, ia12 = -map.a12 / det;
  const double ia21 = -map.a21 / det, ia22 = map.a11 / det;

  operators::OperatorSet phys = ref;

  const std::size_t n = ref.num_nodes();
  for (std::size_t k = 0; k < n; ++k) {
    phys.vol.nodes[k] = map.apply(ref.vol.nodes[k]);
    phys.w[k] = det * ref.w[k];
    phys.vol.weights[k] = phys.w[k];
  }
  phys.vol.strictly_positive = ref.vol.strictly_positive;

  phys.d_x1 = ref.d_x1 * ia11 + ref.d_x2 * ia21;
  phys.d_x2 = ref.d_x1 * ia12 + ref.d_x2 * ia22;
  phys.v_x1 = ref.v_x1 * ia11 + ref.v_x2 * ia21;
  phys.v_x2 = ref.v_x1 * ia12 + ref.v_x2 * ia22;

  phys.q_x1 = phys.d_x1;
  phys.q_x1.scale_rows(phys.w);
  phys.q_x2 = phys.d_x2;
  phys.q_x2.scale_rows(phys.w);
  phys.e_x1 = phys.q_x1 + phys.q_x1.transposed();
  phys.e_x2 = phys.q_x2 + phys.q_x2.transposed();

  std::size_t off = 0;
  for (std::size_t e = 0; e < 3; ++e) {
    const auto& rede = ref.faces.edges[e];
    auto& phe = phys.faces.edges[e];
    phe.segment.a = map.apply(rede.segment.a);
    phe.segment.b = map.apply(rede.segment.b);
    // edge vector from the linear part alone so elements of one congruence
    // class produce bitwise-identical face data
    const double tx1 = rede.segment.b.x1 - rede.segment.a.x1;
    const double tx2 = rede.segment.b.x2 - rede.segment.a.x2;
    const double plen = std::hypot(map.a11 * tx1 + map.a12 * tx2,
                                   map.a21 * tx1 + map.a22 * tx2);
    const double wscale = plen / rede.length;
    phe.length = plen;
    // outward normal: A^{-T} n_ref, renormalized
    double nx = ia11 * rede.normal_x1 + ia21 * rede.normal_x2;
    double ny = ia12 * rede.normal_x1 + ia22 * rede.normal_x2;
    const double nn = std::hypot(nx, ny);
    nx /= nn;
    ny /= nn;
    phe.normal_x1 = nx;
    phe.normal_x2 = ny;
    for (std::size_t k = 0; k < rede.size(); ++k) {
      phe.nodes[k] = map.apply(rede.nodes[k]);
      phe.weights[k] = wscale * rede.weights[k];
      phys.w_gamma[off + k] = phe.weights[k];
      phys.n_x1[off + k] = nx;
      phys.n_x2[off + k] = ny;
    }
    off += rede.size();
  }
  // v, v_gamma, r_gamma are values of the mapped basis at mapped nodes and
  // therefore unchanged
  return phys;
}

Field face_traces(const Field& u, const operators::OperatorSet& ref_ops) {
  const std::size_t m = ref_ops.num_face_nodes();
  Field tr(u.num_elements, m);
  for (std::size_t k = 0; k < u.num_elements; ++k) {
    const auto uk = u.element(k);
    auto tk = tr.element(k);
    for (std::size_t r = 0; r < m; ++r) {
      const double* row = ref_ops.r_gamma.row_ptr(r);
      double s = 0.0;
      for (std::size_t i = 0; i < u.stride; ++i) s += row[i] * uk[i];
      tk[r] = s;
    }
  }
  return tr;
}

Field exchange_traces(const Field& u, const PeriodicTriMesh& mesh,
                      const operators::OperatorSet& ref_ops) {
  const Field mine = face_traces(u, ref_ops);
  const std::size_t me = ref_ops.faces.edges[0].size();
  Field uplus(u.num_elements, ref_ops.num_face_nodes());
  for (const FaceRecord& f : mesh.faces) {
    for (std::size_t k = 0; k < me; ++k) {
      uplus.at(f.elem, f.edge * me + k) =
          mine.at(f.nbr_elem, f.nbr_edge * me + (me - 1 - k));
      uplus.at(f.nbr_elem, f.nbr_edge * me + k) =
          mine.at(f.elem, f.edge * me + (me - 1 - k));
    }
  }
  return uplus;
}

}  // namespace mcsbp::mesh
