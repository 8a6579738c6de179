#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "mcsbp/operators.hpp"

namespace mcsbp::operators {

namespace {

using nlohmann::json;

json matrix_to_json(const densela::Matrix& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = std::vector<double>(m.data().begin(), m.data().end());
  return j;
}

densela::Matrix matrix_from_json(const json& j) {
  const std::size_t rows = j.at("rows"), cols = j.at("cols");
  const std::vector<double> data = j.at("data");
  if (data.size() != rows * cols)
    throw std::runtime_error("operator bundle: matrix data size mismatch");
  densela::Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data().begin());
  return m;
}

json points_to_json(const std::vector<basis::Point>& pts) {
  json j = json::array();
  for (const auto& p : pts) j.push_back({p.x1, p.x2});
  return j;
}

std::vector<basis::Point> points_from_json(const json& j) {
  std::vector<basis::Point> pts;
  pts.reserve(j.size());
  for (const auto& e : j) pts.push_back({e.at(0), e.at(1)});
  return pts;
}

}  // namespace

std::string to_json_string(const OperatorSet& ops) {
  json j;
  j["schema"] = "mcsbp-operator-set";
  j["version"] = 1;
  j["kind"] = ops.kind == Kind::ModalCollocation ? "mc" : "sbp-minnorm";
  j["degree"] = ops.degree;

  json vol;
  vol["nodes"] = points_to_json(ops.vol.nodes);
  vol["weights"] = ops.vol.weights;
  vol["verified_degree"] = ops.vol.verified_degree;
  vol["strictly_positive"] = ops.vol.strictly_positive;
  if (ops.vol.is_collapsed()) {
    vol["collapsed_1d"] = {{"nodes", ops.vol.collapsed_1d.nodes},
                           {"weights", ops.vol.collapsed_1d.weights}};
  }
  j["volume"] = vol;

  json faces = json::array();
  for (const auto& e : ops.faces.edges) {
    json je;
    je["segment"] = {{"a", {e.segment.a.x1, e.segment.a.x2}},
                     {"b", {e.segment.b.x1, e.segment.b.x2}}};
    je["nodes"] = points_to_json(e.nodes);
    je["weights"] = e.weights;
    je["normal"] = {e.normal_x1, e.normal_x2};
    je["length"] = e.length;
    faces.push_back(je);
  }
  j["faces"] = faces;

  json mats;
  mats["W"] = ops.w;
  mats["W_gamma"] = ops.w_gamma;
  mats["N_x1"] = ops.n_x1;
  mats["N_x2"] = ops.n_x2;
  mats["V"] = matrix_to_json(ops.v);
  mats["V_gamma"] = matrix_to_json(ops.v_gamma);
  mats["V_x1"] = matrix_to_json(ops.v_x1);
  mats["V_x2"] = matrix_to_json(ops.v_x2);
  mats["D_x1"] = matrix_to_json(ops.d_x1);
  mats["D_x2"] = matrix_to_json(ops.d_x2);
  mats["Q_x1"] = matrix_to_json(ops.q_x1);
  mats["Q_x2"] = matrix_to_json(ops.q_x2);
  mats["E_x1"] = matrix_to_json(ops.e_x1);
  mats["E_x2"] = matrix_to_json(ops.e_x2);
  mats["R_gamma"] = matrix_to_json(ops.r_gamma);
  j["matrices"] = mats;

  return j.dump(1);
}

OperatorSet from_json_string(const std::string& text) {
  const json j = json::parse(text);
  if (j.at("schema") != "mcsbp-operator-set")
    throw std::runtime_error("operator bundle: unexpected schema");

  OperatorSet ops;
  const std::string kind = j.at("kind");
  ops.kind = kind == "mc" ? Kind::ModalCollocation : Kind::SbpMinNorm;
  ops.degree = j.at("degree");

  const json& vol = j.at("volume");
  ops.vol.nodes = points_from_json(vol.at("nodes"));
  ops.vol.weights = vol.at("weights").get<std::vector<double>>();
  ops.vol.verified_degree = vol.at("verified_degree");
  ops.vol.strictly_positive = vol.at("strictly_positive");
  if (vol.contains("collapsed_1d")) {
    ops.vol.collapsed_1d.nodes = vol["collapsed_1d"].at("nodes").get<std::vector<double>>();
    ops.vol.collapsed_1d.weights =
        vol["collapsed_1d"].at("weights").get<std::vector<double>>();
  }

  const json& faces = j.at("faces");
  for (std::size_t k = 0; k < 3; ++k) {
    auto& e = ops.faces.edges[k];
    const json& je = faces.at(k);
    e.segment.a = {je.at("segment").at("a").at(0), je.at("segment").at("a").at(1)};
    e.segment.b = {je.at("segment").at("b").at(0), je.at("segment").at("b").at(1)};
    e.nodes = points_from_json(je.at("nodes"));
    e.weights = je.at("weights").get<std::vector<double>>();
    e.normal_x1 = je.at("normal").at(0);
    e.normal_x2 = je.at("normal").at(1);
    e.length = je.at("length");
  }

  const json& mats = j.at("matrices");
  ops.w = mats.at("W").get<std::vector<double>>();
  ops.w_gamma = mats.at("W_gamma").get<std::vector<double>>();
  ops.n_x1 = mats.at("N_x1").get<std::vector<double>>();
  ops.n_x2 = mats.at("N_x2").get<std::vector<double>>();
  ops.v = matrix_from_json(mats.at("V"));
  ops.v_gamma = matrix_from_json(mats.at("V_gamma"));
  ops.v_x1 = matrix_from_json(mats.at("V_x1"));
  ops.v_x2 = matrix_from_json(mats.at("V_x2"));
  ops.d_x1 = matrix_from_json(mats.at("D_x1"));
  ops.d_x2 = matrix_from_json(mats.at("D_x2"));
  ops.q_x1 = matrix_from_json(mats.at("Q_x1"));
  ops.q_x2 = matrix_from_json(mats.at("Q_x2"));
  ops.e_x1 = matrix_from_json(mats.at("E_x1"));
  ops.e_x2 = matrix_from_json(mats.at("E_x2"));
  ops.r_gamma = matrix_from_json(mats.at("R_gamma"));
  return ops;
}

void save_json(const OperatorSet& ops, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_json: cannot open " + path.string());
  out << to_json_string(ops);
}

OperatorSet load_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_json: cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

}  // namespace mcsbp::operators
