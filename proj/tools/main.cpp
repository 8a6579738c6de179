// Experiment driver: builds triangle operators, runs the advection and
// Burgers studies, and writes CSV/JSON reports.
//
// Exit codes: 0 all gates passed, 1 gate failure, 2 configuration error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcsbp/experiments.hpp"

namespace {

namespace ex = mcsbp::experiments;
namespace fs = std::filesystem;

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s += std::to_string(v[i]);
    if (i + 1 < v.size()) s += ',';
  }
  return s;
}

void emit(const ex::RunReport& rep, const fs::path& out_dir, const std::string& name,
          const std::string& config) {
  fs::create_directories(out_dir);
  rep.write_csv(out_dir / (name + ".csv"));
  rep.write_metadata(out_dir / (name + ".meta.json"), name, config);
  std::printf("%s: %s (%.2fs), wrote %s\n", name.c_str(),
              rep.passed ? "pass" : "FAIL", rep.wall_seconds,
              (out_dir / (name + ".csv")).c_str());
  for (const auto& note : rep.notes) std::printf("  note: %s\n", note.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modal-collocation / SBP triangle operator experiments"};

  std::string experiment;
  std::vector<int> degrees;
  std::vector<int> quad_mults;
  std::vector<int> n1d;
  std::string scheme = "standard";
  std::string kind = "mc";
  std::string out_dir = "out";
  double tol = -1.0;
  bool full = false;

  app.add_option("--experiment", experiment,
                 "verify-ops | advect-equiv | spectra | negweight-equiv | burgers | "
                 "export-ops")
      ->required();
  app.add_option("--degrees", degrees, "polynomial degrees P")->delimiter(',');
  app.add_option("--quad-mult", quad_mults, "quadrature degree multipliers (Q = mult*P)")
      ->delimiter(',');
  app.add_option("--n1d", n1d, "mesh resolutions for the Burgers study")->delimiter(',');
  app.add_option("--scheme", scheme, "standard | ec | ec-projected");
  app.add_option("--kind", kind, "operator kind: mc | sbp | both");
  app.add_option("--out", out_dir, "output directory (or file for export-ops)");
  app.add_option("--tol", tol, "gate tolerance override");
  app.add_flag("--full", full, "run the full (large) parameter sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::fflush(stdout);
    app.exit(e);
    return 2;
  }

  try {
    if (experiment == "verify-ops") {
      ex::VerifyOpsConfig cfg;
      if (!degrees.empty()) cfg.degrees = degrees;
      if (!quad_mults.empty()) cfg.quad_mults = quad_mults;
      cfg.kind = kind == "mc" && app.count("--kind") == 0 ? "both" : kind;
      if (tol > 0.0) cfg.tol = tol;
      const auto rep = ex::cmd_verify_ops(cfg);
      emit(rep, out_dir, "verify-ops",
           "degrees=" + join_ints(cfg.degrees) + " mults=" + join_ints(cfg.quad_mults) +
               " kind=" + cfg.kind);
      return rep.passed ? 0 : 1;
    }
    if (experiment == "advect-equiv") {
      ex::AdvectEquivConfig cfg;
      if (full) {
        cfg.degrees = {3, 6, 9, 12};
        cfg.quad_mults = {2, 4, 6};
      }
      if (!degrees.empty()) cfg.degrees = degrees;
      if (!quad_mults.empty()) cfg.quad_mults = quad_mults;
      if (tol > 0.0) cfg.gate = tol;
      const auto rep = ex::cmd_advect_equiv(cfg);
      emit(rep, out_dir, "advect-equiv",
           "degrees=" + join_ints(cfg.degrees) + " mults=" + join_ints(cfg.quad_mults));
      return rep.passed ? 0 : 1;
    }
    if (experiment == "spectra") {
      ex::SpectraConfig cfg;
      if (!degrees.empty()) cfg.degrees = degrees;
      if (!quad_mults.empty()) cfg.quad_mults = quad_mults;
      cfg.kind = kind;
      const auto res = ex::cmd_spectra(cfg);
      emit(res.summary, out_dir, "spectra-summary",
           "degrees=" + join_ints(cfg.degrees) + " kind=" + cfg.kind);
      emit(res.eigenvalues, out_dir, "spectra", "kind=" + cfg.kind);
      return 0;
    }
    if (experiment == "negweight-equiv") {
      ex::NegweightConfig cfg;
      if (tol > 0.0) cfg.gate = tol;
      const auto rep = ex::cmd_negweight_equiv(cfg);
      emit(rep, out_dir, "negweight-equiv", "P=2 liu4c");
      return rep.passed ? 0 : 1;
    }
    if (experiment == "burgers") {
      ex::BurgersConfig cfg;
      cfg.scheme = scheme;
      if (!degrees.empty()) cfg.degrees = degrees;
      if (!n1d.empty()) cfg.n1d = n1d;
      if (full) cfg.n1d = {4, 8, 16, 32, 64};
      if (!quad_mults.empty()) cfg.quad_mult = quad_mults.front();
      if (tol > 0.0) cfg.diff_gate = tol;
      const auto rep = ex::cmd_burgers(cfg);
      emit(rep, out_dir, "burgers-" + cfg.scheme,
           "scheme=" + cfg.scheme + " degrees=" + join_ints(cfg.degrees) +
               " n1d=" + join_ints(cfg.n1d));
      return rep.passed ? 0 : 1;
    }
    if (experiment == "export-ops") {
      ex::ExportOpsConfig cfg;
      if (!degrees.empty()) cfg.degree = degrees.front();
      if (!quad_mults.empty()) cfg.quad_mult = quad_mults.front();
      cfg.kind = kind;
      fs::path out = out_dir;
      if (out.extension() != ".json") {
        fs::create_directories(out);
        out /= "operators.json";
      } else if (out.has_parent_path()) {
        fs::create_directories(out.parent_path());
      }
      cfg.out_file = out;
      const auto rep = ex::cmd_export_ops(cfg);
      emit(rep, out.parent_path().empty() ? "." : out.parent_path(), "export-ops",
           "P=" + std::to_string(cfg.degree) + " kind=" + cfg.kind);
      return rep.passed ? 0 : 1;
    }
    std::fprintf(stderr, "unknown experiment: %s\n", experiment.c_str());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
