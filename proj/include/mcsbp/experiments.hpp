#ifndef MCSBP_EXPERIMENTS_HPP
#define MCSBP_EXPERIMENTS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mcsbp/disc.hpp"

namespace mcsbp::experiments {

inline constexpr const char* kVersion = "0.1.0";

/// Tabular result of one experiment: numeric rows under named columns, plus
/// pass/fail bookkeeping for the gates the experiment enforces.
struct RunReport {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> notes;
  bool passed = true;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;

  std::string csv_string() const;  // one header line, 17-significant-digit floats
  void write_csv(const std::filesystem::path& path) const;
  void write_metadata(const std::filesystem::path& path, const std::string& experiment,
                      const std::string& config_summary) const;
};

struct VerifyOpsConfig {
  std::vector<int> degrees{1, 2, 3, 4, 5, 6};
  std::vector<int> quad_mults{2};
  std::string kind = "both";    // mc | sbp | both
  std::string volume = "collapsed";  // collapsed | liu4c
  double tol = 1e-10;
};
RunReport cmd_verify_ops(const VerifyOpsConfig& cfg);

struct AdvectEquivConfig {
  std::vector<int> degrees{3, 6};
  std::vector<int> quad_mults{2, 4};
  double gate = 1e-12;
  double t_final = 2.0;
};
RunReport cmd_advect_equiv(const AdvectEquivConfig& cfg);

struct SpectraConfig {
  std::vector<int> degrees{3};
  std::vector<int> quad_mults{2, 4, 6};
  std::string kind = "mc";  // mc | sbp
};
struct SpectraResult {
  RunReport summary;      // kind, P, Q, N, spectral radius, zero count
  RunReport eigenvalues;  // kind, P, Q, index, re, im
};
SpectraResult cmd_spectra(const SpectraConfig& cfg);

struct NegweightConfig {
  double gate = 1e-12;
  double t_final = 2.0;
};
RunReport cmd_negweight_equiv(const NegweightConfig& cfg);

struct BurgersConfig {
  std::string scheme = "standard";  // standard | ec | ec-projected
  std::vector<int> degrees{1, 2};
  std::vector<int> n1d{4, 8, 16};
  int quad_mult = 2;
  double cfl = 0.5;
  double t_final = 1.0;
  bool compare_dg = true;
  std::optional<double> diff_gate;  // MC-vs-DG gate when set
};
RunReport cmd_burgers(const BurgersConfig& cfg);

struct ExportOpsConfig {
  int degree = 3;
  int quad_mult = 2;
  std::string kind = "mc";
  std::filesystem::path out_file;
};
RunReport cmd_export_ops(const ExportOpsConfig& cfg);

/// Shared building blocks (also used by the acceptance suite).
namespace detail {

/// Collapsed-rule MC or SBP operator set at quadrature degree q.
operators::OperatorSet build_ops(const std::string& kind, int p, int q);

/// Boundary/exact data for the advection study.
double advection_exact(basis::Point x, double t);

/// March the MC system and its modal reduction side by side; returns the
/// terminal L2 difference sqrt((V u_tilde - u)^T W (V u_tilde - u)).
double advect_mc_dg_diff(const operators::OperatorSet& ops, double t_final);

struct BurgersCase {
  double l2_error = 0.0;
  double mc_dg_diff = 0.0;
  double entropy_drift = 0.0;
  std::size_t steps = 0;
};
BurgersCase run_burgers_case(disc::BurgersVariant variant, int p, int q, int n1d,
                             double cfl, double t_final, bool compare_dg);

disc::BurgersVariant parse_variant(const std::string& scheme);

}  // namespace detail

}  // namespace mcsbp::experiments

#endif  // MCSBP_EXPERIMENTS_HPP
