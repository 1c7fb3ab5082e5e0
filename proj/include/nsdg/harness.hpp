#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nsdg/analysis.hpp"

namespace nsdg {

enum class StudyMode { space_time, time_only, nu_sweep };

struct StudyConfig {
  std::string case_name = "sol1";
  Scheme scheme = Scheme::fully_implicit;
  int k = 1;
  int ell = -1; // < 0: same as k
  std::vector<double> nus = {1.0};
  std::vector<int> mesh_n;                                // structured sizes
  std::vector<std::pair<std::string, std::string>> mesh_files; // .node/.ele paths
  std::vector<double> taus;
  double sigma = -1.0; // < 0: 10 k^2
  double c_s = 1e-8;
  double fixed_point_tol = 1e-8;
  int max_fixed_point_iters = 100;
  double linear_solver_tol = 1e-12;
  double final_time = 1.0;
  std::string out_dir = "out";
  // metric -> [lo, hi] band for the rate on the last refinement pair
  std::map<std::string, std::array<double, 2>> rate_bands;

  int time_degree() const { return ell < 0 ? k : ell; }
  double penalty() const { return sigma < 0.0 ? 10.0 * k * k : sigma; }
  int num_meshes() const {
    return static_cast<int>(mesh_n.size() + mesh_files.size());
  }
};

StudyConfig parse_config_json(const std::string& text);
StudyConfig load_config(const std::string& path);

struct RunResult {
  std::string case_name;
  Scheme scheme;
  int k = 1, ell = 1;
  double nu = 1.0, h = 0.0, tau = 0.0;
  ErrorReport report;
  int fp_iters_total = 0;
  std::vector<int> fp_iters;
  double wall_seconds = 0.0;
};

// Runs one (mesh, tau, nu) combination of the config.
RunResult run_single(const StudyConfig& config, int mesh_index = 0, int tau_index = 0,
                     int nu_index = 0);

struct ConvergenceResult {
  StudyMode mode = StudyMode::space_time;
  std::vector<RunResult> runs;
  // metric name -> per-adjacent-pair rates (space_time/time_only only)
  std::map<std::string, std::vector<double>> rates;
  bool bands_pass = true;
  // nu_sweep plateau: max relative spread of err_u over nu <= 1e-3
  std::optional<double> plateau_spread;
  std::string failure; // non-empty if a level failed (partial results kept)
};

ConvergenceResult run_convergence(const StudyConfig& config, StudyMode mode);

// CSV emission: results.csv (one row per run, fixed column order), a
// rates.csv block when two or more levels exist, and summary.txt.
std::string results_csv(const std::vector<RunResult>& runs);
std::string rates_csv(const ConvergenceResult& result);
void emit_report(const StudyConfig& config, const ConvergenceResult& result);

const char* scheme_name(Scheme s);

} // namespace nsdg
