#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "nsdg/harness.hpp"

namespace {

using namespace nsdg;

void apply_overrides(StudyConfig& cfg, const std::string& scheme, int k, double nu,
                     const std::string& case_name) {
  if (!scheme.empty()) {
    if (scheme == "fully_implicit")
      cfg.scheme = Scheme::fully_implicit;
    else if (scheme == "semi_implicit")
      cfg.scheme = Scheme::semi_implicit;
    else
      throw std::invalid_argument("unknown scheme: " + scheme);
  }
  if (k > 0) cfg.k = k;
  if (nu > 0.0) cfg.nus = {nu};
  if (!case_name.empty()) cfg.case_name = case_name;
}

int cmd_run(const std::string& config_path, const std::string& out,
            const std::string& scheme, int k, double nu, const std::string& case_name) {
  StudyConfig cfg = load_config(config_path);
  apply_overrides(cfg, scheme, k, nu, case_name);
  if (!out.empty()) cfg.out_dir = out;

  ConvergenceResult res;
  res.mode = StudyMode::space_time;
  res.runs.push_back(run_single(cfg));
  emit_report(cfg, res);
  std::cout << results_csv(res.runs);
  return 0;
}

int cmd_convergence(const std::string& config_path, const std::string& mode_name,
                    const std::string& out, const std::string& scheme, int k, double nu,
                    const std::string& case_name) {
  StudyConfig cfg = load_config(config_path);
  apply_overrides(cfg, scheme, k, nu, case_name);
  if (!out.empty()) cfg.out_dir = out;

  StudyMode mode;
  if (mode_name == "space_time")
    mode = StudyMode::space_time;
  else if (mode_name == "time_only")
    mode = StudyMode::time_only;
  else if (mode_name == "nu_sweep")
    mode = StudyMode::nu_sweep;
  else {
    std::cerr << "unknown mode: " << mode_name << "\n";
    return 2;
  }

  const ConvergenceResult res = run_convergence(cfg, mode);
  emit_report(cfg, res);
  std::cout << results_csv(res.runs);
  if (!res.failure.empty()) std::cerr << "FAILED: " << res.failure << "\n";
  return (res.bands_pass && res.failure.empty()) ? 0 : 1;
}

// Recompute rates from a results.csv produced by this tool.
int cmd_rates(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) {
    std::cerr << "cannot open " << csv_path << "\n";
    return 2;
  }
  std::string line;
  std::getline(in, line); // header
  std::vector<std::array<double, 7>> rows; // h, tau, err_u, linf, a, gamma, p
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> cells;
    while (std::getline(ss, tok, ',')) cells.push_back(tok);
    if (cells.size() < 13) continue;
    rows.push_back({std::stod(cells[5]), std::stod(cells[6]), std::stod(cells[7]),
                    std::stod(cells[8]), std::stod(cells[9]), std::stod(cells[10]),
                    std::stod(cells[11])});
  }
  if (rows.size() < 2) {
    std::cerr << "need at least 2 data rows\n";
    return 2;
  }
  const bool in_h = rows.front()[0] != rows.back()[0];
  std::vector<double> sizes;
  for (const auto& r : rows) sizes.push_back(in_h ? r[0] : r[1]);
  const char* names[5] = {"err_u", "linf_l2", "a_norm", "gamma_jump", "p_final"};
  std::cout << "rates in " << (in_h ? "h" : "tau") << "\n";
  for (int m = 0; m < 5; ++m) {
    std::vector<double> errs;
    bool pos = true;
    for (const auto& r : rows) {
      errs.push_back(r[m + 2]);
      pos = pos && r[m + 2] > 0.0;
    }
    std::cout << names[m] << ":";
    if (pos)
      for (double rate : convergence_rates(errs, sizes)) std::cout << " " << rate;
    else
      std::cout << " (zero error)";
    std::cout << "\n";
  }
  return 0;
}

int cmd_verify_forcing(const std::string& case_name, int samples) {
  const ManufacturedCase c = manufactured_case(case_name, 1.0);
  const double residual = verify_forcing(c, samples);
  std::cout << case_name << " forcing residual: " << residual << "\n";
  return residual <= 1e-6 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"H(div)-DG space-time Navier-Stokes solver"};
  app.require_subcommand(1);

  std::string config_path, out_dir, mode_name, scheme, case_name, csv_path;
  int k = -1, samples = 200;
  double nu = -1.0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON study configuration")->required();
    cmd->add_option("--out", out_dir, "output directory override");
    cmd->add_option("--scheme", scheme, "fully_implicit | semi_implicit");
    cmd->add_option("--k", k, "polynomial degree override");
    cmd->add_option("--nu", nu, "viscosity override");
    cmd->add_option("--case", case_name, "manufactured case override");
  };

  CLI::App* run = app.add_subcommand("run", "single simulation");
  add_common(run);

  CLI::App* conv = app.add_subcommand("convergence", "refinement study");
  add_common(conv);
  conv->add_option("--mode", mode_name, "space_time | time_only | nu_sweep")->required();

  CLI::App* rates = app.add_subcommand("rates", "recompute rates from a results.csv");
  rates->add_option("csv", csv_path, "results.csv path")->required();

  CLI::App* vf = app.add_subcommand("verify-forcing", "check manufactured forcing");
  vf->add_option("--case", case_name, "sol1 | sol2 | sol3")->required();
  vf->add_option("--samples", samples, "number of sample points");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(run)) return cmd_run(config_path, out_dir, scheme, k, nu, case_name);
    if (app.got_subcommand(conv))
      return cmd_convergence(config_path, mode_name, out_dir, scheme, k, nu, case_name);
    if (app.got_subcommand(rates)) return cmd_rates(csv_path);
    if (app.got_subcommand(vf)) return cmd_verify_forcing(case_name, samples);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
