#include "nsdg/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace nsdg {

namespace {

using nlohmann::json;

double parse_fraction(const json& v, const char* what) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    const auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return std::stod(s);
      return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
    } catch (const std::exception&) {
    }
  }
  throw std::invalid_argument(std::string("config: cannot parse number for ") + what);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

const char* scheme_name(Scheme s) {
  return s == Scheme::fully_implicit ? "fully_implicit" : "semi_implicit";
}

StudyConfig parse_config_json(const std::string& text) {
  json j = json::parse(text);
  StudyConfig c;
  if (j.contains("case")) c.case_name = j["case"].get<std::string>();
  if (j.contains("scheme")) {
    const std::string s = j["scheme"].get<std::string>();
    if (s == "fully_implicit")
      c.scheme = Scheme::fully_implicit;
    else if (s == "semi_implicit")
      c.scheme = Scheme::semi_implicit;
    else
      throw std::invalid_argument("config: unknown scheme '" + s + "'");
  }
  if (j.contains("k")) c.k = j["k"].get<int>();
  if (j.contains("ell")) c.ell = j["ell"].get<int>();
  if (c.k != 1 && c.k != 2) throw std::invalid_argument("config: k must be 1 or 2");
  c.nus.clear();
  if (j.contains("nu")) {
    if (j["nu"].is_array())
      for (const auto& v : j["nu"]) c.nus.push_back(parse_fraction(v, "nu"));
    else
      c.nus.push_back(parse_fraction(j["nu"], "nu"));
  } else {
    c.nus.push_back(1.0);
  }
  if (j.contains("meshes"))
    for (const auto& v : j["meshes"]) c.mesh_n.push_back(v.get<int>());
  if (j.contains("mesh_files"))
    for (const auto& v : j["mesh_files"])
      c.mesh_files.emplace_back(v.at(0).get<std::string>(), v.at(1).get<std::string>());
  if (c.num_meshes() == 0) c.mesh_n = {8};
  if (j.contains("taus"))
    for (const auto& v : j["taus"]) c.taus.push_back(parse_fraction(v, "taus"));
  if (c.taus.empty()) c.taus = {1.0 / 6.0};
  for (double t : c.taus)
    if (!(t > 0.0)) throw std::invalid_argument("config: taus must be positive");
  if (j.contains("sigma")) c.sigma = parse_fraction(j["sigma"], "sigma");
  if (j.contains("c_s")) c.c_s = parse_fraction(j["c_s"], "c_s");
  if (j.contains("fixed_point_tol")) c.fixed_point_tol = j["fixed_point_tol"].get<double>();
  if (j.contains("max_fixed_point_iters"))
    c.max_fixed_point_iters = j["max_fixed_point_iters"].get<int>();
  if (j.contains("linear_solver_tol"))
    c.linear_solver_tol = j["linear_solver_tol"].get<double>();
  if (j.contains("T")) c.final_time = parse_fraction(j["T"], "T");
  if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
  if (j.contains("rate_bands"))
    for (auto it = j["rate_bands"].begin(); it != j["rate_bands"].end(); ++it)
      c.rate_bands[it.key()] = {it.value().at(0).get<double>(),
                                it.value().at(1).get<double>()};
  return c;
}

StudyConfig load_config(const std::string& path) {
  return parse_config_json(read_file(path));
}

RunResult run_single(const StudyConfig& config, int mesh_index, int tau_index,
                     int nu_index) {
  const auto start = std::chrono::steady_clock::now();

  std::shared_ptr<const Mesh> mesh;
  if (mesh_index < static_cast<int>(config.mesh_n.size()))
    mesh = std::make_shared<Mesh>(build_structured_mesh(config.mesh_n[mesh_index]));
  else {
    const auto& files = config.mesh_files.at(mesh_index - config.mesh_n.size());
    mesh = std::make_shared<Mesh>(
        load_triangle_mesh(read_file(files.first), read_file(files.second)));
  }

  const double nu = config.nus.at(nu_index);
  const double tau = config.taus.at(tau_index);
  const int num_slabs = static_cast<int>(std::lround(config.final_time / tau));
  if (num_slabs < 1 || std::abs(num_slabs * tau - config.final_time) > 1e-9 * config.final_time)
    throw std::invalid_argument("run_single: tau must divide the final time");

  const ManufacturedCase mcase = manufactured_case(config.case_name, nu);
  const VelocitySpace vs = build_velocity_space(mesh, config.k);
  const PressureSpace ps = build_pressure_space(mesh, config.k);
  const TimeGrid grid = uniform_time_grid(config.final_time, num_slabs, config.time_degree());

  Problem problem;
  problem.forcing = mcase.forcing;
  problem.initial = mcase.initial;
  problem.nu = nu;
  if (!mcase.homogeneous_boundary) problem.dirichlet = mcase.velocity;

  SolverConfig sc;
  sc.fixed_point_tol = config.fixed_point_tol;
  sc.max_fixed_point_iters = config.max_fixed_point_iters;
  sc.linear_solver_tol = config.linear_solver_tol;
  sc.scheme = config.scheme;
  sc.c_s = config.c_s;
  sc.sigma = config.penalty();

  const Trajectory traj = (config.scheme == Scheme::fully_implicit)
                              ? run_fully_implicit(vs, ps, grid, problem, sc)
                              : run_semi_implicit(vs, ps, grid, problem, sc);

  RunResult r;
  r.case_name = config.case_name;
  r.scheme = config.scheme;
  r.k = config.k;
  r.ell = config.time_degree();
  r.nu = nu;
  r.h = mesh->h;
  r.tau = tau;
  r.report = error_energy(vs, ps, traj, mcase);
  r.fp_iters = traj.fp_iters;
  r.fp_iters_total = traj.total_fp_iters();
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

namespace {

double metric_value(const RunResult& r, const std::string& metric) {
  if (metric == "err_u") return r.report.err_u;
  if (metric == "linf_l2") return r.report.linf_l2_velocity;
  if (metric == "a_norm") return std::sqrt(r.report.a_norm_sq_weighted);
  if (metric == "gamma_jump") return std::sqrt(r.report.gamma_jump_sq);
  if (metric == "p_final") return r.report.pressure_l2_final;
  throw std::invalid_argument("unknown metric: " + metric);
}

const std::vector<std::string> kMetrics = {"err_u", "linf_l2", "a_norm", "gamma_jump",
                                           "p_final"};

} // namespace

ConvergenceResult run_convergence(const StudyConfig& config, StudyMode mode) {
  ConvergenceResult res;
  res.mode = mode;

  int levels = 0;
  switch (mode) {
    case StudyMode::space_time:
      levels = std::min<int>(config.num_meshes(), static_cast<int>(config.taus.size()));
      break;
    case StudyMode::time_only:
      levels = static_cast<int>(config.taus.size());
      break;
    case StudyMode::nu_sweep:
      levels = static_cast<int>(config.nus.size());
      break;
  }
  if (levels < 2) throw std::invalid_argument("run_convergence: need at least 2 levels");

  for (int l = 0; l < levels; ++l) {
    try {
      switch (mode) {
        case StudyMode::space_time:
          res.runs.push_back(run_single(config, l, l, 0));
          break;
        case StudyMode::time_only:
          res.runs.push_back(run_single(config, 0, l, 0));
          break;
        case StudyMode::nu_sweep:
          res.runs.push_back(run_single(config, 0, 0, l));
          break;
      }
    } catch (const std::exception& e) {
      res.failure = "level " + std::to_string(l) + ": " + e.what();
      res.bands_pass = false;
      break;
    }
  }

  if (mode != StudyMode::nu_sweep && res.runs.size() >= 2) {
    std::vector<double> sizes;
    for (const auto& r : res.runs)
      sizes.push_back(mode == StudyMode::space_time ? r.h : r.tau);
    for (const auto& metric : kMetrics) {
      std::vector<double> errs;
      bool positive = true;
      for (const auto& r : res.runs) {
        const double v = metric_value(r, metric);
        positive = positive && v > 0.0;
        errs.push_back(v);
      }
      if (positive) res.rates[metric] = convergence_rates(errs, sizes);
    }
    for (const auto& [metric, band] : config.rate_bands) {
      auto it = res.rates.find(metric);
      if (it == res.rates.end() || it->second.empty()) {
        res.bands_pass = false;
        continue;
      }
      const double rate = it->second.back();
      if (!(rate >= band[0] && rate <= band[1])) res.bands_pass = false;
    }
  }

  if (mode == StudyMode::nu_sweep && !res.runs.empty()) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : res.runs)
      if (r.nu <= 1e-3) {
        lo = std::min(lo, r.report.err_u);
        hi = std::max(hi, r.report.err_u);
      }
    if (hi > 0.0 && std::isfinite(lo)) res.plateau_spread = hi / lo - 1.0;
  }
  return res;
}

std::string results_csv(const std::vector<RunResult>& runs) {
  std::ostringstream out;
  out << "case,scheme,k,ell,nu,h,tau,err_u,linf_l2,a_norm,gamma_jump,p_final,max_div,"
         "fp_iters_total,wall_seconds\n";
  for (const auto& r : runs) {
    out << r.case_name << ',' << scheme_name(r.scheme) << ',' << r.k << ',' << r.ell
        << ',' << fmt(r.nu) << ',' << fmt(r.h) << ',' << fmt(r.tau) << ','
        << fmt(r.report.err_u) << ',' << fmt(r.report.linf_l2_velocity) << ','
        << fmt(std::sqrt(r.report.a_norm_sq_weighted)) << ','
        << fmt(std::sqrt(r.report.gamma_jump_sq)) << ','
        << fmt(r.report.pressure_l2_final) << ',' << fmt(r.report.max_divergence) << ','
        << r.fp_iters_total << ',' << fmt(r.wall_seconds) << '\n';
  }
  return out.str();
}

std::string rates_csv(const ConvergenceResult& result) {
  std::ostringstream out;
  out << "pair";
  for (const auto& m : kMetrics) out << ',' << m << "_rate";
  out << '\n';
  const size_t pairs = result.runs.size() >= 2 ? result.runs.size() - 1 : 0;
  for (size_t p = 0; p < pairs; ++p) {
    out << (p + 1) << "->" << (p + 2);
    for (const auto& m : kMetrics) {
      out << ',';
      auto it = result.rates.find(m);
      if (it != result.rates.end() && p < it->second.size()) out << fmt(it->second[p]);
    }
    out << '\n';
  }
  return out.str();
}

void emit_report(const StudyConfig& config, const ConvergenceResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  {
    std::ofstream f(fs::path(config.out_dir) / "results.csv");
    if (!f) throw std::runtime_error("emit_report: cannot write to " + config.out_dir);
    f << results_csv(result.runs);
  }
  if (result.runs.size() >= 2 && result.mode != StudyMode::nu_sweep) {
    std::ofstream f(fs::path(config.out_dir) / "rates.csv");
    f << rates_csv(result);
  }
  {
    json meta = json::array();
    for (const auto& r : result.runs) {
      json m;
      m["case"] = r.case_name;
      m["scheme"] = scheme_name(r.scheme);
      m["k"] = r.k;
      m["ell"] = r.ell;
      m["nu"] = r.nu;
      m["h"] = r.h;
      m["tau"] = r.tau;
      m["fp_iters"] = r.fp_iters;
      m["wall_seconds"] = r.wall_seconds;
      meta.push_back(m);
    }
    std::ofstream f(fs::path(config.out_dir) / "runs.json");
    f << meta.dump(2) << '\n';
  }
  {
    std::ofstream f(fs::path(config.out_dir) / "summary.txt");
    f << "case " << config.case_name << " scheme " << scheme_name(config.scheme) << " k "
      << config.k << " ell " << config.time_degree() << '\n';
    f << "levels completed: " << result.runs.size() << '\n';
    if (!result.failure.empty()) f << "FAILED: " << result.failure << '\n';
    for (const auto& [metric, rates] : result.rates) {
      f << metric << " rates:";
      for (double r : rates) f << ' ' << fmt(r);
      f << '\n';
    }
    if (result.plateau_spread)
      f << "err_u spread over nu <= 1e-3: " << fmt(*result.plateau_spread) << '\n';
    for (const auto& [metric, band] : config.rate_bands) {
      auto it = result.rates.find(metric);
      const bool ok = it != result.rates.end() && !it->second.empty() &&
                      it->second.back() >= band[0] && it->second.back() <= band[1];
      f << "band " << metric << " [" << fmt(band[0]) << ", " << fmt(band[1])
        << "]: " << (ok ? "pass" : "FAIL") << '\n';
    }
    f << (result.bands_pass && result.failure.empty() ? "PASS" : "FAIL") << '\n';
  }
}

} // namespace nsdg
