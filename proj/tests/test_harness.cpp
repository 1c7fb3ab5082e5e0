#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "nsdg/harness.hpp"

using namespace nsdg;

namespace {

// strip the volatile wall_seconds column (the last one)
std::string strip_wall(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    const auto pos = line.rfind(',');
    out << line.substr(0, pos) << '\n';
  }
  return out.str();
}

} // namespace

TEST_CASE("config parsing with fractions and defaults") {
  const StudyConfig c = parse_config_json(R"({
    "case": "sol2", "scheme": "semi_implicit", "k": 2,
    "nu": ["1e-3", 1.0], "meshes": [4, 8], "taus": ["1/3", "1/6"],
    "T": 1.0, "out": "tmp_out",
    "rate_bands": {"err_u": [1.7, 2.3]}
  })");
  CHECK(c.case_name == "sol2");
  CHECK(c.scheme == Scheme::semi_implicit);
  CHECK(c.k == 2);
  CHECK(c.time_degree() == 2);        // ell defaults to k
  CHECK(c.penalty() == 40.0);         // sigma defaults to 10 k^2
  CHECK(c.taus[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(c.nus[0] == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(c.rate_bands.at("err_u")[0] == 1.7);

  CHECK_THROWS_AS(parse_config_json(R"({"scheme": "imex"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_json(R"({"k": 3})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_json(R"({"taus": [-1]})"), std::invalid_argument);
}

TEST_CASE("run_single on sol3 produces a near-zero error row") {
  StudyConfig cfg;
  cfg.case_name = "sol3";
  cfg.k = 1;
  cfg.mesh_n = {2};
  cfg.taus = {0.25};
  const RunResult r = run_single(cfg);
  CHECK(r.report.err_u <= 1e-6);
  CHECK(r.report.max_divergence <= 1e-9);
  CHECK(r.h == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));

  const std::string csv = results_csv({r});
  CHECK(csv.find("case,scheme,k,ell,nu,h,tau,err_u,linf_l2,a_norm,gamma_jump,p_final,"
                 "max_div,fp_iters_total,wall_seconds") == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2); // header + 1 row
}

TEST_CASE("tau must divide the final time") {
  StudyConfig cfg;
  cfg.case_name = "sol3";
  cfg.mesh_n = {2};
  cfg.taus = {0.3};
  CHECK_THROWS_AS(run_single(cfg), std::invalid_argument);
}

TEST_CASE("determinism: identical configs give identical rows") {
  StudyConfig cfg;
  cfg.case_name = "sol1";
  cfg.nus = {0.5};
  cfg.mesh_n = {2};
  cfg.taus = {0.5};
  const RunResult a = run_single(cfg);
  const RunResult b = run_single(cfg);
  CHECK(strip_wall(results_csv({a})) == strip_wall(results_csv({b})));
}

TEST_CASE("space-time convergence study with bands and reports") {
  StudyConfig cfg;
  cfg.case_name = "sol1";
  cfg.k = 1;
  cfg.nus = {1.0};
  cfg.mesh_n = {2, 4, 8};
  cfg.taus = {0.5, 0.25, 0.125};
  cfg.out_dir = (std::filesystem::temp_directory_path() / "nsdg_test_out").string();
  cfg.rate_bands["err_u"] = {0.5, 1.6};

  const ConvergenceResult res = run_convergence(cfg, StudyMode::space_time);
  REQUIRE(res.runs.size() == 3);
  CHECK(res.failure.empty());
  REQUIRE(res.rates.count("err_u") == 1);
  CHECK(res.rates.at("err_u").size() == 2);
  // h^k convergence in the diffusion-dominated regime
  CHECK(res.rates.at("err_u").back() > 0.5);
  CHECK(res.bands_pass);

  emit_report(cfg, res);
  CHECK(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / "results.csv"));
  CHECK(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / "rates.csv"));
  CHECK(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / "summary.txt"));
  CHECK(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / "runs.json"));

  const std::string rates = rates_csv(res);
  CHECK(std::count(rates.begin(), rates.end(), '\n') == 3); // header + 2 pairs

  // a band that cannot hold flips the flag
  cfg.rate_bands["err_u"] = {5.0, 6.0};
  const ConvergenceResult res2 = run_convergence(cfg, StudyMode::space_time);
  CHECK_FALSE(res2.bands_pass);
}

TEST_CASE("nu sweep plateau statistic") {
  StudyConfig cfg;
  cfg.case_name = "sol1";
  cfg.k = 1;
  cfg.nus = {1e-3, 1e-4, 1e-5};
  cfg.mesh_n = {2};
  cfg.taus = {0.5};
  const ConvergenceResult res = run_convergence(cfg, StudyMode::nu_sweep);
  REQUIRE(res.runs.size() == 3);
  REQUIRE(res.plateau_spread.has_value());
  CHECK(*res.plateau_spread >= 0.0);
}

TEST_CASE("time-only study uses the fixed first mesh") {
  StudyConfig cfg;
  cfg.case_name = "sol3";
  cfg.k = 1;
  cfg.mesh_n = {2};
  cfg.taus = {0.5, 0.25};
  const ConvergenceResult res = run_convergence(cfg, StudyMode::time_only);
  REQUIRE(res.runs.size() == 2);
  CHECK(res.runs[0].h == res.runs[1].h);
  CHECK(res.runs[0].tau == 0.5);
  CHECK(res.runs[1].tau == 0.25);
}
