#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "gaugeflow/harness.hpp"
#include "gaugeflow/verify.hpp"

using namespace gaugeflow;
namespace fs = std::filesystem;

namespace {

Json minimal_config(const std::string& out_dir) {
  Json j;
  j["schemaVersion"] = 1;
  j["model"] = {{"family", "heisenberg"}, {"spin", 0.5},
                {"chain", Json::array({1.0})}};
  j["protocol"] = {{"kind", "constant"}, {"value", Json::array({0.0, 0.0, 1.0})}};
  j["horizon"] = 1.0;
  j["grid"] = {{"points", 11}};
  j["initialState"] = {{"type", "random"}, {"seed", 7}};
  j["observables"] = Json::array({"sz_0", "sz_tot", "s2_tot", "energy_htilde",
                                  "purity_0", "norm"});
  j["output"] = {{"directory", out_dir}};
  return j;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("minimal_experiment_passes_all_checks", "[harness]") {
  TempDir dir("gaugeflow_minimal");
  const ExperimentConfig cfg = parse_config(minimal_config(dir.path.string()));
  const ExperimentResult result = run_experiment(cfg);
  CHECK(result.report.all_pass());
  CHECK(fs::exists(dir.path / "observables.csv"));
  CHECK(fs::exists(dir.path / "report.json"));
  for (const auto& c : result.report.checks)
    INFO(c.name << " " << c.measured);
  // conventions recorded in the report
  CHECK(result.report.conventions.count("ising_phase") == 1);
}

TEST_CASE("experiment_is_deterministic", "[harness]") {
  TempDir a("gaugeflow_det_a"), b("gaugeflow_det_b");
  run_experiment(parse_config(minimal_config(a.path.string())));
  run_experiment(parse_config(minimal_config(b.path.string())));
  CHECK(slurp(a.path / "observables.csv") == slurp(b.path / "observables.csv"));
}

TEST_CASE("outputs_are_not_overwritten_without_flag", "[harness]") {
  TempDir dir("gaugeflow_overwrite");
  Json j = minimal_config(dir.path.string());
  run_experiment(parse_config(j));
  CHECK_THROWS_AS(run_experiment(parse_config(j)), ConfigError);
  j["output"]["overwrite"] = true;
  CHECK_NOTHROW(run_experiment(parse_config(j)));
}

TEST_CASE("config_errors_leave_no_output", "[harness]") {
  TempDir dir("gaugeflow_caperr");
  Json j = minimal_config(dir.path.string());
  // 21 spin-1/2 sites exceed the dimension cap
  j["model"]["chain"] = Json::array();
  for (int k = 0; k < 20; ++k) j["model"]["chain"].push_back(1.0);
  CHECK_THROWS_AS(parse_config(j), ConfigError);
  CHECK_FALSE(fs::exists(dir.path / "observables.csv"));

  Json bad = minimal_config(dir.path.string());
  bad.erase("schemaVersion");
  CHECK_THROWS_AS(parse_config(bad), ConfigError);

  Json noseed = minimal_config(dir.path.string());
  noseed["initialState"] = {{"type", "random"}};
  CHECK_THROWS_AS(parse_config(noseed), ConfigError);

  Json badtol = minimal_config(dir.path.string());
  badtol["tolerances"] = {{"ode", -1.0}};
  CHECK_THROWS_AS(parse_config(badtol), ConfigError);
}

TEST_CASE("observable_names_resolve", "[harness]") {
  TempDir dir("gaugeflow_obs");
  Json j = minimal_config(dir.path.string());
  j["observables"] = Json::array({"sx_0", "sy_1", "sz_tot", "purity_1"});
  const ExperimentConfig cfg = parse_config(j);
  const ExperimentResult r = run_experiment(cfg);
  CHECK(r.series.values.size() == 4);
  CHECK_NOTHROW(r.series.at("sy_1"));

  Json bad = minimal_config(dir.path.string() + "_bad");
  bad["observables"] = Json::array({"sz_9"});
  CHECK_THROWS_AS(run_experiment(parse_config(bad)), ConfigError);
}

TEST_CASE("trajectory_export_schema", "[harness]") {
  TempDir dir("gaugeflow_traj");
  Json j = minimal_config(dir.path.string());
  j["protocol"] = {{"kind", "rotating"}, {"amplitude", 0.8},
                   {"omega", 1.3},      {"phase", 0.0},
                   {"bz", 0.4}};
  j["horizon"] = 5.0;
  const auto path = run_trajectory_export(parse_config(j));
  const std::string text = slurp(path);
  CHECK(text.rfind("t,K,nx,ny,nz,xi_plus_re,", 0) == 0);
  // grid rows plus the header
  CHECK(std::count(text.begin(), text.end(), '\n') == 12);
}

TEST_CASE("eigenstate_and_product_initial_states", "[harness]") {
  TempDir dir("gaugeflow_init");
  Json j = minimal_config(dir.path.string());
  j["initialState"] = {{"type", "eigenstate"}, {"index", 0}, {"of", "htilde"}};
  CHECK(run_experiment(parse_config(j)).report.all_pass());

  Json jp = minimal_config(dir.path.string() + "_p");
  jp["initialState"] = {{"type", "product"},
                        {"blochTheta", Json::array({0.3, 1.2})},
                        {"blochPhi", Json::array({0.0, 2.1})}};
  CHECK(run_experiment(parse_config(jp)).report.all_pass());

  // spin coherent state points where it should
  const ComplexVector psi = spin_coherent(0.5, kPi / 2.0, 0.0);
  const SpinMatrices sm = spin_matrices(0.5);
  CHECK(psi.dot(sm.sx * psi).real() == Catch::Approx(0.5).margin(1e-12));
  const ComplexVector psi2 = spin_coherent(1.0, 0.7, 1.1);
  const SpinMatrices sm1 = spin_matrices(1.0);
  CHECK(psi2.dot(sm1.sz * psi2).real() ==
        Catch::Approx(std::cos(0.7)).margin(1e-12));
  CHECK(psi2.dot(sm1.sx * psi2).real() ==
        Catch::Approx(std::sin(0.7) * std::cos(1.1)).margin(1e-12));
}

TEST_CASE("verify_suite_selection_and_fault_injection", "[harness]") {
  CHECK_THROWS_AS(verify_suite("nonsense", VerifyOptions{}), ConfigError);

  // the quickest genuine suite
  const VerificationReport ff = verify_suite("freefermion", VerifyOptions{});
  CHECK(ff.all_pass());

  // the documented fault flips the negative control into a correct mapping,
  // which the control check reports as a failure
  VerifyOptions fault;
  fault.inject_fault = true;
  bool control_failed = false;
  const VerificationReport bad = verify_suite("invariants", fault);
  for (const auto& c : bad.checks)
    if (c.name.find("negative_control") != std::string::npos && !c.pass)
      control_failed = true;
  CHECK_FALSE(bad.all_pass());
  CHECK(control_failed);
}

TEST_CASE("report_json_round_trip", "[harness]") {
  VerificationReport r;
  r.conventions = adopted_conventions();
  r.checks.push_back(make_check("alpha", 1e-9, 1e-6));
  r.checks.push_back(make_check("beta", 2.0, 1.0));
  const Json j = report_to_json(r);
  CHECK(j.at("pass") == false);
  CHECK(j.at("checks").size() == 2);
  CHECK(j.at("checks").at(0).at("pass") == true);
}
