// Command-line front end: config-driven experiment runs, predefined
// verification suites, and gauge-trajectory exports.
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gaugeflow/harness.hpp"
#include "gaugeflow/verify.hpp"

namespace {

using namespace gaugeflow;

int default_workers() {
  if (const char* env = std::getenv("GAUGEFLOW_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return 1;
}

void print_checks(const VerificationReport& report) {
  for (const auto& c : report.checks)
    std::cout << (c.pass ? "  [ok]   " : "  [FAIL] ") << c.name
              << "  measured " << format_float(c.measured) << "  threshold "
              << format_float(c.threshold) << "\n";
}

int run_command(const std::string& config_path, const std::string& out_dir,
                const std::vector<std::string>& formats, bool overwrite) {
  ExperimentConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.output.directory = out_dir;
  if (overwrite) cfg.output.overwrite = true;
  if (!formats.empty()) {
    cfg.output.csv = false;
    cfg.output.json = false;
    for (const std::string& f : formats) {
      if (f == "csv")
        cfg.output.csv = true;
      else if (f == "json")
        cfg.output.json = true;
      else
        throw ConfigError("unknown format '" + f + "'");
    }
  }
  const ExperimentResult result = run_experiment(cfg);
  print_checks(result.report);
  for (const auto& p : result.written)
    std::cout << "wrote " << p.string() << "\n";
  return result.report.all_pass() ? 0 : 1;
}

int verify_command(const std::string& suite, int workers, bool inject_fault,
                   const std::string& report_path) {
  VerifyOptions options;
  options.workers = workers;
  options.inject_fault = inject_fault;
  const VerificationReport report = verify_suite(suite, options);
  print_checks(report);
  if (!report_path.empty()) {
    write_json(report_path, report_to_json(report));
    std::cout << "wrote " << report_path << "\n";
  }
  std::cout << (report.all_pass() ? "suite passed" : "suite FAILED") << "\n";
  return report.all_pass() ? 0 : 1;
}

int trajectory_command(const std::string& config_path,
                       const std::string& out_dir, bool overwrite) {
  ExperimentConfig cfg = load_config(config_path);
  if (!out_dir.empty()) cfg.output.directory = out_dir;
  if (overwrite) cfg.output.overwrite = true;
  const auto path = run_trajectory_export(cfg);
  std::cout << "wrote " << path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "gaugeflow: gauge transformations between driven and time-independent "
      "quantum many-body Hamiltonians"};
  app.require_subcommand(1);

  std::string config_path, out_dir, report_path;
  std::vector<std::string> formats;
  bool overwrite = false, inject_fault = false;
  std::string suite = "all";
  int workers = default_workers();

  CLI::App* run = app.add_subcommand("run", "run one configured experiment");
  run->add_option("--config", config_path, "config JSON path")->required();
  run->add_option("--out", out_dir, "output directory (overrides config)");
  run->add_option("--format", formats, "output formats: csv, json");
  run->add_flag("--overwrite", overwrite, "allow overwriting outputs");

  CLI::App* verify =
      app.add_subcommand("verify", "run a predefined verification suite");
  verify->add_option("--suite", suite, "suite name (or 'all')");
  verify->add_option("--workers", workers,
                     "concurrent scenarios (default GAUGEFLOW_WORKERS or 1)");
  verify->add_flag("--inject-fault", inject_fault,
                   "flip the Ising phase sign (negative control; the suite "
                   "must fail)");
  verify->add_option("--report", report_path, "write the report JSON here");

  CLI::App* traj = app.add_subcommand(
      "trajectory", "export gauge trajectories for a configured protocol");
  traj->add_option("--config", config_path, "config JSON path")->required();
  traj->add_option("--out", out_dir, "output directory (overrides config)");
  traj->add_flag("--overwrite", overwrite, "allow overwriting outputs");

  try {
    app.parse(argc, argv);
    if (run->parsed())
      return run_command(config_path, out_dir, formats, overwrite);
    if (verify->parsed())
      return verify_command(suite, workers, inject_fault, report_path);
    if (traj->parsed())
      return trajectory_command(config_path, out_dir, overwrite);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  } catch (const gaugeflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gaugeflow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
