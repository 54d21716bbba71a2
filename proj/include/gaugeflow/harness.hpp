// Experiment runner: assembles a model + protocol from a config, propagates
// the brute-force route, runs the gauge route when the (family, protocol)
// pair admits one, cross-checks the two, and writes time series plus a
// machine-readable verification report.
#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gaugeflow/config.hpp"
#include "gaugeflow/dynamics.hpp"
#include "gaugeflow/io.hpp"

namespace gaugeflow {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool pass = false;
  double seconds = 0.0;
};

inline CheckResult make_check(const std::string& name, double measured,
                              double threshold, double seconds = 0.0) {
  return {name, measured, threshold, measured <= threshold, seconds};
}

struct VerificationReport {
  std::vector<CheckResult> checks;
  std::map<std::string, std::string> conventions;
  std::map<std::string, double> timings;
  std::map<std::string, double> integrator_stats;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

inline std::map<std::string, std::string> adopted_conventions() {
  return {
      {"ising_phase", "phi_i(t) = + integral_0^t Bx_i(t') dt'"},
      {"gauss_ladder", "B+/- = (Bx -/+ i By)/2"},
      {"envelope_htilde",
       "Htilde_t = H_I - sum_i envelope_i(t) (dy_i Sy_i + dz_i Sz_i), "
       "(dy, dz) the normalized initial transverse direction"},
  };
}

inline Json report_to_json(const VerificationReport& r) {
  Json j;
  j["pass"] = r.all_pass();
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json e;
    e["name"] = c.name;
    e["measured"] = c.measured;
    e["threshold"] = c.threshold;
    e["pass"] = c.pass;
    if (c.seconds > 0.0) e["seconds"] = c.seconds;
    checks.push_back(e);
  }
  j["checks"] = checks;
  j["conventions"] = r.conventions;
  if (!r.timings.empty()) j["timingsSeconds"] = r.timings;
  if (!r.integrator_stats.empty()) j["integratorStats"] = r.integrator_stats;
  return j;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_ = clock::now();
};

// Does this (family, protocol) pair admit a gauge map at all? Construction
// may still reject it (mapping preconditions).
inline bool gauge_route_possible(const HamiltonianModel& m,
                                 const FieldProtocol& p) {
  switch (m.family) {
    case ModelFamily::kHeisenberg:
    case ModelFamily::kFermion:
      return p.homogeneous();
    case ModelFamily::kIsing:
    case ModelFamily::kIsingChain:
    case ModelFamily::kSpinBoson:
      return true;
  }
  return false;
}

struct ExperimentResult {
  VerificationReport report;
  ObservableSeries series;
  std::vector<std::filesystem::path> written;
};

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output.directory);
  const fs::path series_csv = dir / "observables.csv";
  const fs::path series_json = dir / "observables.json";
  const fs::path report_path = dir / "report.json";
  if (!cfg.output.overwrite)
    for (const fs::path& p : {series_csv, series_json, report_path})
      if (fs::exists(p))
        throw ConfigError("refusing to overwrite " + p.string() +
                          " (pass overwrite)");

  ExperimentResult result;
  VerificationReport& report = result.report;
  report.conventions = adopted_conventions();
  Stopwatch total;

  // gauge map (optional)
  std::shared_ptr<GaugeMap> map;
  if (gauge_route_possible(cfg.model, cfg.protocol)) {
    GaugeMapOptions opts;
    opts.ode_tol = cfg.ode_tol;
    map = std::make_shared<GaugeMap>(cfg.model, cfg.protocol, opts);
  }

  const ComplexVector psi0 = build_initial_state(cfg, map.get());

  // brute-force reference
  Stopwatch direct_clock;
  PropagationStats stats;
  const std::vector<ComplexVector> direct =
      propagate_td(cfg.model, cfg.protocol, psi0, cfg.grid,
                   cfg.propagator_tol, &stats);
  report.timings["direct"] = direct_clock.seconds();
  report.integrator_stats["propagator_substeps"] = double(stats.substeps);
  report.integrator_stats["propagator_max_defect"] =
      stats.max_interval_defect;

  double norm_drift = 0.0;
  for (const auto& s : direct)
    norm_drift = std::max(norm_drift, std::abs(s.norm() - 1.0));
  report.checks.push_back(make_check("norm_conservation", norm_drift, 1e-9));

  // gauge route and cross-checks
  if (map) {
    Stopwatch gauge_clock;
    const GaugeEvolution ev = evolve_via_gauge(
        cfg.model, cfg.protocol, psi0, cfg.grid, cfg.propagator_tol,
        GaugeMapOptions{cfg.ode_tol, false});
    report.timings["gauge"] = gauge_clock.seconds();

    double fidelity = 0.0, unitarity = 0.0, residual = 0.0;
    for (std::size_t k = 0; k < cfg.grid.size(); ++k) {
      fidelity = std::max(fidelity,
                          aligned_distance(direct[k], ev.states[k]));
      if (k % 5 == 0) {
        const ComplexMatrix u = map->unitary(cfg.grid[k]);
        unitarity = std::max(
            unitarity,
            (u.adjoint() * u -
             ComplexMatrix::Identity(cfg.model.dim, cfg.model.dim))
                .norm());
        const ComplexMatrix h =
            cfg.model.hamiltonian(cfg.protocol, cfg.grid[k]);
        const ComplexMatrix rebuilt =
            u * map->htilde(cfg.grid[k]) * u.adjoint() -
            map->gauge_potential_analytic(cfg.grid[k]);
        residual = std::max(residual,
                            (h - rebuilt).norm() / std::max(1.0, h.norm()));
      }
    }
    report.checks.push_back(
        make_check("route_agreement", fidelity, cfg.comparison_tol));
    report.checks.push_back(make_check("unitarity", unitarity, 1e-9));
    report.checks.push_back(make_check("gauge_map_residual", residual, 1e-6));
    if (map->collective())
      report.integrator_stats["gauge_ode_steps"] =
          double(map->trajectory().stats.steps);
  }

  // observables from the reference route
  const std::vector<NamedObservable> obs = build_observables(cfg, map.get());
  result.series = expectation_values(direct, cfg.grid, obs, &cfg.model);
  report.timings["total"] = total.seconds();

  fs::create_directories(dir);
  if (cfg.output.csv) {
    write_series_csv(series_csv, result.series);
    result.written.push_back(series_csv);
  }
  if (cfg.output.json) {
    write_json(series_json, series_to_json(result.series));
    result.written.push_back(series_json);
  }
  write_json(report_path, report_to_json(report));
  result.written.push_back(report_path);
  return result;
}

// gauge trajectories only (CLI `trajectory` subcommand)
inline std::filesystem::path run_trajectory_export(
    const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  if (!cfg.protocol.homogeneous())
    throw ConfigError(
        "trajectory export requires a homogeneous protocol (collective "
        "flow)");
  const fs::path dir(cfg.output.directory);
  const fs::path path = dir / "trajectory.csv";
  if (!cfg.output.overwrite && fs::exists(path))
    throw ConfigError("refusing to overwrite " + path.string() +
                      " (pass overwrite)");
  const GaugeTrajectory gauss =
      integrate_gauss(cfg.protocol, cfg.grid, cfg.ode_tol);
  const std::vector<CovariantGaugeState> cov = gauss_to_covariant(gauss);
  fs::create_directories(dir);
  write_trajectory_csv(path, cfg.grid, cov, gauss.gauss);
  return path;
}

}  // namespace gaugeflow
