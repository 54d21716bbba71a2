// Predefined verification scenarios. Every mapping the library constructs is
// checked at desk scale against brute-force propagation; the acceptance
// binary and the CLI `verify` subcommand both run these.
#pragma once

#include <atomic>
#include <functional>
#include <thread>

#include "gaugeflow/config.hpp"
#include "gaugeflow/dynamics.hpp"
#include "gaugeflow/freefermion.hpp"
#include "gaugeflow/harness.hpp"

namespace gaugeflow {

struct VerifyOptions {
  bool inject_fault = false;  // flips the Ising phase sign in the mappings
  int workers = 1;
};

struct Scenario {
  std::string id;
  int criterion = 0;
  std::string suite;
  std::function<std::vector<CheckResult>(const VerifyOptions&)> run;
};

namespace verify_detail {

inline FieldProtocol random_smooth_protocol(Rng& rng, double horizon,
                                            double scale) {
  auto comp = [&rng, scale]() {
    std::vector<ScalarPtr> terms;
    terms.push_back(make_constant(scale * rng.uniform(-0.6, 0.6)));
    for (int k = 0; k < 2; ++k)
      terms.push_back(make_sinusoid(scale * rng.uniform(-0.5, 0.5),
                                    rng.uniform(0.3, 2.0),
                                    rng.uniform(0.0, 2.0 * kPi)));
    return make_sum(std::move(terms));
  };
  return FieldProtocol(FieldKind::kSinusoidal,
                       {SiteField::components(comp(), comp(), comp())}, true,
                       horizon);
}

// axis-angle magnitude sweeps through zero (field reverses sign)
inline FieldProtocol zero_crossing_protocol(Rng& rng, double horizon) {
  const double a = rng.uniform(0.6, 1.2);
  const double eps = rng.uniform(0.02, 0.05);
  return FieldProtocol(
      FieldKind::kSinusoidal,
      {SiteField::components(
          make_sinusoid(eps, rng.uniform(0.8, 1.4), 0.0),
          make_sinusoid(eps, rng.uniform(0.6, 1.1), 0.4),
          make_sinusoid(a, 2.0 * kPi / horizon, 0.0))},
      true, horizon);
}

// K climbs to just below 2 pi and comes back
inline FieldProtocol near_two_pi_protocol(Rng& rng, double horizon) {
  const double target = 2.0 * kPi - rng.uniform(0.1, 0.4);
  const double a = target * kPi / (2.0 * horizon);
  const double eps = rng.uniform(0.01, 0.03);
  return FieldProtocol(
      FieldKind::kSinusoidal,
      {SiteField::components(
          make_sinusoid(eps, rng.uniform(0.8, 1.3), 0.2),
          make_sinusoid(eps, rng.uniform(0.5, 1.0), 1.1),
          make_sinusoid(a, kPi / horizon, 0.0))},
      true, horizon);
}

inline HamiltonianModel random_heisenberg_chain(Rng& rng, int l, double s) {
  std::vector<double> j;
  for (int k = 0; k + 1 < l; ++k) j.push_back(rng.uniform(0.7, 1.3));
  return build_heisenberg(CouplingGraph::chain(j), s);
}

inline FieldProtocol random_ising_field(Rng& rng, int l, double horizon) {
  std::vector<ScalarPtr> bx;
  std::vector<Vec3> b0;
  for (int i = 0; i < l; ++i) {
    bx.push_back(make_sinusoid(rng.uniform(-0.7, 0.7), rng.uniform(0.5, 1.6),
                               rng.uniform(0.0, 2.0 * kPi),
                               rng.uniform(-0.25, 0.25)));
    b0.push_back({bx.back()->value(0.0), rng.uniform(-0.9, 0.9),
                  rng.uniform(0.4, 1.1)});
  }
  return make_ising_field(std::move(bx), b0, horizon);
}

inline FieldProtocol random_envelope_field(Rng& rng, int l, double horizon) {
  std::vector<ScalarPtr> bx, env;
  std::vector<Vec3> b0;
  for (int i = 0; i < l; ++i) {
    bx.push_back(make_sinusoid(rng.uniform(-0.6, 0.6), rng.uniform(0.5, 1.5),
                               rng.uniform(0.0, 2.0 * kPi)));
    const double hy = rng.uniform(-0.7, 0.7), hz = rng.uniform(0.5, 1.0);
    b0.push_back({bx.back()->value(0.0), hy, hz});
    env.push_back(make_sinusoid(rng.uniform(-0.25, 0.25),
                                rng.uniform(0.4, 1.3), 0.0,
                                std::hypot(hy, hz)));
  }
  return make_integrable_ising_field(std::move(bx), std::move(env), b0,
                                     horizon);
}

struct FidelityOutcome {
  double fidelity = 0.0;
  double seconds = 0.0;
  double number_drift = 0.0;  // fermion runs: |<N> - <N>_0| over both routes
};

inline FidelityOutcome fidelity_case(const HamiltonianModel& model,
                                     const FieldProtocol& protocol,
                                     const ComplexVector& psi0,
                                     std::size_t grid_points,
                                     double propagate_tol,
                                     const VerifyOptions& opts) {
  Stopwatch clock;
  const auto grid = uniform_grid(protocol.horizon(), grid_points);
  GaugeMapOptions gopts;
  gopts.ode_tol = 1e-11;
  gopts.flip_ising_phase_sign = opts.inject_fault;
  const GaugeEvolution ev =
      evolve_via_gauge(model, protocol, psi0, grid, propagate_tol, gopts);
  const auto direct = propagate_td(model, protocol, psi0, grid, propagate_tol);
  FidelityOutcome out;
  for (std::size_t k = 0; k < grid.size(); ++k)
    out.fidelity =
        std::max(out.fidelity, aligned_distance(direct[k], ev.states[k]));
  if (model.family == ModelFamily::kFermion) {
    const ComplexMatrix n = ComplexMatrix(model.number_op);
    const double n0 = psi0.dot(n * psi0).real();
    for (std::size_t k = 0; k < grid.size(); ++k) {
      out.number_drift = std::max(
          out.number_drift, std::abs(direct[k].dot(n * direct[k]).real() - n0));
      out.number_drift = std::max(
          out.number_drift,
          std::abs(ev.states[k].dot(n * ev.states[k]).real() - n0));
    }
  }
  out.seconds = clock.seconds();
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 1: Heisenberg gauge-map fidelity
// ---------------------------------------------------------------------------

inline std::vector<CheckResult> heisenberg_fidelity(const VerifyOptions& opts) {
  std::vector<CheckResult> checks;
  Rng rng(1001);
  const HamiltonianModel half = random_heisenberg_chain(rng, 4, 0.5);
  double worst = 0.0, slowest = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    const FieldProtocol p = random_smooth_protocol(rng, 10.0, 0.9);
    const ComplexVector psi0 = random_state(rng, half.dim);
    const FidelityOutcome out =
        fidelity_case(half, p, psi0, 101, 2e-9, opts);
    worst = std::max(worst, out.fidelity);
    slowest = std::max(slowest, out.seconds);
  }
  checks.push_back(
      make_check("heisenberg_L4_fidelity", worst, 1e-6, slowest));
  checks.push_back(make_check("heisenberg_L4_case_seconds", slowest, 120.0));

  const HamiltonianModel one = random_heisenberg_chain(rng, 3, 1.0);
  const FieldProtocol p = random_smooth_protocol(rng, 10.0, 0.8);
  const ComplexVector psi0 = random_state(rng, one.dim);
  const FidelityOutcome out = fidelity_case(one, p, psi0, 101, 2e-9, opts);
  checks.push_back(
      make_check("heisenberg_L3_spin1_fidelity", out.fidelity, 1e-6,
                 out.seconds));
  checks.push_back(
      make_check("heisenberg_spin1_case_seconds", out.seconds, 120.0));
  return checks;
}

// ---------------------------------------------------------------------------
// Criterion 2: covariant vs Gauss parametrization
// ---------------------------------------------------------------------------

inline std::vector<CheckResult> parametrization_equivalence(
    const VerifyOptions&) {
  Rng rng(2002);
  const double horizon = 6.0;
  const auto grid = uniform_grid(horizon, 121);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    FieldProtocol p =
        (rep < 40)  ? random_smooth_protocol(rng, horizon, 0.8)
        : (rep < 45) ? zero_crossing_protocol(rng, horizon)
                     : near_two_pi_protocol(rng, horizon);
    const GaugeTrajectory cov = integrate_covariant(p, grid, 1e-12);
    const GaugeTrajectory gau = integrate_gauss(p, grid, 1e-12);
    const auto conv = gauss_to_covariant(gau);
    for (std::size_t k = 0; k < grid.size(); ++k)
      worst = std::max(worst,
                       axis_angle_distance(cov.covariant[k].vector(),
                                           conv[k].vector()));
  }
  return {make_check("parametrization_equivalence", worst, 1e-7)};
}

// ---------------------------------------------------------------------------
// Criterion 3: fermions in a homogeneous driven field
// ---------------------------------------------------------------------------

inline HamiltonianModel random_fermion_model(Rng& rng, int l) {
  ComplexMatrix eps(l, l);
  for (int i = 0; i < l; ++i) {
    eps(i, i) = rng.normal() * 0.5;
    for (int j = i + 1; j < l; ++j) {
      eps(i, j) = 0.5 * rng.complex_normal();
      eps(j, i) = std::conj(eps(i, j));
    }
  }
  RealMatrix v(l, l);
  for (int i = 0; i < l; ++i) {
    v(i, i) = 0.4 * rng.normal();
    for (int j = i + 1; j < l; ++j) v(i, j) = v(j, i) = 0.4 * rng.normal();
  }
  return build_fermion(eps, v);
}

inline std::vector<CheckResult> fermion_fidelity(const VerifyOptions& opts) {
  std::vector<CheckResult> checks;
  Rng rng(3003);
  {
    const HamiltonianModel m = random_fermion_model(rng, 2);
    const FieldProtocol p = random_smooth_protocol(rng, 6.0, 0.9);
    const ComplexVector psi0 = random_state(rng, m.dim);
    const FidelityOutcome out = fidelity_case(m, p, psi0, 61, 3e-9, opts);
    checks.push_back(
        make_check("fermion_L2_fidelity", out.fidelity, 1e-6, out.seconds));
    checks.push_back(
        make_check("fermion_L2_number_conservation", out.number_drift, 1e-10));
  }
  {
    // the criterion quotes Fock dimension 256, which is L = 4 sites
    const HamiltonianModel m = random_fermion_model(rng, 4);
    const FieldProtocol p = random_smooth_protocol(rng, 3.0, 0.8);
    const ComplexVector psi0 = random_state(rng, m.dim);
    const FidelityOutcome out = fidelity_case(m, p, psi0, 31, 1e-8, opts);
    checks.push_back(make_check("fermion_dim256_fidelity", out.fidelity, 1e-6,
                                out.seconds));
    checks.push_back(make_check("fermion_dim256_number_conservation",
                                out.number_drift, 1e-10));
  }
  return checks;
}

// ---------------------------------------------------------------------------
// Criterion 4: Ising lattice with rigidly rotating inhomogeneous fields
// ---------------------------------------------------------------------------

inline std::vector<CheckResult> ising_fidelity(const VerifyOptions& opts) {
  std::vector<CheckResult> checks;
  Rng rng(4004);
  std::vector<double> j;
  for (int k = 0; k < 5; ++k) j.push_back(rng.uniform(0.7, 1.3));
  const HamiltonianModel m = build_ising_chain(j, 0.5);
  const FieldProtocol p = random_ising_field(rng, 6, 6.0);
  const ComplexVector psi0 = random_state(rng, m.dim);
  const FidelityOutcome out = fidelity_case(m, p, psi0, 61, 3e-9, opts);
  checks.push_back(
      make_check("ising_L6_fidelity", out.fidelity, 1e-6, out.seconds));

  // Htilde reconstructed from the map is time-independent
  GaugeMapOptions gopts;
  gopts.flip_ising_phase_sign = opts.inject_fault;
  const GaugeMap map(m, p, gopts);
  const ComplexMatrix href = map.htilde0();
  double drift = 0.0;
  for (double t : uniform_grid(6.0, 13)) {
    const ComplexMatrix u = map.unitary(t);
    const ComplexMatrix rebuilt =
        u.adjoint() *
        (m.hamiltonian(p, t) + map.gauge_potential_analytic(t)) * u;
    drift = std::max(drift, (rebuilt - href).norm());
  }
  checks.push_back(make_check("ising_htilde_static", drift, 1e-10));
  return checks;
}

// ---------------------------------------------------------------------------
// Criterion 5: integrable driven chain, three-way agreement + L = 64 scaling
// ---------------------------------------------------------------------------

inline std::vector<CheckResult> integrable_chain(const VerifyOptions& opts) {
  std::vector<CheckResult> checks;
  Rng rng(5005);
  const int l = 8;
  std::vector<double> j;
  for (int k = 0; k + 1 < l; ++k) j.push_back(rng.uniform(0.8, 1.2));
  const HamiltonianModel m = build_ising_chain(j, 0.5);
  const double horizon = 2.5;
  const FieldProtocol p = random_envelope_field(rng, l, horizon);

  GaugeMapOptions gopts;
  gopts.flip_ising_phase_sign = opts.inject_fault;
  const QuadraticCoefficients qc = jw_for_map(m, p);
  const std::vector<double>& theta = qc.rotation_angles();

  // psi0 = R^+|up...up> so the rotated frame starts in the all-up state
  ComplexVector psi0(1);
  psi0(0) = 1.0;
  for (int i = 0; i < l; ++i) {
    const ComplexMatrix u =
        su2_rotation({-theta[std::size_t(i)], 0.0, 0.0}, 0.5);
    ComplexVector site(2);
    site << u(0, 0), u(1, 0);
    ComplexVector next(psi0.size() * 2);
    for (Eigen::Index a = 0; a < psi0.size(); ++a)
      next.segment(2 * a, 2) = psi0(a) * site;
    psi0 = std::move(next);
  }

  const auto grid = uniform_grid(horizon, 21);
  Stopwatch clock;
  const auto direct = propagate_td(m, p, psi0, grid, 1e-8);
  const GaugeEvolution ev =
      evolve_via_gauge(m, p, psi0, grid, 1e-8, gopts);
  const auto gammas =
      propagate_covariance(qc, all_up_covariance(l), grid, 1e-8);

  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const CovarianceObservables cobs = covariance_observables(gammas[k]);
    for (int i = 0; i < l; ++i) {
      const ComplexMatrix sz = m.dense_site_spin(i, 2);
      const double a = direct[k].dot(sz * direct[k]).real();
      const double b = ev.states[k].dot(sz * ev.states[k]).real();
      const double phase =
          (opts.inject_fault ? -1.0 : 1.0) *
          p.phase(std::size_t(i), grid[k]);
      const double c = std::cos(phase - theta[std::size_t(i)]) *
                       cobs.sz[std::size_t(i)];
      worst = std::max({worst, std::abs(a - b), std::abs(a - c)});
    }
    for (int i = 0; i + 1 < l; ++i) {
      const ComplexMatrix sxsx =
          m.dense_site_spin(i, 0) * m.dense_site_spin(i + 1, 0);
      const double a = direct[k].dot(sxsx * direct[k]).real();
      const double b = ev.states[k].dot(sxsx * ev.states[k]).real();
      const double c = cobs.sxsx[std::size_t(i)];
      worst = std::max({worst, std::abs(a - b), std::abs(a - c)});
    }
  }
  checks.push_back(
      make_check("chain_L8_three_way", worst, 1e-6, clock.seconds()));

  // L = 64 covariance run over a horizon of 10/J on one core
  {
    Rng rng64(5006);
    const int big = 64;
    std::vector<double> jb(std::size_t(big - 1), 1.0);
    std::vector<std::function<double(double)>> h;
    std::vector<double> th(std::size_t(big), 0.0);
    for (int i = 0; i < big; ++i) {
      const double amp = rng64.uniform(-0.3, 0.3);
      const double om = rng64.uniform(0.5, 1.5);
      const double off = rng64.uniform(0.7, 1.2);
      h.push_back([amp, om, off](double t) {
        return off + amp * std::sin(om * t);
      });
    }
    const QuadraticCoefficients big_qc(jb, std::move(h), std::move(th), true);
    Stopwatch big_clock;
    const auto big_grid = uniform_grid(10.0, 11);
    const auto out =
        propagate_covariance(big_qc, all_up_covariance(big), big_grid, 1e-7);
    double anti = 0.0;
    for (const RealMatrix& g : out)
      anti = std::max(anti, (g + g.transpose()).norm());
    checks.push_back(make_check("chain_L64_seconds", big_clock.seconds(),
                                60.0));
    checks.push_back(make_check("chain_L64_antisymmetry", anti, 1e-10));
  }
  return checks;
}

// ---------------------------------------------------------------------------
// Criterion 6: spin-boson mapping and truncation convergence
// ---------------------------------------------------------------------------

inline std::vector<CheckResult> spin_boson_fidelity(const VerifyOptions& opts) {
  std::vector<CheckResult> checks;
  Rng rng(6006);
  const double horizon = 4.0;
  const ScalarPtr bx = make_sinusoid(0.5, 1.2, 0.3, 0.1);
  const Vec3 b0{bx->value(0.0), 0.4, 0.8};
  const FieldProtocol p = make_ising_field({bx}, {b0}, horizon);

  auto initial = [](const HamiltonianModel& m) {
    ComplexVector psi = ComplexVector::Zero(m.dim);
    psi(0) = 1.0;  // spin up, vacuum
    return psi;
  };

  const HamiltonianModel m12 = build_spin_boson({0.35}, {1.0}, 12, 0.5);
  const ComplexVector psi12 = initial(m12);
  const FidelityOutcome out = fidelity_case(m12, p, psi12, 41, 3e-9, opts);
  checks.push_back(make_check("spin_boson_fidelity", out.fidelity, 1e-6,
                              out.seconds));

  // truncation sweep: spin observables move by less than 1e-7
  const auto grid = uniform_grid(horizon, 41);
  const HamiltonianModel m10 = build_spin_boson({0.35}, {1.0}, 10, 0.5);
  const auto s12 = propagate_td(m12, p, psi12, grid, 1e-10);
  const auto s10 = propagate_td(m10, p, initial(m10), grid, 1e-10);
  double drift = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    for (int axis = 0; axis < 3; ++axis) {
      const double a =
          s12[k].dot(m12.dense_site_spin(0, axis) * s12[k]).real();
      const double b =
          s10[k].dot(m10.dense_site_spin(0, axis) * s10[k]).real();
      drift = std::max(drift, std::abs(a - b));
    }
  checks.push_back(make_check("spin_boson_truncation", drift, 1e-7));
  return checks;
}

// ---------------------------------------------------------------------------
// Criterion 7: Floquet stroboscopic dynamics
// ---------------------------------------------------------------------------

inline std::vector<CheckResult> floquet_scenario(const VerifyOptions& opts) {
  std::vector<CheckResult> checks;
  const HamiltonianModel m = build_ising_chain({1.0, 0.8, 1.2}, 0.5);
  const double period = 2.0;
  const int cycles = 5;
  const double horizon = period * cycles;
  std::vector<ScalarPtr> bx;
  std::vector<Vec3> b0;
  for (int i = 0; i < 4; ++i) {
    bx.push_back(make_sinusoid(-4.0 * kPi / period, 2.0 * kPi / period,
                               kPi / 2.0, 4.0 * kPi / period));
    b0.push_back({0.0, 0.25 + 0.05 * i, 0.8});
  }
  const FieldProtocol p = make_ising_field(bx, b0, horizon);
  GaugeMapOptions gopts;
  gopts.flip_ising_phase_sign = opts.inject_fault;
  const GaugeMap map(m, p, gopts);
  Rng rng(7007);
  const ComplexVector psi0 = random_state(rng, m.dim);

  Stopwatch clock;
  const FloquetResult fl = floquet_stroboscopic(map, psi0, period, cycles);
  checks.push_back(make_check("floquet_periodicity_defect", fl.defect, 1e-7));

  const auto grid = uniform_grid(horizon, 5 * cycles + 1);
  const auto direct = propagate_td(m, p, psi0, grid, 2e-8);
  double worst = 0.0;
  for (int n = 0; n <= cycles; ++n)
    worst = std::max(worst, aligned_distance(fl.states[std::size_t(n)],
                                             direct[std::size_t(5 * n)]));
  checks.push_back(
      make_check("floquet_stroboscopic_fidelity", worst, 1e-5,
                 clock.seconds()));

  const ComplexMatrix& ht = map.htilde0();
  double heat = 0.0;
  const double e0 = fl.states[0].dot(ht * fl.states[0]).real();
  for (const auto& s : fl.states)
    heat = std::max(heat, std::abs(s.dot(ht * s).real() - e0));
  checks.push_back(make_check("floquet_no_heating", heat, 1e-8));
  return checks;
}

// ---------------------------------------------------------------------------
// Criterion 8: dynamical invariants
// ---------------------------------------------------------------------------

inline std::vector<CheckResult> invariants_scenario(const VerifyOptions& opts) {
  Rng rng(8008);
  const HamiltonianModel m = random_heisenberg_chain(rng, 4, 0.5);
  const FieldProtocol p = random_smooth_protocol(rng, 8.0, 0.8);
  GaugeMapOptions gopts;
  gopts.flip_ising_phase_sign = opts.inject_fault;
  const GaugeMap map(m, p, gopts);
  const auto grid = uniform_grid(8.0, 81);
  const ComplexVector psi0 = random_state(rng, m.dim);
  Stopwatch clock;
  const auto states = propagate_td(m, p, psi0, grid, 3e-11);

  ComplexMatrix s2 = ComplexMatrix::Zero(m.dim, m.dim);
  for (int a = 0; a < 3; ++a) {
    const ComplexMatrix s = m.dense_total_spin(a);
    s2 += s * s;
  }
  std::vector<CheckResult> checks;
  const std::vector<std::pair<std::string, ComplexMatrix>> invariants{
      {"invariant_h_heisenberg", m.h_static}, {"invariant_s_tot_squared", s2}};
  for (const auto& [name, op] : invariants) {
    const ObservableSeries series =
        dynamical_invariant_track(map, op, states, grid, "v");
    const RealVector& v = series.at("v");
    double drift = 0.0;
    for (Eigen::Index k = 0; k < v.size(); ++k)
      drift = std::max(drift, std::abs(v(k) - v(0)));
    checks.push_back(make_check(name, drift, 1e-7, clock.seconds()));
  }
  return checks;
}

// ---------------------------------------------------------------------------
// Criterion 9: special initial states
// ---------------------------------------------------------------------------

inline std::vector<CheckResult> special_states_scenario(
    const VerifyOptions& opts) {
  Rng rng(9009);
  const HamiltonianModel m = random_heisenberg_chain(rng, 4, 0.5);
  const FieldProtocol p = random_smooth_protocol(rng, 10.0, 0.8);
  GaugeMapOptions gopts;
  gopts.flip_ising_phase_sign = opts.inject_fault;
  const GaugeMap map(m, p, gopts);

  ComplexVector up = ComplexVector::Zero(m.dim);
  up(0) = 1.0;
  double energy = 0.0;
  for (const auto& e : m.graph.edges) energy += e.coupling / 4.0;
  const auto grid = uniform_grid(10.0, 41);
  Stopwatch clock;
  const auto states = special_state_evolve(map, up, energy, grid);

  auto bloch_rhs = [&p](double t, const RealVector& y, RealVector& dy) {
    const Vec3 b = p.value(0, t);
    const Vec3 mm{y(0), y(1), y(2)};
    const Vec3 d = mm.cross(b);
    dy(0) = d.x;
    dy(1) = d.y;
    dy(2) = d.z;
  };
  RealVector m0(3);
  m0 << 0.0, 0.0, 0.5;
  const OdeSolution bloch = integrate_ode(bloch_rhs, m0, 0.0, 10.0, 1e-13);

  double purity_defect = 0.0, bloch_defect = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const RealVector ref = bloch.at(grid[k]);
    for (int site = 0; site < m.site_count(); ++site) {
      purity_defect = std::max(
          purity_defect, std::abs(site_purity(states[k], m, site) - 1.0));
      const Vec3 mv{
          states[k].dot(m.dense_site_spin(site, 0) * states[k]).real(),
          states[k].dot(m.dense_site_spin(site, 1) * states[k]).real(),
          states[k].dot(m.dense_site_spin(site, 2) * states[k]).real()};
      bloch_defect =
          std::max(bloch_defect, distance(mv, {ref(0), ref(1), ref(2)}));
    }
  }
  return {make_check("special_state_purity", purity_defect, 1e-8,
                     clock.seconds()),
          make_check("special_state_bloch", bloch_defect, 1e-7)};
}

// ---------------------------------------------------------------------------
// Criterion 10: flow-equation residual (positive cases + negative control)
// ---------------------------------------------------------------------------

inline std::vector<CheckResult> flow_residual_scenario(
    const VerifyOptions& opts) {
  std::vector<CheckResult> checks;
  Rng rng(10010);
  const double horizon = 8.0;
  const auto times = std::vector<double>{1.0, 2.5, 4.0, 5.5, 7.0};
  const double dt = 5e-4;
  GaugeMapOptions gopts;
  gopts.flip_ising_phase_sign = opts.inject_fault;

  auto worst_residual = [&](const GaugeMap& map) {
    double worst = 0.0;
    for (double t : times)
      worst = std::max(worst, flow_equation_residual(map, t, dt).relative);
    return worst;
  };

  {
    const HamiltonianModel m = random_heisenberg_chain(rng, 3, 0.5);
    const GaugeMap map(m, random_smooth_protocol(rng, horizon, 0.8), gopts);
    checks.push_back(
        make_check("flow_residual_heisenberg", worst_residual(map), 1e-5));
  }
  {
    const HamiltonianModel m = random_fermion_model(rng, 2);
    const GaugeMap map(m, random_smooth_protocol(rng, horizon, 0.7), gopts);
    checks.push_back(
        make_check("flow_residual_fermion", worst_residual(map), 1e-5));
  }
  const HamiltonianModel mi = build_ising_chain({1.0, 0.9, 1.1}, 0.5);
  const FieldProtocol pi = random_ising_field(rng, 4, horizon);
  {
    const GaugeMap map(mi, pi, gopts);
    checks.push_back(
        make_check("flow_residual_ising", worst_residual(map), 1e-5));
  }
  {
    const GaugeMap map(mi, random_envelope_field(rng, 4, horizon), gopts);
    checks.push_back(
        make_check("flow_residual_envelope", worst_residual(map), 1e-5));
  }
  {
    const HamiltonianModel m = build_spin_boson({0.4}, {1.1}, 10, 0.5);
    const ScalarPtr bx = make_sinusoid(0.5, 1.1, 0.2, 0.1);
    const FieldProtocol p =
        make_ising_field({bx}, {Vec3{bx->value(0.0), 0.3, 0.9}}, horizon);
    const GaugeMap map(m, p, gopts);
    checks.push_back(
        make_check("flow_residual_spin_boson", worst_residual(map), 1e-5));
  }
  {
    // negative control: flipped phase sign must blow the residual up
    GaugeMapOptions evil = gopts;
    evil.flip_ising_phase_sign = !gopts.flip_ising_phase_sign;
    const GaugeMap map(mi, pi, evil);
    const double r = worst_residual(map);
    CheckResult c;
    c.name = "flow_residual_negative_control";
    c.measured = r;
    c.threshold = 1e-1;
    c.pass = r >= 1e-1;
    checks.push_back(c);
  }
  return checks;
}

// ---------------------------------------------------------------------------
// Criterion 11: static free-fermion cross-check
// ---------------------------------------------------------------------------

inline std::vector<CheckResult> freefermion_static(const VerifyOptions&) {
  const int l = 8;
  const std::vector<double> j(std::size_t(l - 1), 1.0);
  const double hz = 0.9;
  std::vector<TransverseChainField> fields;
  for (int i = 0; i < l; ++i)
    fields.push_back({make_constant(0.0), make_constant(hz)});
  const QuadraticCoefficients qc = jw_coefficients(j, fields, 1.0);
  const FermionGroundState g = ground_covariance(qc.matrix(0.0));
  const std::vector<double> even = even_sector_spectrum(g);

  const HamiltonianModel m = build_ising_chain(j, 0.5);
  const ComplexMatrix h =
      m.h_static -
      m.field_operator(std::vector<Vec3>(std::size_t(l), Vec3{0, 0, hz}));
  const RealVector parity = spin_parity_diag(l);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index b = 0; b < parity.size(); ++b)
    if (parity(b) > 0) keep.push_back(b);
  ComplexMatrix sub(keep.size(), keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r)
    for (std::size_t c = 0; c < keep.size(); ++c)
      sub(Eigen::Index(r), Eigen::Index(c)) = h(keep[r], keep[c]);
  const RealVector ed = eigh(sub).eigenvalues;

  double worst = std::abs(double(even.size()) - double(ed.size()));
  for (Eigen::Index k = 0; k < ed.size() && std::size_t(k) < even.size(); ++k)
    worst = std::max(worst, std::abs(even[std::size_t(k)] - ed(k)));
  return {make_check("freefermion_even_sector_vs_ed", worst, 1e-8)};
}

}  // namespace verify_detail

// ---------------------------------------------------------------------------
// Scenario registry and suite runner
// ---------------------------------------------------------------------------

inline const std::vector<Scenario>& all_scenarios() {
  static const std::vector<Scenario> scenarios = {
      {"c01-heisenberg-fidelity", 1, "heisenberg",
       verify_detail::heisenberg_fidelity},
      {"c02-parametrization-equivalence", 2, "heisenberg",
       verify_detail::parametrization_equivalence},
      {"c03-fermion-mapping", 3, "fermion", verify_detail::fermion_fidelity},
      {"c04-ising-mapping", 4, "ising", verify_detail::ising_fidelity},
      {"c05-integrable-chain", 5, "ising-chain",
       verify_detail::integrable_chain},
      {"c06-spin-boson", 6, "spin-boson", verify_detail::spin_boson_fidelity},
      {"c07-floquet", 7, "floquet", verify_detail::floquet_scenario},
      {"c08-dynamical-invariants", 8, "invariants",
       verify_detail::invariants_scenario},
      {"c09-special-states", 9, "heisenberg",
       verify_detail::special_states_scenario},
      {"c10-flow-residual", 10, "invariants",
       verify_detail::flow_residual_scenario},
      {"c11-freefermion-static", 11, "freefermion",
       verify_detail::freefermion_static},
  };
  return scenarios;
}

inline std::vector<std::string> suite_names() {
  return {"heisenberg", "fermion",    "ising",       "ising-chain",
          "spin-boson", "floquet",    "invariants",  "freefermion",
          "all"};
}

inline VerificationReport verify_suite(const std::string& suite,
                                       const VerifyOptions& options) {
  const auto names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end())
    throw ConfigError("unknown suite '" + suite + "'");

  std::vector<const Scenario*> selected;
  for (const Scenario& s : all_scenarios())
    if (suite == "all" || s.suite == suite) selected.push_back(&s);

  std::vector<std::vector<CheckResult>> results(selected.size());
  std::vector<std::string> failures(selected.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= selected.size()) return;
      try {
        results[k] = selected[k]->run(options);
      } catch (const std::exception& e) {
        failures[k] = e.what();
      }
    }
  };
  const int nthreads =
      std::max(1, std::min<int>(options.workers, int(selected.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  VerificationReport report;
  report.conventions = adopted_conventions();
  for (std::size_t k = 0; k < selected.size(); ++k) {
    if (!failures[k].empty()) {
      CheckResult c;
      c.name = selected[k]->id + "/exception: " + failures[k];
      c.measured = std::numeric_limits<double>::infinity();
      c.threshold = 0.0;
      c.pass = false;
      report.checks.push_back(c);
      continue;
    }
    for (CheckResult c : results[k]) {
      c.name = selected[k]->id + "/" + c.name;
      report.checks.push_back(c);
    }
  }
  return report;
}

}  // namespace gaugeflow
