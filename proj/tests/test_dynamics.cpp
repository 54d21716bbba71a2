#include <catch2/catch_amalgamated.hpp>

#include "gaugeflow/dynamics.hpp"
#include "gaugeflow/ode.hpp"

using namespace gaugeflow;

namespace {

HamiltonianModel heisenberg_chain(Rng& rng, int l, double s = 0.5) {
  std::vector<double> j;
  for (int k = 0; k + 1 < l; ++k) j.push_back(rng.uniform(0.5, 1.5));
  return build_heisenberg(CouplingGraph::chain(j), s);
}

FieldProtocol random_smooth_protocol(Rng& rng, double horizon,
                                     double scale = 1.0) {
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

ComplexVector rabi_state(double b, double omega, double bz,
                         const ComplexVector& psi0, double t) {
  const SpinMatrices sm = spin_matrices(0.5);
  const ComplexMatrix heff = -b * sm.sx - (bz + omega) * sm.sz;
  const ComplexMatrix uz = su2_rotation({0.0, 0.0, -omega * t}, 0.5);
  return uz * (expm_unitary(heff, t) * psi0);
}

}  // namespace

TEST_CASE("propagate_td_zero_hamiltonian", "[dynamics]") {
  CouplingGraph g;
  g.site_count = 2;
  const HamiltonianModel m = build_heisenberg(g, 0.5);  // no couplings
  const FieldProtocol p = constant_field({0, 0, 0}, 3.0);
  Rng rng(1);
  const ComplexVector psi0 = random_state(rng, m.dim);
  const auto states = propagate_td(m, p, psi0, uniform_grid(3.0, 7), 1e-12);
  for (const auto& s : states) CHECK((s - psi0).norm() <= 1e-14);
}

TEST_CASE("propagate_td_matches_static_propagator", "[dynamics]") {
  Rng rng(3);
  const HamiltonianModel m = heisenberg_chain(rng, 3);
  const FieldProtocol p = constant_field({0.4, -0.3, 0.8}, 4.0);
  const ComplexVector psi0 = random_state(rng, m.dim);
  const auto grid = uniform_grid(4.0, 9);
  PropagationStats stats;
  const auto states = propagate_td(m, p, psi0, grid, 1e-11, &stats);
  CHECK(stats.substeps > 0);
  const ComplexMatrix h = m.hamiltonian(p, 0.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    worst = std::max(worst,
                     (states[k] - propagate_ti(h, psi0, grid[k])).norm());
    CHECK(std::abs(states[k].norm() - 1.0) <= 1e-9);
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("propagate_td_matches_rabi", "[dynamics]") {
  CouplingGraph g;
  g.site_count = 1;
  const HamiltonianModel m = build_heisenberg(g, 0.5);
  const double b = 0.9, omega = 1.4, bz = 0.3;
  const FieldProtocol p = rotating_field(b, omega, 0.0, bz, 8.0);
  ComplexVector psi0(2);
  psi0 << 1.0, 0.0;
  const auto grid = uniform_grid(8.0, 17);
  const auto states = propagate_td(m, p, psi0, grid, 1e-11);
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k)
    worst = std::max(
        worst, (states[k] - rabi_state(b, omega, bz, psi0, grid[k])).norm());
  CHECK(worst <= 1e-7);
}

TEST_CASE("propagate_ti_larmor_and_group_property", "[dynamics]") {
  const SpinMatrices sm = spin_matrices(0.5);
  ComplexVector plus_x(2);
  plus_x << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  CHECK((propagate_ti(sm.sz, plus_x, 0.0) - plus_x).norm() <= 1e-14);
  for (double t : {0.7, 2.9}) {
    const ComplexVector psi = propagate_ti(sm.sz, plus_x, t);
    const double sx = psi.dot(sm.sx * psi).real();
    CHECK(sx == Catch::Approx(std::cos(t) / 2.0).margin(1e-12));
  }

  Rng rng(7);
  const ComplexMatrix h = random_hermitian(rng, 6);
  const ComplexVector psi0 = random_state(rng, 6);
  const ComplexVector two_step =
      propagate_ti(h, propagate_ti(h, psi0, 1.1), 0.6);
  CHECK((propagate_ti(h, psi0, 1.7) - two_step).norm() <= 1e-10);
}

TEST_CASE("evolve_via_gauge_zero_field", "[dynamics]") {
  Rng rng(11);
  const HamiltonianModel m = heisenberg_chain(rng, 3);
  const FieldProtocol p = constant_field({0, 0, 0}, 3.0);
  const ComplexVector psi0 = random_state(rng, m.dim);
  const auto grid = uniform_grid(3.0, 7);
  const GaugeEvolution ev = evolve_via_gauge(m, p, psi0, grid, 1e-10);
  for (std::size_t k = 0; k < grid.size(); ++k)
    CHECK((ev.states[k] - propagate_ti(m.h_static, psi0, grid[k])).norm() <=
          1e-10);
}

TEST_CASE("evolve_via_gauge_heisenberg_oracle", "[dynamics]") {
  Rng rng(13);
  const HamiltonianModel m = heisenberg_chain(rng, 4);
  const FieldProtocol p = rotating_field(0.8, 1.2, 0.4, 0.5, 6.0);
  const ComplexVector psi0 = random_state(rng, m.dim);
  const auto grid = uniform_grid(6.0, 13);
  const GaugeEvolution ev = evolve_via_gauge(m, p, psi0, grid, 1e-11);
  const auto direct = propagate_td(m, p, psi0, grid, 1e-11);
  double worst = 0.0, phase_drift = 0.0, phase0 = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(std::abs(ev.states[k].norm() - 1.0) <= 1e-9);
    worst = std::max(worst, aligned_distance(ev.states[k], direct[k]));
    const double ph = relative_phase(direct[k], ev.states[k]);
    if (k == 0)
      phase0 = ph;
    else
      phase_drift = std::max(phase_drift, std::abs(ph - phase0));
  }
  CHECK(worst <= 1e-6);
  CHECK(phase_drift <= 1e-6);
}

TEST_CASE("evolve_via_gauge_ising_compatible", "[dynamics]") {
  Rng rng(17);
  const HamiltonianModel m = build_ising_chain({1.0, 0.8, 1.2}, 0.5);
  std::vector<ScalarPtr> bx;
  std::vector<Vec3> b0;
  for (int i = 0; i < 4; ++i) {
    bx.push_back(make_sinusoid(rng.uniform(-0.8, 0.8), rng.uniform(0.6, 1.6),
                               rng.uniform(0.0, 2.0 * kPi),
                               rng.uniform(-0.2, 0.2)));
    b0.push_back({bx.back()->value(0.0), rng.uniform(-0.8, 0.8),
                  rng.uniform(0.4, 1.1)});
  }
  const FieldProtocol p = make_ising_field(bx, b0, 4.0);
  const ComplexVector psi0 = random_state(rng, m.dim);
  const auto grid = uniform_grid(4.0, 9);
  const GaugeEvolution ev = evolve_via_gauge(m, p, psi0, grid, 1e-11);
  const auto direct = propagate_td(m, p, psi0, grid, 1e-11);
  for (std::size_t k = 0; k < grid.size(); ++k)
    CHECK(aligned_distance(ev.states[k], direct[k]) <= 1e-6);
}

TEST_CASE("evolve_via_gauge_envelope_chain", "[dynamics]") {
  Rng rng(19);
  const HamiltonianModel m = build_ising_chain({1.0, 0.9, 1.1}, 0.5);
  std::vector<ScalarPtr> bx, env;
  std::vector<Vec3> b0;
  for (int i = 0; i < 4; ++i) {
    bx.push_back(make_sinusoid(rng.uniform(-0.6, 0.6), rng.uniform(0.6, 1.4),
                               rng.uniform(0.0, 2.0 * kPi)));
    const double hy = rng.uniform(-0.6, 0.6), hz = rng.uniform(0.5, 1.0);
    b0.push_back({bx.back()->value(0.0), hy, hz});
    env.push_back(make_sinusoid(rng.uniform(-0.25, 0.25),
                                rng.uniform(0.5, 1.2), 0.0,
                                std::hypot(hy, hz)));
  }
  const FieldProtocol p = make_integrable_ising_field(bx, env, b0, 3.0);
  const ComplexVector psi0 = random_state(rng, m.dim);
  const auto grid = uniform_grid(3.0, 7);
  const GaugeEvolution ev = evolve_via_gauge(m, p, psi0, grid, 1e-10);
  const auto direct = propagate_td(m, p, psi0, grid, 1e-10);
  for (std::size_t k = 0; k < grid.size(); ++k)
    CHECK(aligned_distance(ev.states[k], direct[k]) <= 1e-6);
}

TEST_CASE("expectation_values_basics", "[dynamics]") {
  Rng rng(23);
  const HamiltonianModel m = heisenberg_chain(rng, 2);
  ComplexVector up(4);
  up << 1, 0, 0, 0;  // |up up>
  std::vector<NamedObservable> obs;
  obs.push_back({"sz0", m.dense_site_spin(0, 2), -1});
  obs.push_back({"identity", ComplexMatrix::Identity(4, 4), -1});
  obs.push_back({"purity0", std::nullopt, 0});
  const ObservableSeries series =
      expectation_values({up}, {0.0}, obs, &m);
  CHECK(series.at("sz0")(0) == Catch::Approx(0.5).margin(1e-14));
  CHECK(series.at("identity")(0) == Catch::Approx(1.0).margin(1e-12));
  CHECK(series.at("purity0")(0) == Catch::Approx(1.0).margin(1e-14));

  // Bell singlet: total Sz vanishes, single-site purity 1/2
  ComplexVector singlet(4);
  singlet << 0, 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0), 0;
  std::vector<NamedObservable> obs2;
  obs2.push_back({"sz_tot", m.dense_total_spin(2), -1});
  obs2.push_back({"purity0", std::nullopt, 0});
  const ObservableSeries s2 = expectation_values({singlet}, {0.0}, obs2, &m);
  CHECK(std::abs(s2.at("sz_tot")(0)) <= 1e-14);
  CHECK(s2.at("purity0")(0) == Catch::Approx(0.5).margin(1e-12));

  ComplexMatrix bad(4, 4);
  bad.setZero();
  bad(0, 1) = 1.0;
  std::vector<NamedObservable> obs3;
  obs3.push_back({"bad", bad, -1});
  CHECK_THROWS_AS(expectation_values({up}, {0.0}, obs3, &m),
                  ContractViolation);
}

TEST_CASE("special_state_evolution", "[dynamics]") {
  Rng rng(29);
  const HamiltonianModel m = heisenberg_chain(rng, 3);
  const FieldProtocol p = random_smooth_protocol(rng, 5.0);
  const GaugeMap map(m, p);

  // ferromagnetic product state: eigenstate of H_H with E = sum J / 4
  ComplexVector up = ComplexVector::Zero(m.dim);
  up(0) = 1.0;
  double e = 0.0;
  for (const auto& edge : m.graph.edges) e += edge.coupling / 4.0;
  const auto grid = uniform_grid(5.0, 11);
  const auto states = special_state_evolve(map, up, e, grid);
  CHECK((states.front() - up).norm() <= 1e-12);

  // stays a product state: single-site purity 1; Bloch vector follows the
  // single-spin equation mdot = B x m
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
  const OdeSolution bloch = integrate_ode(bloch_rhs, m0, 0.0, 5.0, 1e-13);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(site_purity(states[k], m, 1) == Catch::Approx(1.0).margin(1e-8));
    const RealVector mref = bloch.at(grid[k]);
    for (int site = 0; site < 3; ++site) {
      const Vec3 mv{
          states[k].dot(m.dense_site_spin(site, 0) * states[k]).real(),
          states[k].dot(m.dense_site_spin(site, 1) * states[k]).real(),
          states[k].dot(m.dense_site_spin(site, 2) * states[k]).real()};
      CHECK(distance(mv, {mref(0), mref(1), mref(2)}) <= 1e-7);
    }
  }

  // generic eigenstate agrees with brute force
  const EighResult eig = eigh(m.h_static);
  const ComplexVector psi0 = eig.eigenvectors.col(2);
  const auto closed = special_state_evolve(map, psi0, eig.eigenvalues(2), grid);
  const auto direct = propagate_td(m, p, psi0, grid, 1e-11);
  for (std::size_t k = 0; k < grid.size(); ++k)
    CHECK(aligned_distance(closed[k], direct[k]) <= 1e-6);

  // non-eigenstates are rejected with the residual reported
  const ComplexVector bad = random_state(rng, m.dim);
  CHECK_THROWS_AS(special_state_evolve(map, bad, 0.0, grid),
                  MappingPreconditionError);
}

TEST_CASE("floquet_stroboscopic_dynamics", "[dynamics]") {
  // Ising drive with int_0^T Bx = 4 pi per spin: U_T = 1 exactly
  const HamiltonianModel m = build_ising_chain({1.0, 0.8, 1.2}, 0.5);
  const double period = 2.0;
  const int cycles = 3;
  const double horizon = period * cycles;
  std::vector<ScalarPtr> bx;
  std::vector<Vec3> b0;
  for (int i = 0; i < 4; ++i) {
    // Bx = (4 pi / T)(1 - cos(2 pi t / T)): integral over one period = 4 pi
    bx.push_back(make_sinusoid(-4.0 * kPi / period, 2.0 * kPi / period,
                               kPi / 2.0, 4.0 * kPi / period));
    b0.push_back({0.0, 0.3 + 0.1 * i, 0.9});
  }
  const FieldProtocol p = make_ising_field(bx, b0, horizon);
  const GaugeMap map(m, p);
  Rng rng(31);
  const ComplexVector psi0 = random_state(rng, m.dim);
  const FloquetResult fl = floquet_stroboscopic(map, psi0, period, cycles);
  CHECK(fl.defect <= 1e-7);

  const auto grid = uniform_grid(horizon, 5 * cycles + 1);
  const auto direct = propagate_td(m, p, psi0, grid, 1e-7);
  // compare at t = 3 T (grid is uniform with 5 points per period)
  CHECK(aligned_distance(fl.states[3], direct[15]) <= 1e-5);

  // no heating: stroboscopic energy is flat
  const ComplexMatrix& ht = map.htilde0();
  std::vector<double> energies;
  for (int n = 0; n <= cycles; ++n) {
    const ComplexVector& s = fl.states[std::size_t(n)];
    energies.push_back(s.dot(ht * s).real());
  }
  for (double e : energies)
    CHECK(std::abs(e - energies.front()) <= 1e-8);

  // a generic drive has no periodic gauge frame
  const FieldProtocol open_drive =
      make_ising_field({make_constant(0.7), make_constant(0.7),
                        make_constant(0.7), make_constant(0.7)},
                       {Vec3{0.7, 0.2, 0.9}, Vec3{0.7, 0.2, 0.9},
                        Vec3{0.7, 0.2, 0.9}, Vec3{0.7, 0.2, 0.9}},
                       horizon);
  const GaugeMap open_map(m, open_drive);
  CHECK_THROWS_AS(floquet_stroboscopic(open_map, psi0, period, 2),
                  PeriodicityError);
}

TEST_CASE("dynamical_invariants_are_conserved", "[dynamics]") {
  Rng rng(37);
  const HamiltonianModel m = heisenberg_chain(rng, 4);
  const FieldProtocol p = random_smooth_protocol(rng, 5.0);
  const GaugeMap map(m, p);
  const auto grid = uniform_grid(5.0, 11);
  const ComplexVector psi0 = random_state(rng, m.dim);
  const auto states = propagate_td(m, p, psi0, grid, 1e-11);

  // identity maps to the constant series 1
  const ObservableSeries id_series = dynamical_invariant_track(
      map, ComplexMatrix::Identity(m.dim, m.dim), states, grid, "one");
  for (Eigen::Index k = 0; k < id_series.at("one").size(); ++k)
    CHECK(id_series.at("one")(k) == Catch::Approx(1.0).margin(1e-12));

  // S_tot^2 and H_H give conserved expectation values
  ComplexMatrix s2 = ComplexMatrix::Zero(m.dim, m.dim);
  for (int a = 0; a < 3; ++a) {
    const ComplexMatrix s = m.dense_total_spin(a);
    s2 += s * s;
  }
  for (const ComplexMatrix& inv : {s2, m.h_static}) {
    const ObservableSeries series =
        dynamical_invariant_track(map, inv, states, grid, "inv");
    const RealVector& v = series.at("inv");
    for (Eigen::Index k = 0; k < v.size(); ++k)
      CHECK(std::abs(v(k) - v(0)) <= 1e-7);
  }

  // the defining relation holds in finite differences (Sz_tot commutes with
  // H_H but its dynamical image is genuinely time-dependent)
  CHECK(invariant_equation_residual(map, m.dense_total_spin(2), 2.5, 1e-3) <=
        1e-5);

  // operators that fail to commute with Htilde are rejected
  CHECK_THROWS_AS(
      dynamical_invariant_track(map, random_hermitian(rng, m.dim), states,
                                grid),
      MappingPreconditionError);
}
