#include <catch2/catch_amalgamated.hpp>

#include "gaugeflow/dynamics.hpp"
#include "gaugeflow/freefermion.hpp"

using namespace gaugeflow;

namespace {

// dense spin Hamiltonian sum J Sx Sx - sum (hy Sy + hz Sz)
ComplexMatrix chain_spin_hamiltonian(const std::vector<double>& j,
                                     const std::vector<Vec3>& field) {
  const HamiltonianModel m = build_ising_chain(j, 0.5);
  return m.h_static - m.field_operator(field);
}

std::vector<double> even_sector_ed(const ComplexMatrix& h, int l) {
  const RealVector parity = spin_parity_diag(l);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index b = 0; b < parity.size(); ++b)
    if (parity(b) > 0) keep.push_back(b);
  ComplexMatrix sub(keep.size(), keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r)
    for (std::size_t c = 0; c < keep.size(); ++c)
      sub(Eigen::Index(r), Eigen::Index(c)) =
          h(keep[r], keep[c]);
  const RealVector w = eigh(sub).eigenvalues;
  return std::vector<double>(w.data(), w.data() + w.size());
}

std::vector<TransverseChainField> z_fields(const std::vector<double>& hz) {
  std::vector<TransverseChainField> f;
  for (double h : hz) f.push_back({make_constant(0.0), make_constant(h)});
  return f;
}

}  // namespace

TEST_CASE("jw_matrix_structure", "[freefermion]") {
  const double hz = 0.8;
  const QuadraticCoefficients qc =
      jw_coefficients({0.0, 0.0}, z_fields({hz, hz, hz}), 1.0);
  const RealMatrix m = qc.matrix(0.0);
  CHECK(m.rows() == 6);
  CHECK((m + m.transpose()).norm() <= 1e-14);
  for (int i = 0; i < 3; ++i) {
    CHECK(m(2 * i, 2 * i + 1) == Catch::Approx(hz).margin(1e-14));
  }
  CHECK(m(1, 2) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("jw_even_sector_spectrum_matches_ed", "[freefermion]") {
  // uniform transverse Ising at L = 8
  const int l = 8;
  const std::vector<double> j(std::size_t(l - 1), 1.0);
  const double hz = 0.7;
  const QuadraticCoefficients qc =
      jw_coefficients(j, z_fields(std::vector<double>(std::size_t(l), hz)),
                      1.0);
  const FermionGroundState g = ground_covariance(qc.matrix(0.0));
  const std::vector<double> even = even_sector_spectrum(g);
  const std::vector<double> ed = even_sector_ed(
      chain_spin_hamiltonian(j, std::vector<Vec3>(std::size_t(l),
                                                  Vec3{0, 0, hz})),
      l);
  REQUIRE(even.size() == ed.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < ed.size(); ++k)
    worst = std::max(worst, std::abs(even[k] - ed[k]));
  CHECK(worst <= 1e-8);

  // random couplings and z fields: even sector again
  Rng rng(7);
  std::vector<double> jr;
  for (int k = 0; k + 1 < l; ++k) jr.push_back(rng.uniform(0.5, 1.5));
  std::vector<double> hzr;
  for (int i = 0; i < l; ++i) hzr.push_back(rng.uniform(0.3, 1.1));
  const QuadraticCoefficients qr = jw_coefficients(jr, z_fields(hzr), 1.0);
  const FermionGroundState gr = ground_covariance(qr.matrix(0.0));
  const std::vector<double> even_r = even_sector_spectrum(gr);
  std::vector<Vec3> vecs;
  for (int i = 0; i < l; ++i) vecs.push_back({0.0, 0.0, hzr[std::size_t(i)]});
  const std::vector<double> ed_r =
      even_sector_ed(chain_spin_hamiltonian(jr, vecs), l);
  REQUIRE(even_r.size() == ed_r.size());
  worst = 0.0;
  for (std::size_t k = 0; k < ed_r.size(); ++k)
    worst = std::max(worst, std::abs(even_r[k] - ed_r[k]));
  CHECK(worst <= 1e-8);

  // mixed transverse directions: the site-wise x rotation leaves the full
  // spectrum invariant (parity sectors rotate with it)
  std::vector<TransverseChainField> fields;
  std::vector<Vec3> mixed;
  for (int i = 0; i < l; ++i) {
    const double hy = rng.uniform(-0.9, 0.9), hzz = rng.uniform(0.3, 1.1);
    fields.push_back({make_constant(hy), make_constant(hzz)});
    mixed.push_back({0.0, hy, hzz});
  }
  const QuadraticCoefficients qm = jw_coefficients(jr, fields, 1.0);
  const FermionGroundState gm = ground_covariance(qm.matrix(0.0));
  const std::vector<double> all_q = sector_spectrum(gm, 0);
  const RealVector all_ed =
      eigh(chain_spin_hamiltonian(jr, mixed)).eigenvalues;
  REQUIRE(Eigen::Index(all_q.size()) == all_ed.size());
  worst = 0.0;
  for (Eigen::Index k = 0; k < all_ed.size(); ++k)
    worst = std::max(worst, std::abs(all_q[std::size_t(k)] - all_ed(k)));
  CHECK(worst <= 1e-8);
}

TEST_CASE("ground_covariance_properties", "[freefermion]") {
  // decoupled sites: canonical 2x2 blocks, pure state
  const QuadraticCoefficients dec =
      jw_coefficients({0.0}, z_fields({1.0, 1.0}), 1.0);
  const FermionGroundState g = ground_covariance(dec.matrix(0.0));
  CHECK_FALSE(g.degenerate);
  CHECK(g.gamma(0, 1) == Catch::Approx(-0.5).margin(1e-12));
  CHECK(g.gamma(2, 3) == Catch::Approx(-0.5).margin(1e-12));
  CHECK(std::abs(g.gamma(0, 2)) <= 1e-12);

  // energy from the covariance matches the ground value
  Rng rng(11);
  const int l = 6;
  std::vector<double> j;
  for (int k = 0; k + 1 < l; ++k) j.push_back(rng.uniform(0.7, 1.3));
  std::vector<double> hz;
  for (int i = 0; i < l; ++i) hz.push_back(rng.uniform(0.4, 1.2));
  const QuadraticCoefficients qc = jw_coefficients(j, z_fields(hz), 1.0);
  const RealMatrix m = qc.matrix(0.0);
  const FermionGroundState gs = ground_covariance(m);
  CHECK(covariance_energy(m, gs.gamma) ==
        Catch::Approx(gs.energy).margin(1e-10));

  // the global ground energy agrees with dense diagonalization
  std::vector<Vec3> vecs;
  for (int i = 0; i < l; ++i) vecs.push_back({0.0, 0.0, hz[std::size_t(i)]});
  const RealVector w = eigh(chain_spin_hamiltonian(j, vecs)).eigenvalues;
  CHECK(gs.energy == Catch::Approx(w(0)).margin(1e-8));

  // purity: eigenvalues of i Gamma are +/- 1/2
  const EighResult ig = eigh(kImag * gs.gamma.cast<Complex>());
  for (Eigen::Index k = 0; k < ig.eigenvalues.size(); ++k)
    CHECK(std::abs(std::abs(ig.eigenvalues(k)) - 0.5) <= 1e-9);

  // zero modes flag degeneracy
  const QuadraticCoefficients znull =
      jw_coefficients({0.0}, z_fields({1.0, 0.0}), 1.0);
  CHECK(ground_covariance(znull.matrix(0.0)).degenerate);
}

TEST_CASE("covariance_propagation_stationarity", "[freefermion]") {
  const std::vector<double> j{1.0, 0.8, 1.2};
  const std::vector<double> hz{0.9, 1.1, 0.7, 1.0};
  const QuadraticCoefficients qc = jw_coefficients(j, z_fields(hz), 6.0);
  const auto grid = uniform_grid(6.0, 13);

  // M = 0 freezes Gamma
  {
    std::vector<std::function<double(double)>> h0(4, [](double) {
      return 0.0;
    });
    const QuadraticCoefficients zero({0.0, 0.0, 0.0}, std::move(h0),
                                     {0, 0, 0, 0}, false);
    const RealMatrix start = all_up_covariance(4);
    for (const RealMatrix& gm :
         propagate_covariance(zero, start, grid, 1e-12))
      CHECK((gm - start).norm() <= 1e-12);
  }

  const FermionGroundState g = ground_covariance(qc.matrix(0.0));
  const auto gammas = propagate_covariance(qc, g.gamma, grid, 1e-10);
  for (const RealMatrix& gm : gammas) {
    CHECK((gm - g.gamma).norm() <= 1e-9);
    CHECK((gm + gm.transpose()).norm() <= 1e-10);
  }
}

TEST_CASE("driven_covariance_matches_many_body", "[freefermion]") {
  // driven transverse field, L = 6: covariance route vs dense propagation
  const int l = 6;
  Rng rng(13);
  std::vector<double> j;
  for (int k = 0; k + 1 < l; ++k) j.push_back(rng.uniform(0.7, 1.3));
  std::vector<TransverseChainField> fields;
  std::vector<ScalarPtr> hz;
  for (int i = 0; i < l; ++i) {
    hz.push_back(make_sinusoid(rng.uniform(-0.3, 0.3), rng.uniform(0.5, 1.5),
                               rng.uniform(0.0, 2.0 * kPi),
                               rng.uniform(0.6, 1.2)));
    fields.push_back({make_constant(0.0), hz.back()});
  }
  const double horizon = 3.0;
  const QuadraticCoefficients qc = jw_coefficients(j, fields, horizon);
  const auto grid = uniform_grid(horizon, 7);

  // covariance route from all-up
  const auto gammas =
      propagate_covariance(qc, all_up_covariance(l), grid, 1e-10);

  // many-body route
  const HamiltonianModel m = build_ising_chain(j, 0.5);
  SiteFieldFn field = [&hz](int site, double t) {
    return Vec3{0.0, 0.0, hz[std::size_t(site)]->value(t)};
  };
  TimeDependentHamiltonian h(m, field);
  ComplexVector up = ComplexVector::Zero(m.dim);
  up(0) = 1.0;
  const auto states = propagate_td(h, up, grid, 1e-11);

  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const CovarianceObservables obs = covariance_observables(gammas[k]);
    for (int i = 0; i < l; ++i) {
      const double sz =
          states[k].dot(m.dense_site_spin(i, 2) * states[k]).real();
      worst = std::max(worst, std::abs(sz - obs.sz[std::size_t(i)]));
    }
    for (int i = 0; i + 1 < l; ++i) {
      const ComplexMatrix sxsx =
          m.dense_site_spin(i, 0) * m.dense_site_spin(i + 1, 0);
      const double v = states[k].dot(sxsx * states[k]).real();
      worst = std::max(worst, std::abs(v - obs.sxsx[std::size_t(i)]));
    }
    // purity is conserved
    const EighResult ig = eigh(kImag * gammas[k].cast<Complex>());
    for (Eigen::Index q = 0; q < ig.eigenvalues.size(); ++q)
      CHECK(std::abs(std::abs(ig.eigenvalues(q)) - 0.5) <= 1e-8);
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("covariance_observables_reference_states", "[freefermion]") {
  const RealMatrix up = all_up_covariance(4);
  const CovarianceObservables obs = covariance_observables(up);
  for (double v : obs.sz) CHECK(v == Catch::Approx(0.5).margin(1e-14));
  for (double v : obs.sxsx) CHECK(std::abs(v) <= 1e-14);

  const CovarianceObservables hot =
      covariance_observables(RealMatrix::Zero(8, 8));
  for (double v : hot.sz) CHECK(v == 0.0);
  for (double v : hot.sxsx) CHECK(v == 0.0);
}

TEST_CASE("jw_rejects_unsteady_directions", "[freefermion]") {
  std::vector<TransverseChainField> fields;
  fields.push_back({make_constant(0.4), make_constant(0.8)});
  fields.push_back(
      {make_sinusoid(0.5, 1.0, 0.3, 0.2), make_constant(0.8)});
  CHECK_THROWS_AS(jw_coefficients({1.0}, fields, 2.0), ContractViolation);
}
