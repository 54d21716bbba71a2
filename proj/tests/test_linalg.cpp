#include <catch2/catch_amalgamated.hpp>

#include "gaugeflow/linalg.hpp"

using namespace gaugeflow;

namespace {

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

}  // namespace

TEST_CASE("kron_identity_and_definition", "[linalg]") {
  const ComplexMatrix i2 = ComplexMatrix::Identity(2, 2);
  CHECK((kron(i2, i2) - ComplexMatrix::Identity(4, 4)).norm() == 0.0);

  const ComplexMatrix xz = kron(pauli_x(), pauli_z());
  CHECK(xz(0, 2) == Complex(1.0));
  CHECK(xz(1, 3) == Complex(-1.0));
  CHECK(xz(0, 0) == Complex(0.0));
  CHECK(xz(2, 0) == Complex(1.0));
}

TEST_CASE("kron_mixed_product_rule", "[linalg]") {
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    ComplexMatrix a(2, 2), b(2, 2), c(2, 2), d(2, 2);
    for (auto* m : {&a, &b, &c, &d})
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) (*m)(i, j) = rng.complex_normal();
    const ComplexMatrix lhs = kron(a, b) * kron(c, d);
    const ComplexMatrix rhs = kron(ComplexMatrix(a * c), ComplexMatrix(b * d));
    CHECK((lhs - rhs).norm() <= 1e-13 * rhs.norm());
  }
}

TEST_CASE("kron_capacity_error", "[linalg]") {
  const ComplexMatrix big = ComplexMatrix::Identity(1025, 1025);
  CHECK_THROWS_AS(kron(big, big), CapacityError);
}

TEST_CASE("kron_all_fold_is_deterministic", "[linalg]") {
  Rng rng(5);
  ComplexMatrix a = random_hermitian(rng, 2), b = random_hermitian(rng, 3),
                c = random_hermitian(rng, 2);
  const ComplexMatrix folded = kron_all({a, b, c});
  const ComplexMatrix manual = kron(kron(a, b), c);
  CHECK((folded - manual).norm() == 0.0);
  const ComplexMatrix other = kron(a, kron(b, c));
  CHECK((folded - other).norm() <= 1e-14 * folded.norm());
}

TEST_CASE("eigh_pauli_and_reconstruction", "[linalg]") {
  const EighResult ez = eigh(pauli_z());
  CHECK(ez.eigenvalues(0) == Catch::Approx(-1.0));
  CHECK(ez.eigenvalues(1) == Catch::Approx(1.0));

  Rng rng(2);
  for (int n : {8, 64, 256, 1024}) {
    const ComplexMatrix h = random_hermitian(rng, n);
    const EighResult e = eigh(h);
    const ComplexMatrix rec = e.eigenvectors *
                              e.eigenvalues.cast<Complex>().asDiagonal() *
                              e.eigenvectors.adjoint();
    CHECK((rec - h).norm() <= 1e-10 * std::max(1.0, h.norm()));
    CHECK((e.eigenvectors.adjoint() * e.eigenvectors -
           ComplexMatrix::Identity(n, n))
              .norm() <= 1e-10);
    for (int k = 1; k < n; ++k)
      CHECK(e.eigenvalues(k) >= e.eigenvalues(k - 1));
  }
}

TEST_CASE("eigh_rejects_non_hermitian", "[linalg]") {
  ComplexMatrix m(2, 2);
  m << 0, 1, 0, 0;
  CHECK_THROWS_AS(eigh(m), ContractViolation);
}

TEST_CASE("expm_unitary_basics", "[linalg]") {
  Rng rng(3);
  const ComplexMatrix h = random_hermitian(rng, 5);
  CHECK((expm_unitary(h, 0.0) - ComplexMatrix::Identity(5, 5)).norm() <=
        1e-12);

  const ComplexMatrix uz = expm_unitary(pauli_z(), kPi / 2.0);
  CHECK(std::abs(uz(0, 0) - std::exp(Complex(0, -kPi / 2))) <= 1e-12);
  CHECK(std::abs(uz(1, 1) - std::exp(Complex(0, kPi / 2))) <= 1e-12);
  CHECK(std::abs(uz(0, 1)) <= 1e-14);

  const ComplexMatrix h6 = random_hermitian(rng, 6);
  const double s = 0.73;
  const ComplexMatrix prod = expm_unitary(h6, s) * expm_unitary(h6, -s);
  CHECK((prod - ComplexMatrix::Identity(6, 6)).norm() <= 1e-12);
}

TEST_CASE("spin_matrices_algebra", "[linalg]") {
  for (double s : {0.5, 1.0, 1.5, 2.0}) {
    const SpinMatrices sm = spin_matrices(s);
    const int d = spin_multiplicity(s);
    const ComplexMatrix comm = sm.sx * sm.sy - sm.sy * sm.sx;
    CHECK((comm - kImag * sm.sz).norm() <= 1e-12);
    const ComplexMatrix casimir =
        sm.sx * sm.sx + sm.sy * sm.sy + sm.sz * sm.sz;
    CHECK((casimir - s * (s + 1.0) * ComplexMatrix::Identity(d, d)).norm() <=
          1e-12);
  }
  CHECK_THROWS_AS(spin_matrices(0.7), ContractViolation);
}

TEST_CASE("su2_rotation_closed_forms", "[linalg]") {
  CHECK((su2_rotation({0, 0, 0}, 0.5) - ComplexMatrix::Identity(2, 2))
            .norm() == 0.0);

  const ComplexMatrix uz = su2_rotation({0, 0, kPi}, 0.5);
  CHECK(std::abs(uz(0, 0) - std::exp(Complex(0, kPi / 2))) <= 1e-14);
  CHECK(std::abs(uz(1, 1) - std::exp(Complex(0, -kPi / 2))) <= 1e-14);

  Rng rng(7);
  for (int rep = 0; rep < 50; ++rep) {
    const double angle = rng.uniform(0.0, 6.0);
    const Vec3 k = rng.unit_vec3() * angle;
    for (double s : {0.5, 1.0}) {
      const SpinMatrices sm = spin_matrices(s);
      const ComplexMatrix ks =
          k.x * sm.sx + k.y * sm.sy + k.z * sm.sz;
      const ComplexMatrix oracle = expm_unitary(ks, -1.0);  // exp(+i K.S)
      const ComplexMatrix u = su2_rotation(k, s);
      CHECK((u - oracle).norm() <= 1e-10);
      const int d = spin_multiplicity(s);
      CHECK((u * u.adjoint() - ComplexMatrix::Identity(d, d)).norm() <= 1e-12);
      CHECK((su2_rotation(k, s) * su2_rotation(-k, s) -
             ComplexMatrix::Identity(d, d))
                .norm() <= 1e-12);
    }
  }
  CHECK_THROWS_AS(su2_rotation({1, 0, 0}, 0.6), ContractViolation);
}

TEST_CASE("su2_log_basics_and_round_trip", "[linalg]") {
  const Su2Log id = su2_log(ComplexMatrix::Identity(2, 2));
  CHECK(id.k.norm() == 0.0);
  CHECK_FALSE(id.near_branch);

  const double theta = 1.234;
  ComplexMatrix u = ComplexMatrix::Zero(2, 2);
  u(0, 0) = std::exp(Complex(0, theta / 2));
  u(1, 1) = std::exp(Complex(0, -theta / 2));
  const Su2Log lg = su2_log(u);
  CHECK(std::abs(lg.k.x) <= 1e-12);
  CHECK(std::abs(lg.k.y) <= 1e-12);
  CHECK(lg.k.z == Catch::Approx(theta).margin(1e-12));

  Rng rng(13);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const double angle = rng.uniform(0.0, 2.0 * kPi - 0.1);
    const Vec3 k = rng.unit_vec3() * angle;
    const Su2Log back = su2_log(su2_rotation(k, 0.5));
    worst = std::max(worst, distance(back.k, k));
  }
  CHECK(worst <= 1e-8);

  // near the cut the flag trips
  const Su2Log cut = su2_log(su2_rotation({0, 0, 2.0 * kPi - 1e-10}, 0.5));
  CHECK(cut.near_branch);

  ComplexMatrix bad(2, 2);
  bad << 1, 1, 0, 1;
  CHECK_THROWS_AS(su2_log(bad), ContractViolation);
}

TEST_CASE("su2_log_accepts_global_phase", "[linalg]") {
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const Vec3 k = rng.unit_vec3() * rng.uniform(0.1, 5.0);
    const Complex phase = std::exp(Complex(0.0, rng.uniform(-kPi, kPi)));
    const ComplexMatrix u = phase * su2_rotation(k, 0.5);
    const Su2Log lg = su2_log(u);
    const ComplexMatrix rebuilt = su2_rotation(lg.k, 0.5);
    // equal up to a global phase
    const Complex ov = (rebuilt.adjoint() * u).trace() / 2.0;
    CHECK(std::abs(std::abs(ov) - 1.0) <= 1e-8);
  }
}

TEST_CASE("rodrigues_rotate_matches_conjugation", "[linalg]") {
  const Vec3 b{0.3, -1.1, 0.7};
  CHECK(distance(rodrigues_rotate({0, 0, 0}, b), b) == 0.0);

  const Vec3 c = rodrigues_rotate({0, 0, kPi / 2}, {1, 0, 0});
  CHECK(distance(c, {0, -1, 0}) <= 1e-12);

  Rng rng(23);
  for (int rep = 0; rep < 1000; ++rep) {
    const Vec3 a = rng.unit_vec3() * rng.uniform(0.0, 6.0);
    const Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    const Vec3 r = rodrigues_rotate(a, v);
    CHECK(std::abs(r.norm() - v.norm()) <= 1e-12 * std::max(1.0, v.norm()));
    for (double s : {0.5, 1.0}) {
      const SpinMatrices sm = spin_matrices(s);
      const ComplexMatrix u = su2_rotation(a, s);
      const ComplexMatrix lhs =
          u * (v.x * sm.sx + v.y * sm.sy + v.z * sm.sz) * u.adjoint();
      const ComplexMatrix rhs = r.x * sm.sx + r.y * sm.sy + r.z * sm.sz;
      CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, rhs.norm()));
    }
  }
}

TEST_CASE("axis_angle_distance_mod_equivalence", "[linalg]") {
  const Vec3 k{0.0, 0.0, 1.0};
  CHECK(axis_angle_distance(k, k) == 0.0);
  // K and (4 pi - K) about the flipped axis represent the same element
  const Vec3 flipped = Vec3{0.0, 0.0, -1.0} * (4.0 * kPi - 1.0);
  CHECK(axis_angle_distance(k, flipped) <= 1e-12);
  CHECK(axis_angle_distance({0, 0, 0.5}, {0, 0, 0}) ==
        Catch::Approx(0.5));
}
