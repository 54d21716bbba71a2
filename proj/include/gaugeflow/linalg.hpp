// Dense complex linear-algebra kernel: Hermitian eigendecomposition, unitary
// exponentials, Kronecker products, SU(2) closed forms and their inverses.
#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "gaugeflow/core.hpp"

namespace gaugeflow {

// ---------------------------------------------------------------------------
// Kronecker products
// ---------------------------------------------------------------------------

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::int64_t rows = std::int64_t(a.rows()) * b.rows();
  const std::int64_t cols = std::int64_t(a.cols()) * b.cols();
  if (rows > kMaxHilbertDim || cols > kMaxHilbertDim)
    throw CapacityError("kron: result dimension " + std::to_string(rows) +
                        "x" + std::to_string(cols) + " exceeds cap " +
                        std::to_string(kMaxHilbertDim));
  ComplexMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Left fold; the evaluation order is fixed so repeated assembly is bitwise
// reproducible.
inline ComplexMatrix kron_all(const std::vector<ComplexMatrix>& factors) {
  if (factors.empty()) return ComplexMatrix::Identity(1, 1);
  ComplexMatrix out = factors.front();
  for (std::size_t k = 1; k < factors.size(); ++k) out = kron(out, factors[k]);
  return out;
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition and unitary exponentials
// ---------------------------------------------------------------------------

struct EighResult {
  RealVector eigenvalues;   // ascending
  ComplexMatrix eigenvectors;  // columns; H = V diag(w) V^dagger
};

inline void require_hermitian(const ComplexMatrix& h, const char* who) {
  if (h.rows() != h.cols())
    throw ContractViolation(std::string(who) + ": matrix not square");
  const double scale = std::max(1.0, h.norm());
  if ((h - h.adjoint()).norm() > 1e-10 * scale)
    throw ContractViolation(std::string(who) + ": matrix not Hermitian");
}

inline EighResult eigh(const ComplexMatrix& h) {
  require_hermitian(h, "eigh");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success)
    throw Error("eigh: eigensolver failed to converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

// exp(-i s H) for Hermitian H.
inline ComplexMatrix expm_unitary(const EighResult& eig, double s) {
  const Eigen::Index n = eig.eigenvalues.size();
  ComplexVector phases(n);
  for (Eigen::Index k = 0; k < n; ++k)
    phases(k) = std::exp(Complex(0.0, -s * eig.eigenvalues(k)));
  return eig.eigenvectors * phases.asDiagonal() * eig.eigenvectors.adjoint();
}

inline ComplexMatrix expm_unitary(const ComplexMatrix& h, double s) {
  return expm_unitary(eigh(h), s);
}

// ---------------------------------------------------------------------------
// Spin matrices
// ---------------------------------------------------------------------------

struct SpinMatrices {
  ComplexMatrix sx, sy, sz;
};

inline bool is_half_integer_spin(double s) {
  const double twos = 2.0 * s;
  return s > 0.0 && std::abs(twos - std::round(twos)) < 1e-12;
}

inline int spin_multiplicity(double s) {
  if (!is_half_integer_spin(s))
    throw ContractViolation("spin quantum number must be in {1/2, 1, 3/2, ...}");
  return int(std::lround(2.0 * s)) + 1;
}

// Basis ordered by descending magnetic quantum number m = s, s-1, ..., -s.
inline SpinMatrices spin_matrices(double s) {
  const int d = spin_multiplicity(s);
  ComplexMatrix sp = ComplexMatrix::Zero(d, d);
  ComplexMatrix sz = ComplexMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const double m = s - i;
    sz(i, i) = m;
    if (i > 0) sp(i - 1, i) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  const ComplexMatrix sm = sp.adjoint();
  return {ComplexMatrix((sp + sm) / 2.0),
          ComplexMatrix((sp - sm) / (2.0 * kImag)), sz};
}

// ---------------------------------------------------------------------------
// SU(2) rotations: exp(i K . S)
// ---------------------------------------------------------------------------

inline ComplexMatrix su2_rotation(const Vec3& k, double s) {
  const int d = spin_multiplicity(s);
  const double angle = k.norm();
  if (angle == 0.0) return ComplexMatrix::Identity(d, d);
  const Vec3 n = k / angle;
  if (d == 2) {
    // cos(K/2) I + i sin(K/2) n.sigma
    const double c = std::cos(angle / 2.0), si = std::sin(angle / 2.0);
    ComplexMatrix u(2, 2);
    u(0, 0) = Complex(c, si * n.z);
    u(0, 1) = Complex(si * n.y, si * n.x);
    u(1, 0) = Complex(-si * n.y, si * n.x);
    u(1, 1) = Complex(c, -si * n.z);
    return u;
  }
  const SpinMatrices sm = spin_matrices(s);
  const ComplexMatrix ns = n.x * sm.sx + n.y * sm.sy + n.z * sm.sz;
  return expm_unitary(ns, -angle);  // exp(+i angle n.S)
}

// Inverse of su2_rotation on spin-1/2: the unique axis-angle representative
// with K in [0, 2pi]. The input is projected onto SU(2) (phase removed via
// the principal square root of det U), so near-unitary numerical input is
// fine. near_branch is set within 1e-9 of the K = 2pi cut, where the axis is
// no longer determined by U.
struct Su2Log {
  Vec3 k;
  bool near_branch = false;
};

inline Su2Log su2_log(const ComplexMatrix& u) {
  if (u.rows() != 2 || u.cols() != 2)
    throw ContractViolation("su2_log: expected a 2x2 matrix");
  if ((u * u.adjoint() - ComplexMatrix::Identity(2, 2)).norm() > 1e-8)
    throw ContractViolation("su2_log: input is not unitary");
  const Complex det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
  const Complex rephase = std::exp(Complex(0.0, -0.5 * std::arg(det)));
  const ComplexMatrix v = rephase * u;
  // v = c I + i (q . sigma), with (c, q) a unit 4-vector and |q| = sin(K/2).
  double c = 0.5 * (v(0, 0) + v(1, 1)).real();
  Vec3 q{0.5 * (v(0, 1) + v(1, 0)).imag(), 0.5 * (v(0, 1) - v(1, 0)).real(),
         0.5 * (v(0, 0) - v(1, 1)).imag()};
  const double qn = q.norm();
  const double four_norm = std::sqrt(c * c + qn * qn);
  c /= four_norm;
  const double sin_half = qn / four_norm;
  const double angle = 2.0 * std::atan2(sin_half, c);  // in [0, 2pi]
  Su2Log out;
  out.near_branch = (2.0 * kPi - angle) < 1e-9;
  if (sin_half < 1e-15) {
    out.k = (c >= 0.0) ? Vec3{0, 0, 0} : Vec3{0, 0, angle};
    return out;
  }
  out.k = q * (angle / qn);
  return out;
}

// ---------------------------------------------------------------------------
// Adjoint rotation of vectors: e^{i a.S} (b.S) e^{-i a.S} = c.S
// ---------------------------------------------------------------------------

inline Vec3 rodrigues_rotate(const Vec3& a, const Vec3& b) {
  const double an = a.norm();
  if (an == 0.0) return b;
  const Vec3 ah = a / an;
  return ah * (ah.dot(b)) * (1.0 - std::cos(an)) + b * std::cos(an) -
         ah.cross(b) * std::sin(an);
}

// Distance between axis-angle vectors modulo the SU(2) identifications
// K -> K + 4 pi m along the same axis (all equivalent representatives of a
// given SU(2) element lie on that line).
inline double axis_angle_distance(const Vec3& a, const Vec3& b) {
  const double bn = b.norm();
  double best = std::numeric_limits<double>::infinity();
  if (bn < 1e-300) {
    best = a.norm();
    const double an = a.norm();
    if (an > 0.0) best = std::min(best, std::abs(4.0 * kPi - an));
    return best;
  }
  const Vec3 bh = b / bn;
  for (int m = -2; m <= 2; ++m)
    best = std::min(best, distance(a, bh * (bn + 4.0 * kPi * m)));
  return best;
}

}  // namespace gaugeflow
