// Jordan-Wigner reduction of the open driven Ising chain to quadratic
// Majorana dynamics.
//
// Conventions: spin-1/2, open chain, Majoranas per site i (0-based)
//   a_{2i}   = (prod_{j<i} sigma^z_j) sigma^x_i
//   a_{2i+1} = (prod_{j<i} sigma^z_j) sigma^y_i
// normalized as c = a / sqrt(2), so {c_a, c_b} = delta_ab. Then
//   sigma^z_i         = -i a_{2i} a_{2i+1}
//   sigma^x_i sigma^x_{i+1} = -i a_{2i+1} a_{2i+2}
// and H = sum_i J_i Sx_i Sx_{i+1} - sum_i h_i(t) Sz_i becomes
// H = (i/2) sum_{ab} M_ab c_a c_b with M antisymmetric,
//   M(2i, 2i+1) = h_i(t),   M(2i+1, 2i+2) = -J_i / 2.
// The covariance matrix is Gamma_ab = (i/2) <[c_a, c_b]>, so that
//   <Sz_i> = -Gamma(2i, 2i+1),  <Sx_i Sx_{i+1}> = -Gamma(2i+1, 2i+2) / 2.
// The two transverse components of the driven chain's Htilde are rotated
// site-wise about x onto the z axis before this mapping; the rotation angles
// are recorded in the coefficients.
#pragma once

#include <Eigen/QR>
#include <bit>
#include <functional>
#include <utility>
#include <vector>

#include "gaugeflow/core.hpp"
#include "gaugeflow/field.hpp"
#include "gaugeflow/gauge.hpp"
#include "gaugeflow/linalg.hpp"

namespace gaugeflow {

// transverse field of one site, entering H as -(hy Sy + hz Sz)
struct TransverseChainField {
  ScalarPtr hy, hz;
};

class QuadraticCoefficients {
 public:
  QuadraticCoefficients(std::vector<double> couplings,
                        std::vector<std::function<double(double)>> h,
                        std::vector<double> theta, bool time_dependent)
      : couplings_(std::move(couplings)),
        h_(std::move(h)),
        theta_(std::move(theta)),
        time_dependent_(time_dependent) {
    if (couplings_.size() + 1 != h_.size())
      throw ConfigError("chain needs one coupling per bond");
  }

  int sites() const { return int(h_.size()); }
  int majorana_dim() const { return 2 * sites(); }
  bool time_dependent() const { return time_dependent_; }
  const std::vector<double>& couplings() const { return couplings_; }
  const std::vector<double>& rotation_angles() const { return theta_; }
  double field(int site, double t) const { return h_[std::size_t(site)](t); }

  // superdiagonal u with M(a, a+1) = u(a), M(a+1, a) = -u(a)
  RealVector superdiagonal(double t) const {
    const int n = majorana_dim();
    RealVector u = RealVector::Zero(n - 1);
    for (int i = 0; i < sites(); ++i) u(2 * i) = h_[std::size_t(i)](t);
    for (std::size_t i = 0; i < couplings_.size(); ++i)
      u(2 * int(i) + 1) = -0.5 * couplings_[i];
    return u;
  }

  RealMatrix matrix(double t) const {
    const int n = majorana_dim();
    RealMatrix m = RealMatrix::Zero(n, n);
    const RealVector u = superdiagonal(t);
    for (int a = 0; a + 1 < n; ++a) {
      m(a, a + 1) = u(a);
      m(a + 1, a) = -u(a);
    }
    return m;
  }

 private:
  std::vector<double> couplings_;
  std::vector<std::function<double(double)>> h_;
  std::vector<double> theta_;
  bool time_dependent_ = false;
};

// Generic entry point: per-site transverse fields (hy, hz)(t). The direction
// must be static; it is rotated onto z and the rotation recorded. The
// direction is read off at t = 0 and validated on a sample grid.
inline QuadraticCoefficients jw_coefficients(
    const std::vector<double>& couplings,
    const std::vector<TransverseChainField>& fields, double horizon) {
  const std::size_t l = fields.size();
  if (l < 2) throw ConfigError("chain needs at least two sites");
  if (couplings.size() + 1 != l)
    throw ConfigError("chain needs one coupling per bond");
  std::vector<std::function<double(double)>> h;
  std::vector<double> theta;
  for (std::size_t i = 0; i < l; ++i) {
    // read the direction off the first nonzero sample; a dead site keeps the
    // z axis
    double y0 = fields[i].hy->value(0.0), z0 = fields[i].hz->value(0.0);
    for (int k = 0; k <= 64 && std::hypot(y0, z0) < 1e-12; ++k) {
      const double t = horizon * double(k) / 64.0;
      y0 = fields[i].hy->value(t);
      z0 = fields[i].hz->value(t);
    }
    const double tn = std::hypot(y0, z0);
    const double dy = (tn < 1e-12) ? 0.0 : y0 / tn;
    const double dz = (tn < 1e-12) ? 1.0 : z0 / tn;
    theta.push_back(-std::atan2(dy, dz));
    const ScalarPtr hy = fields[i].hy, hz = fields[i].hz;
    // validate that the direction never leaves (dy, dz)
    for (int k = 0; k <= 64; ++k) {
      const double t = horizon * double(k) / 64.0;
      const double m = hy->value(t) * dy + hz->value(t) * dz;
      if (std::hypot(hy->value(t) - m * dy, hz->value(t) - m * dz) >
          1e-9 * std::max(1.0, std::abs(m)))
        throw ContractViolation(
            "jw_coefficients: transverse direction is not static");
    }
    h.push_back([hy, hz, dy, dz](double t) {
      return hy->value(t) * dy + hz->value(t) * dz;
    });
  }
  bool td = false;
  for (std::size_t i = 0; i < l; ++i) {
    const double m0 = h[i](0.0);
    for (int k = 1; k <= 16; ++k)
      if (std::abs(h[i](horizon * double(k) / 16.0) - m0) > 1e-13) td = true;
  }
  return QuadraticCoefficients(couplings, std::move(h), std::move(theta), td);
}

// Coefficients of Htilde_t for an Ising-chain gauge map. The mapped
// Hamiltonian must be purely transverse; a longitudinal component cannot
// appear for the constructed field kinds.
inline QuadraticCoefficients jw_for_map(const HamiltonianModel& model,
                                        const FieldProtocol& protocol) {
  if (model.family != ModelFamily::kIsingChain)
    throw ContractViolation("jw_for_map requires an ising-chain model");
  if (std::abs(model.spin - 0.5) > 1e-12)
    throw ContractViolation("the Jordan-Wigner route requires spin 1/2");
  if (protocol.kind() != FieldKind::kIsingCompatible &&
      protocol.kind() != FieldKind::kIsingEnvelope)
    throw MappingPreconditionError(
        "jw_for_map: protocol must be an Ising-constructed field");
  const int l = model.site_count();
  std::vector<double> couplings;
  for (const auto& e : model.graph.edges) couplings.push_back(e.coupling);
  std::vector<std::function<double(double)>> h;
  std::vector<double> theta;
  const bool envelope = protocol.kind() == FieldKind::kIsingEnvelope;
  for (int i = 0; i < l; ++i) {
    const std::size_t si = protocol.homogeneous() ? 0 : std::size_t(i);
    const auto [dy, dz] = protocol.site(si).transverse_direction();
    theta.push_back(-std::atan2(dy, dz));
    if (envelope) {
      const FieldProtocol p = protocol;  // value copy shares the scalar data
      h.push_back([p, si](double t) { return p.site(si).envelope(t); });
    } else {
      const Vec3 b0 = protocol.site(si).initial_value();
      const double mag = std::hypot(b0.y, b0.z);
      h.push_back([mag](double) { return mag; });
    }
  }
  return QuadraticCoefficients(couplings, std::move(h), std::move(theta),
                               envelope);
}

// ---------------------------------------------------------------------------
// Ground state of a static quadratic model
// ---------------------------------------------------------------------------

struct FermionGroundState {
  RealMatrix gamma;             // covariance of the filled ground state
  double energy = 0.0;          // -sum eps_k / 2
  std::vector<double> epsilons;  // single-particle energies, >= 0
  int parity = 1;               // fermion parity of the ground state
  bool degenerate = false;      // zero modes present (tie broken by filling)
};

inline FermionGroundState ground_covariance(const RealMatrix& m) {
  const Eigen::Index n = m.rows();
  if (m.cols() != n || n % 2 != 0)
    throw ContractViolation("ground_covariance: need an even-dim square M");
  if ((m + m.transpose()).norm() > 1e-12 * std::max(1.0, m.norm()))
    throw ContractViolation("ground_covariance: M must be antisymmetric");
  const Eigen::Index pairs = n / 2;

  const ComplexMatrix im = kImag * m.cast<Complex>();
  const EighResult eig = eigh(im);
  const double scale = std::max(1.0, std::abs(eig.eigenvalues(n - 1)));
  const double ztol = 1e-12 * scale;

  FermionGroundState g;
  RealMatrix r(n, n);
  Eigen::Index col = 0;

  // positive-energy pairs: columns (sqrt2 Im v, sqrt2 Re v) give the block
  // [[0, eps], [-eps, 0]] of R^T M R
  std::vector<Eigen::Index> zero_idx;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (eig.eigenvalues(k) > ztol) {
      const ComplexVector v = eig.eigenvectors.col(k);
      r.col(col++) = std::sqrt(2.0) * v.imag();
      r.col(col++) = std::sqrt(2.0) * v.real();
      g.epsilons.push_back(eig.eigenvalues(k));
    } else if (std::abs(eig.eigenvalues(k)) <= ztol) {
      zero_idx.push_back(k);
    }
  }
  if (!zero_idx.empty()) {
    // the kernel of an even-dim antisymmetric M is even-dimensional; an
    // orthonormal real basis of it supplies the zero pairs
    g.degenerate = true;
    const Eigen::Index nz = Eigen::Index(zero_idx.size());
    RealMatrix b(n, 2 * nz);
    for (Eigen::Index q = 0; q < nz; ++q) {
      b.col(2 * q) = eig.eigenvectors.col(zero_idx[std::size_t(q)]).real();
      b.col(2 * q + 1) = eig.eigenvectors.col(zero_idx[std::size_t(q)]).imag();
    }
    Eigen::ColPivHouseholderQR<RealMatrix> qr(b);
    const RealMatrix q = qr.householderQ() * RealMatrix::Identity(n, nz);
    for (Eigen::Index c = 0; c < nz; ++c) r.col(col++) = q.col(c);
    for (Eigen::Index pair = 0; pair < nz / 2; ++pair)
      g.epsilons.push_back(0.0);
  }
  if (col != n) throw Error("ground_covariance: pairing failed");
  if (Eigen::Index(g.epsilons.size()) != pairs)
    throw Error("ground_covariance: wrong pair count");
  if ((r.transpose() * r - RealMatrix::Identity(n, n)).norm() > 1e-8)
    throw Error("ground_covariance: mode matrix is not orthogonal");

  RealMatrix gamma_b = RealMatrix::Zero(n, n);
  for (Eigen::Index k = 0; k < pairs; ++k) {
    gamma_b(2 * k, 2 * k + 1) = -0.5;
    gamma_b(2 * k + 1, 2 * k) = 0.5;
  }
  g.gamma = r * gamma_b * r.transpose();
  double e = 0.0;
  for (double eps : g.epsilons) e += eps;
  g.energy = -0.5 * e;
  g.parity = (r.determinant() > 0.0) ? 1 : -1;
  return g;
}

inline double covariance_energy(const RealMatrix& m, const RealMatrix& gamma) {
  return -0.5 * (m * gamma).trace();
}

// Many-body spectrum by mode occupation; parity filter +1 selects the even
// sector, 0 keeps everything.
inline std::vector<double> sector_spectrum(const FermionGroundState& g,
                                           int parity_filter) {
  const std::size_t l = g.epsilons.size();
  if (l > 24) throw CapacityError("sector_spectrum: too many modes");
  std::vector<double> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << l); ++mask) {
    const int excitations = int(std::popcount(mask));
    const int parity = g.parity * ((excitations % 2) ? -1 : 1);
    if (parity_filter != 0 && parity != parity_filter) continue;
    double e = g.energy;
    for (std::size_t k = 0; k < l; ++k)
      if ((mask >> k) & 1) e += g.epsilons[k];
    out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<double> even_sector_spectrum(const FermionGroundState& g) {
  return sector_spectrum(g, 1);
}

// ---------------------------------------------------------------------------
// Covariance propagation: Gamma(t) = O(t) Gamma0 O(t)^T, Odot = M(t) O
// ---------------------------------------------------------------------------

inline void check_covariance(const RealMatrix& gamma) {
  const Eigen::Index n = gamma.rows();
  if (gamma.cols() != n || n % 2 != 0)
    throw ContractViolation("covariance matrix must be even-dim square");
  if ((gamma + gamma.transpose()).norm() > 1e-10 * std::max(1.0, gamma.norm()))
    throw ContractViolation("covariance matrix must be antisymmetric");
}

namespace detail {

// y = M(u) x with M the banded antisymmetric matrix built from u
inline void apply_band(const RealVector& u, const RealMatrix& x,
                       RealMatrix& y) {
  const Eigen::Index n = x.rows();
  y.setZero();
  for (Eigen::Index a = 0; a + 1 < n; ++a) {
    y.row(a) += u(a) * x.row(a + 1);
    y.row(a + 1) -= u(a) * x.row(a);
  }
}

// o <- exp(M(u) h) o, Taylor with slicing
inline void apply_band_exponential(const RealVector& u, double h,
                                   RealMatrix& o, RealMatrix& term,
                                   RealMatrix& scratch) {
  const double norm = 2.0 * u.cwiseAbs().maxCoeff();
  const int slices = std::max(1, int(std::ceil(norm * std::abs(h) / 0.5)));
  const double hs = h / slices;
  for (int sl = 0; sl < slices; ++sl) {
    term = o;
    const double base = o.norm();
    for (int k = 1; k <= 64; ++k) {
      apply_band(u, term, scratch);
      term = scratch * (hs / double(k));
      o += term;
      if (term.norm() <= 1e-16 * base) break;
      if (k == 64)
        throw IntegrationError("covariance exponential did not converge");
    }
  }
}

}  // namespace detail

inline std::vector<RealMatrix> propagate_covariance(
    const QuadraticCoefficients& coeffs, const RealMatrix& gamma0,
    const std::vector<double>& grid, double tol,
    PropagationStats* stats = nullptr) {
  check_grid(grid);
  check_covariance(gamma0);
  const Eigen::Index n = coeffs.majorana_dim();
  if (gamma0.rows() != n)
    throw ContractViolation("covariance dimension does not match the chain");

  std::vector<RealMatrix> out;
  out.reserve(grid.size());
  out.push_back(gamma0);
  RealMatrix o = RealMatrix::Identity(n, n);
  RealMatrix term(n, n), scratch(n, n);
  PropagationStats st;
  long warm = 1;

  auto chain = [&](const RealMatrix& o0, double t0, double dt, long m) {
    RealMatrix oo = o0;
    const double step = dt / double(m);
    for (long k = 0; k < m; ++k) {
      const RealVector u =
          coeffs.superdiagonal(t0 + (double(k) + 0.5) * step);
      detail::apply_band_exponential(u, step, oo, term, scratch);
    }
    return oo;
  };

  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double t0 = grid[k - 1], dt = grid[k] - grid[k - 1];
    long m = warm;
    RealMatrix coarse = chain(o, t0, dt, m);
    st.substeps += m;
    while (true) {
      RealMatrix fine = chain(o, t0, dt, 2 * m);
      st.substeps += 2 * m;
      const double defect = (coarse - fine).norm();
      if (defect <= tol) {
        st.max_interval_defect = std::max(st.max_interval_defect, defect);
        o = std::move(fine);
        warm = m;
        break;
      }
      coarse = std::move(fine);
      m *= 2;
      if (m > (1L << 22))
        throw IntegrationError("propagate_covariance: step underflow");
    }
    out.push_back(o * gamma0 * o.transpose());
  }
  if (stats) *stats = st;
  return out;
}

// ---------------------------------------------------------------------------
// Observables from the covariance matrix
// ---------------------------------------------------------------------------

struct CovarianceObservables {
  std::vector<double> sz;    // <Sz_i> per site
  std::vector<double> sxsx;  // <Sx_i Sx_{i+1}> per bond
};

inline CovarianceObservables covariance_observables(const RealMatrix& gamma) {
  check_covariance(gamma);
  const int l = int(gamma.rows() / 2);
  CovarianceObservables obs;
  for (int i = 0; i < l; ++i) obs.sz.push_back(-gamma(2 * i, 2 * i + 1));
  for (int i = 0; i + 1 < l; ++i)
    obs.sxsx.push_back(-0.5 * gamma(2 * i + 1, 2 * i + 2));
  return obs;
}

// covariance of the spin product state |up ... up>
inline RealMatrix all_up_covariance(int l) {
  RealMatrix gamma = RealMatrix::Zero(2 * l, 2 * l);
  for (int i = 0; i < l; ++i) {
    gamma(2 * i, 2 * i + 1) = -0.5;
    gamma(2 * i + 1, 2 * i) = 0.5;
  }
  return gamma;
}

// diag of prod_i sigma^z_i in the spin basis (site 0 = most significant)
inline RealVector spin_parity_diag(int l) {
  const Eigen::Index dim = Eigen::Index(1) << l;
  RealVector p(dim);
  for (Eigen::Index b = 0; b < dim; ++b)
    p(b) = (std::popcount(std::uint64_t(b)) % 2) ? -1.0 : 1.0;
  return p;
}

}  // namespace gaugeflow
