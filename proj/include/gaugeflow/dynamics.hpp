// Propagators and observables. The brute-force reference integrates
// i dpsi/dt = H(t) psi with midpoint-exponential steps exp(-i H(t+h/2) h),
// each step applied as a machine-precision Taylor series of the exponential
// (unitary up to roundoff), with per-interval step halving until the grid
// solution is converged. Everything else in the library is verified against
// this route.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gaugeflow/core.hpp"
#include "gaugeflow/gauge.hpp"
#include "gaugeflow/linalg.hpp"
#include "gaugeflow/models.hpp"

namespace gaugeflow {

// ---------------------------------------------------------------------------
// State helpers
// ---------------------------------------------------------------------------

inline void require_normalized(const ComplexVector& psi) {
  if (std::abs(psi.norm() - 1.0) > 1e-9)
    throw ContractViolation("state vector is not normalized");
}

// min over global phases of || a - e^{i phi} b ||_2
inline double aligned_distance(const ComplexVector& a,
                               const ComplexVector& b) {
  const double na2 = a.squaredNorm(), nb2 = b.squaredNorm();
  const double ov = std::abs(a.dot(b));
  return std::sqrt(std::max(0.0, na2 + nb2 - 2.0 * ov));
}

inline double relative_phase(const ComplexVector& a, const ComplexVector& b) {
  return std::arg(a.dot(b));
}

// ---------------------------------------------------------------------------
// Fast sparse assembly of H(t) = H_static - sum_i B_i(t) . S_i
// ---------------------------------------------------------------------------

// field(site, t); models with homogeneous drives simply ignore the site.
using SiteFieldFn = std::function<Vec3(int, double)>;

inline SiteFieldFn protocol_field(const FieldProtocol& p) {
  return [&p](int site, double t) {
    return p.value(p.homogeneous() ? 0 : std::size_t(site), t);
  };
}

class TimeDependentHamiltonian {
 public:
  TimeDependentHamiltonian(const HamiltonianModel& model, SiteFieldFn field)
      : model_(&model), field_(std::move(field)) {
    // union pattern of the static part and every site-spin component
    // (values are rebuilt on every refresh; only the structure matters here)
    SparseComplex pattern = model.h_static_sparse;
    for (const auto& site : model.site_spin)
      for (const auto& op : site) pattern += op;
    pattern.makeCompressed();
    work_ = pattern;
    static_map_ = build_map(model.h_static_sparse);
    site_maps_.resize(model.site_spin.size());
    for (std::size_t i = 0; i < model.site_spin.size(); ++i)
      for (int a = 0; a < 3; ++a)
        site_maps_[i][std::size_t(a)] = build_map(model.site_spin[i][std::size_t(a)]);
  }

  Eigen::Index dim() const { return model_->dim; }

  void refresh(double t) {
    Complex* v = work_.valuePtr();
    std::fill(v, v + work_.nonZeros(), Complex(0.0));
    add(static_map_, model_->h_static_sparse, Complex(1.0));
    for (std::size_t i = 0; i < site_maps_.size(); ++i) {
      const Vec3 b = field_(int(i), t);
      add(site_maps_[i][0], model_->site_spin[i][0], Complex(-b.x));
      add(site_maps_[i][1], model_->site_spin[i][1], Complex(-b.y));
      add(site_maps_[i][2], model_->site_spin[i][2], Complex(-b.z));
    }
    norm_dirty_ = true;
  }

  void apply(const ComplexVector& x, ComplexVector& y) const {
    y.noalias() = work_ * x;
  }

  // infinity norm of the current H(t)
  double norm_estimate() const {
    if (norm_dirty_) {
      RealVector rowsum = RealVector::Zero(work_.rows());
      for (int k = 0; k < work_.outerSize(); ++k)
        for (SparseComplex::InnerIterator it(work_, k); it; ++it)
          rowsum(it.row()) += std::abs(it.value());
      norm_ = rowsum.maxCoeff();
      norm_dirty_ = false;
    }
    return norm_;
  }

  ComplexMatrix dense(double t) {
    refresh(t);
    return ComplexMatrix(work_);
  }

 private:
  std::vector<int> build_map(const SparseComplex& src) const {
    std::vector<int> map;
    map.reserve(std::size_t(src.nonZeros()));
    for (int k = 0; k < src.outerSize(); ++k)
      for (SparseComplex::InnerIterator it(src, k); it; ++it) {
        // locate (row, col) inside the compressed work pattern
        const int begin = int(work_.outerIndexPtr()[it.col()]);
        const int end = int(work_.outerIndexPtr()[it.col() + 1]);
        int lo = begin, hi = end - 1, found = -1;
        while (lo <= hi) {
          const int mid = (lo + hi) / 2;
          const int row = int(work_.innerIndexPtr()[mid]);
          if (row == it.row()) {
            found = mid;
            break;
          }
          if (row < it.row())
            lo = mid + 1;
          else
            hi = mid - 1;
        }
        if (found < 0) throw Error("sparse pattern mismatch");
        map.push_back(found);
      }
    return map;
  }

  void add(const std::vector<int>& map, const SparseComplex& src,
           Complex coeff) {
    if (coeff == 0.0) return;
    Complex* v = work_.valuePtr();
    std::size_t n = 0;
    for (int k = 0; k < src.outerSize(); ++k)
      for (SparseComplex::InnerIterator it(src, k); it; ++it)
        v[map[n++]] += coeff * it.value();
  }

  const HamiltonianModel* model_;
  SiteFieldFn field_;
  SparseComplex work_;
  std::vector<int> static_map_;
  std::vector<std::array<std::vector<int>, 3>> site_maps_;
  mutable double norm_ = 0.0;
  mutable bool norm_dirty_ = true;
};

// ---------------------------------------------------------------------------
// Reference time-dependent propagator
// ---------------------------------------------------------------------------

struct PropagationStats {
  long substeps = 0;
  double max_interval_defect = 0.0;  // step-halving convergence measure
};

namespace detail {

// psi <- exp(-i H h) psi via Taylor series, sliced so each slice satisfies
// ||H|| h <= 1/2 (no cancellation; converged to machine precision)
inline void apply_exponential(const TimeDependentHamiltonian& h, double step,
                              ComplexVector& psi, ComplexVector& term,
                              ComplexVector& scratch) {
  const double hn = h.norm_estimate() * std::abs(step);
  const int slices = std::max(1, int(std::ceil(hn / 0.5)));
  const double hs = step / slices;
  for (int sl = 0; sl < slices; ++sl) {
    term = psi;
    const double psi_norm = psi.norm();
    for (int k = 1; k <= 64; ++k) {
      h.apply(term, scratch);
      term = scratch * (Complex(0.0, -hs) / double(k));
      psi += term;
      if (term.norm() <= 1e-16 * psi_norm) break;
      if (k == 64)
        throw IntegrationError("exponential Taylor series did not converge");
    }
  }
}

inline ComplexVector midpoint_chain(TimeDependentHamiltonian& h,
                                    const ComplexVector& psi0, double t0,
                                    double dt, long m, ComplexVector& term,
                                    ComplexVector& scratch) {
  ComplexVector psi = psi0;
  const double step = dt / double(m);
  for (long k = 0; k < m; ++k) {
    h.refresh(t0 + (double(k) + 0.5) * step);
    apply_exponential(h, step, psi, term, scratch);
  }
  return psi;
}

}  // namespace detail

// Grid-sampled brute-force propagation; tol bounds the change of each grid
// value under step halving.
inline std::vector<ComplexVector> propagate_td(
    TimeDependentHamiltonian& h, const ComplexVector& psi0,
    const std::vector<double>& grid, double tol,
    PropagationStats* stats = nullptr) {
  check_grid(grid);
  require_normalized(psi0);
  std::vector<ComplexVector> out;
  out.reserve(grid.size());
  out.push_back(psi0);
  ComplexVector term(psi0.size()), scratch(psi0.size());
  PropagationStats st;
  long warm = 1;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double t0 = grid[k - 1], dt = grid[k] - grid[k - 1];
    long m = warm;
    ComplexVector coarse =
        detail::midpoint_chain(h, out.back(), t0, dt, m, term, scratch);
    st.substeps += m;
    while (true) {
      ComplexVector fine =
          detail::midpoint_chain(h, out.back(), t0, dt, 2 * m, term, scratch);
      st.substeps += 2 * m;
      const double defect = (coarse - fine).norm();
      if (defect <= tol) {
        st.max_interval_defect = std::max(st.max_interval_defect, defect);
        out.push_back(std::move(fine));
        warm = m;
        break;
      }
      coarse = std::move(fine);
      m *= 2;
      if (m > (1L << 22))
        throw IntegrationError("propagate_td: step size underflow");
    }
  }
  if (stats) *stats = st;
  return out;
}

inline std::vector<ComplexVector> propagate_td(
    const HamiltonianModel& model, const FieldProtocol& protocol,
    const ComplexVector& psi0, const std::vector<double>& grid, double tol,
    PropagationStats* stats = nullptr) {
  model.check_protocol(protocol);
  TimeDependentHamiltonian h(model, protocol_field(protocol));
  return propagate_td(h, psi0, grid, tol, stats);
}

// ---------------------------------------------------------------------------
// Time-independent propagation (exact via the spectrum)
// ---------------------------------------------------------------------------

class TiPropagator {
 public:
  TiPropagator(const ComplexMatrix& h, const ComplexVector& psi0)
      : eig_(eigh(h)), coef_(eig_.eigenvectors.adjoint() * psi0) {}

  ComplexVector at(double t) const {
    ComplexVector c(coef_.size());
    for (Eigen::Index k = 0; k < coef_.size(); ++k)
      c(k) = coef_(k) * std::exp(Complex(0.0, -eig_.eigenvalues(k) * t));
    return eig_.eigenvectors * c;
  }

  const EighResult& eig() const { return eig_; }

 private:
  EighResult eig_;
  ComplexVector coef_;
};

inline ComplexVector propagate_ti(const ComplexMatrix& h,
                                  const ComplexVector& psi0, double t) {
  require_normalized(psi0);
  return TiPropagator(h, psi0).at(t);
}

// ---------------------------------------------------------------------------
// Gauge-route evolution: Psi_t = U_t PsiTilde_t
// ---------------------------------------------------------------------------

struct GaugeEvolution {
  std::vector<ComplexVector> states;
  std::shared_ptr<GaugeMap> map;
};

inline GaugeEvolution evolve_via_gauge(const HamiltonianModel& model,
                                       const FieldProtocol& protocol,
                                       const ComplexVector& psi0,
                                       const std::vector<double>& grid,
                                       double tol,
                                       GaugeMapOptions opts = {}) {
  check_grid(grid);
  require_normalized(psi0);
  auto map = std::make_shared<GaugeMap>(model, protocol, opts);
  GaugeEvolution out;
  out.map = map;
  out.states.reserve(grid.size());
  if (map->htilde_static()) {
    TiPropagator prop(map->htilde0(), psi0);
    for (double t : grid) out.states.push_back(map->unitary(t) * prop.at(t));
  } else {
    // envelope-driven chains: Htilde_t itself is time-dependent
    const int l = model.site_count();
    std::vector<std::pair<double, double>> dir(static_cast<std::size_t>(l));
    for (int i = 0; i < l; ++i)
      dir[std::size_t(i)] = protocol
                                .site(protocol.homogeneous() ? 0
                                                             : std::size_t(i))
                                .transverse_direction();
    SiteFieldFn field = [&protocol, dir](int site, double t) {
      const std::size_t si = protocol.homogeneous() ? 0 : std::size_t(site);
      const double env = protocol.site(si).envelope(t);
      return Vec3{0.0, env * dir[std::size_t(site)].first,
                  env * dir[std::size_t(site)].second};
    };
    TimeDependentHamiltonian h(model, field);
    const std::vector<ComplexVector> tilde =
        propagate_td(h, psi0, grid, tol);
    for (std::size_t k = 0; k < grid.size(); ++k)
      out.states.push_back(map->unitary(grid[k]) * tilde[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

struct ObservableSeries {
  std::vector<double> times;
  std::vector<std::pair<std::string, RealVector>> values;

  const RealVector& at(const std::string& name) const {
    for (const auto& [n, v] : values)
      if (n == name) return v;
    throw ConfigError("observable series has no entry named " + name);
  }
};

struct NamedObservable {
  std::string name;
  std::optional<ComplexMatrix> op;  // Hermitian operator
  int purity_site = -1;             // or single-site purity
};

// reduced density matrix of one tensor factor
inline ComplexMatrix reduced_density(const ComplexVector& psi,
                                     const std::vector<Eigen::Index>& dims,
                                     std::size_t factor) {
  Eigen::Index suffix = 1;
  for (std::size_t m = factor + 1; m < dims.size(); ++m) suffix *= dims[m];
  const Eigen::Index d = dims.at(factor);
  const Eigen::Index prefix = psi.size() / (suffix * d);
  ComplexMatrix rho = ComplexMatrix::Zero(d, d);
  for (Eigen::Index l = 0; l < prefix; ++l)
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = 0; b < d; ++b) {
        Complex acc = 0.0;
        for (Eigen::Index r = 0; r < suffix; ++r)
          acc += psi((l * d + a) * suffix + r) *
                 std::conj(psi((l * d + b) * suffix + r));
        rho(a, b) += acc;
      }
  return rho;
}

inline double site_purity(const ComplexVector& psi,
                          const HamiltonianModel& model, int site) {
  const ComplexMatrix rho =
      reduced_density(psi, model.factor_dims, std::size_t(site));
  return rho.squaredNorm();  // tr rho^2 for Hermitian rho
}

inline ObservableSeries expectation_values(
    const std::vector<ComplexVector>& states, const std::vector<double>& grid,
    const std::vector<NamedObservable>& observables,
    const HamiltonianModel* model = nullptr) {
  if (states.size() != grid.size())
    throw ContractViolation("one state per grid point required");
  ObservableSeries out;
  out.times = grid;
  for (const NamedObservable& obs : observables) {
    RealVector v(Eigen::Index(states.size()));
    if (obs.op) {
      require_hermitian(*obs.op, "expectation_values");
      for (std::size_t k = 0; k < states.size(); ++k)
        v(Eigen::Index(k)) = states[k].dot(*obs.op * states[k]).real();
    } else {
      if (!model || obs.purity_site < 0)
        throw ContractViolation("purity observable needs a model and a site");
      for (std::size_t k = 0; k < states.size(); ++k)
        v(Eigen::Index(k)) = site_purity(states[k], *model, obs.purity_site);
    }
    out.values.emplace_back(obs.name, std::move(v));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Special initial states: Psi_t = e^{-i E t} U_t Psi_0
// ---------------------------------------------------------------------------

inline std::vector<ComplexVector> special_state_evolve(
    const GaugeMap& map, const ComplexVector& psi0, double energy,
    const std::vector<double>& grid) {
  check_grid(grid);
  require_normalized(psi0);
  if (!map.htilde_static())
    throw MappingPreconditionError(
        "special-state evolution requires a time-independent Htilde");
  const double resid = (map.htilde0() * psi0 - energy * psi0).norm();
  if (resid > 1e-8)
    throw MappingPreconditionError(
        "initial state is not an eigenstate of Htilde (residual " +
        std::to_string(resid) + ")");
  std::vector<ComplexVector> out;
  out.reserve(grid.size());
  for (double t : grid)
    out.push_back(std::exp(Complex(0.0, -energy * t)) *
                  (map.unitary(t) * psi0));
  return out;
}

// ---------------------------------------------------------------------------
// Floquet stroboscopic dynamics
// ---------------------------------------------------------------------------

struct FloquetResult {
  std::vector<ComplexVector> states;  // at t = 0, T, ..., n T
  double phase = 0.0;                 // theta with U_T ~ e^{i theta} 1
  double defect = 0.0;                // || U_T - e^{i theta} 1 ||_F / sqrt(dim)
};

inline FloquetResult floquet_stroboscopic(const GaugeMap& map,
                                          const ComplexVector& psi0,
                                          double period, int n) {
  require_normalized(psi0);
  if (!map.htilde_static())
    throw MappingPreconditionError(
        "stroboscopic dynamics requires a time-independent Htilde");
  if (!(period > 0.0) || period > map.horizon())
    throw ContractViolation("period must lie within the protocol horizon");
  const ComplexMatrix ut = map.unitary(period);
  const Eigen::Index d = ut.rows();
  FloquetResult r;
  r.phase = std::arg(ut.trace());
  r.defect = (ut - std::exp(Complex(0.0, r.phase)) *
                       ComplexMatrix::Identity(d, d))
                 .norm() /
             std::sqrt(double(d));
  if (r.defect > 1e-7)
    throw PeriodicityError(
        "U_T is not the identity up to a phase (defect " +
        std::to_string(r.defect) + ")");
  TiPropagator prop(map.htilde0(), psi0);
  for (int k = 0; k <= n; ++k)
    r.states.push_back(std::exp(Complex(0.0, r.phase * double(k))) *
                       prop.at(period * double(k)));
  return r;
}

// ---------------------------------------------------------------------------
// Dynamical invariants I(t) = U_t Itilde U_t^+
// ---------------------------------------------------------------------------

inline ObservableSeries dynamical_invariant_track(
    const GaugeMap& map, const ComplexMatrix& itilde,
    const std::vector<ComplexVector>& states, const std::vector<double>& grid,
    const std::string& name = "invariant") {
  if (states.size() != grid.size())
    throw ContractViolation("one state per grid point required");
  require_hermitian(itilde, "dynamical_invariant_track");
  const ComplexMatrix& ht = map.htilde0();
  const double comm = (itilde * ht - ht * itilde).norm();
  if (comm > 1e-9 * std::max(1.0, itilde.norm()))
    throw MappingPreconditionError(
        "Itilde does not commute with Htilde (|[I,H]| = " +
        std::to_string(comm) + ")");
  ObservableSeries out;
  out.times = grid;
  RealVector v(Eigen::Index(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k) {
    const ComplexMatrix u = map.unitary(grid[k]);
    const ComplexVector w = u.adjoint() * states[k];
    v(Eigen::Index(k)) = w.dot(itilde * w).real();
  }
  out.values.emplace_back(name, std::move(v));
  return out;
}

// relative residual of i dI/dt = [H_t, I(t)] by central differences
inline double invariant_equation_residual(const GaugeMap& map,
                                          const ComplexMatrix& itilde,
                                          double t, double dt) {
  if (t - dt < 0.0 || t + dt > map.horizon())
    throw ResolutionError("invariant residual: t +/- dt leaves horizon");
  auto invariant_at = [&](double s) {
    const ComplexMatrix u = map.unitary(s);
    return ComplexMatrix(u * itilde * u.adjoint());
  };
  const ComplexMatrix di =
      (invariant_at(t + dt) - invariant_at(t - dt)) / (2.0 * dt);
  const ComplexMatrix h = map.model().hamiltonian(map.protocol(), t);
  const ComplexMatrix it = invariant_at(t);
  const ComplexMatrix rhs = h * it - it * h;
  const double scale = std::max(rhs.norm(), 1e-300);
  return (kImag * di - rhs).norm() / scale;
}

}  // namespace gaugeflow
