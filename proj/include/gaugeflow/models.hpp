// Hamiltonian families: Heisenberg / Ising spin lattices with arbitrary
// couplings, spin-1/2 lattice fermions in Jordan-Wigner encoding, and a spin
// coupled to truncated bosonic modes. Every model carries its dense static
// part plus sparse per-site spin couplings so that H(t) = H0 - sum_i B_i(t).S_i
// can be assembled (or applied) cheaply.
#pragma once

#include <Eigen/SparseCore>
#include <array>
#include <string>
#include <vector>

#include "gaugeflow/core.hpp"
#include "gaugeflow/field.hpp"
#include "gaugeflow/linalg.hpp"

namespace gaugeflow {

using SparseComplex = Eigen::SparseMatrix<Complex>;

enum class ModelFamily { kHeisenberg, kIsing, kIsingChain, kFermion, kSpinBoson };

inline const char* family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::kHeisenberg: return "heisenberg";
    case ModelFamily::kIsing: return "ising";
    case ModelFamily::kIsingChain: return "ising-chain";
    case ModelFamily::kFermion: return "fermion";
    case ModelFamily::kSpinBoson: return "spin-boson";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Coupling graph
// ---------------------------------------------------------------------------

struct CouplingGraph {
  struct Edge {
    int i = 0, j = 0;
    double coupling = 0.0;
  };

  int site_count = 0;
  std::vector<Edge> edges;

  void validate() const {
    if (site_count <= 0) throw ConfigError("coupling graph needs sites");
    for (const Edge& e : edges) {
      if (!(0 <= e.i && e.i < e.j && e.j < site_count))
        throw ConfigError("coupling edge must satisfy 0 <= i < j < L");
      if (!std::isfinite(e.coupling))
        throw ConfigError("coupling must be finite");
    }
    for (std::size_t a = 0; a < edges.size(); ++a)
      for (std::size_t b = a + 1; b < edges.size(); ++b)
        if (edges[a].i == edges[b].i && edges[a].j == edges[b].j)
          throw ConfigError("duplicate coupling edge");
  }

  static CouplingGraph chain(const std::vector<double>& j) {
    CouplingGraph g;
    g.site_count = int(j.size()) + 1;
    for (std::size_t k = 0; k < j.size(); ++k)
      g.edges.push_back({int(k), int(k) + 1, j[k]});
    return g;
  }

  bool is_chain() const {
    if (edges.size() + 1 != std::size_t(site_count)) return false;
    for (std::size_t k = 0; k < edges.size(); ++k)
      if (edges[k].i != int(k) || edges[k].j != int(k) + 1) return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Tensor-factor embedding
// ---------------------------------------------------------------------------

inline std::int64_t product_dim(const std::vector<Eigen::Index>& dims) {
  std::int64_t d = 1;
  for (Eigen::Index x : dims) {
    d *= x;
    if (d > kMaxHilbertDim)
      throw CapacityError("Hilbert-space dimension exceeds cap " +
                          std::to_string(kMaxHilbertDim));
  }
  return d;
}

// op acting on tensor factor k, identity elsewhere; factor 0 is the leftmost
// (most significant) Kronecker slot.
inline SparseComplex embed_factor(const ComplexMatrix& op, std::size_t k,
                                  const std::vector<Eigen::Index>& dims) {
  const std::int64_t dim = product_dim(dims);
  std::int64_t suffix = 1;
  for (std::size_t m = k + 1; m < dims.size(); ++m) suffix *= dims[m];
  const std::int64_t dk = dims[k];
  const std::int64_t prefix = dim / (suffix * dk);
  std::vector<Eigen::Triplet<Complex>> trip;
  for (Eigen::Index a = 0; a < op.rows(); ++a)
    for (Eigen::Index b = 0; b < op.cols(); ++b) {
      const Complex v = op(a, b);
      if (v == 0.0) continue;
      for (std::int64_t l = 0; l < prefix; ++l)
        for (std::int64_t r = 0; r < suffix; ++r)
          trip.emplace_back((l * dk + a) * suffix + r,
                            (l * dk + b) * suffix + r, v);
    }
  SparseComplex out(dim, dim);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

// Spin component matrices of one site embedded in the full lattice space.
inline std::array<ComplexMatrix, 3> spin_operators(double s, int site, int l) {
  if (site < 0 || site >= l)
    throw ContractViolation("spin_operators: site index out of range");
  const Eigen::Index d = spin_multiplicity(s);
  std::vector<Eigen::Index> dims(std::size_t(l), d);
  const SpinMatrices sm = spin_matrices(s);
  return {ComplexMatrix(embed_factor(sm.sx, std::size_t(site), dims)),
          ComplexMatrix(embed_factor(sm.sy, std::size_t(site), dims)),
          ComplexMatrix(embed_factor(sm.sz, std::size_t(site), dims))};
}

// ---------------------------------------------------------------------------
// Model container
// ---------------------------------------------------------------------------

class HamiltonianModel {
 public:
  ModelFamily family = ModelFamily::kHeisenberg;
  CouplingGraph graph;
  double spin = 0.5;
  Eigen::Index dim = 0;
  std::vector<Eigen::Index> factor_dims;

  ComplexMatrix h_static;
  SparseComplex h_static_sparse;
  // full-space spin components per site (for spin-boson: the single spin)
  std::vector<std::array<SparseComplex, 3>> site_spin;
  std::array<SparseComplex, 3> total_spin;

  // fermion extras
  ComplexMatrix fermion_eps;
  RealMatrix fermion_v;
  SparseComplex number_op;

  // boson extras
  std::vector<double> boson_f, boson_omega;
  int boson_nmax = 0;

  int site_count() const { return graph.site_count; }

  // H(t) = h_static - sum_i B_i(t) . S_i
  void assemble_hamiltonian(const FieldProtocol& p, double t,
                            ComplexMatrix& out) const {
    check_protocol(p);
    out = h_static;
    if (p.homogeneous()) {
      const Vec3 b = p.value(0, t);
      add_scaled(out, total_spin[0], -b.x);
      add_scaled(out, total_spin[1], -b.y);
      add_scaled(out, total_spin[2], -b.z);
    } else {
      for (int i = 0; i < site_count(); ++i) {
        const Vec3 b = p.value(std::size_t(i), t);
        add_scaled(out, site_spin[std::size_t(i)][0], -b.x);
        add_scaled(out, site_spin[std::size_t(i)][1], -b.y);
        add_scaled(out, site_spin[std::size_t(i)][2], -b.z);
      }
    }
  }

  ComplexMatrix hamiltonian(const FieldProtocol& p, double t) const {
    ComplexMatrix h;
    assemble_hamiltonian(p, t, h);
    return h;
  }

  // -dH/dt = sum_i dB_i/dt . S_i ; returned as dH/dt
  ComplexMatrix hamiltonian_derivative(const FieldProtocol& p,
                                       double t) const {
    check_protocol(p);
    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    for (int i = 0; i < site_count(); ++i) {
      const Vec3 db = p.derivative(p.homogeneous() ? 0 : std::size_t(i), t);
      add_scaled(out, site_spin[std::size_t(i)][0], -db.x);
      add_scaled(out, site_spin[std::size_t(i)][1], -db.y);
      add_scaled(out, site_spin[std::size_t(i)][2], -db.z);
    }
    return out;
  }

  // sum_i b_i . S_i for externally supplied vectors (one per site)
  ComplexMatrix field_operator(const std::vector<Vec3>& b) const {
    if (b.size() != std::size_t(site_count()))
      throw ContractViolation("field_operator: one vector per site required");
    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    for (int i = 0; i < site_count(); ++i) {
      add_scaled(out, site_spin[std::size_t(i)][0], b[std::size_t(i)].x);
      add_scaled(out, site_spin[std::size_t(i)][1], b[std::size_t(i)].y);
      add_scaled(out, site_spin[std::size_t(i)][2], b[std::size_t(i)].z);
    }
    return out;
  }

  ComplexMatrix dense_site_spin(int site, int axis) const {
    return ComplexMatrix(site_spin.at(std::size_t(site))[std::size_t(axis)]);
  }
  ComplexMatrix dense_total_spin(int axis) const {
    return ComplexMatrix(total_spin[std::size_t(axis)]);
  }

  void check_protocol(const FieldProtocol& p) const {
    if (!p.homogeneous() && p.site_count() != std::size_t(site_count()))
      throw ContractViolation(
          "protocol site count does not match the model");
  }

 private:
  static void add_scaled(ComplexMatrix& out, const SparseComplex& m,
                         double scale) {
    if (scale == 0.0) return;
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseComplex::InnerIterator it(m, k); it; ++it)
        out(it.row(), it.col()) += scale * it.value();
  }
};

namespace detail {

inline void finalize_spin_structure(HamiltonianModel& m) {
  const Eigen::Index d = m.dim;
  for (int axis = 0; axis < 3; ++axis) {
    SparseComplex tot(d, d);
    for (const auto& site : m.site_spin) tot += site[std::size_t(axis)];
    tot.makeCompressed();
    m.total_spin[std::size_t(axis)] = std::move(tot);
  }
  m.h_static_sparse = m.h_static.sparseView(1.0, 1e-300);
  m.h_static_sparse.makeCompressed();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Spin-lattice builders
// ---------------------------------------------------------------------------

inline HamiltonianModel build_heisenberg(const CouplingGraph& g, double s) {
  g.validate();
  HamiltonianModel m;
  m.family = ModelFamily::kHeisenberg;
  m.graph = g;
  m.spin = s;
  const Eigen::Index ds = spin_multiplicity(s);
  m.factor_dims.assign(std::size_t(g.site_count), ds);
  m.dim = product_dim(m.factor_dims);
  const SpinMatrices sm = spin_matrices(s);
  const std::array<ComplexMatrix, 3> comps{sm.sx, sm.sy, sm.sz};

  m.site_spin.resize(std::size_t(g.site_count));
  for (int i = 0; i < g.site_count; ++i)
    for (int a = 0; a < 3; ++a)
      m.site_spin[std::size_t(i)][std::size_t(a)] =
          embed_factor(comps[std::size_t(a)], std::size_t(i), m.factor_dims);

  SparseComplex h(m.dim, m.dim);
  for (const auto& e : g.edges)
    for (int a = 0; a < 3; ++a)
      h += Complex(e.coupling) *
           SparseComplex(m.site_spin[std::size_t(e.i)][std::size_t(a)] *
                         m.site_spin[std::size_t(e.j)][std::size_t(a)]);
  m.h_static = ComplexMatrix(h);
  detail::finalize_spin_structure(m);
  return m;
}

inline HamiltonianModel build_ising(const CouplingGraph& g, double s,
                                    bool tag_chain = false) {
  g.validate();
  HamiltonianModel m;
  m.family = (tag_chain || g.is_chain()) ? ModelFamily::kIsingChain
                                         : ModelFamily::kIsing;
  if (tag_chain && !g.is_chain())
    throw ConfigError("ising-chain model requires a nearest-neighbour chain");
  m.graph = g;
  m.spin = s;
  const Eigen::Index ds = spin_multiplicity(s);
  m.factor_dims.assign(std::size_t(g.site_count), ds);
  m.dim = product_dim(m.factor_dims);
  const SpinMatrices sm = spin_matrices(s);
  const std::array<ComplexMatrix, 3> comps{sm.sx, sm.sy, sm.sz};

  m.site_spin.resize(std::size_t(g.site_count));
  for (int i = 0; i < g.site_count; ++i)
    for (int a = 0; a < 3; ++a)
      m.site_spin[std::size_t(i)][std::size_t(a)] =
          embed_factor(comps[std::size_t(a)], std::size_t(i), m.factor_dims);

  SparseComplex h(m.dim, m.dim);
  for (const auto& e : g.edges)
    h += Complex(e.coupling) *
         SparseComplex(m.site_spin[std::size_t(e.i)][0] *
                       m.site_spin[std::size_t(e.j)][0]);
  m.h_static = ComplexMatrix(h);
  detail::finalize_spin_structure(m);
  return m;
}

inline HamiltonianModel build_ising_chain(const std::vector<double>& j,
                                          double s) {
  return build_ising(CouplingGraph::chain(j), s, true);
}

// ---------------------------------------------------------------------------
// Spin-1/2 lattice fermions (Jordan-Wigner, site-major / spin-minor modes)
// ---------------------------------------------------------------------------

namespace detail {

// annihilation operator of mode m out of n_modes, with mode 0 occupying the
// most significant bit of the Fock index
inline SparseComplex fermion_annihilation(int m, int n_modes) {
  const std::int64_t dim = std::int64_t(1) << n_modes;
  const int shift = n_modes - 1 - m;
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(std::size_t(dim / 2));
  for (std::int64_t n = 0; n < dim; ++n) {
    if (!((n >> shift) & 1)) continue;
    int swaps = 0;
    for (int k = 0; k < m; ++k)
      swaps += int((n >> (n_modes - 1 - k)) & 1);
    trip.emplace_back(n & ~(std::int64_t(1) << shift), n,
                      (swaps % 2) ? -1.0 : 1.0);
  }
  SparseComplex out(dim, dim);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace detail

// H_e = -1/2 sum_{sigma,i,j} eps_ij c+_{sigma i} c_{sigma j}
//       + 1/2 sum_{i,j} V_ij n_i n_j       (n_i = n_{i up} + n_{i down};
// the density-density form keeps H_e invariant under global spin rotations)
inline HamiltonianModel build_fermion(const ComplexMatrix& eps,
                                      const RealMatrix& v) {
  const int l = int(eps.rows());
  if (eps.cols() != l || v.rows() != l || v.cols() != l)
    throw ConfigError("fermion model: eps and V must be L x L");
  if ((eps - eps.adjoint()).norm() > 1e-10 * std::max(1.0, eps.norm()))
    throw ContractViolation("fermion model: eps must be Hermitian");
  if ((v - v.transpose()).norm() > 1e-10 * std::max(1.0, v.norm()))
    throw ContractViolation("fermion model: V must be symmetric");
  if (l > 5) throw CapacityError("fermion model limited to L <= 5 sites");

  HamiltonianModel m;
  m.family = ModelFamily::kFermion;
  m.graph.site_count = l;
  m.spin = 0.5;
  const int n_modes = 2 * l;
  m.dim = std::int64_t(1) << n_modes;
  m.factor_dims.assign(std::size_t(n_modes), 2);
  m.fermion_eps = eps;
  m.fermion_v = v;

  std::vector<SparseComplex> c(static_cast<std::size_t>(n_modes));
  for (int mm = 0; mm < n_modes; ++mm)
    c[std::size_t(mm)] = detail::fermion_annihilation(mm, n_modes);
  auto mode = [&](int site, int sigma) { return 2 * site + sigma; };  // 0 = up

  SparseComplex h(m.dim, m.dim);
  for (int sigma = 0; sigma < 2; ++sigma)
    for (int i = 0; i < l; ++i)
      for (int j = 0; j < l; ++j) {
        if (eps(i, j) == 0.0) continue;
        h += Complex(-0.5) * eps(i, j) *
             SparseComplex(
                 SparseComplex(c[std::size_t(mode(i, sigma))].adjoint()) *
                 c[std::size_t(mode(j, sigma))]);
      }
  // interaction and total number are diagonal in the occupation basis
  RealVector vdiag = RealVector::Zero(m.dim);
  RealVector ndiag = RealVector::Zero(m.dim);
  for (std::int64_t n = 0; n < m.dim; ++n) {
    std::vector<int> occ(std::size_t(l), 0);
    for (int i = 0; i < l; ++i)
      occ[std::size_t(i)] = int((n >> (n_modes - 1 - mode(i, 0))) & 1) +
                            int((n >> (n_modes - 1 - mode(i, 1))) & 1);
    double e = 0.0;
    int ntot = 0;
    for (int i = 0; i < l; ++i) {
      ntot += occ[std::size_t(i)];
      for (int j = 0; j < l; ++j)
        e += 0.5 * v(i, j) * occ[std::size_t(i)] * occ[std::size_t(j)];
    }
    vdiag(n) = e;
    ndiag(n) = double(ntot);
  }
  {
    std::vector<Eigen::Triplet<Complex>> trip;
    for (std::int64_t n = 0; n < m.dim; ++n)
      if (vdiag(n) != 0.0) trip.emplace_back(n, n, vdiag(n));
    SparseComplex vd(m.dim, m.dim);
    vd.setFromTriplets(trip.begin(), trip.end());
    h += vd;
  }
  {
    std::vector<Eigen::Triplet<Complex>> trip;
    for (std::int64_t n = 0; n < m.dim; ++n)
      if (ndiag(n) != 0.0) trip.emplace_back(n, n, ndiag(n));
    m.number_op.resize(m.dim, m.dim);
    m.number_op.setFromTriplets(trip.begin(), trip.end());
  }
  m.h_static = ComplexMatrix(h);

  // second-quantized per-site spin: S^a_i = sum c+_{i s} (sigma_a/2)_{s t} c_{i t}
  const SpinMatrices half = spin_matrices(0.5);
  const std::array<ComplexMatrix, 3> s_small{half.sx, half.sy, half.sz};
  m.site_spin.resize(std::size_t(l));
  for (int i = 0; i < l; ++i)
    for (int a = 0; a < 3; ++a) {
      SparseComplex op(m.dim, m.dim);
      for (int st = 0; st < 2; ++st)
        for (int tt = 0; tt < 2; ++tt) {
          const Complex coeff = s_small[std::size_t(a)](st, tt);
          if (coeff == 0.0) continue;
          op += coeff *
                SparseComplex(
                    SparseComplex(c[std::size_t(mode(i, st))].adjoint()) *
                    c[std::size_t(mode(i, tt))]);
        }
      op.makeCompressed();
      m.site_spin[std::size_t(i)][std::size_t(a)] = std::move(op);
    }
  detail::finalize_spin_structure(m);
  return m;
}

// ---------------------------------------------------------------------------
// Spin coupled to truncated bosonic modes
// ---------------------------------------------------------------------------

inline HamiltonianModel build_spin_boson(const std::vector<double>& f,
                                         const std::vector<double>& omega,
                                         int n_max, double s) {
  if (f.size() != omega.size())
    throw ConfigError("spin-boson: need one frequency per coupling");
  if (f.size() > 2) throw CapacityError("spin-boson limited to k <= 2 modes");
  if (n_max < 1 || n_max > 16)
    throw CapacityError("spin-boson truncation must satisfy 1 <= n_max <= 16");

  HamiltonianModel m;
  m.family = ModelFamily::kSpinBoson;
  m.graph.site_count = 1;
  m.spin = s;
  m.boson_f = f;
  m.boson_omega = omega;
  m.boson_nmax = n_max;
  const Eigen::Index ds = spin_multiplicity(s);
  m.factor_dims = {ds};
  for (std::size_t k = 0; k < f.size(); ++k)
    m.factor_dims.push_back(n_max + 1);
  m.dim = product_dim(m.factor_dims);

  const SpinMatrices sm = spin_matrices(s);
  m.site_spin.resize(1);
  m.site_spin[0][0] = embed_factor(sm.sx, 0, m.factor_dims);
  m.site_spin[0][1] = embed_factor(sm.sy, 0, m.factor_dims);
  m.site_spin[0][2] = embed_factor(sm.sz, 0, m.factor_dims);

  ComplexMatrix a(n_max + 1, n_max + 1);
  a.setZero();
  for (int n = 0; n < n_max; ++n) a(n, n + 1) = std::sqrt(double(n + 1));

  SparseComplex h(m.dim, m.dim);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const SparseComplex ak = embed_factor(a, k + 1, m.factor_dims);
    const SparseComplex x = ak + SparseComplex(ak.adjoint());
    h += Complex(f[k]) * SparseComplex(m.site_spin[0][0] * x);
    h += Complex(omega[k]) * SparseComplex(SparseComplex(ak.adjoint()) * ak);
  }
  m.h_static = ComplexMatrix(h);
  detail::finalize_spin_structure(m);
  return m;
}

}  // namespace gaugeflow
