// Experiment configuration: a single JSON document with a versioned schema.
// Parsing errors throw ConfigError (CLI exit code 2); nothing is written
// before the whole document validates.
#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gaugeflow/core.hpp"
#include "gaugeflow/dynamics.hpp"
#include "gaugeflow/field.hpp"
#include "gaugeflow/gauge.hpp"
#include "gaugeflow/models.hpp"

namespace gaugeflow {

inline constexpr int kSchemaVersion = 1;

struct InitialStateSpec {
  std::string type;  // product | eigenstate | basis | random
  std::vector<double> bloch_theta, bloch_phi;  // product
  int index = 0;                               // eigenstate / basis
  std::string of = "htilde";                   // eigenstate: htilde | h0
  std::optional<std::uint64_t> seed;           // random
};

struct OutputSpec {
  std::string directory = "out";
  bool csv = true;
  bool json = false;
  bool overwrite = false;
};

struct ExperimentConfig {
  nlohmann::json raw;
  HamiltonianModel model;
  FieldProtocol protocol;
  double horizon = 0.0;
  std::vector<double> grid;
  double ode_tol = 1e-11;
  double propagator_tol = 1e-9;
  double comparison_tol = 1e-6;
  InitialStateSpec initial_state;
  std::vector<std::string> observables;
  OutputSpec output;
};

namespace detail {

inline const nlohmann::json& need(const nlohmann::json& j,
                                  const std::string& key) {
  if (!j.contains(key))
    throw ConfigError("config is missing the field '" + key + "'");
  return j.at(key);
}

inline double need_number(const nlohmann::json& j, const std::string& key) {
  const auto& v = need(j, key);
  if (!v.is_number()) throw ConfigError("'" + key + "' must be a number");
  return v.get<double>();
}

inline Vec3 parse_vec3(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3)
    throw ConfigError(what + " must be an array of three numbers");
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

inline ScalarPtr parse_scalar(const nlohmann::json& j);

inline ScalarPtr parse_scalar(const nlohmann::json& j) {
  const std::string kind = need(j, "kind").get<std::string>();
  if (kind == "constant") return make_constant(need_number(j, "value"));
  if (kind == "linear")
    return make_linear(need_number(j, "a"), need_number(j, "b"));
  if (kind == "sinusoid")
    return make_sinusoid(need_number(j, "amplitude"), need_number(j, "omega"),
                         j.value("phase", 0.0), j.value("offset", 0.0));
  if (kind == "sum") {
    std::vector<ScalarPtr> terms;
    for (const auto& t : need(j, "terms")) terms.push_back(parse_scalar(t));
    return make_sum(std::move(terms));
  }
  if (kind == "table") {
    const auto ts = need(j, "times").get<std::vector<double>>();
    const auto vs = need(j, "values").get<std::vector<double>>();
    return make_table(ts, vs);
  }
  throw ConfigError("unknown scalar protocol kind '" + kind + "'");
}

inline FieldProtocol parse_protocol(const nlohmann::json& j, double horizon) {
  const std::string kind = need(j, "kind").get<std::string>();
  if (kind == "constant")
    return constant_field(parse_vec3(need(j, "value"), "value"), horizon);
  if (kind == "linear-ramp")
    return linear_ramp_field(parse_vec3(need(j, "initial"), "initial"),
                             parse_vec3(need(j, "slope"), "slope"), horizon);
  if (kind == "rotating")
    return rotating_field(need_number(j, "amplitude"), need_number(j, "omega"),
                          j.value("phase", 0.0), j.value("bz", 0.0), horizon);
  if (kind == "sinusoidal")
    return sinusoidal_field(parse_vec3(need(j, "offset"), "offset"),
                            parse_vec3(need(j, "amplitude"), "amplitude"),
                            need_number(j, "omega"), j.value("phase", 0.0),
                            horizon);
  if (kind == "sampled-table") {
    const auto ts = need(j, "times").get<std::vector<double>>();
    std::vector<Vec3> vs;
    for (const auto& v : need(j, "values")) vs.push_back(parse_vec3(v, "value"));
    return table_field(ts, vs);
  }
  if (kind == "components") {
    return FieldProtocol(FieldKind::kSinusoidal,
                         {SiteField::components(parse_scalar(need(j, "bx")),
                                                parse_scalar(need(j, "by")),
                                                parse_scalar(need(j, "bz")))},
                         true, horizon);
  }
  if (kind == "ising-compatible" || kind == "ising-envelope") {
    std::vector<ScalarPtr> bx, env;
    std::vector<Vec3> b0;
    for (const auto& site : need(j, "sites")) {
      bx.push_back(parse_scalar(need(site, "bx")));
      b0.push_back(parse_vec3(need(site, "b0"), "b0"));
      if (kind == "ising-envelope")
        env.push_back(parse_scalar(need(site, "envelope")));
    }
    try {
      if (kind == "ising-compatible")
        return make_ising_field(std::move(bx), b0, horizon);
      return make_integrable_ising_field(std::move(bx), std::move(env), b0,
                                         horizon);
    } catch (const ContractViolation& e) {
      throw ConfigError(std::string("invalid Ising field: ") + e.what());
    }
  }
  throw ConfigError("unknown protocol kind '" + kind + "'");
}

inline HamiltonianModel parse_model(const nlohmann::json& j) {
  const std::string family = need(j, "family").get<std::string>();
  const double spin = j.value("spin", 0.5);
  if (family == "heisenberg" || family == "ising" || family == "ising-chain") {
    CouplingGraph g;
    if (j.contains("chain")) {
      g = CouplingGraph::chain(need(j, "chain").get<std::vector<double>>());
    } else {
      g.site_count = int(need_number(j, "sites"));
      for (const auto& e : need(j, "couplings")) {
        if (!e.is_array() || e.size() != 3)
          throw ConfigError("couplings must be [i, j, J] triples");
        g.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(),
                           e.at(2).get<double>()});
      }
    }
    if (family == "heisenberg") return build_heisenberg(g, spin);
    return build_ising(g, spin, family == "ising-chain");
  }
  if (family == "fermion") {
    const auto& f = need(j, "fermion");
    const auto re = need(f, "epsReal").get<std::vector<std::vector<double>>>();
    const int l = int(re.size());
    ComplexMatrix eps = ComplexMatrix::Zero(l, l);
    for (int r = 0; r < l; ++r)
      for (int c = 0; c < l; ++c) eps(r, c) = re.at(std::size_t(r)).at(std::size_t(c));
    if (f.contains("epsImag")) {
      const auto im = f.at("epsImag").get<std::vector<std::vector<double>>>();
      for (int r = 0; r < l; ++r)
        for (int c = 0; c < l; ++c)
          eps(r, c) += Complex(0.0, im.at(std::size_t(r)).at(std::size_t(c)));
    }
    const auto vv = need(f, "v").get<std::vector<std::vector<double>>>();
    RealMatrix v = RealMatrix::Zero(l, l);
    for (int r = 0; r < l; ++r)
      for (int c = 0; c < l; ++c) v(r, c) = vv.at(std::size_t(r)).at(std::size_t(c));
    try {
      return build_fermion(eps, v);
    } catch (const Error& e) {
      throw ConfigError(std::string("invalid fermion model: ") + e.what());
    }
  }
  if (family == "spin-boson") {
    const auto& b = need(j, "boson");
    try {
      return build_spin_boson(need(b, "f").get<std::vector<double>>(),
                              need(b, "omega").get<std::vector<double>>(),
                              int(need_number(b, "nMax")), spin);
    } catch (const Error& e) {
      throw ConfigError(std::string("invalid spin-boson model: ") + e.what());
    }
  }
  throw ConfigError("unknown model family '" + family + "'");
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  if (!j.contains("schemaVersion") ||
      j.at("schemaVersion").get<int>() != kSchemaVersion)
    throw ConfigError("config must declare schemaVersion = " +
                      std::to_string(kSchemaVersion));
  ExperimentConfig cfg;
  cfg.raw = j;
  cfg.horizon = detail::need_number(j, "horizon");
  if (!(cfg.horizon > 0.0)) throw ConfigError("horizon must be positive");

  try {
    cfg.model = detail::parse_model(detail::need(j, "model"));
  } catch (const CapacityError& e) {
    throw ConfigError(std::string("model exceeds capacity: ") + e.what());
  }
  cfg.protocol = detail::parse_protocol(detail::need(j, "protocol"),
                                        cfg.horizon);
  if (!cfg.protocol.homogeneous() &&
      cfg.protocol.site_count() != std::size_t(cfg.model.site_count()))
    throw ConfigError("protocol site count does not match the model");

  const int points = int(j.value("grid", nlohmann::json::object())
                             .value("points", 51));
  if (points < 2) throw ConfigError("grid needs at least 2 points");
  cfg.grid = uniform_grid(cfg.horizon, std::size_t(points));

  const auto tols = j.value("tolerances", nlohmann::json::object());
  cfg.ode_tol = tols.value("ode", 1e-11);
  cfg.propagator_tol = tols.value("propagator", 1e-9);
  cfg.comparison_tol = tols.value("comparison", 1e-6);
  if (!(cfg.ode_tol > 0.0 && cfg.propagator_tol > 0.0 &&
        cfg.comparison_tol > 0.0))
    throw ConfigError("tolerances must be positive");

  const auto& init = detail::need(j, "initialState");
  cfg.initial_state.type = detail::need(init, "type").get<std::string>();
  if (cfg.initial_state.type == "product") {
    cfg.initial_state.bloch_theta =
        detail::need(init, "blochTheta").get<std::vector<double>>();
    cfg.initial_state.bloch_phi =
        detail::need(init, "blochPhi").get<std::vector<double>>();
  } else if (cfg.initial_state.type == "eigenstate" ||
             cfg.initial_state.type == "basis") {
    cfg.initial_state.index = int(detail::need_number(init, "index"));
    cfg.initial_state.of = init.value("of", "htilde");
  } else if (cfg.initial_state.type == "random") {
    if (!init.contains("seed"))
      throw ConfigError("random initial state requires a seed");
    cfg.initial_state.seed = init.at("seed").get<std::uint64_t>();
  } else {
    throw ConfigError("unknown initial state type '" +
                      cfg.initial_state.type + "'");
  }

  if (j.contains("observables"))
    cfg.observables = j.at("observables").get<std::vector<std::string>>();

  const auto out = j.value("output", nlohmann::json::object());
  cfg.output.directory = out.value("directory", std::string("out"));
  cfg.output.overwrite = out.value("overwrite", false);
  if (out.contains("formats")) {
    cfg.output.csv = false;
    cfg.output.json = false;
    for (const auto& f : out.at("formats")) {
      const std::string fmt = f.get<std::string>();
      if (fmt == "csv")
        cfg.output.csv = true;
      else if (fmt == "json")
        cfg.output.json = true;
      else
        throw ConfigError("unknown output format '" + fmt + "'");
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(j);
}

// spin coherent state: e^{-i phi Sz} e^{-i theta Sy} |s, s>, whose Bloch
// vector points along (sin theta cos phi, sin theta sin phi, cos theta)
inline ComplexVector spin_coherent(double s, double theta, double phi) {
  const int d = spin_multiplicity(s);
  ComplexVector top = ComplexVector::Zero(d);
  top(0) = 1.0;
  return su2_rotation({0.0, 0.0, -phi}, s) *
         (su2_rotation({0.0, -theta, 0.0}, s) * top);
}

inline ComplexVector build_initial_state(const ExperimentConfig& cfg,
                                         const GaugeMap* map) {
  const HamiltonianModel& m = cfg.model;
  const InitialStateSpec& s = cfg.initial_state;
  if (s.type == "product") {
    if (m.family == ModelFamily::kFermion)
      throw ConfigError("product Bloch states apply to spin models only");
    const std::size_t spins =
        (m.family == ModelFamily::kSpinBoson) ? 1 : std::size_t(m.site_count());
    if (s.bloch_theta.size() != spins || s.bloch_phi.size() != spins)
      throw ConfigError("product state needs one (theta, phi) pair per spin");
    std::vector<ComplexVector> factors;
    for (std::size_t i = 0; i < spins; ++i)
      factors.push_back(spin_coherent(m.spin, s.bloch_theta[i], s.bloch_phi[i]));
    if (m.family == ModelFamily::kSpinBoson)
      for (std::size_t k = 1; k < m.factor_dims.size(); ++k) {
        ComplexVector vac = ComplexVector::Zero(m.factor_dims[k]);
        vac(0) = 1.0;
        factors.push_back(vac);
      }
    ComplexVector psi = factors.front();
    for (std::size_t k = 1; k < factors.size(); ++k) {
      ComplexVector next(psi.size() * factors[k].size());
      for (Eigen::Index a = 0; a < psi.size(); ++a)
        next.segment(a * factors[k].size(), factors[k].size()) =
            psi(a) * factors[k];
      psi = std::move(next);
    }
    return psi;
  }
  if (s.type == "basis") {
    if (s.index < 0 || s.index >= m.dim)
      throw ConfigError("basis state index out of range");
    ComplexVector psi = ComplexVector::Zero(m.dim);
    psi(s.index) = 1.0;
    return psi;
  }
  if (s.type == "eigenstate") {
    if (s.index < 0 || s.index >= m.dim)
      throw ConfigError("eigenstate index out of range");
    ComplexMatrix h;
    if (s.of == "htilde") {
      if (!map)
        throw ConfigError(
            "eigenstate of htilde requested but the protocol admits no "
            "gauge map");
      h = map->htilde0();
    } else if (s.of == "h0") {
      h = m.hamiltonian(cfg.protocol, 0.0);
    } else {
      throw ConfigError("eigenstate 'of' must be 'htilde' or 'h0'");
    }
    return eigh(h).eigenvectors.col(s.index);
  }
  if (s.type == "random") {
    Rng rng(*s.seed);
    return random_state(rng, m.dim);
  }
  throw ConfigError("unknown initial state type");
}

// named observables over the model
inline std::vector<NamedObservable> build_observables(
    const ExperimentConfig& cfg, const GaugeMap* map) {
  const HamiltonianModel& m = cfg.model;
  std::vector<NamedObservable> out;
  auto axis_of = [](char c) {
    if (c == 'x') return 0;
    if (c == 'y') return 1;
    if (c == 'z') return 2;
    throw ConfigError("observable axis must be x, y or z");
  };
  for (const std::string& name : cfg.observables) {
    NamedObservable obs;
    obs.name = name;
    if (name == "norm") {
      obs.op = ComplexMatrix::Identity(m.dim, m.dim);
    } else if (name == "energy_static") {
      obs.op = m.h_static;
    } else if (name == "energy_htilde") {
      if (!map) throw ConfigError("energy_htilde requires a gauge map");
      obs.op = map->htilde0();
    } else if (name == "s2_tot") {
      ComplexMatrix s2 = ComplexMatrix::Zero(m.dim, m.dim);
      for (int a = 0; a < 3; ++a) {
        const ComplexMatrix s = m.dense_total_spin(a);
        s2 += s * s;
      }
      obs.op = s2;
    } else if (name.size() >= 6 && name.substr(0, 1) == "s" &&
               name.substr(2, 4) == "_tot") {
      obs.op = m.dense_total_spin(axis_of(name[1]));
    } else if (name.rfind("purity_", 0) == 0) {
      obs.purity_site = std::stoi(name.substr(7));
      if (obs.purity_site < 0 ||
          obs.purity_site >= int(m.factor_dims.size()))
        throw ConfigError("purity site out of range in '" + name + "'");
    } else if (name.size() >= 4 && name[0] == 's' && name[2] == '_') {
      const int site = std::stoi(name.substr(3));
      if (site < 0 || site >= int(m.site_spin.size()))
        throw ConfigError("site out of range in '" + name + "'");
      obs.op = m.dense_site_spin(site, axis_of(name[1]));
    } else {
      throw ConfigError("unknown observable '" + name + "'");
    }
    out.push_back(std::move(obs));
  }
  return out;
}

}  // namespace gaugeflow
