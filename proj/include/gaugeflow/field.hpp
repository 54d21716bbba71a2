// Time-dependent field protocols. Every kind evaluates analytically and
// carries an exact derivative and an exact running integral from t = 0; the
// gauge construction leans on those (the Ising phases are plain integrals of
// the longitudinal component).
#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "gaugeflow/core.hpp"

namespace gaugeflow {

// ---------------------------------------------------------------------------
// Scalar protocols
// ---------------------------------------------------------------------------

class ScalarProtocol {
 public:
  virtual ~ScalarProtocol() = default;
  virtual double value(double t) const = 0;
  virtual double derivative(double t) const = 0;
  virtual double integral(double t) const = 0;  // int_0^t value
};

using ScalarPtr = std::shared_ptr<const ScalarProtocol>;

class ConstantScalar final : public ScalarProtocol {
 public:
  explicit ConstantScalar(double c) : c_(c) {}
  double value(double) const override { return c_; }
  double derivative(double) const override { return 0.0; }
  double integral(double t) const override { return c_ * t; }

 private:
  double c_;
};

// a + b t
class LinearScalar final : public ScalarProtocol {
 public:
  LinearScalar(double a, double b) : a_(a), b_(b) {}
  double value(double t) const override { return a_ + b_ * t; }
  double derivative(double) const override { return b_; }
  double integral(double t) const override {
    return a_ * t + 0.5 * b_ * t * t;
  }

 private:
  double a_, b_;
};

// offset + amp sin(omega t + phase)
class SinusoidScalar final : public ScalarProtocol {
 public:
  SinusoidScalar(double amp, double omega, double phase, double offset = 0.0)
      : amp_(amp), omega_(omega), phase_(phase), offset_(offset) {}
  double value(double t) const override {
    return offset_ + amp_ * std::sin(omega_ * t + phase_);
  }
  double derivative(double t) const override {
    return amp_ * omega_ * std::cos(omega_ * t + phase_);
  }
  double integral(double t) const override {
    if (omega_ == 0.0) return (offset_ + amp_ * std::sin(phase_)) * t;
    return offset_ * t -
           amp_ / omega_ * (std::cos(omega_ * t + phase_) - std::cos(phase_));
  }

 private:
  double amp_, omega_, phase_, offset_;
};

class SumScalar final : public ScalarProtocol {
 public:
  explicit SumScalar(std::vector<ScalarPtr> terms) : terms_(std::move(terms)) {}
  double value(double t) const override {
    double v = 0.0;
    for (const auto& p : terms_) v += p->value(t);
    return v;
  }
  double derivative(double t) const override {
    double v = 0.0;
    for (const auto& p : terms_) v += p->derivative(t);
    return v;
  }
  double integral(double t) const override {
    double v = 0.0;
    for (const auto& p : terms_) v += p->integral(t);
    return v;
  }

 private:
  std::vector<ScalarPtr> terms_;
};

// Cubic spline through strictly increasing sample times, clamped with
// endpoint slopes estimated from local cubic fits (keeps fourth-order
// accuracy up to the ends). Exact piecewise derivative and integral.
// Evaluation outside the sampled range is a range error.
class CubicTableScalar final : public ScalarProtocol {
 public:
  CubicTableScalar(std::vector<double> ts, std::vector<double> vs)
      : ts_(std::move(ts)), vs_(std::move(vs)) {
    const std::size_t n = ts_.size();
    if (n < 2 || vs_.size() != n)
      throw ConfigError("sampled table needs >= 2 matching samples");
    for (std::size_t i = 1; i < n; ++i)
      if (!(ts_[i] > ts_[i - 1]))
        throw ConfigError("sampled table times must be strictly increasing");
    // second derivatives from the tridiagonal spline system
    m_.assign(n, 0.0);
    if (n >= 3) {
      std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0),
          lower(n, 0.0);
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = ts_[i] - ts_[i - 1], h1 = ts_[i + 1] - ts_[i];
        lower[i] = h0;
        diag[i] = 2.0 * (h0 + h1);
        upper[i] = h1;
        rhs[i] =
            6.0 * ((vs_[i + 1] - vs_[i]) / h1 - (vs_[i] - vs_[i - 1]) / h0);
      }
      if (n >= 4) {
        // clamped ends with slopes from one-sided cubic fits
        const double d0 = end_slope(0, 1, 2, 3);
        const double dn = end_slope(n - 1, n - 2, n - 3, n - 4);
        const double h0 = ts_[1] - ts_[0], hl = ts_[n - 1] - ts_[n - 2];
        diag[0] = 2.0 * h0;
        upper[0] = h0;
        rhs[0] = 6.0 * ((vs_[1] - vs_[0]) / h0 - d0);
        diag[n - 1] = 2.0 * hl;
        lower[n - 1] = hl;
        rhs[n - 1] = 6.0 * (dn - (vs_[n - 1] - vs_[n - 2]) / hl);
      } else {
        diag[0] = diag[n - 1] = 1.0;  // natural fallback for tiny tables
      }
      for (std::size_t i = 1; i < n; ++i) {
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
      }
      m_[n - 1] = rhs[n - 1] / diag[n - 1];
      for (std::size_t i = n - 1; i-- > 0;)
        m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
    }
    // running integral over complete intervals
    cum_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
      cum_[i + 1] = cum_[i] + segment_integral(i, ts_[i + 1]);
  }

  double value(double t) const override {
    const std::size_t i = locate(t);
    const double h = ts_[i + 1] - ts_[i], a = (ts_[i + 1] - t) / h,
                 b = (t - ts_[i]) / h;
    return a * vs_[i] + b * vs_[i + 1] +
           ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h /
               6.0;
  }

  double derivative(double t) const override {
    const std::size_t i = locate(t);
    const double h = ts_[i + 1] - ts_[i], a = (ts_[i + 1] - t) / h,
                 b = (t - ts_[i]) / h;
    return (vs_[i + 1] - vs_[i]) / h +
           ((3.0 * b * b - 1.0) * m_[i + 1] - (3.0 * a * a - 1.0) * m_[i]) *
               h / 6.0;
  }

  double integral(double t) const override {
    const std::size_t i = locate(t);
    return cum_[i] + segment_integral(i, t);
  }

  double t_min() const { return ts_.front(); }
  double t_max() const { return ts_.back(); }

 private:
  // derivative at ts_[a] of the cubic through samples a, b, c, d
  double end_slope(std::size_t a, std::size_t b, std::size_t c,
                   std::size_t d) const {
    const double f_ab = (vs_[b] - vs_[a]) / (ts_[b] - ts_[a]);
    const double f_bc = (vs_[c] - vs_[b]) / (ts_[c] - ts_[b]);
    const double f_cd = (vs_[d] - vs_[c]) / (ts_[d] - ts_[c]);
    const double f_abc = (f_bc - f_ab) / (ts_[c] - ts_[a]);
    const double f_bcd = (f_cd - f_bc) / (ts_[d] - ts_[b]);
    const double f_abcd = (f_bcd - f_abc) / (ts_[d] - ts_[a]);
    return f_ab + f_abc * (ts_[a] - ts_[b]) +
           f_abcd * (ts_[a] - ts_[b]) * (ts_[a] - ts_[c]);
  }

  std::size_t locate(double t) const {
    if (t < ts_.front() - 1e-12 || t > ts_.back() + 1e-12)
      throw RangeError("sampled table evaluated outside its time range");
    std::size_t lo = 0, hi = ts_.size() - 2;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (ts_[mid] <= t)
        lo = mid;
      else
        hi = mid - 1;
    }
    return lo;
  }

  // int_{ts_[i]}^{t} of the spline piece on [ts_[i], ts_[i+1]]
  double segment_integral(std::size_t i, double t) const {
    const double h = ts_[i + 1] - ts_[i], a = (ts_[i + 1] - t) / h,
                 b = (t - ts_[i]) / h;
    auto quart = [](double x) { return x * x * x * x; };
    // antiderivative in the local variables, zero at t = ts_[i]
    return h * (0.5 * (1.0 - a * a) * vs_[i] + 0.5 * b * b * vs_[i + 1]) +
           h * h * h / 6.0 *
               (m_[i] * (0.5 * a * a - 0.25 * quart(a) - 0.25) +
                m_[i + 1] * (0.25 * quart(b) - 0.5 * b * b));
  }

  std::vector<double> ts_, vs_, m_, cum_;
};

inline ScalarPtr make_constant(double c) {
  return std::make_shared<ConstantScalar>(c);
}
inline ScalarPtr make_linear(double a, double b) {
  return std::make_shared<LinearScalar>(a, b);
}
inline ScalarPtr make_sinusoid(double amp, double omega, double phase,
                               double offset = 0.0) {
  return std::make_shared<SinusoidScalar>(amp, omega, phase, offset);
}
inline ScalarPtr make_sum(std::vector<ScalarPtr> terms) {
  return std::make_shared<SumScalar>(std::move(terms));
}
inline ScalarPtr make_table(std::vector<double> ts, std::vector<double> vs) {
  return std::make_shared<CubicTableScalar>(std::move(ts), std::move(vs));
}

// ---------------------------------------------------------------------------
// Per-site vector fields
// ---------------------------------------------------------------------------

enum class FieldKind {
  kConstant,
  kLinearRamp,
  kRotating,
  kSinusoidal,
  kSampledTable,
  kIsingCompatible,
  kIsingEnvelope,
};

inline const char* field_kind_name(FieldKind k) {
  switch (k) {
    case FieldKind::kConstant: return "constant";
    case FieldKind::kLinearRamp: return "linear-ramp";
    case FieldKind::kRotating: return "rotating";
    case FieldKind::kSinusoidal: return "sinusoidal";
    case FieldKind::kSampledTable: return "sampled-table";
    case FieldKind::kIsingCompatible: return "ising-compatible";
    case FieldKind::kIsingEnvelope: return "ising-envelope";
  }
  return "?";
}

// One site's field. Either three independent scalar components, or the two
// Ising-constructed kinds where the transverse part is slaved to the phase
// phi(t) = int_0^t bx.
class SiteField {
 public:
  static SiteField components(ScalarPtr bx, ScalarPtr by, ScalarPtr bz) {
    SiteField f;
    f.bx_ = std::move(bx);
    f.by_ = std::move(by);
    f.bz_ = std::move(bz);
    return f;
  }

  // transverse part of b0 rotated rigidly through phi(t)
  static SiteField ising_compatible(ScalarPtr bx, const Vec3& b0) {
    if (std::abs(bx->value(0.0) - b0.x) > 1e-9)
      throw ContractViolation(
          "ising field: bx(0) does not match the x component of B0");
    SiteField f;
    f.bx_ = std::move(bx);
    f.y0_ = b0.y;
    f.z0_ = b0.z;
    f.ising_ = true;
    return f;
  }

  // transverse direction rotated through phi(t), magnitude given by the
  // envelope; b0's transverse part fixes the initial direction
  static SiteField ising_envelope(ScalarPtr bx, ScalarPtr envelope,
                                  const Vec3& b0) {
    const double tn = std::hypot(b0.y, b0.z);
    if (tn < 1e-12)
      throw ContractViolation(
          "ising envelope field: initial transverse direction undefined "
          "(zero transverse component of B0)");
    if (std::abs(bx->value(0.0) - b0.x) > 1e-9)
      throw ContractViolation(
          "ising field: bx(0) does not match the x component of B0");
    if (std::abs(envelope->value(0.0) - tn) > 1e-9)
      throw ContractViolation(
          "ising envelope field: envelope(0) does not match |B0 transverse|");
    SiteField f;
    f.bx_ = std::move(bx);
    f.env_ = std::move(envelope);
    f.y0_ = b0.y / tn;
    f.z0_ = b0.z / tn;
    f.ising_ = true;
    return f;
  }

  Vec3 value(double t) const {
    if (!ising_) return {bx_->value(t), by_->value(t), bz_->value(t)};
    const double phi = bx_->integral(t);
    const double c = std::cos(phi), s = std::sin(phi);
    const double mag = env_ ? env_->value(t) : 1.0;
    return {bx_->value(t), mag * (y0_ * c + z0_ * s),
            mag * (-y0_ * s + z0_ * c)};
  }

  Vec3 derivative(double t) const {
    if (!ising_)
      return {bx_->derivative(t), by_->derivative(t), bz_->derivative(t)};
    const double phi = bx_->integral(t), phidot = bx_->value(t);
    const double c = std::cos(phi), s = std::sin(phi);
    const double mag = env_ ? env_->value(t) : 1.0;
    const double magdot = env_ ? env_->derivative(t) : 0.0;
    const double ty = y0_ * c + z0_ * s, tz = -y0_ * s + z0_ * c;
    return {bx_->derivative(t), magdot * ty + mag * phidot * tz,
            magdot * tz - mag * phidot * ty};
  }

  // phi(t) = int_0^t Bx; meaningful for every kind
  double phase(double t) const { return bx_->integral(t); }
  double phase_rate(double t) const { return bx_->value(t); }

  bool is_ising_kind() const { return ising_; }
  bool has_envelope() const { return env_ != nullptr; }
  double envelope(double t) const { return env_ ? env_->value(t) : 0.0; }
  // unit initial transverse direction (ising kinds), or raw components at 0
  Vec3 initial_value() const { return value(0.0); }
  std::pair<double, double> transverse_direction() const {
    if (env_) return {y0_, z0_};
    const Vec3 v0 = value(0.0);
    const double tn = std::hypot(v0.y, v0.z);
    if (tn < 1e-12)
      throw ContractViolation("transverse direction undefined at t = 0");
    return {v0.y / tn, v0.z / tn};
  }

 private:
  ScalarPtr bx_, by_, bz_;
  ScalarPtr env_;
  double y0_ = 0.0, z0_ = 0.0;  // ising kinds: initial transverse data
  bool ising_ = false;
};

struct FieldSample {
  double t = 0.0;
  std::vector<Vec3> values;  // size 1 when homogeneous
  bool homogeneous = true;

  const Vec3& at_site(std::size_t i) const {
    return homogeneous ? values.front() : values.at(i);
  }
};

class FieldProtocol {
 public:
  FieldProtocol() = default;
  FieldProtocol(FieldKind kind, std::vector<SiteField> sites, bool homogeneous,
                double horizon)
      : kind_(kind),
        sites_(std::move(sites)),
        homogeneous_(homogeneous),
        horizon_(horizon) {
    if (sites_.empty()) throw ConfigError("field protocol has no sites");
    if (homogeneous_ && sites_.size() != 1)
      throw ConfigError("homogeneous protocol must carry exactly one field");
  }

  FieldKind kind() const { return kind_; }
  bool homogeneous() const { return homogeneous_; }
  double horizon() const { return horizon_; }
  std::size_t site_count() const { return sites_.size(); }

  void check_time(double t) const {
    if (t < -1e-12 || t > horizon_ + 1e-9)
      throw RangeError("field evaluated outside [0, horizon]");
  }

  const SiteField& site(std::size_t i) const {
    return homogeneous_ ? sites_.front() : sites_.at(i);
  }

  Vec3 value(std::size_t site_index, double t) const {
    check_time(t);
    return site(site_index).value(t);
  }

  Vec3 derivative(std::size_t site_index, double t) const {
    check_time(t);
    return site(site_index).derivative(t);
  }

  double phase(std::size_t site_index, double t) const {
    check_time(t);
    return site(site_index).phase(t);
  }

  double phase_rate(std::size_t site_index, double t) const {
    check_time(t);
    return site(site_index).phase_rate(t);
  }

 private:
  FieldKind kind_ = FieldKind::kConstant;
  std::vector<SiteField> sites_;
  bool homogeneous_ = true;
  double horizon_ = 0.0;
};

inline FieldSample eval_field(const FieldProtocol& p, double t) {
  p.check_time(t);
  FieldSample s;
  s.t = t;
  s.homogeneous = p.homogeneous();
  const std::size_t n = p.homogeneous() ? 1 : p.site_count();
  s.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) s.values.push_back(p.site(i).value(t));
  return s;
}

// ---------------------------------------------------------------------------
// Factories for the simple kinds
// ---------------------------------------------------------------------------

inline FieldProtocol constant_field(const Vec3& b, double horizon) {
  return FieldProtocol(
      FieldKind::kConstant,
      {SiteField::components(make_constant(b.x), make_constant(b.y),
                             make_constant(b.z))},
      true, horizon);
}

inline FieldProtocol linear_ramp_field(const Vec3& b0, const Vec3& slope,
                                       double horizon) {
  return FieldProtocol(
      FieldKind::kLinearRamp,
      {SiteField::components(make_linear(b0.x, slope.x),
                             make_linear(b0.y, slope.y),
                             make_linear(b0.z, slope.z))},
      true, horizon);
}

// (b_perp cos(w t + phase), b_perp sin(w t + phase), bz)
inline FieldProtocol rotating_field(double b_perp, double omega, double phase,
                                    double bz, double horizon) {
  return FieldProtocol(
      FieldKind::kRotating,
      {SiteField::components(
          make_sinusoid(b_perp, omega, phase + kPi / 2.0),  // cos
          make_sinusoid(b_perp, omega, phase), make_constant(bz))},
      true, horizon);
}

inline FieldProtocol sinusoidal_field(const Vec3& offset, const Vec3& amp,
                                      double omega, double phase,
                                      double horizon) {
  return FieldProtocol(
      FieldKind::kSinusoidal,
      {SiteField::components(make_sinusoid(amp.x, omega, phase, offset.x),
                             make_sinusoid(amp.y, omega, phase, offset.y),
                             make_sinusoid(amp.z, omega, phase, offset.z))},
      true, horizon);
}

inline FieldProtocol table_field(const std::vector<double>& ts,
                                 const std::vector<Vec3>& vs) {
  std::vector<double> x, y, z;
  x.reserve(vs.size());
  y.reserve(vs.size());
  z.reserve(vs.size());
  for (const Vec3& v : vs) {
    x.push_back(v.x);
    y.push_back(v.y);
    z.push_back(v.z);
  }
  return FieldProtocol(FieldKind::kSampledTable,
                       {SiteField::components(make_table(ts, x),
                                              make_table(ts, y),
                                              make_table(ts, z))},
                       true, ts.back());
}

}  // namespace gaugeflow
