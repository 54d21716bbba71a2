// Embedded adaptive Runge-Kutta 5(4) (Dormand-Prince) with 4th-order dense
// output, following Hairer/Norsett/Wanner. Operates on real state vectors;
// complex systems map their state onto pairs of reals.
#pragma once

#include <algorithm>
#include <functional>
#include <utility>
#include <vector>

#include "gaugeflow/core.hpp"

namespace gaugeflow {

struct OdeStats {
  long steps = 0;
  long rejected = 0;
  double max_error_estimate = 0.0;  // scaled local error of accepted steps
};

namespace detail {

// Dormand-Prince coefficients.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                        c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113,
                        a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                        a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                        e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0,
                        d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0,
                        d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0,
                        d7 = 69997945.0 / 29380423.0;

}  // namespace detail

// One accepted step's interpolation data.
struct DenseSegment {
  double t0 = 0.0, h = 0.0;
  RealVector r1, r2, r3, r4, r5;

  RealVector eval(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

class OdeSolution {
 public:
  const OdeStats& stats() const { return stats_; }
  double t_begin() const { return t0_; }
  double t_end() const { return t1_; }

  RealVector at(double t) const {
    if (segments_.empty()) throw ResolutionError("ode solution is empty");
    if (t < t0_ - 1e-12 || t > t1_ + 1e-12)
      throw RangeError("ode solution evaluated outside integration range");
    // binary search for the segment containing t
    std::size_t lo = 0, hi = segments_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (segments_[mid].t0 + segments_[mid].h < t)
        lo = mid + 1;
      else
        hi = mid;
    }
    return segments_[lo].eval(std::clamp(t, t0_, t1_));
  }

  friend OdeSolution integrate_ode(
      const std::function<void(double, const RealVector&, RealVector&)>& f,
      RealVector y0, double t0, double t1, double tol,
      const std::function<bool(double, const RealVector&)>& guard);

 private:
  double t0_ = 0.0, t1_ = 0.0;
  std::vector<DenseSegment> segments_;
  OdeStats stats_;
};

// Integrates y' = f(t, y) from t0 to t1. Both absolute and relative local
// tolerances equal tol. An optional guard is evaluated after every accepted
// step; returning false aborts with a ChartError (used for Riccati blow-up).
inline OdeSolution integrate_ode(
    const std::function<void(double, const RealVector&, RealVector&)>& f,
    RealVector y0, double t0, double t1, double tol,
    const std::function<bool(double, const RealVector&)>& guard = nullptr) {
  using namespace detail;
  if (!(tol > 0.0)) throw ContractViolation("integrate_ode: tol must be > 0");
  OdeSolution sol;
  sol.t0_ = t0;
  sol.t1_ = t1;
  if (t1 <= t0) throw ContractViolation("integrate_ode: need t1 > t0");

  const Eigen::Index n = y0.size();
  RealVector y = std::move(y0);
  RealVector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y1(n);
  double t = t0;
  f(t, y, k1);
  double h = (t1 - t0) * 1e-3;
  const double hmin = (t1 - t0) * 1e-14;

  while (t < t1) {
    if (h < hmin)
      throw IntegrationError("integrate_ode: step size underflow at t = " +
                             std::to_string(t));
    if (t + h > t1) h = t1 - t;

    ytmp = y + h * (a21 * k1);
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, ytmp, k6);
    y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(t + h, y1, k7);

    // scaled error norm
    double err2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = h * (e1 * k1(i) + e3 * k3(i) + e4 * k4(i) +
                            e5 * k5(i) + e6 * k6(i) + e7 * k7(i));
      const double sc = tol + tol * std::max(std::abs(y(i)), std::abs(y1(i)));
      err2 += (e / sc) * (e / sc);
    }
    const double err = std::sqrt(err2 / double(n));

    if (err <= 1.0) {
      DenseSegment seg;
      seg.t0 = t;
      seg.h = h;
      seg.r1 = y;
      seg.r2 = y1 - y;
      seg.r3 = h * k1 - seg.r2;
      seg.r4 = seg.r2 - h * k7 - seg.r3;
      seg.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      sol.segments_.push_back(std::move(seg));

      t += h;
      y.swap(y1);
      k1.swap(k7);
      ++sol.stats_.steps;
      sol.stats_.max_error_estimate =
          std::max(sol.stats_.max_error_estimate, err);
      if (guard && !guard(t, y))
        throw ChartError("integrate_ode: guard tripped at t = " +
                         std::to_string(t));
    } else {
      ++sol.stats_.rejected;
    }
    const double fac =
        std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
    h *= fac;
  }
  return sol;
}

}  // namespace gaugeflow
