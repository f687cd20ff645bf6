#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>

namespace qneq {

/// Dormand-Prince 5(4) integrator with absolute local-error control for small
/// fixed-size systems. The right-hand side returns std::nullopt where it cannot
/// be evaluated; such steps are rejected and retried with a smaller step.
template <std::size_t D>
class DormandPrince {
public:
  using State = std::array<double, D>;

  struct Result {
    State y;
    double t;
    bool ok;  // false: step size underflowed, y/t hold the last accepted state
    std::size_t accepted;
    std::size_t rejected;
  };

  explicit DormandPrince(double tol, double min_step = 1e-14) : tol_(tol), min_step_(min_step) {}

  template <class Rhs>
  Result integrate(Rhs&& rhs, State y, double t0, double t1, double h0 = 1e-3) const {
    Result res{y, t0, true, 0, 0};
    if (!(t1 > t0)) return res;
    double h = std::min(h0, t1 - t0);
    double t = t0;
    auto k1 = rhs(t, y);
    if (!k1) return {y, t0, false, 0, 0};
    while (t < t1) {
      const bool last = t + h >= t1;
      if (last) h = t1 - t;
      State err{};
      std::optional<State> k7;
      State ynew = try_step(rhs, t, y, *k1, h, err, k7);
      double ratio = 0.0;
      bool valid = k7.has_value();
      if (valid) {
        for (std::size_t i = 0; i < D; ++i) ratio = std::max(ratio, std::fabs(err[i]) / tol_);
        valid = std::isfinite(ratio);
      }
      if (valid && ratio <= 1.0) {
        t = last ? t1 : t + h;
        y = ynew;
        k1 = k7;
        ++res.accepted;
        const double grow = ratio == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(ratio, -0.2), 0.2, 5.0);
        h *= grow;
      } else {
        ++res.rejected;
        h *= valid ? std::clamp(0.9 * std::pow(ratio, -0.2), 0.1, 0.9) : 0.25;
        if (h < min_step_ * std::max(1.0, std::fabs(t))) {
          res.y = y;
          res.t = t;
          res.ok = false;
          return res;
        }
      }
    }
    res.y = y;
    res.t = t1;
    return res;
  }

private:
  template <class Rhs>
  static State try_step(Rhs& rhs, double t, const State& y, const State& k1, double h, State& err,
                        std::optional<State>& k7) {
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    auto stage = [&](auto&& combine) {
      State s;
      for (std::size_t i = 0; i < D; ++i) s[i] = y[i] + h * combine(i);
      return s;
    };
    k7.reset();
    const auto k2 = rhs(t + h / 5, stage([&](std::size_t i) { return a21 * k1[i]; }));
    if (!k2) return y;
    const auto k3 = rhs(t + 3 * h / 10, stage([&](std::size_t i) { return a31 * k1[i] + a32 * (*k2)[i]; }));
    if (!k3) return y;
    const auto k4 = rhs(t + 4 * h / 5,
                        stage([&](std::size_t i) { return a41 * k1[i] + a42 * (*k2)[i] + a43 * (*k3)[i]; }));
    if (!k4) return y;
    const auto k5 = rhs(t + 8 * h / 9, stage([&](std::size_t i) {
                          return a51 * k1[i] + a52 * (*k2)[i] + a53 * (*k3)[i] + a54 * (*k4)[i];
                        }));
    if (!k5) return y;
    const auto k6 = rhs(t + h, stage([&](std::size_t i) {
                          return a61 * k1[i] + a62 * (*k2)[i] + a63 * (*k3)[i] + a64 * (*k4)[i] + a65 * (*k5)[i];
                        }));
    if (!k6) return y;
    const State ynew = stage([&](std::size_t i) {
      return b1 * k1[i] + b3 * (*k3)[i] + b4 * (*k4)[i] + b5 * (*k5)[i] + b6 * (*k6)[i];
    });
    k7 = rhs(t + h, ynew);
    if (!k7) return y;
    for (std::size_t i = 0; i < D; ++i) {
      err[i] = h * (e1 * k1[i] + e3 * (*k3)[i] + e4 * (*k4)[i] + e5 * (*k5)[i] + e6 * (*k6)[i] + e7 * (*k7)[i]);
    }
    return ynew;
  }

  double tol_;
  double min_step_;
};

}  // namespace qneq
