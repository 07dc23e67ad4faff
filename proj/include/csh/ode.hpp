#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "csh/error.hpp"

namespace csh {

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  long evaluations = 0;
  double min_step = 0.0;
  double max_step = 0.0;
};

struct OdeTolerances {
  double rtol = 1e-12;
  double atol = 1e-14;
  double h_max = 0.25;
  long max_steps = 2'000'000;
};

/// Dormand-Prince 5(4) with PI step control. State is a fixed-size array; the
/// right-hand side is any callable `void(double t, const State& y, State& dy)`.
/// advance_to() may be called repeatedly to hit output nodes exactly; the
/// internal step size carries over between calls.
template <std::size_t Dim, class Rhs>
class Dopri5 {
 public:
  using State = std::array<double, Dim>;

  Dopri5(Rhs rhs, double t0, const State& y0, OdeTolerances tol = {})
      : rhs_(std::move(rhs)), t_(t0), y_(y0), tol_(tol) {
    rhs_(t_, y_, k1_);
    ++stats_.evaluations;
  }

  double t() const { return t_; }
  const State& y() const { return y_; }
  const StepStats& stats() const { return stats_; }

  /// Integrate to t_end (either direction). `on_step(t, y)` runs after every
  /// accepted step and may throw to abort.
  template <class OnStep>
  void advance_to(double t_end, OnStep&& on_step) {
    const double dir = t_end >= t_ ? 1.0 : -1.0;
    if (h_ == 0.0) h_ = initial_step(dir);
    while (dir * (t_end - t_) > 0.0) {
      double h = std::min(std::abs(h_), tol_.h_max);
      bool last = false;
      if (h >= std::abs(t_end - t_)) {
        h = std::abs(t_end - t_);
        last = true;
      }
      h *= dir;
      State y5, err;
      step(h, y5, err);
      const double e = error_norm(y5, err);
      if (e <= 1.0 || std::abs(h) < 1e-14 * (1.0 + std::abs(t_))) {
        t_ = last ? t_end : t_ + h;
        y_ = y5;
        k1_ = k7_;  // FSAL
        ++stats_.accepted;
        const double ah = std::abs(h);
        stats_.min_step = stats_.accepted == 1 ? ah : std::min(stats_.min_step, ah);
        stats_.max_step = std::max(stats_.max_step, ah);
        if (stats_.accepted > tol_.max_steps) {
          throw Error(ErrorKind::BlowUp, "integrator exceeded its step budget");
        }
        on_step(t_, y_);
        const double fac = e == 0.0 ? 5.0
                                    : std::clamp(0.9 * std::pow(e, -0.7 / 5.0) *
                                                     std::pow(err_prev_, 0.4 / 5.0),
                                                 0.2, 5.0);
        err_prev_ = std::max(e, 1e-4);
        if (!last || std::abs(h) >= std::abs(h_)) h_ = std::abs(h) * fac;
      } else {
        ++stats_.rejected;
        h_ = std::abs(h) * std::max(0.2, 0.9 * std::pow(e, -0.2));
      }
    }
  }

  void advance_to(double t_end) {
    advance_to(t_end, [](double, const State&) {});
  }

 private:
  double initial_step(double dir) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < Dim; ++i) {
      const double sc = tol_.atol + tol_.rtol * std::abs(y_[i]);
      d0 = std::max(d0, std::abs(y_[i]) / sc);
      d1 = std::max(d1, std::abs(k1_[i]) / sc);
    }
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    return dir * std::min(h, tol_.h_max);
  }

  void step(double h, State& y5, State& err) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    State tmp;
    for (std::size_t i = 0; i < Dim; ++i) tmp[i] = y_[i] + h * a21 * k1_[i];
    rhs_(t_ + c2 * h, tmp, k2_);
    for (std::size_t i = 0; i < Dim; ++i) tmp[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2_[i]);
    rhs_(t_ + c3 * h, tmp, k3_);
    for (std::size_t i = 0; i < Dim; ++i)
      tmp[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2_[i] + a43 * k3_[i]);
    rhs_(t_ + c4 * h, tmp, k4_);
    for (std::size_t i = 0; i < Dim; ++i)
      tmp[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2_[i] + a53 * k3_[i] + a54 * k4_[i]);
    rhs_(t_ + c5 * h, tmp, k5_);
    for (std::size_t i = 0; i < Dim; ++i)
      tmp[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2_[i] + a63 * k3_[i] + a64 * k4_[i] +
                            a65 * k5_[i]);
    rhs_(t_ + h, tmp, k6_);
    for (std::size_t i = 0; i < Dim; ++i)
      y5[i] = y_[i] + h * (b1 * k1_[i] + b3 * k3_[i] + b4 * k4_[i] + b5 * k5_[i] + b6 * k6_[i]);
    rhs_(t_ + h, y5, k7_);
    stats_.evaluations += 6;
    for (std::size_t i = 0; i < Dim; ++i)
      err[i] = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] +
                    e7 * k7_[i]);
  }

  double error_norm(const State& y5, const State& err) const {
    double s = 0.0;
    for (std::size_t i = 0; i < Dim; ++i) {
      const double sc = tol_.atol + tol_.rtol * std::max(std::abs(y_[i]), std::abs(y5[i]));
      const double r = err[i] / sc;
      s += r * r;
    }
    const double e = std::sqrt(s / Dim);
    return std::isfinite(e) ? e : 1e10;
  }

  Rhs rhs_;
  double t_;
  State y_;
  OdeTolerances tol_;
  double h_ = 0.0;
  double err_prev_ = 1e-4;
  State k1_{}, k2_{}, k3_{}, k4_{}, k5_{}, k6_{}, k7_{};
  StepStats stats_;
};

template <std::size_t Dim, class Rhs>
auto make_dopri5(Rhs rhs, double t0, const std::array<double, Dim>& y0, OdeTolerances tol = {}) {
  return Dopri5<Dim, Rhs>(std::move(rhs), t0, y0, tol);
}

}  // namespace csh
