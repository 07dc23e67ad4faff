#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "csh/error.hpp"
#include "csh/quadrature.hpp"
#include "csh/radial.hpp"

namespace csh {

namespace {

// Fritsch-Carlson slope at node i of a uniform grid.
double pchip_slope(std::span<const double> y, std::size_t i, double h) {
  const std::size_t n = y.size();
  if (n < 2) return 0.0;
  if (i == 0) return (y[1] - y[0]) / h;
  if (i == n - 1) return (y[n - 1] - y[n - 2]) / h;
  const double d0 = (y[i] - y[i - 1]) / h;
  const double d1 = (y[i + 1] - y[i]) / h;
  if (d0 * d1 <= 0.0) return 0.0;
  return 2.0 / (1.0 / d0 + 1.0 / d1);
}

double pchip_eval(std::span<const double> t, std::span<const double> y, double x) {
  const double h = t[1] - t[0];
  auto i = static_cast<std::size_t>(std::floor((x - t[0]) / h));
  if (i >= t.size() - 1) i = t.size() - 2;
  const double s = (x - t[i]) / h;
  const double m0 = pchip_slope(y, i, h);
  const double m1 = pchip_slope(y, i + 1, h);
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y[i] + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * y[i + 1] +
         (s3 - s2) * h * m1;
}

}  // namespace

Seed asymptotic_seed(double t_min, const ModelParams& p) {
  const double twoN = 2.0 * p.N;
  // Integrand decays like e^{-2N(1+a)x}; truncate where that is below 1e-22.
  const double x_max = 50.0 / (twoN * (1.0 + p.a));
  QuadratureOptions opts;
  opts.abs_tol = 1e-300;
  opts.rel_tol = 1e-12;
  auto h = [&](double v) { return p.beta * nonlinearity_f(v, p.a); };
  const double w1 =
      integrate_gk([&](double x) { return x * h(twoN * (t_min - x)); }, 0.0, x_max, opts).value;
  const double w1p =
      integrate_gk([&](double x) { return h(twoN * (t_min - x)); }, 0.0, x_max, opts).value;
  if (std::abs(w1) > 1e-8) {
    std::ostringstream msg;
    msg << "Picard correction |w1(" << t_min << ")| = " << std::abs(w1)
        << " exceeds 1e-8; start further left";
    throw Error(ErrorKind::SeedNotConverged, msg.str());
  }
  return {twoN * t_min + w1, twoN + w1p, w1, w1p};
}

double linear_decay_rate(const ModelParams& p) { return std::sqrt(p.beta * std::exp(-p.a)); }

RadialSolution integrate_topological(const ModelParams& p, const TopologicalOptions& opts) {
  if (p.regime != Regime::TopologicalPlane) {
    throw Error(ErrorKind::RegimeMismatch, "integrate_topological needs the topological regime");
  }
  const double beta_top = beta_topological(p.N, p.a);
  if (std::abs(p.beta - beta_top) > 1e-10 * beta_top) {
    std::ostringstream msg;
    msg << "beta = " << p.beta << " but the topological branch needs beta = " << beta_top;
    throw Error(ErrorKind::TopologicalBetaMismatch, msg.str());
  }
  if (opts.grid_points < 3 || !(opts.t_max > opts.t_min)) {
    throw Error(ErrorKind::ValidationError, "need t_max > t_min and at least 3 grid points");
  }

  const Seed seed = asymptotic_seed(opts.t_min, p);
  const PotentialTable table(p);
  const FirstIntegral F(p);
  const double four_n2 = 4.0 * p.N * p.N;
  auto F_march = [&](double v) { return v < -1.0 ? four_n2 - 2.0 * table(v) : F(v); };

  RadialSolution sol;
  sol.kind = SolutionKind::Topological;
  sol.params = p;
  const int n = opts.grid_points;
  const double h = (opts.t_max - opts.t_min) / (n - 1);
  sol.t.resize(n);
  for (int i = 0; i < n; ++i) sol.t[i] = opts.t_min + i * h;
  sol.t.back() = opts.t_max;
  sol.v.resize(n);
  sol.v_prime.resize(n);
  sol.v_second.resize(n);

  OdeTolerances tol;
  tol.rtol = opts.step_tol;
  tol.atol = 1e-22;
  tol.h_max = 0.25;
  sol.diagnostics.rtol = tol.rtol;
  sol.diagnostics.atol = tol.atol;
  sol.diagnostics.seed_correction = std::abs(seed.correction);

  auto rhs = [&](double, const std::array<double, 1>& y, std::array<double, 1>& dy) {
    if (y[0] >= 0.0) {
      dy[0] = 0.0;
      return;
    }
    dy[0] = std::sqrt(std::max(F_march(y[0]), 0.0));
  };
  auto march = make_dopri5<1>(rhs, opts.t_min, {seed.v}, tol);
  auto check = [&](double t, const std::array<double, 1>& y) {
    if (!(y[0] < 0.0) || !(F_march(y[0]) > 0.0)) {
      std::ostringstream msg;
      msg << "trajectory lost monotonicity at t = " << t << " (v = " << y[0] << ")";
      throw Error(ErrorKind::NotMonotone, msg.str());
    }
  };

  const double mu = linear_decay_rate(p);
  bool linearized = false;
  double t_star = std::numeric_limits<double>::quiet_NaN();
  double v_star = 0.0;
  sol.v[0] = seed.v;
  sol.v_prime[0] = seed.v_prime;
  for (int i = 1; i < n; ++i) {
    if (!linearized) {
      march.advance_to(sol.t[i], check);
      sol.v[i] = march.y()[0];
      sol.v_prime[i] = std::sqrt(F_march(sol.v[i]));
      if (std::abs(sol.v[i]) < opts.linearize_below) {
        linearized = true;
        t_star = sol.t[i];
        v_star = sol.v[i];
      }
    } else {
      sol.v[i] = v_star * std::exp(-mu * (sol.t[i] - t_star));
      sol.v_prime[i] = -mu * sol.v[i];
    }
  }
  sol.diagnostics.linearized_from_t = t_star;
  sol.diagnostics.steps = march.stats();

  double residual = 0.0;
  for (int i = 0; i < n; ++i) {
    sol.v_second[i] = p.beta * nonlinearity_f(sol.v[i], p.a);
    residual = std::max(residual, std::abs(sol.v_prime[i] * sol.v_prime[i] - F(sol.v[i])));
  }

  // Independent route: the second-order equation from the same seed, compared
  // while v stays below the cross-check floor (beyond it the saddle at v = 0
  // amplifies any perturbation).
  auto rhs2 = [&](double, const std::array<double, 2>& y, std::array<double, 2>& dy) {
    dy[0] = y[1];
    dy[1] = p.beta * nonlinearity_f(y[0], p.a);
  };
  auto second = make_dopri5<2>(rhs2, opts.t_min, {seed.v, seed.v_prime}, tol);
  double discrepancy = 0.0;
  double t_end = opts.t_min;
  auto energy = [&](double, const std::array<double, 2>& y) {
    if (y[0] < 0.0) residual = std::max(residual, std::abs(y[1] * y[1] - F(y[0])));
  };
  for (int i = 1; i < n && sol.v[i] <= -opts.cross_check_floor; ++i) {
    second.advance_to(sol.t[i], energy);
    discrepancy = std::max(discrepancy, std::abs(second.y()[0] - sol.v[i]));
    t_end = sol.t[i];
  }
  sol.diagnostics.cross_check_discrepancy = discrepancy;
  sol.diagnostics.cross_check_t_end = t_end;
  sol.diagnostics.first_integral_residual = residual;
  if (discrepancy > opts.cross_check_tol) {
    std::ostringstream msg;
    msg << "first- and second-order trajectories differ by " << discrepancy << " (limit "
        << opts.cross_check_tol << ")";
    throw Error(ErrorKind::CrossCheckFailure, msg.str());
  }
  if (!(sol.v.back() > -opts.terminal_tol)) {
    std::ostringstream msg;
    msg << "v(t_max) = " << sol.v.back() << " has not reached the vacuum within "
        << opts.terminal_tol;
    throw Error(ErrorKind::TailNotConverged, msg.str());
  }

  const auto [lo, hi] = default_decay_window(sol);
  if (hi > lo) {
    try {
      const DecayFit fit = fit_decay_exponent(sol, lo, hi);
      sol.asymptotics.decay_exponent = fit.exponent;
      sol.asymptotics.r_squared = fit.r_squared;
    } catch (const Error&) {
      // Grid too coarse for a tail fit; leave the asymptotics empty.
    }
  }
  return sol;
}

DecayFit fit_log_slope(std::span<const double> t, std::span<const double> y, double t_lo,
                       double t_hi) {
  double st = 0, sy = 0, stt = 0, sty = 0, syy = 0;
  int m = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi || y[i] == 0.0) continue;
    const double ly = std::log(std::abs(y[i]));
    st += t[i];
    sy += ly;
    stt += t[i] * t[i];
    sty += t[i] * ly;
    syy += ly * ly;
    ++m;
  }
  if (m < 20) {
    std::ostringstream msg;
    msg << "only " << m << " nodes in [" << t_lo << ", " << t_hi << "], need 20";
    throw Error(ErrorKind::WindowTooShort, msg.str());
  }
  const double ctt = stt - st * st / m;
  const double cty = sty - st * sy / m;
  const double cyy = syy - sy * sy / m;
  const double slope = cty / ctt;
  const double r2 = cyy > 0.0 ? cty * cty / (ctt * cyy) : 1.0;
  return {-slope, r2, m};
}

DecayFit fit_decay_exponent(const RadialSolution& sol, double t_lo, double t_hi) {
  return fit_log_slope(sol.t, sol.v, t_lo, t_hi);
}

DecayFit fit_derivative_decay(const RadialSolution& sol, double t_lo, double t_hi) {
  return fit_log_slope(sol.t, sol.v_prime, t_lo, t_hi);
}

std::pair<double, double> default_decay_window(const RadialSolution& sol) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    const double av = std::abs(sol.v[i]);
    if (av >= 1e-8 && av <= 1e-2) {
      lo = std::min(lo, sol.t[i]);
      hi = std::max(hi, sol.t[i]);
    }
  }
  return {lo, hi};
}

std::vector<RadialSample> to_radial_profile(const RadialSolution& sol,
                                            std::span<const double> r_points) {
  const double r_lo = std::exp(sol.t.front());
  const double r_hi = std::exp(sol.t.back());
  std::vector<RadialSample> out;
  out.reserve(r_points.size());
  for (double r : r_points) {
    if (!(r >= r_lo * (1 - 1e-14) && r <= r_hi * (1 + 1e-14))) {
      std::ostringstream msg;
      msg << "r = " << r << " outside [" << r_lo << ", " << r_hi << "]";
      throw Error(ErrorKind::OutOfDomain, msg.str());
    }
    const double t = std::clamp(std::log(r), sol.t.front(), sol.t.back());
    const double v = pchip_eval(sol.t, sol.v, t);
    const double vp = pchip_eval(sol.t, sol.v_prime, t);
    out.push_back({r, v, vp / r});
  }
  return out;
}

}  // namespace csh
