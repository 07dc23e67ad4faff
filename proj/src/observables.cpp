#include "csh/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "csh/error.hpp"

namespace csh {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kTailNodes = 40;

double weight_c(const ModelParams& p) { return 2.0 - 2.0 * p.a * p.N; }

// eta - ln(lambda) = a(v - e^v - 2N t)
double eta_shifted(double t, double v, const ModelParams& p) {
  return p.a * (v - std::exp(v) - 2.0 * p.N * t);
}

// (e^v - 1) v'' + e^v v'^2, the t-form of 4 e^eta H r^2
double bracket(double v, double vp, double vpp) {
  return std::expm1(v) * vpp + std::exp(v) * vp * vp;
}

double trapezoid(std::span<const double> y, double h) {
  if (y.size() < 2) return 0.0;
  double s = 0.5 * (y.front() + y.back());
  for (std::size_t i = 1; i + 1 < y.size(); ++i) s += y[i];
  return s * h;
}

// Integral of an exponentially decaying tail beyond the end sample; the rate is
// fitted on the outermost kTailNodes nodes.
double tail_integral(std::span<const double> t, std::span<const double> y, bool right,
                     const char* what) {
  const std::size_t n = t.size();
  const std::size_t m = std::min<std::size_t>(kTailNodes, n);
  const double edge = right ? y[n - 1] : y[0];
  if (edge == 0.0) return 0.0;
  const auto ts = right ? t.subspan(n - m) : t.first(m);
  const auto ys = right ? y.subspan(n - m) : y.first(m);
  const DecayFit fit = fit_log_slope(ts, ys, ts.front(), ts.back());
  // fit returns minus the slope of ln|y|; decay towards the edge means positive
  // rate on the right and negative on the left
  const double rate = right ? fit.exponent : -fit.exponent;
  if (!(rate > 0.0)) {
    std::ostringstream msg;
    msg << what << ": " << (right ? "right" : "left") << " tail rate " << rate;
    throw Error(ErrorKind::TailNotIntegrable, msg.str());
  }
  return edge / rate;
}

}  // namespace

std::vector<double> metric_factor(const RadialSolution& sol) {
  const ModelParams& p = sol.params;
  std::vector<double> out(sol.t.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = p.lambda * std::exp(eta_shifted(sol.t[i], sol.v[i], p));
  }
  return out;
}

std::vector<double> energy_density(const RadialSolution& sol) {
  const ModelParams& p = sol.params;
  const double c = weight_c(p);
  std::vector<double> out(sol.t.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = sol.t[i];
    const double v = sol.v[i];
    // e^{-eta} e^{-2t} as one exponential
    const double scale = std::exp(-std::log(p.lambda) - p.a * (v - std::exp(v)) - c * t);
    const double h = 0.25 * scale * bracket(v, sol.v_prime[i], sol.v_second[i]);
    if (h < -1e-9) {
      std::ostringstream msg;
      msg << "H = " << h << " at t = " << t;
      throw Error(ErrorKind::NegativeDensity, msg.str());
    }
    out[i] = h;
  }
  return out;
}

std::vector<double> magnetic_field(const RadialSolution& sol) {
  const ModelParams& p = sol.params;
  const double pre = 2.0 * p.lambda / (p.kappa * p.kappa);
  std::vector<double> out(sol.t.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = sol.v[i];
    out[i] = -pre * std::exp(eta_shifted(sol.t[i], v, p) + v) * std::expm1(v);
  }
  return out;
}

std::vector<double> energy_density_alt(const RadialSolution& sol) {
  const ModelParams& p = sol.params;
  const std::vector<double> f12 = magnetic_field(sol);
  std::vector<double> out(sol.t.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = sol.t[i];
    const double v = sol.v[i];
    const double inv_eta = std::exp(-std::log(p.lambda) - eta_shifted(t, v, p));
    const double grad2 = std::exp(-2.0 * t) * sol.v_prime[i] * sol.v_prime[i];
    out[i] = 0.5 * inv_eta * f12[i] * (-std::expm1(v)) + 0.25 * inv_eta * std::exp(v) * grad2;
  }
  return out;
}

FluxResult magnetic_flux(const RadialSolution& sol, double tol) {
  const ModelParams& p = sol.params;
  const double pre = 2.0 * p.lambda / (p.kappa * p.kappa);
  // F12 r^2 in t, kept away from e^{2t} overflow by folding it into the exponent
  std::vector<double> integrand(sol.t.size());
  for (std::size_t i = 0; i < integrand.size(); ++i) {
    const double t = sol.t[i];
    const double v = sol.v[i];
    integrand[i] = -pre * std::exp(eta_shifted(t, v, p) + v + 2.0 * t) * std::expm1(v);
  }
  FluxResult f;
  f.grid_part = 2.0 * kPi * trapezoid(integrand, sol.step());
  f.tail_left = 2.0 * kPi * tail_integral(sol.t, integrand, false, "flux");
  f.tail_right = 2.0 * kPi * tail_integral(sol.t, integrand, true, "flux");
  f.quadrature = f.grid_part + f.tail_left + f.tail_right;
  f.boundary = 2.0 * kPi * p.N - kPi * sol.v_prime.back();
  f.relative_gap = std::abs(f.quadrature - f.boundary) / std::abs(f.boundary);
  if (!(f.relative_gap <= tol)) {
    std::ostringstream msg;
    msg << "quadrature " << f.quadrature << " vs boundary " << f.boundary;
    throw Error(ErrorKind::FluxMismatch, msg.str());
  }
  return f;
}

EinsteinResult gauss_curvature_and_einstein_residual(const RadialSolution& sol,
                                                     std::span<const double> e_eta,
                                                     std::span<const double> energy, double t_lo,
                                                     double t_hi) {
  const std::size_t n = sol.t.size();
  const double h = sol.step();
  EinsteinResult out;
  out.K_eta.assign(n, std::numeric_limits<double>::quiet_NaN());
  out.t_lo = t_lo;
  out.t_hi = t_hi;
  const double a = sol.params.a;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double t = sol.t[i];
    if (t < t_lo || t > t_hi) continue;
    // the linear part -2aN t of eta has zero second difference; drop it before
    // differencing so it does not leave rounding behind
    const double lm = std::log(e_eta[i - 1]) + 2.0 * a * sol.params.N * sol.t[i - 1];
    const double l0 = std::log(e_eta[i]) + 2.0 * a * sol.params.N * t;
    const double lp = std::log(e_eta[i + 1]) + 2.0 * a * sol.params.N * sol.t[i + 1];
    const double d2 = (lp - 2.0 * l0 + lm) / (h * h);
    const double k = -0.5 / e_eta[i] * std::exp(-2.0 * t) * d2;
    out.K_eta[i] = k;
    out.residual_sup = std::max(out.residual_sup, std::abs(k - 2.0 * a * energy[i]));
    ++out.nodes;
  }
  return out;
}

EnergyResult total_energy(const RadialSolution& sol, std::span<const double> energy,
                          std::span<const double> e_eta) {
  // 2 pi H e^eta r^2 per unit t
  std::vector<double> integrand(sol.t.size());
  for (std::size_t i = 0; i < integrand.size(); ++i) {
    integrand[i] = 2.0 * kPi * energy[i] * e_eta[i] * std::exp(2.0 * sol.t[i]);
  }
  EnergyResult e;
  e.grid_part = trapezoid(integrand, sol.step());
  e.tail_left = tail_integral(sol.t, integrand, false, "energy");
  e.tail_right = tail_integral(sol.t, integrand, true, "energy");
  e.value = e.grid_part + e.tail_left + e.tail_right;
  return e;
}

TailSlope metric_tail_slope(const RadialSolution& sol, std::span<const double> e_eta) {
  const double t_hi = sol.t.back();
  const DecayFit fit = fit_log_slope(sol.t, e_eta, t_hi - std::log(10.0), t_hi);
  const ModelParams& p = sol.params;
  TailSlope s;
  s.fitted = -fit.exponent;
  s.expected = sol.kind == SolutionKind::Topological ? -2.0 * p.a * p.N
                                                     : -p.a * (sol.asymptotics.k + 2.0 * p.N);
  return s;
}

Completeness completeness_check(const ModelParams& p) {
  Completeness c;
  c.margin = 1.0 / p.a - p.N;
  if (p.regime == Regime::CompactSphere) {
    c.applicable = false;
    c.satisfied = true;
    return c;
  }
  // aN = 1 up to the regime tolerance counts as the borderline case
  c.satisfied = c.margin >= -kRegimeTol * p.N;
  return c;
}

PlanarObservables planar_observables(const RadialSolution& sol) {
  PlanarObservables o;
  o.r.resize(sol.t.size());
  std::transform(sol.t.begin(), sol.t.end(), o.r.begin(), [](double t) { return std::exp(t); });
  o.e_eta = metric_factor(sol);
  o.energy_density = energy_density(sol);
  o.F12 = magnetic_field(sol);
  o.flux = magnetic_flux(sol);
  o.energy = total_energy(sol, o.energy_density, o.e_eta);
  o.einstein = gauss_curvature_and_einstein_residual(sol, o.e_eta, o.energy_density);
  o.K_eta = o.einstein.K_eta;
  o.metric_tail = metric_tail_slope(sol, o.e_eta);
  o.completeness = completeness_check(sol.params);
  return o;
}

SphereObservables sphere_observables(const SurfaceProblem& prob, std::span<const double> phi) {
  const SphereMesh& mesh = *prob.mesh;
  const ModelParams& p = prob.params;
  const std::vector<double> P = singular_weight(mesh, prob.points, prob.cutoff.rho, p.a, 0.0);
  const std::size_t n = phi.size();
  SphereObservables o;
  o.e_eta.resize(n);
  o.F12.resize(n);
  const double pre = 2.0 / (p.kappa * p.kappa);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = phi[i] + prob.background.v0[i];
    o.e_eta[i] = p.lambda * P[i] * std::exp(p.a * (v - std::exp(v)));
    o.F12[i] = -pre * o.e_eta[i] * std::exp(v) * std::expm1(v);
    o.flux += mesh.areas[i] * o.F12[i];
  }
  o.completeness = completeness_check(p);
  return o;
}

}  // namespace csh
