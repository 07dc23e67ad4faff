#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "csh/error.hpp"
#include "csh/radial.hpp"

namespace csh {

namespace {

double weight_c(const ModelParams& p) { return 2.0 - 2.0 * p.a * p.N; }

void require_nontopological(const ModelParams& p) {
  if (!(p.a * p.N < 1.0)) {
    std::ostringstream msg;
    msg << "shooting needs aN < 1, got aN = " << p.a * p.N;
    throw Error(ErrorKind::RegimeMismatch, msg.str());
  }
}

// beta e^{ct} f(v) as one exponential.
double source(double t, double v, const ModelParams& p, double c) {
  return p.beta * std::exp(c * t + p.a * (v - std::exp(v)) + v) * std::expm1(v);
}

// beta e^{ct + (1+a)v}: dominates |source| for v < 0.
double source_envelope(double t, double v, const ModelParams& p, double c) {
  return p.beta * std::exp(c * t + (1.0 + p.a) * v);
}

using State2 = std::array<double, 2>;

struct ApexRhs {
  const ModelParams* p;
  double c;
  void operator()(double t, const State2& y, State2& dy) const {
    dy[0] = y[1];
    dy[1] = source(t, y[0], *p, c);
  }
};

void check_state(double t, double v, double vp) {
  if (!(v < 0.0)) {
    std::ostringstream msg;
    msg << "v = " << v << " >= 0 at t = " << t;
    throw Error(ErrorKind::PositivityBreach, msg.str());
  }
  if (!(std::abs(vp) <= 1e8)) {
    std::ostringstream msg;
    msg << "|v'| = " << std::abs(vp) << " at t = " << t;
    throw Error(ErrorKind::BlowUp, msg.str());
  }
}

OdeTolerances apex_tolerances(const ApexOptions& opts) {
  OdeTolerances tol;
  tol.rtol = opts.step_tol;
  tol.atol = opts.step_tol * 1e-2;
  tol.h_max = 0.25;
  return tol;
}

// Remaining backward integral bound: v(s) <= v(t) for s < t on the rising branch.
double left_tail_bound(double t, double v, const ModelParams& p, double c) {
  return source_envelope(t, v, p, c) / c;
}

// Remaining forward integral bound from concavity: v(s) <= v(t) + v'(t)(s - t).
double right_tail_bound(double t, double v, double vp, const ModelParams& p, double c) {
  const double rate = c + (1.0 + p.a) * vp;
  if (rate >= 0.0) return std::numeric_limits<double>::infinity();
  return source_envelope(t, v, p, c) / -rate;
}

}  // namespace

double alpha_threshold(double a) {
  if (!(a > 0.0)) throw Error(ErrorKind::ValidationError, "alpha_threshold needs a > 0");
  return std::log(a / (1.0 + a - std::sqrt(1.0 + a)));
}

double slope_envelope_K(double t0, double alpha, const ModelParams& p) {
  const double c = weight_c(p);
  return std::sqrt(c * c + 2.0 * p.beta * std::exp(c * t0 - alpha)) - c;
}

double eta_lower_bound(double t0, double alpha, const ModelParams& p) {
  const double c = weight_c(p);
  const double K = slope_envelope_K(t0, alpha, p);
  const double pre = p.beta * std::exp(c * t0 - p.a * (alpha + std::exp(-alpha)) - alpha);
  return pre * -std::expm1(-alpha) / (c + (p.a + 2.0) * K);
}

double eta_lower_bound_sharp(double t0, double alpha, const ModelParams& p) {
  const double c = weight_c(p);
  const double K = slope_envelope_K(t0, alpha, p);
  const double pre = p.beta * std::exp(c * t0 - p.a * (alpha + std::exp(-alpha)) - alpha);
  return pre * (1.0 / (c + p.a * K + K) - std::exp(-alpha) / (c + p.a * K + 2.0 * K));
}

EtaResult eta_of(double t0, double alpha, const ModelParams& p, const ApexOptions& opts) {
  require_nontopological(p);
  if (!(alpha > 0.0)) throw Error(ErrorKind::ValidationError, "alpha must be positive");
  const double c = weight_c(p);
  auto solver = make_dopri5<2>(ApexRhs{&p, c}, t0, {-alpha, 0.0}, apex_tolerances(opts));
  auto check = [](double t, const State2& y) { check_state(t, y[0], y[1]); };
  double bound = left_tail_bound(t0, -alpha, p, c);
  double t = t0;
  while (bound >= opts.tail_tol) {
    if (t0 - t >= opts.max_backward) {
      std::ostringstream msg;
      msg << "backward tail bound " << bound << " still above " << opts.tail_tol
          << " at t = " << t;
      throw Error(ErrorKind::TailNotConverged, msg.str());
    }
    t -= 0.5;
    solver.advance_to(t, check);
    bound = left_tail_bound(t, solver.y()[0], p, c);
  }
  return {solver.y()[1], t, bound};
}

RadialSolution integrate_from_apex(double t0, double alpha, const ModelParams& p,
                                   const ApexOptions& opts) {
  require_nontopological(p);
  if (!(alpha > 0.0)) throw Error(ErrorKind::ValidationError, "alpha must be positive");
  const double c = weight_c(p);
  const double h = opts.grid_step;
  const auto tol = apex_tolerances(opts);
  auto check = [](double t, const State2& y) { check_state(t, y[0], y[1]); };

  std::vector<State2> back;
  auto bwd = make_dopri5<2>(ApexRhs{&p, c}, t0, {-alpha, 0.0}, tol);
  double bound_left = left_tail_bound(t0, -alpha, p, c);
  for (int j = 1; bound_left >= opts.tail_tol; ++j) {
    if (j * h > opts.max_backward) {
      throw Error(ErrorKind::TailNotConverged, "backward branch did not reach its tail bound");
    }
    bwd.advance_to(t0 - j * h, check);
    back.push_back(bwd.y());
    bound_left = left_tail_bound(bwd.t(), bwd.y()[0], p, c);
  }

  std::vector<State2> fwd_nodes;
  auto fwd = make_dopri5<2>(ApexRhs{&p, c}, t0, {-alpha, 0.0}, tol);
  double bound_right = std::numeric_limits<double>::infinity();
  for (int j = 1;; ++j) {
    if (j * h > opts.max_forward) {
      throw Error(ErrorKind::TailNotConverged, "forward branch did not reach its tail bound");
    }
    fwd.advance_to(t0 + j * h, check);
    fwd_nodes.push_back(fwd.y());
    const auto& y = fwd.y();
    bound_right = right_tail_bound(fwd.t(), y[0], y[1], p, c);
    if (source_envelope(fwd.t(), y[0], p, c) < opts.source_floor && bound_right < opts.tail_tol) {
      break;
    }
  }

  RadialSolution sol;
  sol.kind = SolutionKind::NonTopological;
  sol.params = p;
  const std::size_t nb = back.size();
  const std::size_t n = nb + 1 + fwd_nodes.size();
  sol.t.resize(n);
  sol.v.resize(n);
  sol.v_prime.resize(n);
  sol.v_second.resize(n);
  auto put = [&](std::size_t i, double t, const State2& y) {
    sol.t[i] = t;
    sol.v[i] = y[0];
    sol.v_prime[i] = y[1];
    sol.v_second[i] = source(t, y[0], p, c);
  };
  for (std::size_t j = 0; j < nb; ++j) {
    put(nb - 1 - j, t0 - static_cast<double>(j + 1) * h, back[j]);
  }
  put(nb, t0, {-alpha, 0.0});
  for (std::size_t j = 0; j < fwd_nodes.size(); ++j) {
    put(nb + 1 + j, t0 + static_cast<double>(j + 1) * h, fwd_nodes[j]);
  }

  sol.asymptotics.eta = sol.v_prime.front();
  sol.asymptotics.k = -sol.v_prime.back();
  sol.asymptotics.apex_t0 = t0;
  sol.asymptotics.apex_alpha = alpha;
  sol.diagnostics.tail_bound_left = bound_left;
  sol.diagnostics.tail_bound_right = bound_right;
  sol.diagnostics.rtol = tol.rtol;
  sol.diagnostics.atol = tol.atol;
  StepStats st = bwd.stats();
  const StepStats& sf = fwd.stats();
  st.accepted += sf.accepted;
  st.rejected += sf.rejected;
  st.evaluations += sf.evaluations;
  st.min_step = std::min(st.min_step, sf.min_step);
  st.max_step = std::max(st.max_step, sf.max_step);
  sol.diagnostics.steps = st;
  return sol;
}

ShootingRecord shoot_t0(double alpha, const ModelParams& p, const ShootOptions& opts) {
  require_nontopological(p);
  const double threshold = alpha_threshold(p.a);
  ShootingRecord rec;
  rec.alpha = alpha;
  rec.proven_regime = alpha >= threshold;
  if (!rec.proven_regime && !opts.allow_unproven_alpha) {
    std::ostringstream msg;
    msg << "alpha = " << alpha << " is below the proven threshold " << threshold;
    throw Error(ErrorKind::AlphaBelowThreshold, msg.str());
  }
  const double c = weight_c(p);
  const double twoN = 2.0 * p.N;
  auto eta = [&](double t0) { return eta_of(t0, alpha, p, opts.apex).eta; };

  // Lower end: K(t0) < 2N in closed form, then 5 units of margin.
  const double N = p.N;
  double lo = (alpha + std::log((2.0 * N * N + 2.0 * N * c) / p.beta)) / c - 5.0;
  double eta_lo = eta(lo);
  while (!(eta_lo < twoN)) {
    lo -= 5.0;
    if (lo < -100.0) throw Error(ErrorKind::BracketNotFound, "no t0 with eta < 2N above -100");
    eta_lo = eta(lo);
  }

  // Upper end: grow t0 until the explicit lower bound (or, outside the proven
  // regime, eta itself) exceeds 2N.
  double hi = lo;
  double eta_hi = eta_lo;
  for (;;) {
    hi += 1.0;
    if (hi > 100.0) throw Error(ErrorKind::BracketNotFound, "no t0 with eta > 2N below 100");
    if (rec.proven_regime && !(eta_lower_bound(hi, alpha, p) > twoN)) continue;
    eta_hi = eta(hi);
    if (eta_hi > twoN) break;
  }
  rec.t0_low_initial = lo;
  rec.t0_high_initial = hi;

  // Bisection; eta is continuous in t0 but not known to be monotone.
  double mid = 0.5 * (lo + hi);
  double eta_mid = eta(mid);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    eta_mid = eta(mid);
    rec.iterations.push_back({lo, hi, mid, eta_mid});
    if (std::abs(eta_mid - twoN) < opts.tol) break;
    if (eta_mid < twoN) {
      lo = mid;
      eta_lo = eta_mid;
    } else {
      hi = mid;
      eta_hi = eta_mid;
    }
    if (hi - lo < 1e-15 * (1.0 + std::abs(mid))) break;
  }
  rec.t0 = mid;
  rec.eta = eta_mid;
  rec.t0_low = lo;
  rec.t0_high = hi;
  rec.K_bound = slope_envelope_K(mid, alpha, p);
  return rec;
}

SlopeChecks slope_checks(double k, const ModelParams& p) {
  const double N = p.N;
  SlopeChecks out;
  out.k = k;
  out.bound = 4.0 + 2.0 * N - 4.0 * p.a * N;
  out.energy_margin = 0.5 * (k * k - 4.0 * N * N) - weight_c(p) * (k + 2.0 * N);
  out.bound_holds = k - out.bound > -1e-6;
  out.energy_holds = out.energy_margin > -1e-6;
  return out;
}

double tail_slope_k(const RadialSolution& sol, const ModelParams& p) {
  const SlopeChecks chk = slope_checks(-sol.v_prime.back(), p);
  if (!chk.bound_holds || !chk.energy_holds) {
    std::ostringstream msg;
    msg << "k = " << chk.k << " against bound " << chk.bound << ", energy margin "
        << chk.energy_margin;
    throw Error(ErrorKind::SlopeBoundViolated, msg.str());
  }
  return chk.k;
}

EnergyIdentity energy_identity(const RadialSolution& sol, const ModelParams& p,
                               const ApexOptions& opts) {
  require_nontopological(p);
  using State5 = std::array<double, 5>;
  const double c = weight_c(p);
  const double t0 = sol.asymptotics.apex_t0;
  const double alpha = sol.asymptotics.apex_alpha;
  auto rhs = [&](double t, const State5& y, State5& dy) {
    const double v = y[0];
    const double ev = std::exp(v);
    const double w = p.beta * std::exp(c * t + p.a * (v - ev) + v);  // beta e^{ct} E e^v
    dy[0] = y[1];
    dy[1] = w * std::expm1(v);
    dy[2] = c * w * -std::expm1(v);
    dy[3] = 0.5 * c * w * ev;
    dy[4] = p.a * w * -std::expm1(v) * (1.0 - 0.5 * ev) * y[1];
  };
  const auto tol = apex_tolerances(opts);
  auto bwd = make_dopri5<5>(rhs, t0, {-alpha, 0.0, 0.0, 0.0, 0.0}, tol);
  bwd.advance_to(sol.t.front());
  auto fwd = make_dopri5<5>(rhs, t0, {-alpha, 0.0, 0.0, 0.0, 0.0}, tol);
  fwd.advance_to(sol.t.back());
  EnergyIdentity out;
  const double k = -fwd.y()[1];
  const double N = p.N;
  out.lhs = 0.5 * (k * k - 4.0 * N * N);
  out.term1 = fwd.y()[2] - bwd.y()[2];
  out.term2 = fwd.y()[3] - bwd.y()[3];
  out.term3 = fwd.y()[4] - bwd.y()[4];
  out.relative_residual = std::abs(out.lhs - (out.term1 + out.term2 + out.term3)) / std::abs(out.lhs);
  return out;
}

double energy_identity_residual(const RadialSolution& sol, const ModelParams& p) {
  return energy_identity(sol, p).relative_residual;
}

NonTopologicalResult solve_nontopological(double alpha, const ModelParams& p,
                                          const ShootOptions& opts) {
  NonTopologicalResult out;
  out.record = shoot_t0(alpha, p, opts);
  out.solution = integrate_from_apex(out.record.t0, alpha, p, opts.apex);
  const SlopeChecks chk = slope_checks(-out.solution.v_prime.back(), p);
  out.record.k = chk.k;
  out.record.slope_bound = chk.bound;
  out.record.energy_margin = chk.energy_margin;
  out.record.slope_bound_holds = chk.bound_holds;
  out.record.energy_inequality_holds = chk.energy_holds;
  return out;
}

}  // namespace csh
