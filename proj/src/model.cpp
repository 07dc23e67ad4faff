#include "csh/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "csh/error.hpp"
#include "csh/quadrature.hpp"

namespace csh {

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::TopologicalPlane: return "topological";
    case Regime::NonTopologicalPlane: return "nontopological";
    case Regime::CompactSphere: return "sphere";
  }
  return "unknown";
}

namespace {

void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) {
    throw Error(ErrorKind::ValidationError, std::string(name) + " is not finite");
  }
}

ModelParams validate(ModelParams p) {
  std::ostringstream msg;
  const double aN = p.a * p.N;
  switch (p.regime) {
    case Regime::TopologicalPlane:
      if (std::abs(aN - 1.0) > kRegimeTol) {
        msg << "topological regime needs 4*pi*G*N = 1, got " << aN;
        throw Error(ErrorKind::RegimeMismatch, msg.str());
      }
      break;
    case Regime::NonTopologicalPlane:
      if (!(aN < 1.0)) {
        msg << "non-topological regime needs 4*pi*G*N < 1, got " << aN;
        throw Error(ErrorKind::RegimeMismatch, msg.str());
      }
      break;
    case Regime::CompactSphere:
      if (std::abs(aN - 2.0) > 2.0 * kRegimeTol) {
        msg << "sphere regime needs 4*pi*G*N = 2, got " << aN;
        throw Error(ErrorKind::RegimeMismatch, msg.str());
      }
      if (p.N < 3) {
        msg << "sphere regime needs N >= 3, got N = " << p.N;
        throw Error(ErrorKind::RegimeMismatch, msg.str());
      }
      break;
  }
  // Geodesic completeness only constrains the planar metric.
  if (p.regime != Regime::CompactSphere && p.N > 1.0 / p.a * (1.0 + kRegimeTol)) {
    msg << "N = " << p.N << " exceeds 1/(4 pi G) = " << 1.0 / p.a;
    throw Error(ErrorKind::CompletenessViolation, msg.str());
  }
  return p;
}

}  // namespace

ModelParams make_params(int N, double G, double kappa, double lambda, Regime regime) {
  require_finite(G, "G");
  require_finite(kappa, "kappa");
  require_finite(lambda, "lambda");
  if (N < 1) throw Error(ErrorKind::ValidationError, "N must be a positive integer");
  if (!(G > 0.0)) throw Error(ErrorKind::ValidationError, "G must be positive");
  if (kappa == 0.0) throw Error(ErrorKind::ValidationError, "kappa must be nonzero");
  if (!(lambda > 0.0)) throw Error(ErrorKind::ValidationError, "lambda must be positive");
  ModelParams p;
  p.N = N;
  p.G = G;
  p.a = 4.0 * std::numbers::pi * G;
  p.kappa = kappa;
  p.lambda = lambda;
  p.beta = 4.0 * lambda / (kappa * kappa);
  p.regime = regime;
  return validate(p);
}

ModelParams make_params_from_a(int N, double a, double kappa, double lambda, Regime regime) {
  ModelParams p = make_params(N, a / (4.0 * std::numbers::pi), kappa, lambda, regime);
  // Keep a bit-exact when the caller supplied it.
  p.a = a;
  return validate(p);
}

ModelParams with_topological_beta(ModelParams p) {
  return with_beta(p, beta_topological(p.N, p.a));
}

ModelParams with_beta(ModelParams p, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorKind::ValidationError, "beta must be positive");
  p.beta = beta;
  p.lambda = beta * p.kappa * p.kappa / 4.0;
  return p;
}

double nonlinearity_f(double v, double a) {
  const double ev = std::exp(v);
  return std::exp(a * (v - ev) + v) * std::expm1(v);
}

double nonlinearity_fprime(double v, double a) {
  const double ev = std::exp(v);
  const double om = -std::expm1(v);
  return std::exp(a * (v - ev) + v) * (2.0 * ev - 1.0 - a * om * om);
}

Maximizer fprime_sup(double a) {
  // f' vanishes super-exponentially for v > 5 and like e^{(1+a)v} for v -> -inf.
  constexpr double lo = -40.0;
  constexpr double hi = 6.0;
  constexpr int n = 4600;
  double best_v = lo;
  double best = -std::numeric_limits<double>::infinity();
  const double h = (hi - lo) / n;
  for (int i = 0; i <= n; ++i) {
    const double v = lo + i * h;
    const double fv = nonlinearity_fprime(v, a);
    if (fv > best) {
      best = fv;
      best_v = v;
    }
  }
  // Golden section on the bracketing cell pair.
  double x0 = best_v - h;
  double x3 = best_v + h;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = x3 - g * (x3 - x0);
  double x2 = x0 + g * (x3 - x0);
  double f1 = nonlinearity_fprime(x1, a);
  double f2 = nonlinearity_fprime(x2, a);
  for (int it = 0; it < 200 && x3 - x0 > 1e-14 * (1.0 + std::abs(best_v)); ++it) {
    if (f1 > f2) {
      x3 = x2;
      x2 = x1;
      f2 = f1;
      x1 = x3 - g * (x3 - x0);
      f1 = nonlinearity_fprime(x1, a);
    } else {
      x0 = x1;
      x1 = x2;
      f1 = f2;
      x2 = x0 + g * (x3 - x0);
      f2 = nonlinearity_fprime(x2, a);
    }
  }
  const double xm = 0.5 * (x0 + x3);
  const double fm = nonlinearity_fprime(xm, a);
  if (fm >= best) return {xm, fm};
  return {best_v, best};
}

double potential_density(double s, double a) {
  if (s <= 0.0) return 0.0;
  return std::exp(a * (std::log(s) - s)) * (1.0 - s);
}

namespace {

double lower_integral(double s_hi, double a) {
  // int_0^{s_hi} s^a e^{-as} (1-s) ds
  QuadratureOptions opts;
  opts.abs_tol = 1e-300;
  opts.rel_tol = 1e-14;
  opts.max_intervals = 4000;
  return integrate_gk([a](double s) { return potential_density(s, a); }, 0.0, s_hi, opts).value;
}

double upper_integral(double s_lo, double a) {
  // int_{s_lo}^1 s^a e^{-as} (1-s) ds
  QuadratureOptions opts;
  opts.abs_tol = 1e-300;
  opts.rel_tol = 1e-14;
  opts.max_intervals = 4000;
  return integrate_gk([a](double s) { return potential_density(s, a); }, s_lo, 1.0, opts).value;
}

}  // namespace

double potential_H(double v, const ModelParams& p) {
  if (v > 0.0) throw Error(ErrorKind::OutOfDomain, "potential_H is defined for v <= 0");
  return p.beta * lower_integral(std::exp(v), p.a);
}

double topological_denominator(double a) { return lower_integral(1.0, a); }

double beta_topological(int N, double a) {
  return 2.0 * N * N / topological_denominator(a);
}

double first_integral_F(double v, const ModelParams& p) { return FirstIntegral(p)(v); }

FirstIntegral::FirstIntegral(const ModelParams& p) : p_(p) {
  const double four_n2 = 4.0 * p.N * p.N;
  mismatch_ = four_n2 - 2.0 * p.beta * topological_denominator(p.a);
  // beta = beta_topological reproduces 4N^2 only up to rounding; treat that as exact.
  if (std::abs(mismatch_) < 1e-12 * four_n2) mismatch_ = 0.0;
}

double FirstIntegral::operator()(double v) const {
  if (v > 0.0) throw Error(ErrorKind::OutOfDomain, "first_integral_F is defined for v <= 0");
  // 4N^2 - 2H(v) = (4N^2 - 2 beta D) + 2 beta int_{e^v}^1; the upper tail keeps
  // relative precision as v -> 0-.
  if (v < -1.0) return 4.0 * p_.N * p_.N - 2.0 * potential_H(v, p_);
  return mismatch_ + 2.0 * p_.beta * upper_integral(std::exp(v), p_.a);
}

PotentialTable::PotentialTable(const ModelParams& p, double v_lo, int nodes)
    : a_(p.a), beta_(p.beta), v_lo_(v_lo), step_(-v_lo / (nodes - 1)) {
  grid_.resize(nodes);
  values_.resize(nodes);
  slopes_.resize(nodes);
  // March the integral node to node instead of restarting from s = 0.
  double acc = lower_integral(std::exp(v_lo), a_);
  QuadratureOptions opts;
  opts.abs_tol = 1e-300;
  opts.rel_tol = 1e-15;
  for (int i = 0; i < nodes; ++i) {
    const double v = (i == nodes - 1) ? 0.0 : v_lo + i * step_;
    if (i > 0) {
      acc += integrate_gk([this](double s) { return potential_density(s, a_); },
                          std::exp(grid_[i - 1]), std::exp(v), opts)
                 .value;
    }
    grid_[i] = v;
    values_[i] = beta_ * acc;
    slopes_[i] = -beta_ * nonlinearity_f(v, a_);
  }
}

double PotentialTable::operator()(double v) const {
  if (v > 0.0) throw Error(ErrorKind::OutOfDomain, "PotentialTable is defined for v <= 0");
  if (v < v_lo_) return beta_ * std::exp((1.0 + a_) * v) / (1.0 + a_);
  const auto n = grid_.size();
  auto i = static_cast<std::size_t>((v - v_lo_) / step_);
  if (i >= n - 1) i = n - 2;
  const double h = grid_[i + 1] - grid_[i];
  const double x = (v - grid_[i]) / h;
  const double x2 = x * x;
  const double x3 = x2 * x;
  const double h00 = 2 * x3 - 3 * x2 + 1;
  const double h10 = x3 - 2 * x2 + x;
  const double h01 = -2 * x3 + 3 * x2;
  const double h11 = x3 - x2;
  return h00 * values_[i] + h10 * h * slopes_[i] + h01 * values_[i + 1] + h11 * h * slopes_[i + 1];
}

}  // namespace csh
