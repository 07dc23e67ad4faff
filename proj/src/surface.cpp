#include "csh/surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "csh/error.hpp"
#include "csh/linear.hpp"

namespace csh {

namespace {

constexpr double kPi = std::numbers::pi;

double nonsingular_max(std::span<const double> x, const std::vector<char>& singular) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!singular[i]) m = std::max(m, x[i]);
  }
  return m;
}

std::vector<char> singular_mask(const SphereMesh& mesh, std::span<const StringPoint> points) {
  std::vector<char> s(mesh.vertex_count(), 0);
  for (const auto& p : points) s[p.vertex] = 1;
  return s;
}

double min_separation(const SphereMesh& mesh, std::span<const StringPoint> points) {
  double sep = kPi;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      sep = std::min(sep, geodesic_distance(mesh.vertices[points[i].vertex],
                                            mesh.vertices[points[j].vertex]));
    }
  }
  return sep;
}

// beta * P * e^{a(u - e^u)} e^u (e^u - 1)
double source_term(double beta, double a, double weight, double u) {
  return beta * weight * std::exp(a * (u - std::exp(u)) + u) * std::expm1(u);
}

}  // namespace

double density_constant(const SphereMesh& mesh, int N) { return 4.0 * kPi * N / mesh.total_area; }

int total_multiplicity(std::span<const StringPoint> points) {
  int n = 0;
  for (const auto& p : points) n += p.multiplicity;
  return n;
}

Background background_v0(const SphereMesh& mesh, std::span<const StringPoint> points,
                         double v0_max, const VectorOps& ops) {
  const int n = mesh.vertex_count();
  const int N = total_multiplicity(points);
  const double dens = density_constant(mesh, N);
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) b[i] = dens * mesh.areas[i];
  for (const auto& p : points) b[p.vertex] -= 4.0 * kPi * p.multiplicity;
  Background bg;
  bg.v0.assign(n, 0.0);
  PcgOptions po;
  po.rel_tol = 1e-12;
  po.project_constants = true;
  po.ops = ops;
  bg.pcg_iterations = pcg(mesh.stiffness, b, bg.v0, po).iterations;
  bg.singular = singular_mask(mesh, points);
  const double top = *std::max_element(bg.v0.begin(), bg.v0.end());
  bg.gauge = v0_max - top;
  for (double& x : bg.v0) x += bg.gauge;
  return bg;
}

std::vector<double> green_closed_form(const SphereMesh& mesh, std::span<const StringPoint> points) {
  std::vector<double> g(mesh.vertex_count(), 0.0);
  for (int i = 0; i < mesh.vertex_count(); ++i) {
    for (const auto& p : points) {
      double d = chordal_distance(mesh.vertices[i], mesh.vertices[p.vertex]);
      if (i == p.vertex) d = 0.5 * mesh.vertex_spacing[i];
      g[i] += p.multiplicity * std::log(d * d);
    }
  }
  return g;
}

double cap_profile(double d, double sigma) {
  if (d <= sigma) return 1.0;
  if (d >= 2.0 * sigma) return 0.0;
  const double s = (d - sigma) / sigma;
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

Cutoff cutoff_and_bump(const SphereMesh& mesh, std::span<const StringPoint> points, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorKind::ValidationError, "sigma must be positive");
  const double sep = min_separation(mesh, points);
  if (!(4.0 * sigma < sep)) {
    std::ostringstream msg;
    msg << "caps of radius 2*sigma = " << 2.0 * sigma << " overlap (separation " << sep << ")";
    throw Error(ErrorKind::SigmaTooLarge, msg.str());
  }
  const int n = mesh.vertex_count();
  const int N = total_multiplicity(points);
  Cutoff c;
  c.sigma = sigma;
  c.rho.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (const auto& p : points) {
      const double d = geodesic_distance(mesh.vertices[i], mesh.vertices[p.vertex]);
      c.rho[i] = std::max(c.rho[i], cap_profile(d, sigma));
    }
  }
  c.f_sigma = c.rho;
  double integral = 0.0;
  for (int i = 0; i < n; ++i) integral += mesh.areas[i] * c.f_sigma[i];
  const double S = mesh.total_area;
  c.C_sigma = 8.0 * kPi * N / (S * S) * integral;
  const double dens = density_constant(mesh, N);
  c.gap = 2.0 * dens - c.C_sigma - dens;
  if (!(c.gap > 0.0)) {
    std::ostringstream msg;
    msg << "C(sigma) = " << c.C_sigma << " leaves no room below 4 pi N/|S| = " << dens;
    throw Error(ErrorKind::SigmaTooLarge, msg.str());
  }
  return c;
}

double default_sigma(const SphereMesh& mesh, std::span<const StringPoint> points) {
  const double sep = min_separation(mesh, points);
  double hi = 0.25 * sep * (1.0 - 1e-9);
  auto passes = [&](double s) {
    try {
      cutoff_and_bump(mesh, points, s);
      return true;
    } catch (const Error&) {
      return false;
    }
  };
  if (!passes(hi)) {
    double lo = 0.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (passes(mid) ? lo : hi) = mid;
    }
    hi = lo;
  }
  if (!(hi > 0.0)) throw Error(ErrorKind::SigmaTooLarge, "no admissible sigma");
  return 0.5 * hi;
}

std::vector<double> singular_weight(const SphereMesh& mesh, std::span<const StringPoint> points,
                                    std::span<const double> rho, double a, double delta) {
  const int n = mesh.vertex_count();
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    double log_sum = 0.0;
    for (const auto& p : points) {
      double d = chordal_distance(mesh.vertices[i], mesh.vertices[p.vertex]);
      if (i == p.vertex) d = 0.5 * mesh.vertex_spacing[i];
      log_sum += p.multiplicity * std::log(d * d + delta * rho[i]);
    }
    w[i] = std::exp(-a * log_sum);
  }
  return w;
}

std::vector<double> subsolution_slack(const SphereMesh& mesh, std::span<const StringPoint> points,
                                      const Cutoff& cutoff, const Background& bg,
                                      std::span<const double> w, const ModelParams& params,
                                      double delta, const VectorOps& ops) {
  const int n = mesh.vertex_count();
  const double dens = density_constant(mesh, total_multiplicity(points));
  std::vector<double> lap(n);
  apply_laplacian(mesh, w, lap, ops);
  const auto P = singular_weight(mesh, points, cutoff.rho, params.a, delta);
  std::vector<double> slack(n);
  for (int i = 0; i < n; ++i) {
    slack[i] = lap[i] - (source_term(params.beta, params.a, P[i], w[i] + bg.v0[i]) + dens);
  }
  return slack;
}

Subsolution subsolution_w_minus(const SphereMesh& mesh, std::span<const StringPoint> points,
                                const Cutoff& cutoff, const Background& bg,
                                const ModelParams& params, const SubsolutionOptions& opts) {
  const int n = mesh.vertex_count();
  const double dens = density_constant(mesh, total_multiplicity(points));
  std::vector<double> b(n);
  for (int i = 0; i < n; ++i) {
    b[i] = -mesh.areas[i] * (2.0 * dens * cutoff.f_sigma[i] - cutoff.C_sigma);
  }
  Subsolution sub;
  sub.w_minus.assign(n, 0.0);
  PcgOptions po;
  po.rel_tol = opts.pcg_tol;
  po.project_constants = true;
  po.ops = opts.ops;
  sub.pcg_iterations = pcg(mesh.stiffness, b, sub.w_minus, po).iterations;

  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += mesh.areas[i] * sub.w_minus[i];
  mean /= mesh.total_area;
  std::vector<double> u(n);
  for (int i = 0; i < n; ++i) u[i] = sub.w_minus[i] - mean + bg.v0[i];
  sub.shift = -opts.margin - nonsingular_max(u, bg.singular) - mean;
  for (double& x : sub.w_minus) x += sub.shift;
  for (int i = 0; i < n; ++i) u[i] = sub.w_minus[i] + bg.v0[i];
  sub.max_exponent = nonsingular_max(u, bg.singular);

  ModelParams p = params;
  for (;;) {
    double slack_out = std::numeric_limits<double>::infinity();
    double slack_in = std::numeric_limits<double>::infinity();
    for (double delta : {0.0, 1.0}) {
      const auto s = subsolution_slack(mesh, points, cutoff, bg, sub.w_minus, p, delta, opts.ops);
      for (int i = 0; i < n; ++i) {
        if (cutoff.f_sigma[i] < 1.0) {
          slack_out = std::min(slack_out, s[i]);
        }
      }
    }
    std::vector<double> lap(n);
    apply_laplacian(mesh, sub.w_minus, lap, opts.ops);
    for (int i = 0; i < n; ++i) {
      if (cutoff.f_sigma[i] >= 1.0) slack_in = std::min(slack_in, lap[i] - dens);
    }
    if (slack_out > 0.0) {
      sub.beta_min = p.beta;
      sub.slack_outside = slack_out;
      sub.slack_inside = slack_in;
      return sub;
    }
    p.beta *= 2.0;
    ++sub.doublings;
    if (p.beta > opts.beta_cap) {
      std::ostringstream msg;
      msg << "subsolution inequality still fails at beta = " << p.beta;
      throw Error(ErrorKind::SubsolutionUnreachable, msg.str());
    }
  }
}

std::vector<double> supersolution_phi1(const Background& bg, std::span<const double> w_minus) {
  std::vector<double> phi1(bg.v0.size());
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < phi1.size(); ++i) {
    phi1[i] = -bg.v0[i];
    if (!bg.singular[i]) gap = std::min(gap, phi1[i] - w_minus[i]);
  }
  if (!(gap > 0.0)) {
    std::ostringstream msg;
    msg << "phi_1 - w_minus reaches " << gap << " at a non-singular vertex";
    throw Error(ErrorKind::OrderingViolation, msg.str());
  }
  return phi1;
}

double c_delta(const SphereMesh& mesh, std::span<const StringPoint> points,
               std::span<const double> rho, const ModelParams& params, double delta) {
  const auto P = singular_weight(mesh, points, rho, params.a, delta);
  const auto singular = singular_mask(mesh, points);
  double pmax = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    if (delta == 0.0 && singular[i]) continue;
    pmax = std::max(pmax, P[i]);
  }
  return 1.0 + params.beta * pmax * fprime_sup(params.a).value;
}

std::vector<double> default_delta_schedule() {
  std::vector<double> s;
  for (int k = 0; k <= 30; ++k) s.push_back(std::ldexp(1.0, -k));
  return s;
}

SurfaceProblem prepare_surface_problem(const SphereMesh& mesh, std::span<const PointSpec> points,
                                       const ModelParams& params, const SurfaceOptions& opts) {
  if (params.regime != Regime::CompactSphere) {
    throw Error(ErrorKind::RegimeMismatch, "the surface solver needs the sphere regime");
  }
  SurfaceProblem prob;
  prob.mesh = &mesh;
  prob.points = snap_points(mesh, points);
  const int N = total_multiplicity(prob.points);
  if (N != params.N) {
    std::ostringstream msg;
    msg << "string points carry total multiplicity " << N << " but N = " << params.N;
    throw Error(ErrorKind::ValidationError, msg.str());
  }
  prob.background = background_v0(mesh, prob.points, opts.v0_max, opts.ops);
  const double sigma = opts.sigma > 0.0 ? opts.sigma : default_sigma(mesh, prob.points);
  prob.cutoff = cutoff_and_bump(mesh, prob.points, sigma);
  SubsolutionOptions so;
  so.margin = opts.subsolution_margin;
  so.ops = opts.ops;
  prob.subsolution =
      subsolution_w_minus(mesh, prob.points, prob.cutoff, prob.background, params, so);
  prob.params = with_beta(params, prob.subsolution.beta_min);
  prob.phi1 = supersolution_phi1(prob.background, prob.subsolution.w_minus);
  prob.fprime_max = fprime_sup(params.a).value;
  return prob;
}

std::vector<double> surface_residual(const SurfaceProblem& prob, std::span<const double> phi,
                                     double delta, const VectorOps& ops) {
  const SphereMesh& mesh = *prob.mesh;
  const int n = mesh.vertex_count();
  const double dens = density_constant(mesh, prob.params.N);
  const auto P = singular_weight(mesh, prob.points, prob.cutoff.rho, prob.params.a, delta);
  std::vector<double> r(n);
  apply_laplacian(mesh, phi, r, ops);
  for (int i = 0; i < n; ++i) {
    r[i] -= source_term(prob.params.beta, prob.params.a, P[i], phi[i] + prob.background.v0[i]) +
            dens;
  }
  return r;
}

double area_rms(const SurfaceProblem& prob, std::span<const double> r) {
  double s = 0.0, area = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (prob.background.singular[i]) continue;
    s += prob.mesh->areas[i] * r[i] * r[i];
    area += prob.mesh->areas[i];
  }
  return std::sqrt(s / area);
}

MonotoneResult monotone_iterate(const SurfaceProblem& prob, double delta,
                                std::span<const double> start, IterDirection direction,
                                const SurfaceOptions& opts) {
  const SphereMesh& mesh = *prob.mesh;
  const int n = mesh.vertex_count();
  const auto& singular = prob.background.singular;
  const auto& w = prob.subsolution.w_minus;
  const double dens = density_constant(mesh, prob.params.N);
  const auto P = singular_weight(mesh, prob.points, prob.cutoff.rho, prob.params.a, delta);
  const double sign = direction == IterDirection::Decreasing ? 1.0 : -1.0;
  double C = c_delta(mesh, prob.points, prob.cutoff.rho, prob.params, delta);

  PcgOptions po;
  po.rel_tol = opts.pcg_tol;
  po.ops = opts.ops;
  std::vector<double> b(n);

  for (int attempt = 0;; ++attempt) {
    MonotoneResult res;
    res.direction = direction;
    res.restarts = attempt;
    res.C_used = C;
    res.min_gap_floor = std::numeric_limits<double>::infinity();
    res.min_gap_ceiling = std::numeric_limits<double>::infinity();
    const CsrMatrix A = add_diagonal(mesh.stiffness, mesh.areas, C);
    std::vector<double> prev(start.begin(), start.end());
    std::vector<double> next = prev;
    bool breach = false;
    for (int it = 1;; ++it) {
      if (it > opts.max_iterations) {
        std::ostringstream msg;
        msg << "monotone scheme not converged after " << opts.max_iterations
            << " iterations (last change " << res.last_change << ")";
        throw Error(ErrorKind::LinearSolveFailure, msg.str());
      }
      if (opts.ops.exec == Exec::Parallel) {
        kernels::scheme_rhs_parallel(prob.params.beta, prob.params.a, C, dens, prev,
                                     prob.background.v0, P, mesh.areas, b);
      } else {
        kernels::scheme_rhs_serial(prob.params.beta, prob.params.a, C, dens, prev,
                                   prob.background.v0, P, mesh.areas, b);
      }
      res.pcg_iterations += pcg(A, b, next, po).iterations;
      double change = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = next[i] - prev[i];
        change = std::max(change, std::abs(d));
        if (singular[i]) continue;
        res.max_wrong_way = std::max(res.max_wrong_way, sign * d);
        res.min_gap_floor = std::min(res.min_gap_floor, next[i] - w[i]);
        res.min_gap_ceiling = std::min(res.min_gap_ceiling, prob.phi1[i] - next[i]);
      }
      res.iterations = it;
      res.last_change = change;
      res.change_history.push_back(change);
      if (res.max_wrong_way > opts.breach_tol) {
        breach = true;
        break;
      }
      prev.swap(next);
      next = prev;
      if (change < opts.iter_tol) break;
    }
    if (breach) {
      if (attempt >= opts.max_c_doublings) {
        std::ostringstream msg;
        msg << "iterate moved " << res.max_wrong_way << " against the monotone direction with C = "
            << C;
        throw Error(ErrorKind::MonotonicityBreach, msg.str());
      }
      C *= 2.0;
      continue;
    }
    res.phi = std::move(prev);
    const auto r = surface_residual(prob, res.phi, delta, opts.ops);
    for (int i = 0; i < n; ++i) {
      if (!singular[i]) res.residual_sup = std::max(res.residual_sup, std::abs(r[i]));
    }
    return res;
  }
}

SurfaceSolution delta_continuation(const SurfaceProblem& prob, std::span<const double> schedule,
                                   const SurfaceOptions& opts) {
  if (schedule.empty()) throw Error(ErrorKind::ValidationError, "empty delta schedule");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] > 0.0) || (k > 0 && !(schedule[k] < schedule[k - 1]))) {
      throw Error(ErrorKind::ValidationError, "delta schedule must be positive and decreasing");
    }
  }
  const auto& singular = prob.background.singular;
  SurfaceSolution sol;
  sol.v0 = prob.background.v0;
  sol.w_minus = prob.subsolution.w_minus;
  sol.phi1 = prob.phi1;
  sol.beta_used = prob.params.beta;
  sol.sigma = prob.cutoff.sigma;
  sol.ordering_tol = opts.ordering_tol;
  for (std::size_t i = 0; i < sol.phi1.size(); ++i) {
    if (singular[i]) continue;
    sol.uniform_bound =
        std::max({sol.uniform_bound, std::abs(sol.phi1[i]), std::abs(sol.w_minus[i])});
  }

  std::vector<double> current = prob.phi1;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const IterDirection dir = k == 0 ? IterDirection::Decreasing : IterDirection::Increasing;
    MonotoneResult mr = monotone_iterate(prob, schedule[k], current, dir, opts);
    double diff = 0.0;
    if (k > 0) {
      for (std::size_t i = 0; i < current.size(); ++i) {
        diff = std::max(diff, std::abs(mr.phi[i] - current[i]));
      }
    }
    for (std::size_t i = 0; i < mr.phi.size(); ++i) {
      if (!singular[i]) sol.max_abs_phi = std::max(sol.max_abs_phi, std::abs(mr.phi[i]));
    }
    sol.delta_path.push_back({schedule[k], dir, mr.iterations, mr.restarts, mr.C_used, diff,
                              mr.residual_sup, mr.min_gap_floor, mr.min_gap_ceiling,
                              mr.max_wrong_way});
    current = std::move(mr.phi);
  }
  sol.phi = std::move(current);

  // Cauchy check over the last four level-to-level differences.
  const std::size_t L = sol.delta_path.size();
  sol.cauchy_decreasing = true;
  if (L >= 3) {
    const std::size_t first = L >= 5 ? L - 4 : 1;
    for (std::size_t k = first + 1; k < L; ++k) {
      if (!(sol.delta_path[k].sup_change < sol.delta_path[k - 1].sup_change)) {
        sol.cauchy_decreasing = false;
      }
    }
  }

  const auto r = surface_residual(prob, sol.phi, 0.0, opts.ops);
  sol.residual_l2 = area_rms(prob, r);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!singular[i]) sol.residual_sup = std::max(sol.residual_sup, std::abs(r[i]));
  }
  if (!sol.cauchy_decreasing) {
    std::ostringstream msg;
    msg << "level-to-level differences stopped decreasing over the last levels";
    throw Error(ErrorKind::ContinuationDiverged, msg.str());
  }
  return sol;
}

}  // namespace csh
