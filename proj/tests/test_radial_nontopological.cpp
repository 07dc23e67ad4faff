#include <array>
#include <cmath>

#include <doctest.h>

#include "csh/error.hpp"
#include "csh/radial.hpp"

using namespace csh;

namespace {

ModelParams benchmark() {
  return make_params_from_a(1, 0.5, 1.0, 1.0, Regime::NonTopologicalPlane);
}

const NonTopologicalResult& benchmark_result() {
  static const NonTopologicalResult res = solve_nontopological(1.0, benchmark());
  return res;
}

// Plain fixed-step RK4 for v'' = beta e^{ct} f(v), started at the apex.
// Returns (v'(t0 - back), v'(t0 + fwd)).
std::array<double, 2> rk4_slopes(double t0, double alpha, const ModelParams& p, double back,
                                 double fwd, double h) {
  const double c = 2.0 - 2.0 * p.a * p.N;
  auto rhs = [&](double t, double v) {
    const double ev = std::exp(v);
    return p.beta * std::exp(c * t + p.a * (v - ev) + v) * (ev - 1.0);
  };
  std::array<double, 2> out{};
  for (int dir : {-1, 1}) {
    const double span = dir < 0 ? back : fwd;
    const int steps = static_cast<int>(std::round(span / h));
    const double s = dir * span / steps;
    double t = t0, v = -alpha, w = 0.0;
    for (int i = 0; i < steps; ++i) {
      const double k1v = w, k1w = rhs(t, v);
      const double k2v = w + 0.5 * s * k1w, k2w = rhs(t + 0.5 * s, v + 0.5 * s * k1v);
      const double k3v = w + 0.5 * s * k2w, k3w = rhs(t + 0.5 * s, v + 0.5 * s * k2v);
      const double k4v = w + s * k3w, k4w = rhs(t + s, v + s * k3v);
      v += s / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
      w += s / 6.0 * (k1w + 2 * k2w + 2 * k3w + k4w);
      t += s;
    }
    out[dir < 0 ? 0 : 1] = w;
  }
  return out;
}

bool sandwich_holds(const RadialSolution& sol, double t0, double alpha, const ModelParams& p,
                    double tol) {
  const double K = slope_envelope_K(t0, alpha, p);
  bool ok = true;
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    if (sol.t[i] >= t0) continue;
    const double v = sol.v[i];
    ok = ok && v < -alpha + tol && v > -alpha - K * (t0 - sol.t[i]) - tol;
  }
  return ok;
}

}  // namespace

TEST_CASE("alpha threshold closed form") {
  CHECK(alpha_threshold(1.0) == doctest::Approx(std::log(1.0 / (2.0 - std::sqrt(2.0)))));
  CHECK(alpha_threshold(1.0) == doctest::Approx(0.5347999967).epsilon(1e-9));
  CHECK_THROWS_AS(alpha_threshold(0.0), Error);
}

TEST_CASE("f decreases below minus the threshold") {
  for (double a : {0.25, 0.5, 1.0}) {
    const double th = alpha_threshold(a);
    CHECK(nonlinearity_f(-th - 0.1, a) < nonlinearity_f(-th - 0.2, a));
    CHECK(nonlinearity_fprime(-th - 1e-3, a) < 0.0);
    CHECK(nonlinearity_fprime(-th + 1e-3, a) > 0.0);
  }
}

TEST_CASE("benchmark shooting converges") {
  const auto& res = benchmark_result();
  const auto& rec = res.record;
  CHECK(std::abs(rec.eta - 2.0) < 1e-8);
  CHECK(rec.proven_regime);
  CHECK(rec.t0_low <= rec.t0);
  CHECK(rec.t0 <= rec.t0_high);
  CHECK(rec.t0_low_initial <= rec.t0_low);
  CHECK(rec.t0_high <= rec.t0_high_initial);
  CHECK_FALSE(rec.iterations.empty());
  // frozen from this solver at default tolerances
  CHECK(rec.t0 == doctest::Approx(2.16785988212).epsilon(1e-9));
  CHECK(rec.k == doctest::Approx(3.615384316).epsilon(1e-8));
}

TEST_CASE("independent RK4 reproduces eta and k at the converged apex") {
  const auto& rec = benchmark_result().record;
  const auto p = benchmark();
  const auto slopes = rk4_slopes(rec.t0, 1.0, p, 40.0, 60.0, 2e-3);
  CHECK(slopes[0] == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(-slopes[1] == doctest::Approx(rec.k).epsilon(1e-7));
}

TEST_CASE("apex trajectory") {
  const auto& sol = benchmark_result().solution;
  const auto& rec = benchmark_result().record;
  double vmax = -1e300;
  for (double v : sol.v) vmax = std::max(vmax, v);
  CHECK(vmax <= -1.0 + 1e-12);
  int sign_changes = 0;
  for (std::size_t i = 0; i < sol.v.size(); ++i) {
    CHECK(sol.v[i] < 0.0);
    if (i > 0 && (sol.v_prime[i - 1] > 0.0) != (sol.v_prime[i] > 0.0)) ++sign_changes;
  }
  CHECK(sign_changes == 1);
  CHECK(sol.asymptotics.apex_t0 == rec.t0);
  CHECK(sol.v_prime.front() == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(-sol.v_prime.back() == doctest::Approx(rec.k).epsilon(1e-9));
  CHECK(sol.diagnostics.tail_bound_left < 1e-10);
  CHECK(sol.diagnostics.tail_bound_right < 1e-10);
}

TEST_CASE("energy identity closes") {
  const auto& res = benchmark_result();
  const auto ei = energy_identity(res.solution, benchmark());
  CHECK(ei.relative_residual < 1e-6);
  CHECK(ei.lhs == doctest::Approx((res.record.k * res.record.k - 4.0) / 2.0));
  CHECK(ei.term1 == doctest::Approx(1.0 * (res.record.k + 2.0)).epsilon(1e-6));
  CHECK(ei.term2 > 0.0);
}

TEST_CASE("halving tolerances moves t0 by less than 1e-6 and k by less than 1e-5") {
  ShootOptions tight;
  tight.tol = 0.5e-8;
  tight.apex.step_tol = 0.5e-12;
  tight.apex.tail_tol = 0.5e-10;
  const auto rec = shoot_t0(1.0, benchmark(), tight);
  CHECK(std::abs(rec.t0 - benchmark_result().record.t0) < 1e-6);
  const auto sol = solve_nontopological(1.0, benchmark(), tight);
  CHECK(std::abs(sol.record.k - benchmark_result().record.k) < 1e-5);
}

TEST_CASE("slope inequalities are recorded on the benchmark") {
  const auto& rec = benchmark_result().record;
  const auto p = benchmark();
  CHECK(rec.slope_bound == doctest::Approx(4.0 + 2.0 - 4.0 * 0.5));
  const SlopeChecks sc = slope_checks(rec.k, p);
  CHECK(sc.bound_holds == rec.slope_bound_holds);
  CHECK(sc.energy_holds == rec.energy_inequality_holds);
  CHECK(sc.energy_margin ==
        doctest::Approx((rec.k * rec.k - 4.0) / 2.0 - (2.0 - 2.0 * 0.5) * (rec.k + 2.0)));
  // the computed slope falls short of the bound; tail_slope_k refuses it
  CHECK_FALSE(rec.slope_bound_holds);
  try {
    tail_slope_k(benchmark_result().solution, p);
    FAIL("expected SlopeBoundViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SlopeBoundViolated);
  }
  CHECK(slope_checks(5.0, p).bound_holds);
}

TEST_CASE("lower bounds on eta are ordered") {
  const auto p = benchmark();
  for (double t0 : {1.0, 2.0, 3.0}) {
    const double eta = eta_of(t0, 1.0, p).eta;
    CHECK(eta_lower_bound(t0, 1.0, p) <= eta_lower_bound_sharp(t0, 1.0, p) + 1e-15);
    CHECK(eta_lower_bound_sharp(t0, 1.0, p) <= eta);
  }
}

TEST_CASE("a priori sandwich holds at every backward node") {
  const auto p = benchmark();
  const auto& res = benchmark_result();
  CHECK(sandwich_holds(res.solution, res.record.t0, 1.0, p, 1e-9));
  for (double alpha : {2.0, 4.0}) {
    const auto r = solve_nontopological(alpha, p);
    CHECK(sandwich_holds(r.solution, r.record.t0, alpha, p, 1e-9));
  }
}

TEST_CASE("alpha below the threshold") {
  const auto p = benchmark();
  const double below = alpha_threshold(p.a) - 0.1;
  try {
    shoot_t0(below, p);
    FAIL("expected AlphaBelowThreshold");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AlphaBelowThreshold);
  }
  ShootOptions opts;
  opts.allow_unproven_alpha = true;
  const auto rec = shoot_t0(below, p, opts);
  CHECK_FALSE(rec.proven_regime);
  CHECK(std::abs(rec.eta - 2.0) < 1e-8);
}

TEST_CASE("regime is checked") {
  const auto t = with_topological_beta(make_params_from_a(1, 1.0, 1.0, 1.0, Regime::TopologicalPlane));
  CHECK_THROWS_AS(shoot_t0(1.0, t), Error);
}
