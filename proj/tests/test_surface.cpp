#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "csh/error.hpp"
#include "csh/model.hpp"
#include "csh/surface.hpp"

using namespace csh;

namespace {

constexpr double kPi = std::numbers::pi;

ModelParams sphere_params() { return make_params_from_a(4, 0.5, 1.0, 1.0, Regime::CompactSphere); }

const SphereMesh& mesh3() {
  static const SphereMesh m = build_icosphere(3);
  return m;
}

const SurfaceProblem& problem3() {
  static const SurfaceProblem p = prepare_surface_problem(mesh3(), tetrahedral_points(), sphere_params());
  return p;
}

}  // namespace

TEST_CASE("density constant and multiplicity") {
  const SphereMesh& m = mesh3();
  CHECK(density_constant(m, 4) == doctest::Approx(16.0 * kPi / m.total_area));
  const std::vector<StringPoint> pts{{0, 2}, {5, 1}};
  CHECK(total_multiplicity(pts) == 3);
}

TEST_CASE("discrete background matches the Green closed form up to a constant") {
  double prev = 1e300;
  for (int level : {3, 4, 5}) {
    const SphereMesh m = build_icosphere(level);
    const auto pts = snap_points(m, tetrahedral_points());
    const Background bg = background_v0(m, pts);
    const auto g = green_closed_form(m, pts);
    double vmax = -1e300;
    std::vector<double> diff;
    for (int i = 0; i < m.vertex_count(); ++i) {
      vmax = std::max(vmax, bg.v0[i]);
      double dmin = 10.0;
      for (const auto& p : pts) dmin = std::min(dmin, geodesic_distance(m.vertices[i], m.vertices[p.vertex]));
      if (dmin > 0.3) diff.push_back(bg.v0[i] - g[i]);
    }
    CHECK(vmax == doctest::Approx(-1.0).epsilon(1e-12));
    const auto [lo, hi] = std::minmax_element(diff.begin(), diff.end());
    const double spread = *hi - *lo;
    CHECK(spread < prev);
    prev = spread;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("north-pole Green function: discrete Laplacian of 2 ln(2 sin(theta/2)) is -1") {
  const SphereMesh m = build_icosphere(5);
  const std::vector<StringPoint> pole{{nearest_vertex(m, {0, 0, 1}), 1}};
  const Vec3 np = m.vertices[pole[0].vertex];
  std::vector<double> g(m.vertex_count()), lg(m.vertex_count());
  for (int i = 0; i < m.vertex_count(); ++i) {
    const double th = geodesic_distance(m.vertices[i], np);
    g[i] = th > 0.0 ? 2.0 * std::log(2.0 * std::sin(0.5 * th)) : 0.0;
  }
  apply_laplacian(m, g, lg);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < m.vertex_count(); ++i) {
    if (geodesic_distance(m.vertices[i], np) < 0.3) continue;
    num += m.areas[i] * (lg[i] + 1.0) * (lg[i] + 1.0);
    den += m.areas[i];
  }
  CHECK(std::sqrt(num / den) < 0.05);

  // the lumped discrete background has Lap v0 = -4 pi/|S| off the pole
  const Background bg = background_v0(m, pole);
  apply_laplacian(m, bg.v0, lg);
  const double dens = density_constant(m, 1);
  CHECK(dens == doctest::Approx(1.0).epsilon(1e-3));
  for (int i = 0; i < m.vertex_count(); ++i) {
    if (i != pole[0].vertex) CHECK(lg[i] == doctest::Approx(-dens).epsilon(1e-8));
  }
}

TEST_CASE("cap profile") {
  CHECK(cap_profile(0.0, 0.1) == 1.0);
  CHECK(cap_profile(0.1, 0.1) == 1.0);
  CHECK(cap_profile(0.15, 0.1) == doctest::Approx(0.5));
  CHECK(cap_profile(0.2, 0.1) == 0.0);
  CHECK(cap_profile(1.0, 0.1) == 0.0);
  double prev = 1.0;
  for (int i = 0; i <= 100; ++i) {
    const double c = cap_profile(0.1 + 0.1 * i / 100.0, 0.1);
    CHECK(c <= prev);
    prev = c;
  }
}

TEST_CASE("cutoff bump condition and sigma limits") {
  const auto& prob = problem3();
  CHECK(prob.cutoff.gap > 0.0);
  CHECK(prob.cutoff.sigma > 0.0);
  const double dens = density_constant(mesh3(), 4);
  CHECK(prob.cutoff.gap == doctest::Approx(dens - prob.cutoff.C_sigma));
  try {
    cutoff_and_bump(mesh3(), prob.points, 1.0);
    FAIL("expected SigmaTooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SigmaTooLarge);
  }
  CHECK_THROWS_AS(cutoff_and_bump(mesh3(), prob.points, 0.0), Error);
}

TEST_CASE("subsolution slack is nonnegative for delta in {0, 1}") {
  const auto& prob = problem3();
  const auto& sub = prob.subsolution;
  CHECK(sub.slack_outside >= 0.0);
  CHECK(sub.slack_inside >= 0.0);
  CHECK(sub.max_exponent <= -0.5 + 1e-12);
  CHECK(prob.params.beta >= sphere_params().beta);
  for (double delta : {0.0, 1.0}) {
    const auto s = subsolution_slack(mesh3(), prob.points, prob.cutoff, prob.background,
                                     sub.w_minus, prob.params, delta);
    for (int i = 0; i < mesh3().vertex_count(); ++i) {
      if (prob.cutoff.f_sigma[i] < 1.0) CHECK(s[i] >= -1e-9);
    }
  }
}

TEST_CASE("supersolution sits above the subsolution") {
  const auto& prob = problem3();
  for (std::size_t i = 0; i < prob.phi1.size(); ++i) {
    if (!prob.background.singular[i]) CHECK(prob.phi1[i] > prob.subsolution.w_minus[i]);
  }
  double regular_max = -1e300, singular_min = 1e300;
  for (std::size_t i = 0; i < prob.phi1.size(); ++i) {
    if (prob.background.singular[i]) singular_min = std::min(singular_min, prob.phi1[i]);
    else regular_max = std::max(regular_max, prob.phi1[i]);
  }
  CHECK(singular_min > regular_max);
  std::vector<double> high(prob.phi1.size(), 1e6);
  try {
    supersolution_phi1(prob.background, high);
    FAIL("expected OrderingViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OrderingViolation);
  }
}

TEST_CASE("c_delta grows as delta shrinks") {
  const auto& prob = problem3();
  const double c1 = c_delta(mesh3(), prob.points, prob.cutoff.rho, prob.params, 1.0);
  const double c2 = c_delta(mesh3(), prob.points, prob.cutoff.rho, prob.params, 0.25);
  const double c0 = c_delta(mesh3(), prob.points, prob.cutoff.rho, prob.params, 0.0);
  CHECK(c1 >= 1.0);
  CHECK(c2 >= c1);
  CHECK(c0 >= c2);
}

TEST_CASE("c_delta at level 5, delta = 1 (frozen)") {
  const SphereMesh m = build_icosphere(5);
  const SurfaceProblem prob = prepare_surface_problem(m, tetrahedral_points(), sphere_params());
  const double c = c_delta(m, prob.points, prob.cutoff.rho, prob.params, 1.0);
  CHECK(std::isfinite(c));
  CHECK(c == doctest::Approx(6104.278019130752).epsilon(1e-9));
}

TEST_CASE("default schedule") {
  const auto s = default_delta_schedule();
  REQUIRE(s.size() == 31);
  CHECK(s.front() == 1.0);
  CHECK(s.back() == std::ldexp(1.0, -30));
}

TEST_CASE("level-3 continuation stays in the ordered chain and converges") {
  const auto& prob = problem3();
  const SurfaceSolution sol = delta_continuation(prob, default_delta_schedule());
  REQUIRE(sol.delta_path.size() == 31);
  CHECK(sol.delta_path[0].direction == IterDirection::Decreasing);
  for (const auto& lvl : sol.delta_path) {
    CHECK(lvl.min_gap_floor >= -1e-9);
    CHECK(lvl.min_gap_ceiling >= -1e-9);
    CHECK(lvl.max_wrong_way <= 1e-9);
    CHECK(lvl.residual_sup < 10.0 * SurfaceOptions{}.iter_tol * lvl.C_delta);
  }
  CHECK(sol.residual_l2 < 1e-6);
  CHECK(sol.cauchy_decreasing);
  CHECK(sol.max_abs_phi <= sol.uniform_bound + 1e-9);
  const auto r = surface_residual(prob, sol.phi, 0.0);
  CHECK(area_rms(prob, r) == doctest::Approx(sol.residual_l2).epsilon(1e-9));
}

TEST_CASE("surface solver input checks") {
  const auto topo = with_topological_beta(make_params_from_a(1, 1.0, 1.0, 1.0, Regime::TopologicalPlane));
  CHECK_THROWS_AS(prepare_surface_problem(mesh3(), tetrahedral_points(), topo), Error);
  const auto three = spread_points(3);
  CHECK_THROWS_AS(prepare_surface_problem(mesh3(), three, sphere_params()), Error);
  const std::vector<double> bad{0.5, 1.0};
  CHECK_THROWS_AS(delta_continuation(problem3(), bad), Error);
}

TEST_CASE("mesh refinement: level differences shrink outside the string caps") {
  const auto p = sphere_params();
  std::vector<std::vector<double>> v;  // physical field phi + v0 per level
  std::vector<std::vector<double>> dist;
  for (int level : {3, 4, 5}) {
    const SphereMesh m = build_icosphere(level);
    const SurfaceProblem prob = prepare_surface_problem(m, tetrahedral_points(), p);
    const SurfaceSolution sol = delta_continuation(prob, default_delta_schedule());
    std::vector<double> u(m.vertex_count()), d(m.vertex_count(), 10.0);
    for (int i = 0; i < m.vertex_count(); ++i) {
      u[i] = sol.phi[i] + prob.background.v0[i];
      for (const auto& s : prob.points) d[i] = std::min(d[i], geodesic_distance(m.vertices[i], m.vertices[s.vertex]));
    }
    v.push_back(std::move(u));
    dist.push_back(std::move(d));
  }
  // coarse vertices keep their index on finer meshes, so compare there
  auto diff = [&](int k) {
    double worst = 0.0;
    for (std::size_t i = 0; i < v[k - 1].size(); ++i) {
      if (dist[k - 1][i] > 0.2) worst = std::max(worst, std::abs(v[k][i] - v[k - 1][i]));
    }
    return worst;
  };
  const double d34 = diff(1), d45 = diff(2);
  CHECK(d45 < 0.5 * d34);
  CHECK(d45 < 5e-3);
}
