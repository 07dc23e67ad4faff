#include <cmath>
#include <numbers>

#include <doctest.h>

#include "csh/error.hpp"
#include "csh/model.hpp"
#include "oracles.hpp"

using namespace csh;

namespace {

ModelParams topo(int N = 1, double kappa = 2.0) {
  return with_topological_beta(
      make_params_from_a(N, 1.0 / N, kappa, 1.0, Regime::TopologicalPlane));
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::ValidationError;
}

}  // namespace

TEST_CASE("beta_topological matches the closed form for N=1, a=1") {
  const double closed = 2.0 / (3.0 / std::numbers::e - 1.0);
  CHECK(beta_topological(1, 1.0) == doctest::Approx(closed).epsilon(1e-12));
  CHECK(closed == doctest::Approx(19.2978806698).epsilon(1e-10));
}

TEST_CASE("beta_topological agrees with the incomplete-gamma oracle") {
  for (int N : {1, 2, 3, 5}) {
    const double a = 1.0 / N;
    CHECK(beta_topological(N, a) == doctest::Approx(oracle::beta_topological(N, a)).epsilon(1e-11));
  }
}

TEST_CASE("make_params derives a and beta") {
  const auto p = make_params(2, 0.01, 0.5, 3.0, Regime::NonTopologicalPlane);
  CHECK(p.a == doctest::Approx(4.0 * std::numbers::pi * 0.01));
  CHECK(p.beta == doctest::Approx(4.0 * 3.0 / 0.25));
  const auto t = topo(1, 2.0);
  CHECK(t.lambda == doctest::Approx(t.beta * 4.0 / 4.0));
}

TEST_CASE("regime gates") {
  CHECK(kind_of([] { make_params_from_a(1, 0.9, 1, 1, Regime::TopologicalPlane); }) ==
        ErrorKind::RegimeMismatch);
  CHECK(kind_of([] { make_params_from_a(1, 1.0, 1, 1, Regime::NonTopologicalPlane); }) ==
        ErrorKind::RegimeMismatch);
  CHECK(kind_of([] { make_params_from_a(2, 0.6, 1, 1, Regime::NonTopologicalPlane); }) ==
        ErrorKind::RegimeMismatch);
  CHECK(kind_of([] { make_params_from_a(2, 1.0, 1, 1, Regime::CompactSphere); }) ==
        ErrorKind::RegimeMismatch);
  CHECK(kind_of([] { make_params_from_a(4, 0.4, 1, 1, Regime::CompactSphere); }) ==
        ErrorKind::RegimeMismatch);
  CHECK_NOTHROW(make_params_from_a(4, 0.5, 1, 1, Regime::CompactSphere));
  CHECK(kind_of([] { make_params(0, 0.01, 1, 1, Regime::NonTopologicalPlane); }) ==
        ErrorKind::ValidationError);
  CHECK(kind_of([] { make_params(1, 0.01, 0.0, 1, Regime::NonTopologicalPlane); }) ==
        ErrorKind::ValidationError);
  CHECK(kind_of([] { make_params(1, -0.01, 1, 1, Regime::NonTopologicalPlane); }) ==
        ErrorKind::ValidationError);
}

TEST_CASE("f' agrees with fourth-order central differences on 1000 points") {
  for (double a : {0.25, 0.5, 1.0}) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double v = -12.0 + 15.0 * (i + 0.5) / 1000.0;
      const double h = 1e-3;
      const double fd = (-oracle::f(v + 2 * h, a) + 8 * oracle::f(v + h, a) -
                         8 * oracle::f(v - h, a) + oracle::f(v - 2 * h, a)) /
                        (12 * h);
      const double exact = nonlinearity_fprime(v, a);
      worst = std::max(worst, std::abs(fd - exact) / std::abs(exact));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("f' at the vacuum and far out") {
  CHECK(nonlinearity_fprime(0.0, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(nonlinearity_fprime(0.0, 0.3) == doctest::Approx(std::exp(-0.3)).epsilon(1e-14));
  CHECK(std::abs(nonlinearity_fprime(-60.0, 1.0)) < 1e-25);
}

TEST_CASE("f is one fused exponential and stays finite far out") {
  CHECK(nonlinearity_f(-700.0, 0.5) == doctest::Approx(0.0));
  CHECK(std::isfinite(nonlinearity_f(-700.0, 0.5)));
  CHECK(nonlinearity_f(0.0, 0.7) == 0.0);
  CHECK(nonlinearity_f(-1.0, 1.0) == doctest::Approx(oracle::f(-1.0, 1.0)).epsilon(1e-14));
  CHECK(nonlinearity_f(2.0, 1.0) == doctest::Approx(oracle::f(2.0, 1.0)).epsilon(1e-14));
}

TEST_CASE("fprime_sup matches a dense scan") {
  for (double a : {0.5, 1.0, 2.0}) {
    double best = -1e300;
    for (int i = 0; i <= 200000; ++i) {
      const double v = -20.0 + 25.0 * i / 200000.0;
      const double ev = std::exp(v);
      best = std::max(best, std::exp(a * (v - ev) + v) * (2 * ev - 1 - a * (1 - ev) * (1 - ev)));
    }
    const Maximizer m = fprime_sup(a);
    CHECK(m.value == doctest::Approx(best).epsilon(1e-8));
    CHECK(m.value >= best - 1e-12);
  }
}

TEST_CASE("potential H against lower incomplete gamma") {
  const auto p = topo();
  for (double v : {-40.0, -10.0, -3.0, -1.0, -0.3, -1e-3, 0.0}) {
    const double ref = oracle::potential(v, p.a, p.beta);
    CHECK(potential_H(v, p) == doctest::Approx(ref).epsilon(1e-12));
  }
  auto q = make_params_from_a(1, 0.5, 1.0, 1.0, Regime::NonTopologicalPlane);
  for (double v : {-20.0, -2.0, -0.1}) {
    CHECK(potential_H(v, q) == doctest::Approx(oracle::potential(v, 0.5, q.beta)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(potential_H(0.1, p), Error);
}

TEST_CASE("H is increasing on 1000 points") {
  const auto p = topo();
  const PotentialTable table(p);
  double prev = -1.0;
  for (int i = 0; i < 1000; ++i) {
    const double v = -30.0 + 30.0 * i / 999.0;
    const double h = table(v);
    CHECK(h > prev);
    prev = h;
  }
}

TEST_CASE("potential table interpolation error") {
  const auto p = topo();
  const PotentialTable table(p);
  double worst = 0.0;
  for (int i = 0; i <= 3000; ++i) {
    const double v = -30.0 + 30.0 * i / 3000.0;
    worst = std::max(worst, std::abs(table(v) - oracle::potential(v, p.a, p.beta)));
  }
  CHECK(worst < 1e-10);
  CHECK(table(0.0) == doctest::Approx(2.0).epsilon(1e-12));  // beta D = 2N^2
}

TEST_CASE("first integral vanishes at v = 0 under the pinned beta") {
  for (int N : {1, 2, 4}) {
    const auto p = topo(N);
    const FirstIntegral F(p);
    CHECK(std::abs(F(0.0)) < 1e-10);
    CHECK(F.mismatch() == 0.0);
    CHECK(F(-50.0) == doctest::Approx(4.0 * N * N).epsilon(1e-12));
    for (double v : {-5.0, -1.0, -0.01}) {
      const double ref = oracle::first_integral(v, N, p.a, p.beta);
      CHECK(F(v) == doctest::Approx(ref).epsilon(1e-8));
    }
  }
}

TEST_CASE("dF/dv = 2 beta f by central differences") {
  const auto p = topo();
  const FirstIntegral F(p);
  for (int i = 0; i <= 200; ++i) {
    const double v = -10.0 + 9.9 * i / 200.0;
    const double h = 1e-5;
    const double fd = (F(v + h) - F(v - h)) / (2 * h);
    const double exact = 2.0 * p.beta * oracle::f(v, p.a);
    CHECK(fd == doctest::Approx(exact).epsilon(1e-6));
  }
}

TEST_CASE("first integral keeps relative accuracy near zero") {
  const auto p = topo();
  const FirstIntegral F(p);
  // F(v) ~ beta e^{-a} v^2 as v -> 0-
  for (double v : {-1e-4, -1e-6, -1e-8}) {
    CHECK(F(v) / (p.beta * std::exp(-1.0) * v * v) == doctest::Approx(1.0).epsilon(1e-3));
  }
}
