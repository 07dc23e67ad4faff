#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "csh/error.hpp"
#include "csh/kernels.hpp"
#include "csh/linear.hpp"
#include "csh/mesh.hpp"

using namespace csh;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = dist(rng);
  return x;
}

// 1-D Dirichlet Laplacian plus a diagonal shift, SPD
CsrMatrix laplacian_1d(int n, double shift) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0 + shift});
    if (i > 0) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  return csr_from_triplets(n, t);
}

}  // namespace

TEST_CASE("csr assembly sums duplicates and sorts columns") {
  const CsrMatrix A = csr_from_triplets(3, {{0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 3.0}, {2, 1, -1.0}});
  CHECK(A.nnz() == 3);
  CHECK(A.row_ptr == std::vector<int>{0, 2, 2, 3});
  CHECK(A.col == std::vector<int>{0, 2, 1});
  CHECK(A.val == std::vector<double>{2.0, 4.0, -1.0});
  CHECK_THROWS_AS(csr_from_triplets(2, {{0, 5, 1.0}}), Error);
  CHECK_THROWS_AS(add_diagonal(A, std::vector<double>{1, 1, 1}, 1.0), Error);  // row 1 empty
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
  const SphereMesh mesh = build_icosphere(4);
  const std::size_t n = mesh.vertices.size();
  const auto x = random_vector(n, 1);
  const auto y = random_vector(n, 2);

  std::vector<double> s1(n), s2(n);
  kernels::spmv_serial(mesh.stiffness, x, s1);
  kernels::spmv_parallel(mesh.stiffness, x, s2);
  CHECK(s1 == s2);

  CHECK(kernels::dot_serial(x, y) == kernels::dot_parallel(x, y, true));
  CHECK(kernels::dot_parallel(x, y, false) == doctest::Approx(kernels::dot_serial(x, y)).epsilon(1e-12));

  auto a1 = y, a2 = y;
  kernels::axpy_serial(0.37, x, a1);
  kernels::axpy_parallel(0.37, x, a2);
  CHECK(a1 == a2);
  kernels::xpay_serial(x, -1.3, a1);
  kernels::xpay_parallel(x, -1.3, a2);
  CHECK(a1 == a2);

  const auto v0 = random_vector(n, 3);
  const auto w = random_vector(n, 4);
  std::vector<double> r1(n), r2(n);
  kernels::scheme_rhs_serial(7.0, 0.5, 11.0, 0.2, x, v0, w, mesh.areas, r1);
  kernels::scheme_rhs_parallel(7.0, 0.5, 11.0, 0.2, x, v0, w, mesh.areas, r2);
  CHECK(r1 == r2);
}

TEST_CASE("scheme right-hand side formula") {
  const std::vector<double> phi{-0.3}, v0{-1.2}, w{2.0}, area{0.5};
  std::vector<double> out(1);
  kernels::scheme_rhs_serial(3.0, 0.5, 4.0, 0.1, phi, v0, w, area, out);
  const double u = -1.5;
  const double g = 3.0 * 2.0 * std::exp(0.5 * (u - std::exp(u))) * std::exp(u) * (std::exp(u) - 1.0);
  CHECK(out[0] == doctest::Approx(-0.5 * (g - 4.0 * -0.3 + 0.1)).epsilon(1e-14));
}

TEST_CASE("vector ops dispatch gives the same answers either way") {
  const auto x = random_vector(5000, 5);
  const auto y = random_vector(5000, 6);
  const VectorOps serial{Exec::Serial, true};
  const VectorOps parallel{Exec::Parallel, true};
  CHECK(serial.dot(x, y) == parallel.dot(x, y));
}

TEST_CASE("pcg solves an SPD system, serial and parallel agree bitwise") {
  const int n = 300;
  const CsrMatrix A = laplacian_1d(n, 0.01);
  const auto x_true = random_vector(n, 7);
  std::vector<double> b(n);
  kernels::spmv_serial(A, x_true, b);

  PcgOptions so;
  so.ops = {Exec::Serial, true};
  std::vector<double> xs(n, 0.0);
  const PcgResult rs = pcg(A, b, xs, so);
  CHECK(rs.relative_residual < 1e-13);
  for (int i = 0; i < n; ++i) CHECK(xs[i] == doctest::Approx(x_true[i]).epsilon(1e-8));

  PcgOptions po;
  std::vector<double> xp(n, 0.0);
  const PcgResult rp = pcg(A, b, xp, po);
  CHECK(rp.iterations == rs.iterations);
  CHECK(xp == xs);
}

TEST_CASE("pcg with constant projection on a singular Laplacian") {
  const SphereMesh mesh = build_icosphere(2);
  const std::size_t n = mesh.vertices.size();
  auto b = random_vector(n, 8);
  double mean = 0.0;
  for (double v : b) mean += v;
  mean /= n;
  for (double& v : b) v -= mean;
  PcgOptions o;
  o.project_constants = true;
  o.rel_tol = 1e-12;
  std::vector<double> x(n, 0.0);
  pcg(mesh.stiffness, b, x, o);
  std::vector<double> Ax(n);
  kernels::spmv_serial(mesh.stiffness, x, Ax);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs(Ax[i] - b[i]));
  CHECK(err < 1e-9);
}

TEST_CASE("pcg rejects an indefinite matrix") {
  const CsrMatrix A = csr_from_triplets(2, {{0, 0, 1.0}, {1, 1, -1.0}});
  std::vector<double> b{1.0, 1.0}, x(2, 0.0);
  try {
    pcg(A, b, x);
    FAIL("expected LinearSolveFailure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::LinearSolveFailure);
  }
}
