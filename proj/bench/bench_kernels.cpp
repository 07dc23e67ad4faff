// Serial reference vs OpenMP kernels on icosphere-sized vectors.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "csh/kernels.hpp"
#include "csh/linear.hpp"
#include "csh/mesh.hpp"

using namespace csh;

namespace {

const SphereMesh& mesh_at(int level) {
  static std::vector<SphereMesh> cache(kMaxMeshLevel + 1);
  if (cache[level].vertices.empty()) cache[level] = build_icosphere(level);
  return cache[level];
}

std::vector<double> noise(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

template <bool Parallel>
void BM_spmv(benchmark::State& st) {
  const SphereMesh& m = mesh_at(static_cast<int>(st.range(0)));
  const auto x = noise(m.vertices.size(), 1);
  std::vector<double> y(x.size());
  for (auto _ : st) {
    if constexpr (Parallel) kernels::spmv_parallel(m.stiffness, x, y);
    else kernels::spmv_serial(m.stiffness, x, y);
    benchmark::DoNotOptimize(y.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(m.stiffness.nnz()));
}

template <bool Parallel>
void BM_dot(benchmark::State& st) {
  const std::size_t n = mesh_at(static_cast<int>(st.range(0))).vertices.size();
  const auto x = noise(n, 2), y = noise(n, 3);
  for (auto _ : st) {
    double d = Parallel ? kernels::dot_parallel(x, y) : kernels::dot_serial(x, y);
    benchmark::DoNotOptimize(d);
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(n));
}

template <bool Parallel>
void BM_scheme_rhs(benchmark::State& st) {
  const SphereMesh& m = mesh_at(static_cast<int>(st.range(0)));
  const std::size_t n = m.vertices.size();
  const auto phi = noise(n, 4), v0 = noise(n, 5), w = noise(n, 6);
  std::vector<double> out(n);
  for (auto _ : st) {
    if constexpr (Parallel)
      kernels::scheme_rhs_parallel(100.0, 0.5, 50.0, 1.0, phi, v0, w, m.areas, out);
    else
      kernels::scheme_rhs_serial(100.0, 0.5, 50.0, 1.0, phi, v0, w, m.areas, out);
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(n));
}

template <bool Parallel>
void BM_pcg(benchmark::State& st) {
  const SphereMesh& m = mesh_at(static_cast<int>(st.range(0)));
  const std::size_t n = m.vertices.size();
  const CsrMatrix A = add_diagonal(m.stiffness, m.areas, 10.0);
  const auto b = noise(n, 7);
  PcgOptions o;
  o.rel_tol = 1e-10;
  o.ops.exec = Parallel ? Exec::Parallel : Exec::Serial;
  int iters = 0;
  for (auto _ : st) {
    std::vector<double> x(n, 0.0);
    iters = pcg(A, b, x, o).iterations;
    benchmark::DoNotOptimize(x.data());
  }
  st.counters["cg_iterations"] = iters;
}

}  // namespace

BENCHMARK(BM_spmv<false>)->Name("spmv/serial")->DenseRange(4, 7);
BENCHMARK(BM_spmv<true>)->Name("spmv/parallel")->DenseRange(4, 7);
BENCHMARK(BM_dot<false>)->Name("dot/serial")->DenseRange(4, 7);
BENCHMARK(BM_dot<true>)->Name("dot/parallel")->DenseRange(4, 7);
BENCHMARK(BM_scheme_rhs<false>)->Name("scheme_rhs/serial")->DenseRange(4, 7);
BENCHMARK(BM_scheme_rhs<true>)->Name("scheme_rhs/parallel")->DenseRange(4, 7);
BENCHMARK(BM_pcg<false>)->Name("pcg/serial")->DenseRange(4, 6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_pcg<true>)->Name("pcg/parallel")->DenseRange(4, 6)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
