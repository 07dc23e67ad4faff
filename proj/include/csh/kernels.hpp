#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace csh {

/// Compressed sparse row matrix, square.
struct CsrMatrix {
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col;
  std::vector<double> val;

  std::size_t nnz() const { return val.size(); }
};

struct Triplet {
  int row;
  int col;
  double val;
};

/// Sums duplicate entries; columns sorted within each row.
CsrMatrix csr_from_triplets(int n, std::vector<Triplet> entries);

/// A + s*B for matrices with identical sparsity pattern up to the diagonal,
/// where B is diagonal (given as a vector).
CsrMatrix add_diagonal(const CsrMatrix& A, std::span<const double> diag, double s);

enum class Exec { Serial, Parallel };

/// Vector kernels in two variants. The serial ones are the reference. The
/// parallel ones use OpenMP; with `fixed_order` (the default) reductions sum
/// fixed-size blocks in index order, so results are bit-identical to the
/// serial reference regardless of thread count.
namespace kernels {

inline constexpr std::size_t kDotBlock = 1024;

void spmv_serial(const CsrMatrix& A, std::span<const double> x, std::span<double> y);
void spmv_parallel(const CsrMatrix& A, std::span<const double> x, std::span<double> y);

double dot_serial(std::span<const double> x, std::span<const double> y);
double dot_parallel(std::span<const double> x, std::span<const double> y, bool fixed_order = true);

// y += s*x
void axpy_serial(double s, std::span<const double> x, std::span<double> y);
void axpy_parallel(double s, std::span<const double> x, std::span<double> y);

// y = x + s*y
void xpay_serial(std::span<const double> x, double s, std::span<double> y);
void xpay_parallel(std::span<const double> x, double s, std::span<double> y);

/// Per-vertex right-hand side of the monotone scheme:
///   g_i  = beta * weight_i * e^{a(u - e^u)} e^u (e^u - 1),  u = phi_i + v0_i
///   out_i = -area_i * (g_i - C*phi_i + shift)
void scheme_rhs_serial(double beta, double a, double C, double shift, std::span<const double> phi,
                       std::span<const double> v0, std::span<const double> weight,
                       std::span<const double> area, std::span<double> out);
void scheme_rhs_parallel(double beta, double a, double C, double shift,
                         std::span<const double> phi, std::span<const double> v0,
                         std::span<const double> weight, std::span<const double> area,
                         std::span<double> out);

}  // namespace kernels

/// Dispatching front end used by the solvers.
struct VectorOps {
  Exec exec = Exec::Parallel;
  bool fixed_order = true;

  void spmv(const CsrMatrix& A, std::span<const double> x, std::span<double> y) const;
  double dot(std::span<const double> x, std::span<const double> y) const;
  void axpy(double s, std::span<const double> x, std::span<double> y) const;
  void xpay(std::span<const double> x, double s, std::span<double> y) const;
};

}  // namespace csh
