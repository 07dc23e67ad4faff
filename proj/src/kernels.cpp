#include "csh/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "csh/error.hpp"

namespace csh {

CsrMatrix csr_from_triplets(int n, std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& x, const Triplet& y) {
    return x.row != y.row ? x.row < y.row : x.col < y.col;
  });
  CsrMatrix A;
  A.n = n;
  A.row_ptr.assign(n + 1, 0);
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const Triplet& e = entries[k];
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= n) {
      throw Error(ErrorKind::ValidationError, "triplet index out of range");
    }
    if (!A.col.empty() && k > 0 && entries[k - 1].row == e.row && entries[k - 1].col == e.col) {
      A.val.back() += e.val;
      continue;
    }
    A.col.push_back(e.col);
    A.val.push_back(e.val);
    ++A.row_ptr[e.row + 1];
  }
  for (int i = 0; i < n; ++i) A.row_ptr[i + 1] += A.row_ptr[i];
  return A;
}

CsrMatrix add_diagonal(const CsrMatrix& A, std::span<const double> diag, double s) {
  CsrMatrix B = A;
  for (int i = 0; i < A.n; ++i) {
    bool found = false;
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      if (A.col[k] == i) {
        B.val[k] += s * diag[i];
        found = true;
        break;
      }
    }
    if (!found) throw Error(ErrorKind::ValidationError, "matrix has no stored diagonal entry");
  }
  return B;
}

namespace kernels {

void spmv_serial(const CsrMatrix& A, std::span<const double> x, std::span<double> y) {
  for (int i = 0; i < A.n; ++i) {
    double s = 0.0;
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) s += A.val[k] * x[A.col[k]];
    y[i] = s;
  }
}

void spmv_parallel(const CsrMatrix& A, std::span<const double> x, std::span<double> y) {
#pragma omp parallel for schedule(static)
  for (int i = 0; i < A.n; ++i) {
    double s = 0.0;
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) s += A.val[k] * x[A.col[k]];
    y[i] = s;
  }
}

namespace {

double block_dot(const double* x, const double* y, std::size_t len) {
  double s = 0.0;
  for (std::size_t i = 0; i < len; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace

double dot_serial(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double total = 0.0;
  for (std::size_t b = 0; b < n; b += kDotBlock) {
    total += block_dot(x.data() + b, y.data() + b, std::min(kDotBlock, n - b));
  }
  return total;
}

double dot_parallel(std::span<const double> x, std::span<const double> y, bool fixed_order) {
  const std::size_t n = x.size();
  if (!fixed_order) {
    double s = 0.0;
    const auto m = static_cast<long>(n);
#pragma omp parallel for reduction(+ : s) schedule(static)
    for (long i = 0; i < m; ++i) s += x[i] * y[i];
    return s;
  }
  const long nb = static_cast<long>((n + kDotBlock - 1) / kDotBlock);
  std::vector<double> partial(nb);
#pragma omp parallel for schedule(static)
  for (long b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kDotBlock;
    partial[b] = block_dot(x.data() + lo, y.data() + lo, std::min(kDotBlock, n - lo));
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

void axpy_serial(double s, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
}

void axpy_parallel(double s, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<long>(y.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) y[i] += s * x[i];
}

void xpay_serial(std::span<const double> x, double s, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + s * y[i];
}

void xpay_parallel(std::span<const double> x, double s, std::span<double> y) {
  const auto n = static_cast<long>(y.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) y[i] = x[i] + s * y[i];
}

namespace {

inline double scheme_entry(double beta, double a, double C, double shift, double phi, double v0,
                           double weight, double area) {
  const double u = phi + v0;
  const double eu = std::exp(u);
  const double g = beta * weight * std::exp(a * (u - eu) + u) * std::expm1(u);
  return -area * (g - C * phi + shift);
}

}  // namespace

void scheme_rhs_serial(double beta, double a, double C, double shift, std::span<const double> phi,
                       std::span<const double> v0, std::span<const double> weight,
                       std::span<const double> area, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = scheme_entry(beta, a, C, shift, phi[i], v0[i], weight[i], area[i]);
  }
}

void scheme_rhs_parallel(double beta, double a, double C, double shift,
                         std::span<const double> phi, std::span<const double> v0,
                         std::span<const double> weight, std::span<const double> area,
                         std::span<double> out) {
  const auto n = static_cast<long>(out.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    out[i] = scheme_entry(beta, a, C, shift, phi[i], v0[i], weight[i], area[i]);
  }
}

}  // namespace kernels

void VectorOps::spmv(const CsrMatrix& A, std::span<const double> x, std::span<double> y) const {
  if (exec == Exec::Parallel) {
    kernels::spmv_parallel(A, x, y);
  } else {
    kernels::spmv_serial(A, x, y);
  }
}

double VectorOps::dot(std::span<const double> x, std::span<const double> y) const {
  return exec == Exec::Parallel ? kernels::dot_parallel(x, y, fixed_order)
                                : kernels::dot_serial(x, y);
}

void VectorOps::axpy(double s, std::span<const double> x, std::span<double> y) const {
  if (exec == Exec::Parallel) {
    kernels::axpy_parallel(s, x, y);
  } else {
    kernels::axpy_serial(s, x, y);
  }
}

void VectorOps::xpay(std::span<const double> x, double s, std::span<double> y) const {
  if (exec == Exec::Parallel) {
    kernels::xpay_parallel(x, s, y);
  } else {
    kernels::xpay_serial(x, s, y);
  }
}

}  // namespace csh
