#include "csh/linear.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "csh/error.hpp"

namespace csh {

namespace {

void remove_mean(std::span<double> r) {
  double s = 0.0;
  for (double v : r) s += v;
  s /= static_cast<double>(r.size());
  for (double& v : r) v -= s;
}

}  // namespace

PcgResult pcg(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
              const PcgOptions& opts) {
  const int n = A.n;
  const VectorOps& ops = opts.ops;
  std::vector<double> inv_diag(n, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int k = A.row_ptr[i]; k < A.row_ptr[i + 1]; ++k) {
      if (A.col[k] == i && A.val[k] > 0.0) inv_diag[i] = 1.0 / A.val[k];
    }
  }
  std::vector<double> r(n), z(n), p(n), q(n);
  ops.spmv(A, x, q);
  for (int i = 0; i < n; ++i) r[i] = b[i] - q[i];
  if (opts.project_constants) remove_mean(r);

  std::vector<double> bb(b.begin(), b.end());
  if (opts.project_constants) remove_mean(bb);
  const double b_norm = std::sqrt(ops.dot(bb, bb));
  PcgResult res;
  if (b_norm == 0.0) {
    for (int i = 0; i < n; ++i) x[i] = 0.0;
    return res;
  }
  const double target = opts.rel_tol * b_norm;
  double r_norm = std::sqrt(ops.dot(r, r));
  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = ops.dot(r, z);
  int it = 0;
  while (r_norm > target) {
    if (it >= opts.max_iter || !std::isfinite(r_norm)) {
      std::ostringstream msg;
      msg << "conjugate gradients stalled at relative residual " << r_norm / b_norm << " after "
          << it << " iterations";
      throw Error(ErrorKind::LinearSolveFailure, msg.str());
    }
    ops.spmv(A, p, q);
    const double pq = ops.dot(p, q);
    if (!(pq > 0.0)) {
      throw Error(ErrorKind::LinearSolveFailure, "operator is not positive definite on the search direction");
    }
    const double alpha = rz / pq;
    ops.axpy(alpha, p, x);
    ops.axpy(-alpha, q, r);
    if (opts.project_constants) remove_mean(r);
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_new = ops.dot(r, z);
    ops.xpay(z, rz_new / rz, p);
    rz = rz_new;
    r_norm = std::sqrt(ops.dot(r, r));
    ++it;
  }
  res.iterations = it;
  res.relative_residual = r_norm / b_norm;
  return res;
}

}  // namespace csh
