#pragma once

#include <span>

#include "csh/kernels.hpp"

namespace csh {

struct PcgOptions {
  double rel_tol = 1e-13;   // on ||r|| / ||b||
  int max_iter = 10000;
  bool project_constants = false;  // singular systems with kernel = constants
  VectorOps ops;
};

struct PcgResult {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Jacobi-preconditioned conjugate gradients for symmetric positive
/// (semi)definite A. `x` holds the initial guess and receives the solution.
/// With project_constants the residual is kept orthogonal to the constant
/// vector, which is what a consistent singular Laplacian system needs.
PcgResult pcg(const CsrMatrix& A, std::span<const double> b, std::span<double> x,
              const PcgOptions& opts = {});

}  // namespace csh
