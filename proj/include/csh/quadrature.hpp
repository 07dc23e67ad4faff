#pragma once

#include <functional>

namespace csh {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int intervals = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 0.0;
  int max_intervals = 2000;
};

// Globally adaptive 7/15-point Gauss-Kronrod on [lo, hi]. The interval with
// the largest error estimate is bisected until the summed estimate falls
// below max(abs_tol, rel_tol*|I|). Throws QuadratureFailure on budget overrun.
QuadratureResult integrate_gk(const std::function<double(double)>& f, double lo, double hi,
                              const QuadratureOptions& opts = {});

}  // namespace csh
