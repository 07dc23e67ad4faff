#pragma once

#include <span>
#include <string>
#include <vector>

#include "csh/model.hpp"
#include "csh/radial.hpp"
#include "csh/surface.hpp"

namespace csh {

// ---- planar profiles (t = ln r, coincident strings at the origin) ----

/// e^eta = lambda (e^{v - e^v} r^{-2N})^a, evaluated as one exponential so the
/// cancellation between v and 2N ln r near the origin stays exact in the exponent.
std::vector<double> metric_factor(const RadialSolution& sol);

/// H = e^{-eta} [(e^v - 1) Lap v + e^v |grad v|^2] / 4 with Lap v = e^{-2t} v''
/// taken from the equation. Throws NegativeDensity below -1e-9.
std::vector<double> energy_density(const RadialSolution& sol);

/// Second form: (1/2) e^{-eta} F12 (1 - e^v) + (1/4) e^{-eta} e^v |grad v|^2.
std::vector<double> energy_density_alt(const RadialSolution& sol);

/// F12 = 2 e^eta e^v (1 - e^v) / kappa^2.
std::vector<double> magnetic_field(const RadialSolution& sol);

struct FluxResult {
  double quadrature = 0.0;  // grid part plus tails
  double grid_part = 0.0;
  double tail_left = 0.0;
  double tail_right = 0.0;
  double boundary = 0.0;    // 2 pi N - pi lim r v_r
  double relative_gap = 0.0;
};

/// Total flux two ways; throws FluxMismatch if they differ by more than `tol` relative.
FluxResult magnetic_flux(const RadialSolution& sol, double tol = 1e-3);

struct EinsteinResult {
  std::vector<double> K_eta;  // NaN outside the evaluation window
  double residual_sup = 0.0;  // sup |K_eta - 8 pi G H| over the window
  double t_lo = 0.0;
  double t_hi = 0.0;
  int nodes = 0;
};

/// K_eta = -(1/2) e^{-eta} Lap eta with Lap eta from second differences of eta
/// on the uniform t grid. Evaluated on interior nodes with t in [t_lo, t_hi];
/// near the origin e^{-2t} amplifies rounding in eta beyond any useful bound.
EinsteinResult gauss_curvature_and_einstein_residual(const RadialSolution& sol,
                                                     std::span<const double> e_eta,
                                                     std::span<const double> energy,
                                                     double t_lo = -5.0, double t_hi = 15.0);

struct EnergyResult {
  double value = 0.0;
  double grid_part = 0.0;
  double tail_left = 0.0;
  double tail_right = 0.0;
};

/// E = 2 pi int H e^eta r^2 dt, trapezoid on the grid plus exponential tails
/// fitted at each end. Throws TailNotIntegrable if a tail does not decay.
EnergyResult total_energy(const RadialSolution& sol, std::span<const double> energy,
                          std::span<const double> e_eta);

struct TailSlope {
  double fitted = 0.0;    // d ln e^eta / d ln r over the last decade of the grid
  double expected = 0.0;  // -2aN (topological), -a(k + 2N) (non-topological)
};

TailSlope metric_tail_slope(const RadialSolution& sol, std::span<const double> e_eta);

struct Completeness {
  bool applicable = true;  // false on the sphere
  bool satisfied = true;
  double margin = 0.0;     // 1/(4 pi G) - N
};

Completeness completeness_check(const ModelParams& p);

struct PlanarObservables {
  std::vector<double> r;
  std::vector<double> e_eta;
  std::vector<double> energy_density;
  std::vector<double> K_eta;
  std::vector<double> F12;
  FluxResult flux;
  EnergyResult energy;
  EinsteinResult einstein;
  TailSlope metric_tail;
  Completeness completeness;
};

PlanarObservables planar_observables(const RadialSolution& sol);

// ---- sphere ----

struct SphereObservables {
  std::vector<double> e_eta;
  std::vector<double> F12;
  double flux = 0.0;  // sum A_i F12_i
  Completeness completeness;
};

SphereObservables sphere_observables(const SurfaceProblem& prob, std::span<const double> phi);

}  // namespace csh
