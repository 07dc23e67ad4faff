#pragma once

#include <span>
#include <vector>

#include "csh/model.hpp"
#include "csh/ode.hpp"

namespace csh {

enum class SolutionKind { Topological, NonTopological };

struct RadialDiagnostics {
  double first_integral_residual = 0.0;   // max |(v')^2 - F(v)| (topological)
  double cross_check_discrepancy = 0.0;   // sup |v_first - v_second|
  double cross_check_t_end = 0.0;         // right edge of the cross-check window
  double seed_correction = 0.0;           // |w_1(t_min)|
  double linearized_from_t = 0.0;         // closed-form tail start (NaN if unused)
  double tail_bound_left = 0.0;           // truncation bounds (non-topological)
  double tail_bound_right = 0.0;
  double rtol = 0.0;
  double atol = 0.0;
  StepStats steps;
};

struct RadialAsymptotics {
  double decay_exponent = 0.0;  // topological: fitted rate of |v| ~ e^{-mu t}
  double r_squared = 0.0;
  double k = 0.0;               // non-topological: -lim v'(t)
  double eta = 0.0;             // non-topological: backward limit of v'
  double apex_t0 = 0.0;
  double apex_alpha = 0.0;
};

/// Trajectory in t = ln r on a uniform grid. `v_second` is the equation's
/// right-hand side at each node, not a numerical derivative.
struct RadialSolution {
  SolutionKind kind = SolutionKind::Topological;
  std::vector<double> t;
  std::vector<double> v;
  std::vector<double> v_prime;
  std::vector<double> v_second;
  ModelParams params;
  RadialAsymptotics asymptotics;
  RadialDiagnostics diagnostics;

  double step() const { return t.size() > 1 ? t[1] - t[0] : 0.0; }
};

// ---- topological branch (aN = 1) ----

struct Seed {
  double v;
  double v_prime;
  double correction;        // w_1(t_min)
  double correction_prime;  // w_1'(t_min)
};

/// One Picard iterate of the fixed-point map from w = 0, evaluated at t_min.
Seed asymptotic_seed(double t_min, const ModelParams& p);

struct TopologicalOptions {
  double t_min = -30.0;
  double t_max = 20.0;
  int grid_points = 2001;
  double step_tol = 1e-12;
  double terminal_tol = 1e-6;
  double linearize_below = 1e-10;
  double cross_check_floor = 1e-3;
  double cross_check_tol = 1e-6;
};

RadialSolution integrate_topological(const ModelParams& p, const TopologicalOptions& opts = {});

struct DecayFit {
  double exponent;
  double r_squared;
  int nodes;
};

/// Least-squares fit of ln|y| against t over [t_lo, t_hi]; returns the negated slope.
DecayFit fit_log_slope(std::span<const double> t, std::span<const double> y, double t_lo,
                       double t_hi);

DecayFit fit_decay_exponent(const RadialSolution& sol, double t_lo, double t_hi);

/// Derivative version: fit of ln|v'| over the same window.
DecayFit fit_derivative_decay(const RadialSolution& sol, double t_lo, double t_hi);

/// Default tail window: the contiguous nodes with 1e-8 <= |v| <= 1e-2.
std::pair<double, double> default_decay_window(const RadialSolution& sol);

/// sqrt(beta e^{-a}), the linearised decay rate at v = 0.
double linear_decay_rate(const ModelParams& p);

struct RadialSample {
  double r;
  double v;
  double v_r;
};

/// Maps to r = e^t with monotone (Fritsch-Carlson) cubic interpolation in t.
std::vector<RadialSample> to_radial_profile(const RadialSolution& sol,
                                            std::span<const double> r_points);

// ---- non-topological branch (aN < 1) ----

double alpha_threshold(double a);

/// K = sqrt(c^2 + 2 beta e^{c t0 - alpha}) - c with c = 2 - 2aN.
double slope_envelope_K(double t0, double alpha, const ModelParams& p);

/// Explicit lower bound on eta(t0, alpha) (final, weakest form).
double eta_lower_bound(double t0, double alpha, const ModelParams& p);

/// Sharper intermediate form of the same lower bound.
double eta_lower_bound_sharp(double t0, double alpha, const ModelParams& p);

struct ApexOptions {
  double step_tol = 1e-12;
  double tail_tol = 1e-10;        // backward truncation bound
  double source_floor = 1e-14;    // forward: stop once beta e^{ct+(1+a)v} drops below
  double max_backward = 200.0;
  double max_forward = 400.0;
  double grid_step = 0.01;        // uniform resampling step
};

/// Full trajectory from the apex (v(t0) = -alpha, v'(t0) = 0), both directions,
/// with truncation points picked by the dominated-tail bounds.
RadialSolution integrate_from_apex(double t0, double alpha, const ModelParams& p,
                                   const ApexOptions& opts = {});

struct EtaResult {
  double eta;
  double t_lo;
  double tail_bound;
};

EtaResult eta_of(double t0, double alpha, const ModelParams& p, const ApexOptions& opts = {});

struct BisectionStep {
  double t0_low;
  double t0_high;
  double t0_mid;
  double eta_mid;
};

struct ShootingRecord {
  double alpha = 0.0;
  double t0 = 0.0;
  double eta = 0.0;
  double t0_low = 0.0;   // final bracket
  double t0_high = 0.0;
  double t0_low_initial = 0.0;
  double t0_high_initial = 0.0;
  double k = 0.0;
  double K_bound = 0.0;
  bool proven_regime = true;
  double slope_bound = 0.0;      // 4 + 2N - 4aN
  double energy_margin = 0.0;    // (k^2 - 4N^2)/2 - (2 - 2aN)(k + 2N)
  bool slope_bound_holds = false;
  bool energy_inequality_holds = false;
  std::vector<BisectionStep> iterations;
};

struct ShootOptions {
  double tol = 1e-8;
  bool allow_unproven_alpha = false;
  ApexOptions apex;
};

ShootingRecord shoot_t0(double alpha, const ModelParams& p, const ShootOptions& opts = {});

struct SlopeChecks {
  double k;
  double bound;          // 4 + 2N - 4aN
  double energy_margin;  // (k^2 - 4N^2)/2 - (2 - 2aN)(k + 2N)
  bool bound_holds;
  bool energy_holds;
};

/// Evaluates both slope inequalities at k with tolerance 1e-6; never throws.
SlopeChecks slope_checks(double k, const ModelParams& p);

/// Extracts k from a converged solution and checks both slope inequalities;
/// throws SlopeBoundViolated when either fails.
double tail_slope_k(const RadialSolution& sol, const ModelParams& p);

struct EnergyIdentity {
  double lhs;        // (k^2 - 4N^2)/2
  double term1;      // equals (2-2aN)(k+2N)
  double term2;      // positive
  double term3;      // positive
  double relative_residual;
};

EnergyIdentity energy_identity(const RadialSolution& sol, const ModelParams& p,
                               const ApexOptions& opts = {});

double energy_identity_residual(const RadialSolution& sol, const ModelParams& p);

/// Converged solution for a given alpha: shooting plus the re-integrated
/// trajectory. The slope inequalities are recorded, not enforced.
struct NonTopologicalResult {
  ShootingRecord record;
  RadialSolution solution;
};

NonTopologicalResult solve_nontopological(double alpha, const ModelParams& p,
                                          const ShootOptions& opts = {});

}  // namespace csh
