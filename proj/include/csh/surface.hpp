#pragma once

#include <span>
#include <vector>

#include "csh/kernels.hpp"
#include "csh/mesh.hpp"
#include "csh/model.hpp"

namespace csh {

/// Right-hand constant 4 pi N / |S| with |S| the discrete total area.
double density_constant(const SphereMesh& mesh, int N);

int total_multiplicity(std::span<const StringPoint> points);

struct Background {
  std::vector<double> v0;
  std::vector<char> singular;  // 1 at string vertices
  double gauge = 0.0;          // additive constant applied after the zero-mean solve
  int pcg_iterations = 0;
};

/// Discrete Green solution of  Lap v0 = -4 pi N/|S| + 4 pi sum m_s delta_{p_s},
/// with the point masses lumped onto the string vertices (delta_i = 1/A_i).
/// The additive constant puts max v0 at `v0_max`.
Background background_v0(const SphereMesh& mesh, std::span<const StringPoint> points,
                         double v0_max = -1.0, const VectorOps& ops = {});

/// Closed form  sum m_s ln(chord(x, p_s)^2)  (= 2 ln(2 sin(d/2)) per point), no constant.
std::vector<double> green_closed_form(const SphereMesh& mesh, std::span<const StringPoint> points);

/// Quintic smoothstep: 1 for d <= sigma, 0 for d >= 2 sigma, C2 in between.
double cap_profile(double d, double sigma);

struct Cutoff {
  double sigma = 0.0;
  std::vector<double> rho;
  std::vector<double> f_sigma;
  double C_sigma = 0.0;
  double gap = 0.0;  // 8 pi N/|S| - C(sigma) - 4 pi N/|S|, must be positive
};

Cutoff cutoff_and_bump(const SphereMesh& mesh, std::span<const StringPoint> points, double sigma);

/// Largest sigma with disjoint 2 sigma caps and 8 pi N/|S| - C > 4 pi N/|S|,
/// then halved.
double default_sigma(const SphereMesh& mesh, std::span<const StringPoint> points);

/// prod_s (chord(x_i, p_s)^2 + delta rho_i)^{-a m_s}; the chord at a string's own
/// vertex is replaced by half the local edge length.
std::vector<double> singular_weight(const SphereMesh& mesh, std::span<const StringPoint> points,
                                    std::span<const double> rho, double a, double delta);

struct Subsolution {
  std::vector<double> w_minus;
  double beta_min = 0.0;
  int doublings = 0;
  double shift = 0.0;
  double slack_outside = 0.0;  // min over f_sigma < 1 of  Lap w - rhs(w)  at beta_min
  double slack_inside = 0.0;   // min over f_sigma = 1 of  Lap w - 4 pi N/|S|
  double max_exponent = 0.0;   // max over non-singular vertices of w + v0
  int pcg_iterations = 0;
};

struct SubsolutionOptions {
  double margin = 0.5;   // max(w + v0) = -margin at non-singular vertices
  double beta_cap = 1e12;
  double pcg_tol = 1e-13;
  VectorOps ops;
};

/// Lap w = 8 pi N/|S| f_sigma - C(sigma) in the zero-mean gauge, shifted, then
/// beta doubled from params.beta until the subsolution inequality holds for
/// delta in {0, 1} at every vertex with f_sigma < 1.
Subsolution subsolution_w_minus(const SphereMesh& mesh, std::span<const StringPoint> points,
                                const Cutoff& cutoff, const Background& bg,
                                const ModelParams& params, const SubsolutionOptions& opts = {});

/// Lap w - [beta P_delta e^{a(u - e^u)} e^u (e^u - 1) + 4 pi N/|S|] with u = w + v0.
std::vector<double> subsolution_slack(const SphereMesh& mesh, std::span<const StringPoint> points,
                                      const Cutoff& cutoff, const Background& bg,
                                      std::span<const double> w, const ModelParams& params,
                                      double delta, const VectorOps& ops = {});

/// phi_1 = -v0; throws OrderingViolation unless phi_1 > w_minus at non-singular vertices.
std::vector<double> supersolution_phi1(const Background& bg, std::span<const double> w_minus);

/// 1 + beta * max P_delta * sup f'. With delta = 0 the max skips string vertices.
double c_delta(const SphereMesh& mesh, std::span<const StringPoint> points,
               std::span<const double> rho, const ModelParams& params, double delta);

/// Everything the monotone scheme needs, assembled once per run.
struct SurfaceProblem {
  const SphereMesh* mesh = nullptr;
  std::vector<StringPoint> points;
  ModelParams params;  // beta = beta_used
  Background background;
  Cutoff cutoff;
  Subsolution subsolution;
  std::vector<double> phi1;
  double fprime_max = 0.0;
};

struct SurfaceOptions {
  double sigma = 0.0;     // 0: default_sigma
  double v0_max = -1.0;
  double subsolution_margin = 0.5;
  std::vector<double> delta_schedule;  // empty: default_delta_schedule()
  double iter_tol = 1e-10;             // sup-norm change between iterates
  int max_iterations = 200000;
  double pcg_tol = 1e-14;
  double ordering_tol = 1e-10;
  double breach_tol = 1e-9;
  int max_c_doublings = 3;
  VectorOps ops;
};

/// 2^-k for k = 0..30.
std::vector<double> default_delta_schedule();

SurfaceProblem prepare_surface_problem(const SphereMesh& mesh, std::span<const PointSpec> points,
                                       const ModelParams& params, const SurfaceOptions& opts = {});

enum class IterDirection { Decreasing, Increasing };

struct MonotoneResult {
  std::vector<double> phi;
  IterDirection direction = IterDirection::Decreasing;
  int iterations = 0;
  int restarts = 0;
  double C_used = 0.0;
  double last_change = 0.0;
  double max_wrong_way = 0.0;     // largest step against the expected direction
  double min_gap_floor = 0.0;     // min over iterates and non-singular vertices of phi_n - w_minus
  double min_gap_ceiling = 0.0;   // min of phi_1 - phi_n
  double residual_sup = 0.0;      // perturbed equation at the fixed point, non-singular vertices
  long pcg_iterations = 0;
  std::vector<double> change_history;
};

/// Iterates (Lap - C) phi_n = g_delta(phi_{n-1}) - C phi_{n-1} + 4 pi N/|S| from `start`
/// until the sup-norm change drops below opts.iter_tol. The direction of the
/// chain is Decreasing from a supersolution and Increasing from a subsolution.
MonotoneResult monotone_iterate(const SurfaceProblem& prob, double delta,
                                std::span<const double> start, IterDirection direction,
                                const SurfaceOptions& opts = {});

/// Residual  Lap phi - g_delta(phi) - 4 pi N/|S|  per vertex.
std::vector<double> surface_residual(const SurfaceProblem& prob, std::span<const double> phi,
                                     double delta, const VectorOps& ops = {});

/// sqrt( sum_{non-singular} A_i r_i^2 / sum_{non-singular} A_i ).
double area_rms(const SurfaceProblem& prob, std::span<const double> r);

struct DeltaLevel {
  double delta;
  IterDirection direction;
  int iterations;
  int restarts;
  double C_delta;
  double sup_change;     // || phi^{delta_k} - phi^{delta_{k-1}} ||_inf (0 for the first level)
  double residual_sup;
  double min_gap_floor;
  double min_gap_ceiling;
  double max_wrong_way;
};

struct SurfaceSolution {
  std::vector<double> v0;
  std::vector<double> w_minus;
  std::vector<double> phi1;
  std::vector<double> phi;
  std::vector<DeltaLevel> delta_path;
  double beta_used = 0.0;
  double sigma = 0.0;
  double residual_l2 = 0.0;   // unperturbed equation, area-weighted RMS, non-singular vertices
  double residual_sup = 0.0;
  double uniform_bound = 0.0;  // max(|phi_1|, |w_minus|) over non-singular vertices
  double max_abs_phi = 0.0;    // max over levels and non-singular vertices
  bool cauchy_decreasing = false;
  double ordering_tol = 0.0;
};

/// Runs the delta schedule: level 0 from phi_1 (decreasing chain), later
/// levels warm-started from the previous solution (increasing chain).
SurfaceSolution delta_continuation(const SurfaceProblem& prob, std::span<const double> schedule,
                                   const SurfaceOptions& opts = {});

}  // namespace csh
