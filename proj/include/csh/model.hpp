#pragma once

#include <numbers>
#include <string_view>
#include <vector>

namespace csh {

enum class Regime { TopologicalPlane, NonTopologicalPlane, CompactSphere };

std::string_view to_string(Regime r);

/// Physical and coupling constants shared by every solver.
///
/// `a = 4*pi*G` is the gravitational exponent and `beta = 4*lambda/kappa^2` the
/// effective coupling. In the topological regime beta is pinned by the
/// first-integral condition and lambda is back-solved to keep the relation.
struct ModelParams {
  int N = 1;
  double G = 0.0;
  double a = 0.0;
  double kappa = 1.0;
  double lambda = 1.0;
  double beta = 4.0;
  Regime regime = Regime::TopologicalPlane;
};

/// Relative tolerance on the regime identities aN = 1 and aN = 2.
inline constexpr double kRegimeTol = 1e-12;

ModelParams make_params(int N, double G, double kappa, double lambda, Regime regime);

/// Same as make_params but takes the exponent a directly (G = a / 4pi).
ModelParams make_params_from_a(int N, double a, double kappa, double lambda, Regime regime);

/// Replaces beta by beta_topological(N, a) and back-solves lambda.
ModelParams with_topological_beta(ModelParams p);

/// Replaces beta and back-solves lambda = beta*kappa^2/4.
ModelParams with_beta(ModelParams p, double beta);

// f(v) = e^{a(v - e^v)} e^v (e^v - 1), evaluated as one exponential.
double nonlinearity_f(double v, double a);

// f'(v) = e^{a(v - e^v)} e^v (2e^v - 1 - a(1 - e^v)^2).
double nonlinearity_fprime(double v, double a);

struct Maximizer {
  double argmax;
  double value;
};

/// Global maximum of f'(., a) over the real line: grid scan then golden section.
Maximizer fprime_sup(double a);

/// Integrand of the potential after s = e^v: s^a e^{-a s} (1 - s).
double potential_density(double s, double a);

/// H(v) = -beta * int_{-inf}^v f(w, a) dw for v <= 0.
double potential_H(double v, const ModelParams& p);

/// D(a) = int_{-inf}^0 e^{a(v - e^v)} e^v (1 - e^v) dv.
double topological_denominator(double a);

double beta_topological(int N, double a);

/// F(v) = 4N^2 - 2H(v); evaluated through the upper tail int_{e^v}^1 so that
/// F keeps full relative precision as v -> 0-.
double first_integral_F(double v, const ModelParams& p);

/// F with the denominator D(a) computed once; for repeated evaluation.
class FirstIntegral {
 public:
  explicit FirstIntegral(const ModelParams& p);
  double operator()(double v) const;
  /// 4N^2 - 2 beta D, set to zero when within rounding of zero.
  double mismatch() const { return mismatch_; }

 private:
  ModelParams p_;
  double mismatch_;
};

/// Cubic Hermite table of H on nodes uniform in v (log-spaced in s = e^v).
/// Below the first node the leading asymptotic term beta*e^{(1+a)v}/(1+a) is
/// used; above 0 the table is not defined.
class PotentialTable {
 public:
  PotentialTable(const ModelParams& p, double v_lo = -20.0, int nodes = 4096);

  double operator()(double v) const;
  double v_lo() const { return v_lo_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }

 private:
  double a_;
  double beta_;
  double v_lo_;
  double step_;
  std::vector<double> grid_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

}  // namespace csh
