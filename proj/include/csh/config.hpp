#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "csh/mesh.hpp"
#include "csh/model.hpp"

namespace csh {

/// [model] section. Exactly one of `G` and `a` is set.
struct ModelConfig {
  Regime regime = Regime::TopologicalPlane;
  int N = 1;
  std::optional<double> G;
  std::optional<double> a;
  double kappa = 1.0;
  std::optional<double> lambda;         // default 1; derived, and rejected, when topological
  std::optional<double> alpha;          // non-topological apex depth
  std::vector<PointSpec> points;        // sphere; empty means spread_points(N)

  double exponent() const;  // a, from whichever of G and a was given

  bool operator==(const ModelConfig&) const = default;
};

struct NumericsConfig {
  double t_min = -30.0;
  double t_max = 20.0;
  int grid_points = 2001;
  double grid_step = 0.01;  // non-topological resampling step
  double step_tol = 1e-12;
  double shoot_tol = 1e-8;
  double tail_tol = 1e-10;
  int mesh_level = 5;
  std::vector<double> delta_schedule;  // empty: 2^-k, k = 0..30
  double sigma = 0.0;                  // 0: automatic
  double iter_tol = 1e-10;
  double pcg_tol = 1e-14;

  bool operator==(const NumericsConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  bool deterministic = true;

  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  ModelConfig model;
  NumericsConfig numerics;
  OutputConfig output;

  bool operator==(const RunConfig&) const = default;
};

Regime parse_regime(std::string_view s);
std::string_view regime_key(Regime r);  // "topological", "nontopological", "sphere"

/// INI-style text: [model], [numerics], [output]; `key = value` lines; '#' and
/// ';' start comments. Unknown sections or keys, duplicates and malformed
/// numbers raise ParseError with line and column; missing or inconsistent
/// parameters raise ValidationError. `command_regime` fills a missing
/// regime key and must agree with a present one.
RunConfig parse_config(std::string_view text, std::optional<Regime> command_regime = {});

/// Canonical form: fixed section and key order, every numeric field written
/// with %.17g, optional keys only when set. parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);

/// Invariants that hold independently of how the config was produced.
void validate_config(const RunConfig& cfg);

inline constexpr double kConfigRegimeSnap = 1e-6;

/// Builds ModelParams for the configured regime. Topological runs get the
/// pinned beta. An exponent within kConfigRegimeSnap (relative) of aN = 1 or
/// aN = 2 is moved onto that line; anything further off is left to
/// make_params, which rejects it.
ModelParams model_params(const ModelConfig& m);

/// Sets a numeric [model] or [numerics] key from its text form; used by sweeps.
void set_config_value(RunConfig& cfg, std::string_view key, double value);

}  // namespace csh
