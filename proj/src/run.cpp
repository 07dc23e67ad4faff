#include "csh/run.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <future>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "csh/mesh.hpp"
#include "csh/observables.hpp"
#include "csh/radial.hpp"
#include "csh/surface.hpp"

namespace csh {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kPi = std::numbers::pi;

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Checks {
 public:
  void add(std::string name, double value, double threshold, bool passed) {
    list_.push_back({std::move(name), value, threshold, passed});
  }
  // relative deviation |value - target| / |target| below tol
  void relative(std::string name, double value, double target, double tol) {
    const double dev = std::abs(value - target) / std::abs(target);
    add(std::move(name), dev, tol, dev < tol);
  }
  const std::vector<Check>& list() const { return list_; }

 private:
  std::vector<Check> list_;
};

json checks_json(const std::vector<Check>& checks) {
  json arr = json::array();
  for (const Check& c : checks) {
    arr.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold},
                   {"passed", c.passed}});
  }
  return arr;
}

json params_json(const ModelParams& p) {
  return {{"N", p.N},         {"G", p.G},           {"a", p.a},
          {"kappa", p.kappa}, {"lambda", p.lambda}, {"beta", p.beta}};
}

json steps_json(const StepStats& s) {
  return {{"accepted", s.accepted}, {"rejected", s.rejected}};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ValidationError, "cannot write " + path.string());
  out << text;
}

// Two whitespace-separated columns; non-finite rows skipped.
void write_dat(const fs::path& path, const std::string& header, std::span<const double> x,
               std::span<const double> y) {
  std::string text = "# " + header + "\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
    text += num(x[i]) + " " + num(y[i]) + "\n";
  }
  write_text(path, text);
}

double max_relative_gap(std::span<const double> x, std::span<const double> y) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double scale = std::max(std::abs(x[i]), std::abs(y[i]));
    if (scale > 0.0) worst = std::max(worst, std::abs(x[i] - y[i]) / scale);
  }
  return worst;
}

struct Outcome {
  json manifest;
  std::vector<Check> checks;
};

void write_profile(const fs::path& dir, const RadialSolution& sol, const PlanarObservables& obs) {
  std::string csv = "t,r,v,v_prime,e_eta,H,K_eta,F12\n";
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    csv += num(sol.t[i]) + "," + num(obs.r[i]) + "," + num(sol.v[i]) + "," +
           num(sol.v_prime[i]) + "," + num(obs.e_eta[i]) + "," + num(obs.energy_density[i]) + "," +
           num(obs.K_eta[i]) + "," + num(obs.F12[i]) + "\n";
  }
  write_text(dir / "profile.csv", csv);
  write_dat(dir / "v.dat", "t v", sol.t, sol.v);
  write_dat(dir / "v_prime.dat", "t v_prime", sol.t, sol.v_prime);
  write_dat(dir / "e_eta.dat", "r e_eta", obs.r, obs.e_eta);
  write_dat(dir / "energy_density.dat", "r H", obs.r, obs.energy_density);
  write_dat(dir / "K_eta.dat", "r K_eta", obs.r, obs.K_eta);
  write_dat(dir / "F12.dat", "r F12", obs.r, obs.F12);
}

json observables_json(const PlanarObservables& obs) {
  return {{"flux",
           {{"quadrature", obs.flux.quadrature},
            {"grid_part", obs.flux.grid_part},
            {"tail_left", obs.flux.tail_left},
            {"tail_right", obs.flux.tail_right},
            {"boundary", obs.flux.boundary},
            {"relative_gap", obs.flux.relative_gap}}},
          {"energy",
           {{"value", obs.energy.value},
            {"grid_part", obs.energy.grid_part},
            {"tail_left", obs.energy.tail_left},
            {"tail_right", obs.energy.tail_right}}},
          {"einstein",
           {{"residual_sup", obs.einstein.residual_sup},
            {"t_lo", obs.einstein.t_lo},
            {"t_hi", obs.einstein.t_hi},
            {"nodes", obs.einstein.nodes}}},
          {"metric_tail", {{"fitted", obs.metric_tail.fitted}, {"expected", obs.metric_tail.expected}}}};
}

json totals_json(double flux, double energy, std::optional<double> einstein,
                 const Completeness& c) {
  json t = {{"flux", flux}, {"energy", energy}};
  t["einstein_residual_sup"] = einstein ? json(*einstein) : json(nullptr);
  t["completeness_margin"] = c.applicable ? json(c.margin) : json("not applicable");
  return t;
}

// Checks shared by both planar branches.
void planar_checks(Checks& checks, const RadialSolution& sol, const PlanarObservables& obs,
                   double flux_target) {
  const ModelParams& p = sol.params;
  checks.add("flux_two_way", obs.flux.relative_gap, 1e-3, obs.flux.relative_gap <= 1e-3);
  checks.relative("flux_quadrature", obs.flux.quadrature, flux_target, 0.01);
  checks.relative("flux_boundary", obs.flux.boundary, flux_target, 0.01);
  checks.add("energy_lower_bound", obs.energy.value / (kPi * p.N), 1.0 - 1e-6,
             obs.energy.value >= (1.0 - 1e-6) * kPi * p.N);
  checks.relative("energy_flux_relation", obs.energy.value, 0.5 * obs.flux.quadrature, 0.01);
  checks.add("einstein_residual", obs.einstein.residual_sup, 1e-4, obs.einstein.residual_sup < 1e-4);
  checks.relative("metric_tail_slope", obs.metric_tail.fitted, obs.metric_tail.expected, 0.02);
  const double forms = max_relative_gap(obs.energy_density, energy_density_alt(sol));
  checks.add("energy_density_forms", forms, 1e-8, forms < 1e-8);
  checks.add("completeness", obs.completeness.margin, 0.0, obs.completeness.satisfied);
}

Outcome run_topological(const RunConfig& cfg, const fs::path& dir, bool write) {
  const ModelParams p = model_params(cfg.model);
  TopologicalOptions opts;
  opts.t_min = cfg.numerics.t_min;
  opts.t_max = cfg.numerics.t_max;
  opts.grid_points = cfg.numerics.grid_points;
  opts.step_tol = cfg.numerics.step_tol;
  const RadialSolution sol = integrate_topological(p, opts);
  const PlanarObservables obs = planar_observables(sol);
  const double mu = linear_decay_rate(p);

  Checks checks;
  const double fi = sol.diagnostics.first_integral_residual;
  checks.add("first_integral_residual", fi, 1e-9, fi < 1e-9);
  checks.add("terminal_value", sol.v.back(), -1e-6, sol.v.back() > -1e-6 && sol.v.back() <= 0.0);
  checks.relative("decay_exponent", sol.asymptotics.decay_exponent, mu, 0.05);
  checks.relative("energy_quantization", obs.energy.value, kPi * p.N, 0.01);
  planar_checks(checks, sol, obs, 2.0 * kPi * p.N);

  json m;
  m["constants"] = params_json(p);
  m["solver"] = {{"kind", "topological"},
                 {"beta_topological", p.beta},
                 {"decay_exponent", sol.asymptotics.decay_exponent},
                 {"decay_fit_r_squared", sol.asymptotics.r_squared},
                 {"linear_decay_rate", mu},
                 {"v_terminal", sol.v.back()},
                 {"first_integral_residual", fi},
                 {"cross_check_discrepancy", sol.diagnostics.cross_check_discrepancy},
                 {"cross_check_t_end", sol.diagnostics.cross_check_t_end},
                 {"seed_correction", sol.diagnostics.seed_correction},
                 {"steps", steps_json(sol.diagnostics.steps)}};
  m["observables"] = observables_json(obs);
  m["totals"] = totals_json(obs.flux.quadrature, obs.energy.value, obs.einstein.residual_sup,
                            obs.completeness);
  m["tolerances"] = {{"rtol", sol.diagnostics.rtol},
                     {"atol", sol.diagnostics.atol},
                     {"terminal_tol", opts.terminal_tol},
                     {"cross_check_tol", opts.cross_check_tol}};
  if (write) write_profile(dir, sol, obs);
  return {std::move(m), checks.list()};
}

Outcome run_nontopological(const RunConfig& cfg, const fs::path& dir, bool write,
                           bool allow_unproven_alpha) {
  const ModelParams p = model_params(cfg.model);
  ShootOptions so;
  so.tol = cfg.numerics.shoot_tol;
  so.allow_unproven_alpha = allow_unproven_alpha;
  so.apex.step_tol = cfg.numerics.step_tol;
  so.apex.tail_tol = cfg.numerics.tail_tol;
  so.apex.grid_step = cfg.numerics.grid_step;
  const double alpha = *cfg.model.alpha;
  const NonTopologicalResult res = solve_nontopological(alpha, p, so);
  const ShootingRecord& rec = res.record;
  const RadialSolution& sol = res.solution;
  const EnergyIdentity ei = energy_identity(sol, p, so.apex);
  const PlanarObservables obs = planar_observables(sol);

  Checks checks;
  const double miss = std::abs(rec.eta - 2.0 * p.N);
  checks.add("shooting_converged", miss, so.tol, miss < so.tol);
  checks.add("slope_bound", rec.k, rec.slope_bound, rec.slope_bound_holds);
  checks.add("energy_inequality", rec.energy_margin, 0.0, rec.energy_inequality_holds);
  checks.add("energy_identity", ei.relative_residual, 1e-6, ei.relative_residual < 1e-6);
  planar_checks(checks, sol, obs, kPi * (rec.k + 2.0 * p.N));

  json iters = json::array();
  for (const BisectionStep& s : rec.iterations) {
    iters.push_back({{"t0_low", s.t0_low}, {"t0_high", s.t0_high}, {"t0_mid", s.t0_mid},
                     {"eta_mid", s.eta_mid}});
  }
  json m;
  m["constants"] = params_json(p);
  m["solver"] = {{"kind", "nontopological"},
                 {"alpha", rec.alpha},
                 {"alpha_threshold", alpha_threshold(p.a)},
                 {"proven_regime", rec.proven_regime},
                 {"t0", rec.t0},
                 {"eta", rec.eta},
                 {"k", rec.k},
                 {"bracket", {rec.t0_low, rec.t0_high}},
                 {"bracket_initial", {rec.t0_low_initial, rec.t0_high_initial}},
                 {"K_bound", rec.K_bound},
                 {"slope_bound", rec.slope_bound},
                 {"energy_margin", rec.energy_margin},
                 {"energy_identity",
                  {{"lhs", ei.lhs},
                   {"term1", ei.term1},
                   {"term2", ei.term2},
                   {"term3", ei.term3},
                   {"relative_residual", ei.relative_residual}}},
                 {"tail_bound_left", sol.diagnostics.tail_bound_left},
                 {"tail_bound_right", sol.diagnostics.tail_bound_right},
                 {"steps", steps_json(sol.diagnostics.steps)},
                 {"iterations", iters}};
  m["observables"] = observables_json(obs);
  m["totals"] = totals_json(obs.flux.quadrature, obs.energy.value, obs.einstein.residual_sup,
                            obs.completeness);
  m["tolerances"] = {{"shoot_tol", so.tol},
                     {"step_tol", so.apex.step_tol},
                     {"tail_tol", so.apex.tail_tol},
                     {"source_floor", so.apex.source_floor},
                     {"grid_step", so.apex.grid_step}};
  if (write) {
    write_profile(dir, sol, obs);
    std::vector<double> idx, gap;
    for (std::size_t i = 0; i < rec.iterations.size(); ++i) {
      idx.push_back(static_cast<double>(i));
      gap.push_back(rec.iterations[i].eta_mid - 2.0 * p.N);
    }
    write_dat(dir / "bisection.dat", "iteration eta-2N", idx, gap);
  }
  return {std::move(m), checks.list()};
}

Outcome run_sphere(const RunConfig& cfg, const fs::path& dir, bool write) {
  const ModelParams p = model_params(cfg.model);
  const SphereMesh mesh = build_icosphere(cfg.numerics.mesh_level);
  const std::vector<PointSpec> pts =
      cfg.model.points.empty() ? spread_points(cfg.model.N) : cfg.model.points;
  SurfaceOptions so;
  so.sigma = cfg.numerics.sigma;
  so.iter_tol = cfg.numerics.iter_tol;
  so.pcg_tol = cfg.numerics.pcg_tol;
  so.ops.fixed_order = cfg.output.deterministic;
  const SurfaceProblem prob = prepare_surface_problem(mesh, pts, p, so);
  const std::vector<double> schedule =
      cfg.numerics.delta_schedule.empty() ? default_delta_schedule() : cfg.numerics.delta_schedule;
  const SurfaceSolution sol = delta_continuation(prob, schedule, so);
  const SphereObservables obs = sphere_observables(prob, sol.phi);

  double chain = 0.0;  // worst ordering violation over all levels
  for (const DeltaLevel& l : sol.delta_path) {
    chain = std::max({chain, -l.min_gap_floor, -l.min_gap_ceiling, l.max_wrong_way});
  }
  Checks checks;
  const int chi = mesh.euler_characteristic();
  checks.add("euler_characteristic", chi, 2.0, chi == 2);
  checks.add("bump_condition", prob.cutoff.gap, 0.0, prob.cutoff.gap > 0.0);
  checks.add("subsolution_outside_caps", prob.subsolution.slack_outside, 0.0,
             prob.subsolution.slack_outside > 0.0);
  checks.add("subsolution_inside_caps", prob.subsolution.slack_inside, 0.0,
             prob.subsolution.slack_inside > 0.0);
  checks.add("ordering_chain", chain, sol.ordering_tol, chain <= sol.ordering_tol);
  checks.add("cauchy_decreasing", sol.cauchy_decreasing ? 1.0 : 0.0, 1.0, sol.cauchy_decreasing);
  checks.add("residual_l2", sol.residual_l2, 1e-3, sol.residual_l2 < 1e-3);
  checks.relative("flux_quantization", obs.flux, 2.0 * kPi * p.N, 0.02);

  json path = json::array();
  for (const DeltaLevel& l : sol.delta_path) {
    path.push_back({{"delta", l.delta},
                    {"direction", l.direction == IterDirection::Decreasing ? "decreasing" : "increasing"},
                    {"iterations", l.iterations},
                    {"restarts", l.restarts},
                    {"C_delta", l.C_delta},
                    {"sup_change", l.sup_change},
                    {"residual_sup", l.residual_sup},
                    {"min_gap_floor", l.min_gap_floor},
                    {"min_gap_ceiling", l.min_gap_ceiling},
                    {"max_wrong_way", l.max_wrong_way}});
  }
  json points = json::array();
  for (const StringPoint& s : prob.points) {
    const Vec3& x = mesh.vertices[s.vertex];
    points.push_back({{"vertex", s.vertex}, {"multiplicity", s.multiplicity},
                      {"position", {x[0], x[1], x[2]}}});
  }
  json m;
  m["constants"] = params_json(p);
  m["solver"] = {{"kind", "sphere"},
                 {"level", mesh.level},
                 {"vertices", mesh.vertex_count()},
                 {"faces", mesh.faces.size()},
                 {"euler_characteristic", chi},
                 {"total_area", mesh.total_area},
                 {"area_error", mesh.area_error},
                 {"min_edge_weight", mesh.min_edge_weight},
                 {"negative_edge_weights", mesh.negative_weights},
                 {"string_points", points},
                 {"N", p.N},
                 {"G", p.G},
                 {"a", p.a},
                 {"beta_input", model_params(cfg.model).beta},
                 {"beta_used", sol.beta_used},
                 {"beta_doublings", prob.subsolution.doublings},
                 {"sigma", sol.sigma},
                 {"C_sigma", prob.cutoff.C_sigma},
                 {"bump_gap", prob.cutoff.gap},
                 {"subsolution_slack_outside", prob.subsolution.slack_outside},
                 {"subsolution_slack_inside", prob.subsolution.slack_inside},
                 {"fprime_sup", prob.fprime_max},
                 {"uniform_bound", sol.uniform_bound},
                 {"max_abs_phi", sol.max_abs_phi},
                 {"delta_path", path},
                 {"residuals", {{"l2", sol.residual_l2}, {"sup", sol.residual_sup}}}};
  m["totals"] = totals_json(obs.flux, 0.5 * obs.flux, std::nullopt, obs.completeness);
  m["tolerances"] = {{"iter_tol", so.iter_tol},
                     {"pcg_tol", so.pcg_tol},
                     {"ordering_tol", so.ordering_tol},
                     {"breach_tol", so.breach_tol}};

  if (write) {
    std::string v = "index,x,y,z,area\n";
    for (int i = 0; i < mesh.vertex_count(); ++i) {
      const Vec3& x = mesh.vertices[i];
      v += std::to_string(i) + "," + num(x[0]) + "," + num(x[1]) + "," + num(x[2]) + "," +
           num(mesh.areas[i]) + "\n";
    }
    write_text(dir / "vertices.csv", v);
    std::string f = "index,v0,v1,v2\n";
    for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
      const auto& t = mesh.faces[i];
      f += std::to_string(i) + "," + std::to_string(t[0]) + "," + std::to_string(t[1]) + "," +
           std::to_string(t[2]) + "\n";
    }
    write_text(dir / "faces.csv", f);
    std::string fl = "index,singular,v0,w_minus,phi1,phi,v,e_eta,F12\n";
    for (int i = 0; i < mesh.vertex_count(); ++i) {
      fl += std::to_string(i) + "," + std::to_string(static_cast<int>(prob.background.singular[i])) +
            "," + num(sol.v0[i]) + "," + num(sol.w_minus[i]) + "," + num(sol.phi1[i]) + "," +
            num(sol.phi[i]) + "," + num(sol.phi[i] + sol.v0[i]) + "," + num(obs.e_eta[i]) + "," +
            num(obs.F12[i]) + "\n";
    }
    write_text(dir / "fields.csv", fl);
    std::vector<double> d, ch, it;
    for (const DeltaLevel& l : sol.delta_path) {
      d.push_back(l.delta);
      ch.push_back(l.sup_change);
      it.push_back(l.iterations);
    }
    write_dat(dir / "delta_change.dat", "delta sup_change", d, ch);
    write_dat(dir / "delta_iterations.dat", "delta iterations", d, it);
  }
  return {std::move(m), checks.list()};
}

}  // namespace

ExitCode exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::ValidationError:
    case ErrorKind::RegimeMismatch:
    case ErrorKind::CompletenessViolation:
    case ErrorKind::TopologicalBetaMismatch:
    case ErrorKind::AlphaBelowThreshold:
    case ErrorKind::CoincidentPointsUnresolvable:
      return ExitCode::Usage;
    default:
      return ExitCode::NumericalFailure;
  }
}

fs::path output_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("CSH_OUTPUT_DIR"); env && *env) return env;
  return cfg.output.dir;
}

RunReport run(const RunConfig& cfg, const RunOptions& opts) {
  return run(cfg, output_dir(cfg), opts);
}

RunReport run(const RunConfig& cfg, const fs::path& dir, const RunOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.dir = dir;
  json manifest;
  manifest["regime"] = regime_key(cfg.model.regime);
  manifest["config"] = serialize_config(cfg);
  try {
    validate_config(cfg);
    if (opts.write_files) fs::create_directories(dir);
    Outcome out;
    switch (cfg.model.regime) {
      case Regime::TopologicalPlane:
        out = run_topological(cfg, dir, opts.write_files);
        break;
      case Regime::NonTopologicalPlane:
        out = run_nontopological(cfg, dir, opts.write_files, opts.allow_unproven_alpha);
        break;
      case Regime::CompactSphere:
        out = run_sphere(cfg, dir, opts.write_files);
        break;
    }
    for (auto& [key, value] : out.manifest.items()) manifest[key] = value;
    report.checks = out.checks;
    for (const Check& c : report.checks) {
      if (!c.passed) {
        report.failed_check = c.name;
        report.exit_code = ExitCode::CheckFailed;
        break;
      }
    }
    manifest["checks"] = checks_json(report.checks);
    manifest["status"] = report.exit_code == ExitCode::Ok ? "ok" : "check_failed";
    manifest["failed_check"] =
        report.failed_check.empty() ? json(nullptr) : json(report.failed_check);
    manifest["error"] = nullptr;
  } catch (const Error& e) {
    report.exit_code = exit_code_for(e.kind());
    report.error = e.what();
    manifest["status"] = "error";
    manifest["failed_check"] = nullptr;
    manifest["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}};
  } catch (const fs::filesystem_error& e) {
    report.exit_code = ExitCode::Usage;
    report.error = e.what();
    return report;
  }
  manifest["exit_code"] = static_cast<int>(report.exit_code);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  // the only field that differs between identical runs
  manifest["timestamp"] = {{"utc", utc_now()}, {"wall_time_s", wall}};
  if (opts.write_files) {
    try {
      fs::create_directories(dir);
      write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
      if (report.exit_code == ExitCode::Ok) report.exit_code = ExitCode::Usage;
      report.error = e.what();
    }
  }
  return report;
}

std::vector<double> SweepSpec::values() const {
  std::vector<double> out;
  const double slack = 1e-9 * std::abs(step);
  for (int i = 0;; ++i) {
    const double x = start + i * step;
    if (x > stop + slack) break;
    out.push_back(x);
  }
  return out;
}

SweepSpec parse_sweep(std::string_view text) {
  const auto fail = [&](const std::string& why) -> SweepSpec {
    throw Error(ErrorKind::ParseError, "sweep '" + std::string(text) + "': " + why);
  };
  const std::size_t eq = text.find('=');
  if (eq == std::string_view::npos || eq == 0) return fail("expected key=start:stop:step");
  SweepSpec s;
  s.key = std::string(text.substr(0, eq));
  double parts[3];
  std::string_view rest = text.substr(eq + 1);
  for (int k = 0; k < 3; ++k) {
    const std::size_t colon = rest.find(':');
    if ((k < 2) != (colon != std::string_view::npos)) return fail("expected start:stop:step");
    const std::string_view piece = k < 2 ? rest.substr(0, colon) : rest;
    const auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), parts[k]);
    if (ec != std::errc() || ptr != piece.data() + piece.size() || piece.empty()) {
      return fail("'" + std::string(piece) + "' is not a number");
    }
    if (k < 2) rest = rest.substr(colon + 1);
  }
  s.start = parts[0];
  s.stop = parts[1];
  s.step = parts[2];
  if (!(s.step > 0.0)) throw Error(ErrorKind::ValidationError, "sweep step must be positive");
  if (s.stop < s.start) throw Error(ErrorKind::ValidationError, "sweep range is empty");
  return s;
}

std::vector<RunReport> run_sweep(const RunConfig& cfg, const SweepSpec& sweep,
                                 const RunOptions& opts) {
  const fs::path base = output_dir(cfg);
  const std::vector<double> values = sweep.values();
  std::vector<RunReport> reports(values.size());
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t first = 0; first < values.size(); first += workers) {
    std::vector<std::future<RunReport>> batch;
    for (std::size_t i = first; i < std::min(values.size(), first + workers); ++i) {
      batch.push_back(std::async(std::launch::async, [&, i] {
        char name[64];
        std::snprintf(name, sizeof name, "%s_%.6g", sweep.key.c_str(), values[i]);
        RunConfig local = cfg;
        try {
          set_config_value(local, sweep.key, values[i]);
        } catch (const Error& e) {
          RunReport r;
          r.exit_code = exit_code_for(e.kind());
          r.error = e.what();
          r.dir = base / name;
          return r;
        }
        return run(local, base / name, opts);
      }));
    }
    for (std::size_t k = 0; k < batch.size(); ++k) reports[first + k] = batch[k].get();
  }
  return reports;
}

ExitCode combined_exit(const std::vector<RunReport>& reports) {
  int worst = 0;
  for (const RunReport& r : reports) worst = std::max(worst, static_cast<int>(r.exit_code));
  return static_cast<ExitCode>(worst);
}

}  // namespace csh
