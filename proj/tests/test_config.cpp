#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "csh/config.hpp"
#include "csh/error.hpp"
#include "csh/run.hpp"

using namespace csh;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::ValidationError;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("csh_test_" + name);
  fs::remove_all(p);
  return p;
}

const char* kTopo =
    "[model]\n"
    "regime = topological\n"
    "n = 1\n"
    "g = 0.0795775\n"
    "kappa = 2\n";

RunConfig random_config(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);
  RunConfig c;
  const int r = pick(rng);
  if (r == 0) {
    c.model.regime = Regime::TopologicalPlane;
    c.model.N = 1 + pick(rng);
    c.model.a = 1.0 / c.model.N;
  } else if (r == 1) {
    c.model.regime = Regime::NonTopologicalPlane;
    c.model.N = 1 + pick(rng);
    c.model.G = (0.9 * u(rng) + 0.01) / (4.0 * 3.141592653589793 * c.model.N);
    c.model.lambda = 0.1 + 5.0 * u(rng);
    c.model.alpha = 0.6 + 3.0 * u(rng);
  } else {
    c.model.regime = Regime::CompactSphere;
    c.model.N = 4;
    c.model.a = 0.5;
    c.model.lambda = u(rng) + 0.5;
    if (u(rng) < 0.5) c.model.points = tetrahedral_points();
    c.numerics.mesh_level = pick(rng) + 2;
    if (u(rng) < 0.5) c.numerics.delta_schedule = {1.0, 0.5 * u(rng) + 0.1, 1e-3 * u(rng)};
    c.numerics.sigma = 0.1 * u(rng);
  }
  c.model.kappa = 0.5 + 2.0 * u(rng);
  c.numerics.t_min = -40.0 + 20.0 * u(rng);
  c.numerics.t_max = 10.0 + 20.0 * u(rng);
  c.numerics.grid_points = 101 + static_cast<int>(3000 * u(rng));
  c.numerics.step_tol = 1e-13 * (1.0 + u(rng));
  c.numerics.shoot_tol = 1e-9 * (1.0 + u(rng));
  c.output.dir = "out_" + std::to_string(static_cast<int>(1000 * u(rng)));
  c.output.deterministic = u(rng) < 0.5;
  return c;
}

}  // namespace

TEST_CASE("minimal topological config") {
  const RunConfig c = parse_config(kTopo);
  CHECK(c.model.regime == Regime::TopologicalPlane);
  CHECK(c.model.exponent() == doctest::Approx(1.0).epsilon(1e-6));
  const ModelParams p = model_params(c.model);
  CHECK(p.a == 1.0);  // snapped
  CHECK(p.beta == doctest::Approx(19.2978806698).epsilon(1e-10));
}

TEST_CASE("unknown key reports line and column") {
  const std::string text = "[model]\nregime = topological\n  betta = 3\n";
  try {
    parse_config(text);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(std::string(e.what()).find("line 3, column 3") != std::string::npos);
    CHECK(std::string(e.what()).find("betta") != std::string::npos);
  }
}

TEST_CASE("malformed input") {
  CHECK(kind_of([] { parse_config("[modle]\n"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_config("[model]\nn = 1\nn = 2\n"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_config("[model]\nn = one\n"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_config("[model]\nkappa = 1.5x\n"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_config("[output]\ndeterministic = yes\n"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_config("n = 1\n"); }) == ErrorKind::ParseError);
}

TEST_CASE("semantic validation") {
  const std::string base = "[model]\nregime = nontopological\nn = 1\na = 0.5\nalpha = 1\n";
  CHECK_NOTHROW(parse_config(base));
  CHECK(kind_of([&] { parse_config(base + "g = 0.01\n"); }) == ErrorKind::ValidationError);
  CHECK(kind_of([] { parse_config("[model]\nregime = nontopological\nn = 1\nalpha = 1\n"); }) ==
        ErrorKind::ValidationError);
  CHECK(kind_of([] { parse_config("[model]\nregime = nontopological\nn = 1\na = 0.5\n"); }) ==
        ErrorKind::ValidationError);
  CHECK(kind_of([] { parse_config(std::string(kTopo) + "lambda = 2\n"); }) ==
        ErrorKind::ValidationError);
  CHECK(kind_of([&] { parse_config(base + "kappa = 0\n"); }) == ErrorKind::ValidationError);
  CHECK(kind_of([&] { parse_config(base + "[numerics]\nt_min = 5\nt_max = 1\n"); }) ==
        ErrorKind::ValidationError);
  CHECK(kind_of([&] { parse_config(base + "[numerics]\nshoot_tol = 0\n"); }) ==
        ErrorKind::ValidationError);
  CHECK(kind_of([&] { parse_config(base + "points = 0 0 1 1\n"); }) == ErrorKind::ValidationError);
  const std::string sph = "[model]\nregime = sphere\nn = 4\na = 0.5\n";
  CHECK_NOTHROW(parse_config(sph + "points = 0 0 1 2, 0 0 -1 2\n"));
  CHECK(kind_of([&] { parse_config(sph + "[numerics]\ndelta_schedule = 1, 0.5, 0.7\n"); }) ==
        ErrorKind::ValidationError);
  CHECK(kind_of([&] { parse_config(sph + "[numerics]\nmesh_level = 9\n"); }) ==
        ErrorKind::ValidationError);
  // regime from the command line
  CHECK(parse_config("[model]\nn = 1\na = 1\n", Regime::TopologicalPlane).model.regime ==
        Regime::TopologicalPlane);
  CHECK(kind_of([] { parse_config(kTopo, Regime::CompactSphere); }) == ErrorKind::ValidationError);
}

TEST_CASE("serialize then parse is the identity on random configs") {
  std::mt19937_64 rng(20261017);
  for (int trial = 0; trial < 200; ++trial) {
    const RunConfig c = random_config(rng);
    REQUIRE_NOTHROW(validate_config(c));
    const std::string text = serialize_config(c);
    const RunConfig back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize_config(back) == text);
  }
}

TEST_CASE("sweep specification") {
  const SweepSpec s = parse_sweep("alpha=1:2:0.25");
  CHECK(s.key == "alpha");
  const auto v = s.values();
  REQUIRE(v.size() == 5);
  CHECK(v.back() == doctest::Approx(2.0));
  CHECK(kind_of([] { parse_sweep("alpha=1:2"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_sweep("alpha=1:2:0"); }) == ErrorKind::ValidationError);
  CHECK(kind_of([] { parse_sweep("alpha=2:1:0.5"); }) == ErrorKind::ValidationError);

  RunConfig c = parse_config("[model]\nregime = nontopological\nn = 1\ng = 0.03\nalpha = 1\n");
  set_config_value(c, "a", 0.4);
  CHECK_FALSE(c.model.G.has_value());
  CHECK(*c.model.a == 0.4);
  RunConfig t = parse_config(kTopo);
  set_config_value(t, "n", 2);
  CHECK(t.model.N == 2);
  CHECK(*t.model.a == 0.5);
}

TEST_CASE("exit codes by error kind") {
  CHECK(exit_code_for(ErrorKind::ParseError) == ExitCode::Usage);
  CHECK(exit_code_for(ErrorKind::ValidationError) == ExitCode::Usage);
  CHECK(exit_code_for(ErrorKind::RegimeMismatch) == ExitCode::Usage);
  CHECK(exit_code_for(ErrorKind::AlphaBelowThreshold) == ExitCode::Usage);
  CHECK(exit_code_for(ErrorKind::BlowUp) == ExitCode::NumericalFailure);
  CHECK(exit_code_for(ErrorKind::LinearSolveFailure) == ExitCode::NumericalFailure);
  std::vector<RunReport> reps(2);
  reps[1].exit_code = ExitCode::CheckFailed;
  CHECK(combined_exit(reps) == ExitCode::CheckFailed);
}

TEST_CASE("topological run is deterministic and writes its files") {
  const RunConfig c = parse_config(kTopo);
  const fs::path d1 = scratch("det1"), d2 = scratch("det2");
  const RunReport r1 = run(c, d1);
  const RunReport r2 = run(c, d2);
  CHECK(r1.exit_code == ExitCode::Ok);
  CHECK(r1.failed_check.empty());
  for (const char* f : {"profile.csv", "v.dat", "e_eta.dat", "K_eta.dat", "F12.dat"}) {
    REQUIRE(fs::exists(d1 / f));
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  auto m1 = nlohmann::json::parse(slurp(d1 / "manifest.json"));
  auto m2 = nlohmann::json::parse(slurp(d2 / "manifest.json"));
  CHECK(m1["constants"]["beta"].get<double>() == doctest::Approx(19.2978807).epsilon(1e-8));
  CHECK(m1["status"] == "ok");
  CHECK(m1["exit_code"] == 0);
  m1.erase("timestamp");
  m2.erase("timestamp");
  CHECK(m1.dump() == m2.dump());
  const std::string header = slurp(d1 / "profile.csv").substr(0, 36);
  CHECK(header == "t,r,v,v_prime,e_eta,H,K_eta,F12\n-30,");
}

TEST_CASE("output directory override from the environment") {
  RunConfig c = parse_config(kTopo);
  c.output.dir = "configured";
  ::unsetenv("CSH_OUTPUT_DIR");
  CHECK(output_dir(c) == fs::path("configured"));
  const fs::path env = scratch("env");
  ::setenv("CSH_OUTPUT_DIR", env.c_str(), 1);
  CHECK(output_dir(c) == env);
  ::unsetenv("CSH_OUTPUT_DIR");
}

TEST_CASE("regime and threshold refusals map to exit code 1") {
  RunOptions quiet;
  quiet.write_files = false;
  const RunConfig sphere2 = parse_config("[model]\nregime = sphere\nn = 2\na = 1\n");
  const RunReport rs = run(sphere2, scratch("s2"), quiet);
  CHECK(rs.exit_code == ExitCode::Usage);
  CHECK_FALSE(rs.error.empty());

  const RunConfig low = parse_config("[model]\nregime = nontopological\nn = 1\na = 0.5\nalpha = 0.3\n");
  const RunReport rl = run(low, scratch("low"), quiet);
  CHECK(rl.exit_code == ExitCode::Usage);
  RunOptions allow = quiet;
  allow.allow_unproven_alpha = true;
  CHECK(run(low, scratch("low2"), allow).exit_code != ExitCode::Usage);
}
