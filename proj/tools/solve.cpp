// Command-line front end: solve topo|nontopo|sphere --config FILE

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "csh/config.hpp"
#include "csh/run.hpp"

namespace {

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  every check passed\n"
    "  1  usage: bad arguments, unreadable or invalid config, regime mismatch,\n"
    "     alpha below the proven threshold, coincident string points\n"
    "  2  a check failed; manifest.json names it in \"failed_check\"\n"
    "  3  numerical failure inside a solver; manifest.json holds the error kind\n"
    "\n"
    "Environment:\n"
    "  CSH_OUTPUT_DIR  overrides [output] dir\n";

int report(const csh::RunReport& r) {
  if (!r.error.empty()) std::cerr << "error: " << r.error << "\n";
  if (!r.failed_check.empty()) {
    for (const auto& c : r.checks) {
      if (c.name == r.failed_check) {
        std::fprintf(stderr, "check failed: %s (value %.6g, threshold %.6g)\n", c.name.c_str(),
                     c.value, c.threshold);
      }
    }
  }
  std::cout << r.dir.string() << ": exit " << static_cast<int>(r.exit_code) << "\n";
  return static_cast<int>(r.exit_code);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-dual Chern-Simons-Higgs vortex solver"};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  std::string config_path;
  std::string sweep_text;
  bool allow_unproven = false;

  struct Command {
    const char* name;
    const char* help;
    csh::Regime regime;
  };
  const Command commands[] = {
      {"topo", "topological solution on the plane (aN = 1)", csh::Regime::TopologicalPlane},
      {"nontopo", "non-topological solution on the plane (aN < 1)",
       csh::Regime::NonTopologicalPlane},
      {"sphere", "strings on the unit sphere (aN = 2, N >= 3)", csh::Regime::CompactSphere},
  };
  std::vector<CLI::App*> subs;
  for (const Command& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "INI config file")->required();
    sub->add_option("--sweep", sweep_text, "key=start:stop:step, one run per value");
    sub->add_flag("--allow-unproven-alpha", allow_unproven,
                  "accept alpha below the threshold of the existence proof");
    sub->footer(kExitCodes);
    subs.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(csh::ExitCode::Usage);
  }

  csh::Regime regime = csh::Regime::TopologicalPlane;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) regime = commands[i].regime;
  }

  try {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot read " << config_path << "\n";
      return static_cast<int>(csh::ExitCode::Usage);
    }
    std::stringstream text;
    text << in.rdbuf();
    const csh::RunConfig cfg = csh::parse_config(text.str(), regime);

    csh::RunOptions opts;
    opts.allow_unproven_alpha = allow_unproven;
    if (sweep_text.empty()) return report(csh::run(cfg, opts));

    const csh::SweepSpec sweep = csh::parse_sweep(sweep_text);
    const auto reports = csh::run_sweep(cfg, sweep, opts);
    for (const auto& r : reports) report(r);
    return static_cast<int>(csh::combined_exit(reports));
  } catch (const csh::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(csh::exit_code_for(e.kind()));
  }
}
