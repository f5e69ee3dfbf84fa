// Command-line front end: epchiral <subcommand> [--config FILE] [flags]

#include <CLI11.hpp>
#include <iostream>

#include "epchiral/commands.hpp"

namespace {

struct Flags {
  std::string config;
  epchiral::Overrides o;
  std::string epsilon;
  bool self_test = false;
  bool quiet = false;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "INI configuration file")->check(CLI::ExistingFile);
  sub->add_option("--digits", f.o.digits, "significant decimal digits");
  sub->add_option("--steps", f.o.steps, "RK4 steps per cycle");
  sub->add_option("--epsilon", f.epsilon, "noise strength");
  sub->add_option("--seed", f.o.seed, "noise seed");
  sub->add_option("--workers", f.o.workers, "sweep worker threads");
  sub->add_flag("--json", f.o.json, "machine-readable output");
  sub->add_flag("--strict", f.o.strict, "treat partial failures as errors");
  sub->add_option("--out", f.o.out, "output path");
  sub->add_flag("--quiet", f.quiet, "do not echo the effective configuration");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Encircling exceptional points: exact and noisy one-cycle dynamics"};
  app.require_subcommand(1);
  Flags f;
  const char* names[] = {"exact", "evolve", "chirality", "profile", "boundary", "sweep", "validate"};
  const char* help[] = {"exact one-cycle transfer matrix and symmetry residuals",
                        "RK4 propagator, optionally noisy",
                        "non-chirality degree of the loop",
                        "condition-number profile and critical epsilons",
                        "speed-noise boundary scan and scaling fit",
                        "parameter grid to CSV and SVG",
                        "full invariant suite for the loop"};
  for (int k = 0; k < 7; ++k) {
    CLI::App* sub = app.add_subcommand(names[k], help[k]);
    add_common(sub, f);
    if (std::string(names[k]) == "chirality")
      sub->add_flag("--self-test", f.self_test, "use the CCW matrix for both directions");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : epchiral::kExitConfig;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  return epchiral::run_command(
      [&] {
        epchiral::RunConfig cfg = f.config.empty() ? epchiral::RunConfig{} : epchiral::load_config(f.config);
        if (!f.epsilon.empty()) f.o.epsilon = f.epsilon;
        epchiral::apply_overrides(cfg, f.o);
        cfg.validate();
        if (!f.quiet) {
          std::cerr << "# effective configuration\n";
          std::istringstream echo(epchiral::to_ini(cfg));
          for (std::string line; std::getline(echo, line);) std::cerr << "# " << line << "\n";
        }
        if (cmd == "exact") return epchiral::cmd_exact(cfg, std::cout);
        if (cmd == "evolve") return epchiral::cmd_evolve(cfg, std::cout);
        if (cmd == "chirality") return epchiral::cmd_chirality(cfg, std::cout, f.self_test);
        if (cmd == "profile") return epchiral::cmd_profile(cfg, std::cout);
        if (cmd == "boundary") return epchiral::cmd_boundary(cfg, std::cout);
        if (cmd == "sweep") return epchiral::cmd_sweep(cfg, std::cout, std::cerr);
        return epchiral::cmd_validate(cfg, std::cout);
      },
      std::cerr);
}
