// mixfrac command-line entry point.
#include "mixfrac/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

void apply_thread_env() {
  const char* env = std::getenv("MIXFRAC_THREADS");
  if (!env) return;
  const int n = std::atoi(env);
  if (n < 1) {
    std::cerr << "mixfrac: ignoring MIXFRAC_THREADS='" << env << "' (expected a positive integer)\n";
    return;
  }
#ifdef _OPENMP
  omp_set_num_threads(n);
#endif
}

}  // namespace

int main(int argc, char** argv) {
  using namespace mixfrac;
  apply_thread_env();

  CLI::App app{"Mixed phase-field fracture solver for nearly incompressible strips"};
  app.require_subcommand(1);

  std::string config_path;
  int verbosity = -1;
  auto* sim = app.add_subcommand("simulate", "run a load history from a config file");
  sim->add_option("config", config_path, "run configuration")->required()->check(CLI::ExistingFile);
  sim->add_option("-v,--verbosity", verbosity, "override solver.verbosity");

  auto* preview = app.add_subcommand("mesh-preview", "write the initial mesh as VTK");
  preview->add_option("config", config_path, "run configuration")->required()->check(CLI::ExistingFile);

  auto* presets = app.add_subcommand("presets", "list preset names");

  IdentifyOptions id;
  std::string mode;
  auto* ident = app.add_subcommand("identify", "material identification from test curves");
  ident->add_option("mode", mode, "fit-e | fit-k | gc")->required()->check(CLI::IsMember({"fit-e", "fit-k", "gc"}));
  ident->add_option("csv", id.inputs, "input CSV files")->required();
  ident->add_option("-o,--output-dir", id.output_dir, "directory for report files");
  ident->add_option("--strain-max", id.strain_max, "fit-e: largest strain included");
  ident->add_flag("--l2", id.l2, "fit-e: least squares instead of least absolute errors");
  ident->add_flag("--intercept", id.intercept, "fit-e: fit an intercept");
  ident->add_option("--force-lo", id.force_lo, "fit-k: window start [N]");
  ident->add_option("--force-hi", id.force_hi, "fit-k: window end [N]");
  ident->add_option("--area-mm2", id.area_mm2, "fit-k: piston area [mm^2]");
  ident->add_option("--height-mm", id.height_mm, "fit-k: specimen height [mm]");
  ident->add_option("--c0-mm", id.c0_mm, "gc: initial crack length [mm]");
  ident->add_option("--thickness-mm", id.thickness_mm, "gc: specimen thickness [mm]");
  ident->add_option("--window-min-crack-mm", id.window_min_crack_mm, "gc: stationary window c > value [mm]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*presets) {
      for (const auto& n : preset_names()) std::cout << n << "\n";
      return exit_ok;
    }
    if (*ident) {
      identify(mode, id, std::cout);
      return exit_ok;
    }
    RunConfig cfg = load_run_config(config_path);
    if (*preview) {
      mesh_preview(cfg, std::cout);
      return exit_ok;
    }
    if (verbosity >= 0) cfg.run.solver.verbosity = verbosity;
    simulate(cfg, std::cout);
    return exit_ok;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const MeshError& e) {
    std::cerr << "config error: mesh: " << e.what() << "\n";
    return exit_config;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return exit_config;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return exit_solver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_solver;
  }
}
