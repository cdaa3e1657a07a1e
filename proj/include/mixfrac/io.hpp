#pragma once

#include "mixfrac/config.hpp"
#include "mixfrac/material_id.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mixfrac {

/// Legacy ASCII VTK unstructured grid: one point per Q1 node (seam twins stay
/// separate), one quad per active cell, point arrays u, p (mixed only) and phi.
/// Throws std::runtime_error if the file cannot be written.
void write_vtk(const Mesh& mesh, const DofMap& dofs, const Vector& x, const std::string& path);

extern const char* const kTimeSeriesHeader;
void write_timeseries_header(std::ostream& os);
void write_timeseries_row(std::ostream& os, const StepRecord& r);

void write_crack_path(const CrackPath& path, const std::string& file);

/// Exit codes of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_config = 2, exit_solver = 3 };

struct SimulateSummary {
  int steps = 0;
  bool failed = false;
  std::string stop_reason;
  double peak_force = 0.0;
};

/// Runs the load loop and writes timeseries.csv, crackpath.csv, VTK snapshots
/// and manifest.cfg into cfg.output_dir. Throws SolverError on solver failure.
SimulateSummary simulate(const RunConfig& cfg, std::ostream& log);

/// Writes the initial mesh (and its DoF counts) without solving.
void mesh_preview(const RunConfig& cfg, std::ostream& log);

struct IdentifyOptions {
  std::vector<std::string> inputs;
  std::string output_dir = ".";
  double strain_max = 1.5;
  bool l2 = false;
  bool intercept = false;
  double force_lo = 1000.0;
  double force_hi = 2000.0;
  double area_mm2 = 0.0;
  double height_mm = 0.0;
  double c0_mm = 47.0;
  double thickness_mm = 1.8;
  double window_min_crack_mm = 5.0;
};

/// fit-e: stress-strain CSV (strain, stress_MPa); fit-k: disp_mm, force_N;
/// gc: unnotched, notched (disp_mm, force_N) and crack growth (disp_mm, crack_mm).
/// Writes a plain-text report to `out` and, for gc, gc_vs_crack.csv. Throws DataError.
void identify(const std::string& mode, const IdentifyOptions& opt, std::ostream& out);

}  // namespace mixfrac
