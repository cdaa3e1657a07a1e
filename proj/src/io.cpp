#include "mixfrac/io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mixfrac {

namespace fs = std::filesystem;

void write_vtk(const Mesh& mesh, const DofMap& dofs, const Vector& x, const std::string& path) {
  if (x.size() != dofs.n_total()) throw std::invalid_argument("write_vtk: state does not match the DoF map");
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  const int n = dofs.n_q1_nodes();
  std::vector<int> u_of_q1(static_cast<std::size_t>(n), -1);
  for (int v = 0; v < static_cast<int>(mesh.vertices().size()); ++v) {
    const int q = dofs.q1_node_of_vertex(v);
    if (q >= 0) u_of_q1[static_cast<std::size_t>(q)] = dofs.u_node_of_vertex(v);
  }
  os << std::setprecision(12);
  os << "# vtk DataFile Version 3.0\nmixfrac state\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << n << " double\n";
  for (int q = 0; q < n; ++q) os << dofs.q1_point(q).x() << ' ' << dofs.q1_point(q).y() << " 0\n";
  os << "CELLS " << mesh.n_active() << ' ' << 5 * mesh.n_active() << "\n";
  for (int ai = 0; ai < mesh.n_active(); ++ai) {
    const auto& q = dofs.q1_nodes(ai);
    os << "4 " << q[0] << ' ' << q[1] << ' ' << q[2] << ' ' << q[3] << "\n";
  }
  os << "CELL_TYPES " << mesh.n_active() << "\n";
  for (int ai = 0; ai < mesh.n_active(); ++ai) os << "9\n";
  os << "POINT_DATA " << n << "\nVECTORS u double\n";
  for (int q = 0; q < n; ++q) {
    const int u = u_of_q1[static_cast<std::size_t>(q)];
    os << x(dofs.u_dof(u, 0)) << ' ' << x(dofs.u_dof(u, 1)) << " 0\n";
  }
  if (dofs.has_pressure()) {
    os << "SCALARS p double 1\nLOOKUP_TABLE default\n";
    for (int q = 0; q < n; ++q) os << x(dofs.p_dof(q)) << "\n";
  }
  os << "SCALARS phi double 1\nLOOKUP_TABLE default\n";
  for (int q = 0; q < n; ++q) os << x(dofs.phi_dof(q)) << "\n";
  os << "CELL_DATA " << mesh.n_active() << "\nSCALARS level int 1\nLOOKUP_TABLE default\n";
  for (int c : mesh.active_cells()) os << mesh.cell(c).level << "\n";
  if (!os) throw std::runtime_error("error while writing " + path);
}

const char* const kTimeSeriesHeader =
    "step,t_s,traverse_mm,Fy_mean_traction_MPa,Fy_thickness_scaled_N,Fx_N,crack_mm,E_elastic,E_crack,newton_iters,"
    "active_set,dof_u,dof_p_phi";

void write_timeseries_header(std::ostream& os) { os << kTimeSeriesHeader << "\n"; }

void write_timeseries_row(std::ostream& os, const StepRecord& r) {
  os << r.step << ',' << std::setprecision(10) << r.t << ',' << r.traverse << ',' << r.fy_mean_traction << ','
     << r.fy_thickness_scaled << ',' << r.fx << ',' << r.crack_mm << ',' << r.e_elastic << ',' << r.e_crack << ','
     << r.newton_iters << ',' << r.active_set << ',' << r.dof_u << ',' << r.dof_p_phi << "\n";
}

void write_crack_path(const CrackPath& path, const std::string& file) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file);
  os << "x_mm,y_mm\n" << std::setprecision(10);
  for (const Vec2& p : path.points) os << p.x() << ',' << p.y() << "\n";
}

namespace {

void prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

int thread_count() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace

SimulateSummary simulate(const RunConfig& cfg, std::ostream& log) {
  prepare_dir(cfg.output_dir);
  const fs::path dir(cfg.output_dir);
  std::ofstream ts(dir / "timeseries.csv");
  if (!ts) throw std::runtime_error("cannot write " + (dir / "timeseries.csv").string());
  write_timeseries_header(ts);

  int first_dof_u = -1, first_dof_pphi = -1;
  auto observer = [&](const StepRecord& r, const Discretization& d, const Vector& x) {
    if (first_dof_u < 0) {
      first_dof_u = r.dof_u;
      first_dof_pphi = r.dof_p_phi;
    }
    write_timeseries_row(ts, r);
    ts.flush();
    if (cfg.snapshot_stride > 0 && r.step % cfg.snapshot_stride == 0) {
      std::ostringstream name;
      name << "state_" << std::setw(5) << std::setfill('0') << r.step << ".vtk";
      write_vtk(d.mesh(), d.dofs(), x, (dir / name.str()).string());
    }
  };
  log << "simulate: " << (cfg.preset.empty() ? std::string("explicit config") : cfg.preset) << " -> "
      << cfg.output_dir << " (" << thread_count() << " threads)\n";
  RunResult res = run_load_loop(cfg.run, observer);

  SimulateSummary sum;
  sum.steps = static_cast<int>(res.series.size());
  sum.failed = res.failed;
  sum.stop_reason = res.stop_reason;
  for (const auto& r : res.series) sum.peak_force = std::max(sum.peak_force, r.fy_thickness_scaled);

  const Vector phi = phi_nodes(res.disc->dofs(), res.x);
  write_crack_path(crack_path(res.disc->mesh(), res.disc->dofs(), phi, cfg.run.qoi.crack_threshold),
                   (dir / "crackpath.csv").string());
  write_vtk(res.disc->mesh(), res.disc->dofs(), res.x, (dir / "final.vtk").string());

  std::ofstream man(dir / "manifest.cfg");
  if (!man) throw std::runtime_error("cannot write manifest");
  man << to_config_text(cfg);
  man << "\n# run summary\n";
  man << "# dof_u initial " << first_dof_u << " final " << res.disc->dofs().n_u() << "\n";
  man << "# dof_p_phi initial " << first_dof_pphi << " final "
      << res.disc->dofs().n_p() + res.disc->dofs().n_phi() << "\n";
  man << "# active cells final " << res.disc->mesh().n_active() << "\n";
  man << "# steps " << sum.steps << ", stop: " << sum.stop_reason << "\n";
  man << "# peak Fy_thickness_scaled_N " << sum.peak_force << "\n";
  man << "# threads " << thread_count() << "\n";
  log << "simulate: " << sum.steps << " steps, " << sum.stop_reason << ", peak Fy " << sum.peak_force << " N\n";
  return sum;
}

void mesh_preview(const RunConfig& cfg, std::ostream& log) {
  prepare_dir(cfg.output_dir);
  Mesh mesh = generate_mesh(cfg.run.mesh);
  const bool mixed = cfg.run.model.formulation == Formulation::mixed;
  DofMap dofs(mesh, DofMap::Layout{mixed ? 2 : 1, mixed});
  const std::string path = (fs::path(cfg.output_dir) / "mesh.vtk").string();
  write_vtk(mesh, dofs, intact_state(dofs), path);
  log << "mesh-preview: " << mesh.n_active() << " cells, h_max " << mesh.max_diameter() << " mm, h_min "
      << mesh.min_diameter() << " mm, dof_u " << dofs.n_u() << ", dof_p_phi " << dofs.n_p() + dofs.n_phi() << " -> "
      << path << "\n";
}

void identify(const std::string& mode, const IdentifyOptions& opt, std::ostream& out) {
  auto need = [&](std::size_t n, const char* what) {
    if (opt.inputs.size() != n) throw DataError("identify " + mode + ": expected " + what);
  };
  out << std::setprecision(8);
  if (mode == "fit-e") {
    need(1, "one stress-strain CSV");
    const Curve c = read_curve_csv(opt.inputs[0], "strain", "stress_MPa");
    ModulusFitOptions mo;
    mo.strain_max = opt.strain_max;
    mo.norm = opt.l2 ? FitNorm::L2 : FitNorm::L1;
    mo.intercept = opt.intercept;
    const ModulusFit f = fit_modulus(c, mo);
    out << "fit-e: " << (opt.l2 ? "L2" : "L1") << " fit over " << f.samples << " samples with strain <= "
        << opt.strain_max << "\nE = " << f.E << " MPa\n";
    if (opt.intercept) out << "intercept = " << f.intercept << " MPa\n";
    out << "objective = " << f.objective << "\n";
  } else if (mode == "fit-k") {
    need(1, "one force-displacement CSV");
    const Curve c = read_curve_csv(opt.inputs[0], "disp_mm", "force_N");
    BulkFitOptions bo;
    bo.force_lo = opt.force_lo;
    bo.force_hi = opt.force_hi;
    bo.area_mm2 = opt.area_mm2;
    bo.height_mm = opt.height_mm;
    const BulkFit f = fit_bulk(c, bo);
    out << "fit-k: window " << opt.force_lo << "-" << opt.force_hi << " N, " << f.samples << " samples\nslope = "
        << f.slope << " N/mm\nK = " << f.K << " MPa\n";
  } else if (mode == "gc") {
    need(3, "unnotched, notched and crack-growth CSVs");
    const Curve un = read_curve_csv(opt.inputs[0], "disp_mm", "force_N");
    const Curve no = read_curve_csv(opt.inputs[1], "disp_mm", "force_N");
    const Curve cg = read_curve_csv(opt.inputs[2], "disp_mm", "crack_mm");
    GcOptions go;
    go.c0_mm = opt.c0_mm;
    go.thickness_mm = opt.thickness_mm;
    go.window_min_crack_mm = opt.window_min_crack_mm;
    const GcEstimate est = estimate_gc(un, no, cg, go);
    const fs::path csv = fs::path(opt.output_dir) / "gc_vs_crack.csv";
    prepare_dir(opt.output_dir);
    std::ofstream os(csv);
    if (!os) throw std::runtime_error("cannot write " + csv.string());
    os << "disp_mm,crack_mm,dU_Nmm,Gc_N_per_mm\n" << std::setprecision(10);
    for (const auto& s : est.samples) os << s.u << ',' << s.c << ',' << s.dU << ',' << s.Gc << "\n";
    out << "gc: c0 = " << opt.c0_mm << " mm, thickness = " << opt.thickness_mm << " mm, window c > "
        << opt.window_min_crack_mm << " mm (" << est.window_samples << " samples)\nstationary Gc = " << est.stationary
        << " N/mm\nper-sample values: " << csv.string() << "\n";
  } else {
    throw DataError("unknown identify mode '" + mode + "' (expected fit-e, fit-k or gc)");
  }
}

}  // namespace mixfrac
