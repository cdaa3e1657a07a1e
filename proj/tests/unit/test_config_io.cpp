#include "../support/synthetic_gc.hpp"
#include "doctest.h"
#include "../support/grid.hpp"
#include "mixfrac/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mixfrac;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "mixfrac_unit_io" / name;
  fs::create_directories(d);
  return d;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

/// Values listed after the header line `key` until the next alphabetic line.
std::vector<double> block_after(const std::vector<std::string>& lines, const std::string& key, int skip = 0) {
  std::vector<double> v;
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (lines[i].rfind(key, 0) == 0) {
      for (std::size_t j = i + 1 + static_cast<std::size_t>(skip); j < lines.size(); ++j) {
        if (lines[j].empty() || std::isalpha(static_cast<unsigned char>(lines[j][0]))) break;
        std::istringstream is(lines[j]);
        for (double x; is >> x;) v.push_back(x);
      }
      break;
    }
  return v;
}

void write_curve(const fs::path& p, const Curve& c) {
  std::ofstream os(p);
  os.precision(17);
  os << c.x_name << ',' << c.y_name << "\n";
  for (std::size_t i = 0; i < c.size(); ++i) os << c.x[i] << ',' << c.y[i] << "\n";
}

}  // namespace

TEST_CASE("presets resolve to the strip geometry and table materials") {
  const RunConfig a = resolve_preset("strip_notch6_neohooke");
  CHECK(a.run.mesh.width == 20.0);
  CHECK(a.run.mesh.height == 28.0);
  REQUIRE(a.run.mesh.notch_height.has_value());
  CHECK(*a.run.mesh.notch_height == 6.0);
  CHECK(a.run.mesh.notch_length == 1.0);
  CHECK((*a.run.mesh.hole_center - Vec2(12.0, 18.0)).norm() == 0.0);
  CHECK(a.run.mesh.hole_diameter == 8.0);
  CHECK(a.run.material.E == 7.20);
  CHECK(a.run.material.nu == 0.49985);
  CHECK(a.run.material.Gc == 17.0);

  const RunConfig b = resolve_preset("strip_notch18_150fit");
  CHECK(*b.run.mesh.notch_height == 18.0);
  CHECK(b.run.material.E == 3.54);

  CHECK_FALSE(resolve_preset("strip_notch6_150fit_nohole").run.mesh.has_hole());
  CHECK(resolve_preset("strip_notch10_neohooke_ref2").run.solver.max_refine_levels == 2);
  CHECK_THROWS_AS(resolve_preset("strip_notch7_neohooke"), ConfigError);
  for (const auto& name : preset_names()) CHECK_NOTHROW(resolve_preset(name));
}

TEST_CASE("malformed values name the key") {
  KeyValueFile kv = KeyValueFile::parse("preset = strip_notch6_neohooke\n[mesh]\ntarget_h_mm = 0.3cm\n", "bad.cfg");
  try {
    parse_run_config(kv);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bad.cfg:3") != std::string::npos);
    CHECK(msg.find("mesh.target_h_mm") != std::string::npos);
  }
  KeyValueFile unknown = KeyValueFile::parse("[mesh]\ntarget_h_mm = 0.3\ncolour = red\n", "u.cfg");
  CHECK_THROWS_AS(parse_run_config(unknown), ConfigError);
  CHECK_THROWS_AS(KeyValueFile::parse("a = 1\na = 2\n"), ConfigError);
}

TEST_CASE("config text round-trips exactly") {
  KeyValueFile kv = KeyValueFile::parse(
      "preset = strip_notch14_150fit_ref1\n[material]\nGc_n_per_mm = 16.3\n[solver]\ndt_s = 0.007\n[output]\n"
      "snapshot_stride = 5\n");
  const RunConfig cfg = parse_run_config(kv);
  CHECK(cfg.run.material.Gc == 16.3);
  CHECK(cfg.run.solver.dt == 0.007);
  const std::string text = to_config_text(cfg);
  KeyValueFile again = KeyValueFile::parse(text);
  const RunConfig back = parse_run_config(again);
  // Only the provenance comment naming the preset is dropped.
  REQUIRE(text.rfind("# resolved from preset strip_notch14_150fit_ref1\n", 0) == 0);
  CHECK(to_config_text(back) == text.substr(text.find('\n') + 1));
  CHECK(back.run.material.mu == cfg.run.material.mu);
  CHECK(back.run.material.lambda == cfg.run.material.lambda);
  CHECK(back.run.material.eps == cfg.run.material.eps);
  CHECK(back.run.mesh.target_h == cfg.run.mesh.target_h);
  CHECK(back.snapshot_stride == 5);
}

TEST_CASE("VTK output") {
  const fs::path dir = scratch("vtk");
  {
    const Mesh m = test::grid(1, 1);
    const DofMap d(m);
    write_vtk(m, d, intact_state(d), (dir / "one.vtk").string());
    const auto lines = lines_of(dir / "one.vtk");
    CHECK(std::find(lines.begin(), lines.end(), "POINTS 4 double") != lines.end());
    CHECK(std::find(lines.begin(), lines.end(), "CELLS 1 5") != lines.end());
    const auto phi = block_after(lines, "SCALARS phi", 1);
    REQUIRE(phi.size() == 4);
    for (double v : phi) CHECK(v == 1.0);
  }
  {
    MeshBuilder b;
    const int v0 = b.add_vertex({0, 0}), v1 = b.add_vertex({1, 0}), v2 = b.add_vertex({1, 1}), v3 = b.add_vertex({0, 1});
    const int w2 = b.add_vertex({1, 1}), w3 = b.add_vertex({0, 1}), v4 = b.add_vertex({1, 2}), v5 = b.add_vertex({0, 2});
    b.add_cell({v0, v1, v2, v3});
    b.add_cell({w3, w2, v4, v5});
    b.tag_edge(v2, v3, BoundaryTag::notch_lower);
    b.tag_edge(w3, w2, BoundaryTag::notch_upper);
    const Mesh m = b.build();
    const DofMap d(m);
    write_vtk(m, d, intact_state(d), (dir / "seam.vtk").string());
    const auto lines = lines_of(dir / "seam.vtk");
    const auto pts = block_after(lines, "POINTS");
    REQUIRE(pts.size() == 3u * static_cast<std::size_t>(d.n_q1_nodes()));
    CHECK(d.n_q1_nodes() == 8);
    int coincident = 0;
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = i + 1; j < 8; ++j)
        if (pts[3 * i] == pts[3 * j] && pts[3 * i + 1] == pts[3 * j + 1]) ++coincident;
    CHECK(coincident == 2);
  }
  {
    const Mesh m = test::grid(3, 2);
    const DofMap d(m);
    write_vtk(m, d, intact_state(d), (dir / "grid.vtk").string());
    const auto pts = block_after(lines_of(dir / "grid.vtk"), "POINTS");
    CHECK(pts.size() == 3u * static_cast<std::size_t>(d.n_q1_nodes()));
    CHECK_THROWS(write_vtk(m, d, intact_state(d), "/nonexistent-dir/x.vtk"));
  }
}

TEST_CASE("time series header") {
  std::ostringstream os;
  write_timeseries_header(os);
  CHECK(os.str().rfind("step,t_s,traverse_mm,", 0) == 0);
  StepRecord r;
  r.step = 3;
  write_timeseries_row(os, r);
  std::istringstream in(os.str());
  std::string h, row;
  std::getline(in, h);
  std::getline(in, row);
  CHECK(std::count(h.begin(), h.end(), ',') == std::count(row.begin(), row.end(), ','));
}

TEST_CASE("identify reports") {
  const fs::path dir = scratch("identify");
  {
    std::ofstream os(dir / "two.csv");
    os << "strain,stress_MPa\n0.1,0.72\n0.2,1.44\n";
  }
  IdentifyOptions o;
  o.inputs = {(dir / "two.csv").string()};
  std::ostringstream out;
  identify("fit-e", o, out);
  CHECK(out.str().find("E = 7.2 MPa") != std::string::npos);

  const auto s = test::synthetic_gc();
  write_curve(dir / "unnotched.csv", s.unnotched);
  write_curve(dir / "notched.csv", s.notched);
  write_curve(dir / "crack.csv", s.crack);
  IdentifyOptions g;
  g.inputs = {(dir / "unnotched.csv").string(), (dir / "notched.csv").string(), (dir / "crack.csv").string()};
  g.output_dir = (dir / "gc_out").string();
  std::ostringstream gout;
  identify("gc", g, gout);
  const std::string report = gout.str();
  const auto pos = report.find("stationary Gc = ");
  REQUIRE(pos != std::string::npos);
  CHECK(std::stod(report.substr(pos + 16)) == doctest::Approx(17.0).epsilon(1e-3));
  CHECK(fs::exists(dir / "gc_out" / "gc_vs_crack.csv"));

  {
    std::ofstream os(dir / "nohead.csv");
    os << "eps,sigma\n0.1,0.72\n0.2,1.44\n";
  }
  o.inputs = {(dir / "nohead.csv").string()};
  CHECK_THROWS_AS(identify("fit-e", o, out), DataError);
  CHECK_THROWS_AS(identify("fit-x", o, out), DataError);
}
