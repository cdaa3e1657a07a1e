#include "doctest.h"
#include "mixfrac/solver.hpp"

#include <algorithm>

using namespace mixfrac;

namespace {

/// 4 x 4 mm block with a 1 mm slit at mid-height; small Gc so it breaks within
/// a few dozen increments.
RunSettings small_block(double Gc) {
  RunSettings s;
  s.mesh.width = 4.0;
  s.mesh.height = 4.0;
  s.mesh.notch_height = 2.0;
  s.mesh.notch_length = 1.0;
  s.mesh.target_h = 0.4;
  s.material = MaterialParams::from_E_K(7.2, 2595.0, Gc, 0.004, 0.8);
  s.t_end = 3.0;
  return s;
}

/// Same block, tough enough to stay far below crack onset.
RunSettings elastic_block() {
  RunSettings s = small_block(2.0);
  s.load.notch_phase_field = false;
  s.t_end = 0.1;
  return s;
}

double peak(const RunResult& r) {
  double m = 0.0;
  for (const auto& rec : r.series) m = std::max(m, rec.fy_thickness_scaled);
  return m;
}

}  // namespace

TEST_CASE("elastic regime: monotone force, intact phase field, no refinement") {
  RunSettings s = elastic_block();
  const RunResult r = run_load_loop(s);
  REQUIRE(r.series.size() == 10);
  CHECK_FALSE(r.failed);
  for (std::size_t i = 1; i < r.series.size(); ++i) CHECK(r.series[i].fy_thickness_scaled > r.series[i - 1].fy_thickness_scaled);
  CHECK(r.series.back().phi_min > 0.9);

  s.solver.max_refine_levels = 2;
  const RunResult rr = run_load_loop(s);
  REQUIRE(rr.series.size() == r.series.size());
  CHECK(rr.disc->mesh().n_active() == r.disc->mesh().n_active());
  for (std::size_t i = 0; i < r.series.size(); ++i) CHECK(rr.series[i].fy_thickness_scaled == r.series[i].fy_thickness_scaled);
}

TEST_CASE("elastic regime: halving the increment changes the force by less than 0.1 percent") {
  RunSettings s = elastic_block();
  const RunResult a = run_load_loop(s);
  s.solver.dt = 0.5 * s.solver.dt;
  const RunResult b = run_load_loop(s);
  REQUIRE(b.series.size() == 2 * a.series.size());
  for (std::size_t i = 0; i < a.series.size(); ++i) {
    const auto& ra = a.series[i];
    const auto& rb = b.series[2 * i + 1];
    REQUIRE(rb.t == doctest::Approx(ra.t));
    CHECK(std::abs(rb.fy_thickness_scaled - ra.fy_thickness_scaled) <= 1e-3 * std::abs(ra.fy_thickness_scaled));
  }
}

TEST_CASE("serial assembly is reproducible and matches the parallel path") {
  RunSettings s = elastic_block();
  s.t_end = 0.05;
  s.solver.assembly_mode = ExecutionMode::serial;
  const RunResult a = run_load_loop(s), b = run_load_loop(s);
  CHECK((a.x - b.x).lpNorm<Eigen::Infinity>() == 0.0);
  s.solver.assembly_mode = ExecutionMode::parallel;
  const RunResult c = run_load_loop(s);
  CHECK((a.x - c.x).lpNorm<Eigen::Infinity>() <= 1e-10 * a.x.lpNorm<Eigen::Infinity>());
}

TEST_CASE("cracking run: failure, irreversibility, bounds and a larger peak for a tougher material") {
  const RunResult r = run_load_loop(small_block(0.1));
  CHECK(r.failed);
  double prev_crack = 0.0;
  std::size_t ipeak = 0;
  for (std::size_t i = 0; i < r.series.size(); ++i) {
    const auto& rec = r.series[i];
    CHECK(rec.irreversibility_violation <= 1e-10);
    CHECK(rec.bound_violation <= 1e-10);
    CHECK(rec.e_crack >= prev_crack * (1.0 - 1e-8));
    prev_crack = rec.e_crack;
    if (rec.fy_thickness_scaled > r.series[ipeak].fy_thickness_scaled) ipeak = i;
  }
  // The force drops after the peak.
  CHECK(ipeak + 1 < r.series.size());
  CHECK(r.series.back().fy_thickness_scaled < 0.5 * r.series[ipeak].fy_thickness_scaled);

  const RunResult tough = run_load_loop(small_block(0.2));
  CHECK(peak(tough) > peak(r));
}
