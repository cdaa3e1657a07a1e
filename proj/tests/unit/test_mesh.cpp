#include "doctest.h"
#include "../support/grid.hpp"
#include "mixfrac/mesh_generator.hpp"

#include <cmath>
#include <random>

using namespace mixfrac;

namespace {

MeshSpec strip(double notch_height, double target_h) {
  MeshSpec s;
  s.hole_center = Vec2(12.0, 18.0);
  s.hole_diameter = 8.0;
  s.notch_height = notch_height;
  s.notch_length = 1.0;
  s.target_h = target_h;
  return s;
}

double tagged_length(const Mesh& m, BoundaryTag tag) {
  double len = 0.0;
  for (int e : m.boundary_edges(tag)) len += (m.vertex(m.edge(e).v[0]) - m.vertex(m.edge(e).v[1])).norm();
  return len;
}

}  // namespace

TEST_CASE("subdivision of the plain strip is the smallest grid meeting the diameter bound") {
  const GridSubdivision g = subdivide({0.0, 20.0}, {0.0, 28.0}, 10.0);
  const int nx = static_cast<int>(g.x.size()) - 1, ny = static_cast<int>(g.y.size()) - 1;

  int best = 1 << 30, bx = 0, by = 0;
  for (int i = 1; i <= 20; ++i)
    for (int j = 1; j <= 20; ++j)
      if (std::hypot(20.0 / i, 28.0 / j) <= 10.0 && i * j < best) {
        best = i * j;
        bx = i;
        by = j;
      }
  CHECK(nx * ny == best);
  CHECK(nx == bx);
  CHECK(ny == by);

  MeshSpec s;
  s.target_h = 10.0;
  const Mesh m = generate_mesh(s);
  CHECK(m.n_active() == best);
  CHECK(m.max_diameter() <= 10.0);
  CHECK(m.hanging_vertices().empty());
}

TEST_CASE("standard strip carries all tags and a seam on the notch") {
  const Mesh m = generate_mesh(strip(6.0, 0.3));
  m.check_invariants();
  CHECK(m.max_diameter() <= 0.3 + 1e-12);
  CHECK(tagged_length(m, BoundaryTag::top) == doctest::Approx(20.0));
  CHECK(tagged_length(m, BoundaryTag::bottom) == doctest::Approx(20.0));
  CHECK(tagged_length(m, BoundaryTag::left) == doctest::Approx(28.0));
  CHECK(tagged_length(m, BoundaryTag::right) == doctest::Approx(28.0));
  CHECK(tagged_length(m, BoundaryTag::hole) == doctest::Approx(M_PI * 8.0).epsilon(2e-3));

  for (BoundaryTag t : {BoundaryTag::notch_upper, BoundaryTag::notch_lower}) {
    const auto edges = m.boundary_edges(t);
    REQUIRE(!edges.empty());
    CHECK(tagged_length(m, t) == doctest::Approx(1.0));
    for (int e : edges)
      for (int v : m.edge(e).v) {
        CHECK(m.vertex(v).y() == doctest::Approx(6.0));
        CHECK(m.vertex(v).x() >= -1e-12);
        CHECK(m.vertex(v).x() <= 1.0 + 1e-12);
      }
  }
  // The seam duplicates the slit vertices except the tip.
  int twins = 0;
  for (int eu : m.boundary_edges(BoundaryTag::notch_upper))
    for (int el : m.boundary_edges(BoundaryTag::notch_lower))
      for (int a : m.edge(eu).v)
        for (int b : m.edge(el).v)
          if (a != b && (m.vertex(a) - m.vertex(b)).norm() < 1e-12) ++twins;
  CHECK(twins > 0);

  for (int e : m.boundary_edges(BoundaryTag::hole))
    for (int v : m.edge(e).v) CHECK((m.vertex(v) - Vec2(12.0, 18.0)).norm() == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("zero notch length gives no seam and the unnotched mesh") {
  MeshSpec a = strip(6.0, 1.0);
  a.notch_length = 0.0;
  MeshSpec b = a;
  b.notch_height.reset();
  const Mesh ma = generate_mesh(a), mb = generate_mesh(b);
  CHECK(ma.boundary_edges(BoundaryTag::notch_upper).empty());
  CHECK(ma.boundary_edges(BoundaryTag::notch_lower).empty());
  CHECK(ma.n_active() == mb.n_active());
  REQUIRE(ma.vertices().size() == mb.vertices().size());
  for (std::size_t i = 0; i < ma.vertices().size(); ++i) CHECK((ma.vertices()[i] - mb.vertices()[i]).norm() == 0.0);
}

TEST_CASE("infeasible strips are rejected") {
  MeshSpec s = strip(6.0, 1.0);
  s.hole_center = Vec2(3.0, 18.0);
  CHECK_THROWS_AS(generate_mesh(s), MeshError);
  s = strip(18.0, 1.0);
  s.notch_length = 9.0;
  CHECK_THROWS_AS(generate_mesh(s), MeshError);
  s = strip(28.5, 1.0);
  CHECK_THROWS_AS(generate_mesh(s), MeshError);
}

TEST_CASE("refine: identity, single cell, uniform") {
  const Mesh m = test::grid(4, 4, 4.0, 4.0);
  CHECK(refine(m, RefinementMarks::none(m)).n_active() == 16);

  const Mesh one = refine(m, test::mark_near(m, Vec2(1.5, 1.5)));
  CHECK(one.n_active() == 19);
  CHECK(one.hanging_vertices().size() == 4);
  one.check_invariants();

  RefinementMarks all = RefinementMarks::none(m);
  all.flags.assign(all.flags.size(), true);
  const Mesh uni = refine(m, all);
  CHECK(uni.n_active() == 64);
  CHECK(uni.hanging_vertices().empty());
}

TEST_CASE("random refinement sequences stay 1-irregular") {
  std::mt19937 rng(7);
  Mesh m = test::grid(3, 3, 3.0, 3.0);
  for (int round = 0; round < 6; ++round) {
    RefinementMarks marks = RefinementMarks::none(m);
    std::uniform_int_distribution<int> pick(0, m.n_active() - 1);
    for (int k = 0; k < 3; ++k) marks.flags[static_cast<std::size_t>(pick(rng))] = true;
    m = refine(m, marks);
    CHECK_NOTHROW(m.check_invariants());
    double area = 0.0;
    for (int c : m.active_cells()) {
      const auto p = m.corners(c);
      area += 0.5 * std::abs((p[2] - p[0]).x() * (p[3] - p[1]).y() - (p[2] - p[0]).y() * (p[3] - p[1]).x());
    }
    CHECK(area == doctest::Approx(9.0));
  }
}

TEST_CASE("hole-boundary children are snapped to the circle") {
  Mesh m = generate_mesh(strip(6.0, 2.0));
  RefinementMarks marks = RefinementMarks::none(m);
  for (int ai = 0; ai < m.n_active(); ++ai)
    if ((m.centroid(m.active_cells()[ai]) - Vec2(12.0, 18.0)).norm() < 6.0) marks.flags[ai] = true;
  m = refine(m, marks);
  m.check_invariants();
  for (int e : m.boundary_edges(BoundaryTag::hole))
    for (int v : m.edge(e).v) CHECK((m.vertex(v) - Vec2(12.0, 18.0)).norm() == doctest::Approx(4.0).epsilon(1e-12));
}
