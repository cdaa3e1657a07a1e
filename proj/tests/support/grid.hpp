#pragma once

#include "mixfrac/mesh.hpp"

#include <algorithm>

namespace mixfrac::test {

/// nx x ny grid on [0,w] x [0,h] with the four sides tagged.
inline Mesh grid(int nx, int ny, double w = 1.0, double h = 1.0) {
  MeshBuilder b;
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) b.add_vertex(Vec2(w * i / nx, h * j / ny));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) b.add_cell({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  for (int i = 0; i < nx; ++i) {
    b.tag_edge(id(i, 0), id(i + 1, 0), BoundaryTag::bottom);
    b.tag_edge(id(i, ny), id(i + 1, ny), BoundaryTag::top);
  }
  for (int j = 0; j < ny; ++j) {
    b.tag_edge(id(0, j), id(0, j + 1), BoundaryTag::left);
    b.tag_edge(id(nx, j), id(nx, j + 1), BoundaryTag::right);
  }
  return b.build();
}

/// Marks the active cells whose centroid is closest to `p`.
inline RefinementMarks mark_near(const Mesh& m, const Vec2& p) {
  RefinementMarks marks = RefinementMarks::none(m);
  double best = 1e300;
  for (int ai = 0; ai < m.n_active(); ++ai) best = std::min(best, (m.centroid(m.active_cells()[ai]) - p).norm());
  for (int ai = 0; ai < m.n_active(); ++ai)
    if ((m.centroid(m.active_cells()[ai]) - p).norm() < best + 1e-12) marks.flags[ai] = true;
  return marks;
}

}  // namespace mixfrac::test
