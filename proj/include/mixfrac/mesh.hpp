#pragma once

#include "mixfrac/types.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mixfrac {

enum class BoundaryTag : std::uint8_t {
  none,
  top,
  bottom,
  left,
  right,
  hole,
  notch_upper,
  notch_lower,
};

std::string_view to_string(BoundaryTag tag);

struct Circle {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
};

/// A mesh edge. Once split, `mid` is the midpoint vertex and `child[k]` is the
/// half that touches `v[k]`.
struct Edge {
  std::array<int, 2> v{-1, -1};
  BoundaryTag tag = BoundaryTag::none;
  int mid = -1;
  std::array<int, 2> child{-1, -1};
  int parent = -1;

  bool is_split() const { return mid >= 0; }
};

/// Quadrilateral cell. Vertices run counter-clockwise and map to the reference
/// corners (-1,-1), (1,-1), (1,1), (-1,1); edge k joins v[k] and v[(k+1)%4].
/// Children are stored contiguously; child k owns corner v[k].
struct Cell {
  std::array<int, 4> v{-1, -1, -1, -1};
  std::array<int, 4> e{-1, -1, -1, -1};
  int level = 0;
  int parent = -1;
  int first_child = -1;

  bool is_active() const { return first_child < 0; }
};

/// Per-active-cell refinement flags, indexed like Mesh::active_cells().
struct RefinementMarks {
  std::vector<bool> flags;

  static RefinementMarks none(const class Mesh& mesh);
  std::size_t count() const;
};

/// Quadrilateral mesh with a refinement forest and 1-irregular hanging vertices.
///
/// Vertices, edges and cells are only ever appended, so indices stay valid in
/// every mesh derived from this one by refinement.
class Mesh {
 public:
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<int>& active_cells() const { return active_; }
  int n_active() const { return static_cast<int>(active_.size()); }

  const Vec2& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const Edge& edge(int i) const { return edges_[static_cast<std::size_t>(i)]; }
  const Cell& cell(int i) const { return cells_[static_cast<std::size_t>(i)]; }

  const std::optional<Circle>& hole() const { return hole_; }

  std::array<Vec2, 4> corners(int cell) const;
  Vec2 centroid(int cell) const;
  /// Largest vertex-to-vertex distance of the cell (the diagonals for convex quads).
  double diameter(int cell) const;
  double max_diameter() const;
  double min_diameter() const;

  /// Maps a hanging vertex to the split edge of the coarser neighbour it lies on.
  std::map<int, int> hanging_vertices() const;

  /// Leaf edges that bound active cells, each listed once.
  std::vector<int> leaf_edges() const;

  /// Boundary leaf edges carrying `tag`.
  std::vector<int> boundary_edges(BoundaryTag tag) const;

  /// Smallest Jacobian determinant of the bilinear map at the given reference points.
  double min_jacobian(int cell, const std::vector<Vec2>& ref_points) const;

  /// Throws MeshError if any active cell is inverted or any edge carries more than one
  /// hanging vertex.
  void check_invariants() const;

  friend class MeshBuilder;
  friend Mesh refine(const Mesh& mesh, const RefinementMarks& marks);

 private:
  void rebuild_active();
  int split_edge(int edge);
  void refine_cell(int cell);

  std::vector<Vec2> vertices_;
  std::vector<Edge> edges_;
  std::vector<Cell> cells_;
  std::vector<int> active_;
  std::optional<Circle> hole_;
};

/// Incremental construction of a coarse mesh; edges are shared by vertex pair.
class MeshBuilder {
 public:
  int add_vertex(const Vec2& p);
  /// Adds a counter-clockwise quadrilateral; throws MeshError on non-positive area.
  int add_cell(const std::array<int, 4>& v);
  /// Tags the edge joining a and b. Throws if there is no such edge or if it is
  /// already tagged differently.
  void tag_edge(int a, int b, BoundaryTag tag);
  bool has_edge(int a, int b) const;
  void set_hole(const Circle& c) { mesh_.hole_ = c; }
  const Vec2& vertex(int i) const { return mesh_.vertex(i); }

  Mesh build();

 private:
  int edge_for(int a, int b);
  static std::uint64_t key(int a, int b);

  Mesh mesh_;
  std::unordered_map<std::uint64_t, int> edge_lookup_;
};

/// Splits every marked cell into four and then refines further cells until the
/// mesh is 1-irregular again. Hole-boundary midpoints are snapped to the circle.
Mesh refine(const Mesh& mesh, const RefinementMarks& marks);

/// Marks active cells whose centroid lies in the axis-aligned box.
RefinementMarks mark_box(const Mesh& mesh, const Vec2& lo, const Vec2& hi);

}  // namespace mixfrac
