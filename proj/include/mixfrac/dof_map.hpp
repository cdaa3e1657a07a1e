#pragma once

#include "mixfrac/mesh.hpp"

#include <array>
#include <vector>

namespace mixfrac {

enum class Field { u, p, phi };

/// Degrees of freedom of the (u, p, phi) triple, laid out globally as
/// [u | p | phi]. u is vector valued with the two components of a node adjacent
/// (dof 2*node + component). p and phi share the Q1 vertex numbering. The
/// classical two-field setting drops p and may use a bilinear u.
class DofMap {
 public:
  struct Layout {
    int u_degree = 2;  ///< 1 or 2
    bool pressure = true;
  };

  explicit DofMap(const Mesh& mesh) : DofMap(mesh, Layout{}) {}
  DofMap(const Mesh& mesh, Layout layout);

  const Layout& layout() const { return layout_; }
  int u_degree() const { return layout_.u_degree; }
  bool has_pressure() const { return layout_.pressure; }

  int n_u_nodes() const { return static_cast<int>(u_points_.size()); }
  int n_q1_nodes() const { return static_cast<int>(q1_points_.size()); }
  int n_u() const { return 2 * n_u_nodes(); }
  int n_p() const { return layout_.pressure ? n_q1_nodes() : 0; }
  int n_phi() const { return n_q1_nodes(); }
  int n_total() const { return n_u() + n_p() + n_phi(); }

  int p_offset() const { return n_u(); }
  int phi_offset() const { return n_u() + n_p(); }

  int u_dof(int node, int comp) const { return 2 * node + comp; }
  int p_dof(int q1node) const { return p_offset() + q1node; }
  int phi_dof(int q1node) const { return phi_offset() + q1node; }
  Field field_of(int dof) const;

  /// Number of u scalar basis functions per cell: 9 (Q2) or 4 (Q1).
  int u_nodes_per_cell() const { return layout_.u_degree == 2 ? 9 : 4; }

  /// Per active cell (indexed like Mesh::active_cells()): u nodes in reference node
  /// order (only the first u_nodes_per_cell() entries are used) and Q1 nodes.
  const std::array<int, 9>& u_nodes(int active_index) const { return u_nodes_[static_cast<std::size_t>(active_index)]; }
  const std::array<int, 4>& q1_nodes(int active_index) const { return q1_nodes_[static_cast<std::size_t>(active_index)]; }

  /// All global DoFs of a cell: u (node-major, component-minor), then p, then phi.
  std::vector<int> cell_dofs(int active_index) const;

  const Vec2& u_point(int node) const { return u_points_[static_cast<std::size_t>(node)]; }
  const Vec2& q1_point(int node) const { return q1_points_[static_cast<std::size_t>(node)]; }

  int q1_node_of_vertex(int v) const { return vertex_q1_[static_cast<std::size_t>(v)]; }
  int u_node_of_vertex(int v) const { return vertex_u_[static_cast<std::size_t>(v)]; }
  /// Q2 node on an unsplit edge, or -1.
  int u_node_of_edge(int e) const;

  /// Nodes on leaf boundary edges carrying the tag, sorted and unique.
  std::vector<int> u_nodes_on(const Mesh& mesh, BoundaryTag tag) const;
  std::vector<int> q1_nodes_on(const Mesh& mesh, BoundaryTag tag) const;

 private:
  Layout layout_;
  std::vector<std::array<int, 9>> u_nodes_;
  std::vector<std::array<int, 4>> q1_nodes_;
  std::vector<Vec2> u_points_;
  std::vector<Vec2> q1_points_;
  std::vector<int> vertex_q1_;
  std::vector<int> vertex_u_;
  std::vector<int> edge_u_;
};

}  // namespace mixfrac
