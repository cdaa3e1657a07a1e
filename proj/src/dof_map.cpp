#include "mixfrac/dof_map.hpp"

#include <algorithm>

namespace mixfrac {

DofMap::DofMap(const Mesh& mesh, Layout layout) : layout_(layout) {
  if (layout_.u_degree != 1 && layout_.u_degree != 2) throw std::invalid_argument("u_degree must be 1 or 2");
  vertex_q1_.assign(mesh.vertices().size(), -1);
  vertex_u_.assign(mesh.vertices().size(), -1);
  edge_u_.assign(mesh.edges().size(), -1);
  std::vector<int> cell_u(mesh.cells().size(), -1);

  auto q1_of = [&](int v) {
    int& n = vertex_q1_[static_cast<std::size_t>(v)];
    if (n < 0) {
      n = static_cast<int>(q1_points_.size());
      q1_points_.push_back(mesh.vertex(v));
    }
    return n;
  };
  auto u_of_vertex = [&](int v) {
    int& n = vertex_u_[static_cast<std::size_t>(v)];
    if (n < 0) {
      n = static_cast<int>(u_points_.size());
      u_points_.push_back(mesh.vertex(v));
    }
    return n;
  };

  const auto& active = mesh.active_cells();
  u_nodes_.resize(active.size());
  q1_nodes_.resize(active.size());
  for (std::size_t ai = 0; ai < active.size(); ++ai) {
    const int c = active[ai];
    const Cell& cl = mesh.cell(c);
    auto& q1 = q1_nodes_[ai];
    for (std::size_t k = 0; k < 4; ++k) q1[k] = q1_of(cl.v[k]);

    auto& un = u_nodes_[ai];
    un.fill(-1);
    if (layout_.u_degree == 1) {
      for (std::size_t k = 0; k < 4; ++k) un[k] = u_of_vertex(cl.v[k]);
      continue;
    }
    for (std::size_t k = 0; k < 4; ++k) un[k] = u_of_vertex(cl.v[k]);
    for (std::size_t k = 0; k < 4; ++k) {
      const int e = cl.e[k];
      const Edge& ed = mesh.edge(e);
      if (ed.is_split()) {
        // The coarse side's edge node coincides with the hanging vertex.
        un[4 + k] = u_of_vertex(ed.mid);
      } else {
        int& n = edge_u_[static_cast<std::size_t>(e)];
        if (n < 0) {
          n = static_cast<int>(u_points_.size());
          u_points_.push_back(0.5 * (mesh.vertex(ed.v[0]) + mesh.vertex(ed.v[1])));
        }
        un[4 + k] = n;
      }
    }
    int& centre = cell_u[static_cast<std::size_t>(c)];
    centre = static_cast<int>(u_points_.size());
    u_points_.push_back(mesh.centroid(c));
    un[8] = centre;
  }
}

Field DofMap::field_of(int dof) const {
  if (dof < n_u()) return Field::u;
  if (dof < phi_offset()) return Field::p;
  return Field::phi;
}

int DofMap::u_node_of_edge(int e) const {
  if (e < 0 || static_cast<std::size_t>(e) >= edge_u_.size()) return -1;
  return edge_u_[static_cast<std::size_t>(e)];
}

std::vector<int> DofMap::cell_dofs(int ai) const {
  std::vector<int> d;
  const int nu = u_nodes_per_cell();
  d.reserve(static_cast<std::size_t>(2 * nu + 8));
  const auto& un = u_nodes(ai);
  for (int i = 0; i < nu; ++i)
    for (int comp = 0; comp < 2; ++comp) d.push_back(u_dof(un[static_cast<std::size_t>(i)], comp));
  const auto& q1 = q1_nodes(ai);
  if (layout_.pressure)
    for (int n : q1) d.push_back(p_dof(n));
  for (int n : q1) d.push_back(phi_dof(n));
  return d;
}

std::vector<int> DofMap::u_nodes_on(const Mesh& mesh, BoundaryTag tag) const {
  std::vector<int> out;
  for (int e : mesh.boundary_edges(tag)) {
    const Edge& ed = mesh.edge(e);
    out.push_back(u_node_of_vertex(ed.v[0]));
    out.push_back(u_node_of_vertex(ed.v[1]));
    if (layout_.u_degree == 2) out.push_back(u_node_of_edge(e));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> DofMap::q1_nodes_on(const Mesh& mesh, BoundaryTag tag) const {
  std::vector<int> out;
  for (int e : mesh.boundary_edges(tag)) {
    const Edge& ed = mesh.edge(e);
    out.push_back(q1_node_of_vertex(ed.v[0]));
    out.push_back(q1_node_of_vertex(ed.v[1]));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace mixfrac
