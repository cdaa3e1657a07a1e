#include "mixfrac/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace mixfrac {

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::none: return "none";
    case BoundaryTag::top: return "top";
    case BoundaryTag::bottom: return "bottom";
    case BoundaryTag::left: return "left";
    case BoundaryTag::right: return "right";
    case BoundaryTag::hole: return "hole";
    case BoundaryTag::notch_upper: return "notch_upper";
    case BoundaryTag::notch_lower: return "notch_lower";
  }
  return "unknown";
}

RefinementMarks RefinementMarks::none(const Mesh& mesh) {
  return RefinementMarks{std::vector<bool>(static_cast<std::size_t>(mesh.n_active()), false)};
}

std::size_t RefinementMarks::count() const {
  return static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
}

namespace {

double signed_area(const std::array<Vec2, 4>& p) {
  double a = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Vec2& p0 = p[static_cast<std::size_t>(k)];
    const Vec2& p1 = p[static_cast<std::size_t>((k + 1) % 4)];
    a += p0.x() * p1.y() - p1.x() * p0.y();
  }
  return 0.5 * a;
}

}  // namespace

std::array<Vec2, 4> Mesh::corners(int c) const {
  const Cell& cl = cell(c);
  return {vertex(cl.v[0]), vertex(cl.v[1]), vertex(cl.v[2]), vertex(cl.v[3])};
}

Vec2 Mesh::centroid(int c) const {
  const auto p = corners(c);
  return 0.25 * (p[0] + p[1] + p[2] + p[3]);
}

double Mesh::diameter(int c) const {
  const auto p = corners(c);
  double d = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) d = std::max(d, (p[i] - p[j]).norm());
  return d;
}

double Mesh::max_diameter() const {
  double d = 0.0;
  for (int c : active_) d = std::max(d, diameter(c));
  return d;
}

double Mesh::min_diameter() const {
  double d = std::numeric_limits<double>::infinity();
  for (int c : active_) d = std::min(d, diameter(c));
  return d;
}

std::map<int, int> Mesh::hanging_vertices() const {
  std::map<int, int> out;
  for (int c : active_)
    for (int e : cell(c).e)
      if (edge(e).is_split()) out[edge(e).mid] = e;
  return out;
}

std::vector<int> Mesh::leaf_edges() const {
  std::set<int> seen;
  for (int c : active_)
    for (int e : cell(c).e) {
      const Edge& ed = edge(e);
      if (ed.is_split()) {
        seen.insert(ed.child[0]);
        seen.insert(ed.child[1]);
      } else {
        seen.insert(e);
      }
    }
  return {seen.begin(), seen.end()};
}

std::vector<int> Mesh::boundary_edges(BoundaryTag tag) const {
  std::vector<int> out;
  for (int c : active_)
    for (int e : cell(c).e)
      if (edge(e).tag == tag) out.push_back(e);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double Mesh::min_jacobian(int c, const std::vector<Vec2>& ref_points) const {
  const auto p = corners(c);
  double jmin = std::numeric_limits<double>::infinity();
  for (const Vec2& r : ref_points) {
    const double xi = r.x(), eta = r.y();
    const std::array<double, 4> dxi{-(1 - eta) / 4, (1 - eta) / 4, (1 + eta) / 4, -(1 + eta) / 4};
    const std::array<double, 4> deta{-(1 - xi) / 4, -(1 + xi) / 4, (1 + xi) / 4, (1 - xi) / 4};
    Mat2 J = Mat2::Zero();
    for (std::size_t k = 0; k < 4; ++k) {
      J.col(0) += dxi[k] * p[k];
      J.col(1) += deta[k] * p[k];
    }
    jmin = std::min(jmin, J.determinant());
  }
  return jmin;
}

void Mesh::check_invariants() const {
  const double g = 1.0 / std::sqrt(3.0);
  const std::vector<Vec2> pts{{-g, -g}, {g, -g}, {g, g}, {-g, g}, {-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  for (int c : active_) {
    if (min_jacobian(c, pts) <= 0.0) {
      std::ostringstream os;
      os << "cell " << c << " is inverted (centroid " << centroid(c).transpose() << ")";
      throw MeshError(os.str());
    }
    for (int e : cell(c).e) {
      const Edge& ed = edge(e);
      if (!ed.is_split()) continue;
      if (edge(ed.child[0]).is_split() || edge(ed.child[1]).is_split()) {
        std::ostringstream os;
        os << "edge " << e << " of cell " << c << " carries more than one hanging vertex";
        throw MeshError(os.str());
      }
    }
  }
}

void Mesh::rebuild_active() {
  active_.clear();
  for (int c = 0; c < static_cast<int>(cells_.size()); ++c)
    if (cells_[static_cast<std::size_t>(c)].is_active()) active_.push_back(c);
}

int Mesh::split_edge(int e) {
  if (edges_[static_cast<std::size_t>(e)].is_split()) return edges_[static_cast<std::size_t>(e)].mid;
  const Edge ed = edges_[static_cast<std::size_t>(e)];
  Vec2 m = 0.5 * (vertex(ed.v[0]) + vertex(ed.v[1]));
  if (ed.tag == BoundaryTag::hole && hole_) {
    const Vec2 d = m - hole_->center;
    m = hole_->center + hole_->radius * d / d.norm();
  }
  const int mid = static_cast<int>(vertices_.size());
  vertices_.push_back(m);
  const int c0 = static_cast<int>(edges_.size());
  edges_.push_back(Edge{{ed.v[0], mid}, ed.tag, -1, {-1, -1}, e});
  edges_.push_back(Edge{{mid, ed.v[1]}, ed.tag, -1, {-1, -1}, e});
  Edge& target = edges_[static_cast<std::size_t>(e)];
  target.mid = mid;
  target.child = {c0, c0 + 1};
  return mid;
}

void Mesh::refine_cell(int c) {
  if (!cells_[static_cast<std::size_t>(c)].is_active()) return;
  std::array<int, 4> mids{};
  for (std::size_t k = 0; k < 4; ++k) mids[k] = split_edge(cells_[static_cast<std::size_t>(c)].e[k]);
  const Cell parent = cells_[static_cast<std::size_t>(c)];

  // Coons-patch centre so snapped boundary midpoints pull the centre along.
  Vec2 centre = Vec2::Zero();
  for (std::size_t k = 0; k < 4; ++k) centre += 0.5 * vertex(mids[k]) - 0.25 * vertex(parent.v[k]);
  const int cv = static_cast<int>(vertices_.size());
  vertices_.push_back(centre);

  // Interior edges mids[k] -> centre.
  const int ie = static_cast<int>(edges_.size());
  for (std::size_t k = 0; k < 4; ++k) edges_.push_back(Edge{{mids[k], cv}, BoundaryTag::none, -1, {-1, -1}, -1});

  // Half of parent edge k touching parent vertex `vk`.
  auto half = [&](std::size_t k, int vk) {
    const Edge& ed = edges_[static_cast<std::size_t>(parent.e[k])];
    return ed.v[0] == vk ? ed.child[0] : ed.child[1];
  };

  const int first = static_cast<int>(cells_.size());
  const auto& v = parent.v;
  const auto& m = mids;
  const std::array<std::array<int, 4>, 4> cv4{{
      {v[0], m[0], cv, m[3]},
      {m[0], v[1], m[1], cv},
      {cv, m[1], v[2], m[2]},
      {m[3], cv, m[2], v[3]},
  }};
  const std::array<std::array<int, 4>, 4> ce4{{
      {half(0, v[0]), ie + 0, ie + 3, half(3, v[0])},
      {half(0, v[1]), half(1, v[1]), ie + 1, ie + 0},
      {ie + 1, half(1, v[2]), half(2, v[2]), ie + 2},
      {ie + 3, ie + 2, half(2, v[3]), half(3, v[3])},
  }};
  for (std::size_t k = 0; k < 4; ++k) {
    Cell ch;
    ch.v = cv4[k];
    ch.e = ce4[k];
    ch.level = parent.level + 1;
    ch.parent = c;
    cells_.push_back(ch);
  }
  cells_[static_cast<std::size_t>(c)].first_child = first;
}

Mesh refine(const Mesh& mesh, const RefinementMarks& marks) {
  if (marks.flags.size() != static_cast<std::size_t>(mesh.n_active()))
    throw MeshError("refinement marks do not match the active cell count");
  Mesh out = mesh;
  std::vector<int> todo;
  for (std::size_t i = 0; i < marks.flags.size(); ++i)
    if (marks.flags[i]) todo.push_back(mesh.active_cells()[i]);

  while (!todo.empty()) {
    for (int c : todo) out.refine_cell(c);
    out.rebuild_active();
    todo.clear();
    // Closure: an active cell whose edge has grand-children would see two
    // hanging vertices on that edge.
    for (int c : out.active_) {
      for (int e : out.cell(c).e) {
        const Edge& ed = out.edge(e);
        if (ed.is_split() && (out.edge(ed.child[0]).is_split() || out.edge(ed.child[1]).is_split())) {
          todo.push_back(c);
          break;
        }
      }
    }
  }
  out.rebuild_active();
  return out;
}

RefinementMarks mark_box(const Mesh& mesh, const Vec2& lo, const Vec2& hi) {
  RefinementMarks m = RefinementMarks::none(mesh);
  for (std::size_t i = 0; i < m.flags.size(); ++i) {
    const Vec2 c = mesh.centroid(mesh.active_cells()[i]);
    m.flags[i] = c.x() >= lo.x() && c.x() <= hi.x() && c.y() >= lo.y() && c.y() <= hi.y();
  }
  return m;
}

// ---------------------------------------------------------------------------

std::uint64_t MeshBuilder::key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

int MeshBuilder::add_vertex(const Vec2& p) {
  mesh_.vertices_.push_back(p);
  return static_cast<int>(mesh_.vertices_.size()) - 1;
}

int MeshBuilder::edge_for(int a, int b) {
  const auto k = key(a, b);
  if (auto it = edge_lookup_.find(k); it != edge_lookup_.end()) return it->second;
  const int id = static_cast<int>(mesh_.edges_.size());
  mesh_.edges_.push_back(Edge{{a, b}, BoundaryTag::none, -1, {-1, -1}, -1});
  edge_lookup_.emplace(k, id);
  return id;
}

bool MeshBuilder::has_edge(int a, int b) const { return edge_lookup_.count(key(a, b)) > 0; }

int MeshBuilder::add_cell(const std::array<int, 4>& v) {
  const std::array<Vec2, 4> p{mesh_.vertex(v[0]), mesh_.vertex(v[1]), mesh_.vertex(v[2]), mesh_.vertex(v[3])};
  if (signed_area(p) <= 0.0) {
    std::ostringstream os;
    os << "cell with vertices " << v[0] << "," << v[1] << "," << v[2] << "," << v[3]
       << " is degenerate or clockwise";
    throw MeshError(os.str());
  }
  Cell c;
  c.v = v;
  for (std::size_t k = 0; k < 4; ++k) c.e[k] = edge_for(v[k], v[(k + 1) % 4]);
  mesh_.cells_.push_back(c);
  return static_cast<int>(mesh_.cells_.size()) - 1;
}

void MeshBuilder::tag_edge(int a, int b, BoundaryTag tag) {
  auto it = edge_lookup_.find(key(a, b));
  if (it == edge_lookup_.end()) throw MeshError("tag_edge: no edge between the given vertices");
  Edge& e = mesh_.edges_[static_cast<std::size_t>(it->second)];
  if (e.tag != BoundaryTag::none && e.tag != tag)
    throw MeshError("tag_edge: edge already carries tag " + std::string(to_string(e.tag)));
  e.tag = tag;
}

Mesh MeshBuilder::build() {
  mesh_.rebuild_active();
  Mesh out = std::move(mesh_);
  mesh_ = Mesh{};
  edge_lookup_.clear();
  return out;
}

}  // namespace mixfrac
