#include "mixfrac/qoi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>

namespace mixfrac {

namespace {

/// Gradient of u, p and phi at a reference point of active cell ai.
struct PointFields {
  Mat2 grad_u = Mat2::Zero();
  double p = 0.0;
  double phi = 0.0;
};

PointFields eval_point(const Assembler& asmb, const Vector& x, int ai, const Vec2& ref) {
  const Mesh& mesh = asmb.mesh();
  const DofMap& dofs = asmb.dofs();
  const int cell = mesh.active_cells()[static_cast<std::size_t>(ai)];
  const CellMap map(mesh.corners(cell));
  const Mat2 Jinv = map.jacobian(ref).inverse();
  const bool q2 = dofs.u_degree() == 2;
  const auto su = shape_eval(q2 ? ElementKind::Q2_vector2 : ElementKind::Q1_scalar, ref);
  const auto s1 = shape_eval(ElementKind::Q1_scalar, ref);
  const Eigen::MatrixX2d du = su.grads * Jinv;
  PointFields f;
  const auto& un = dofs.u_nodes(ai);
  for (int i = 0; i < dofs.u_nodes_per_cell(); ++i)
    for (int c = 0; c < 2; ++c) {
      const double v = x(dofs.u_dof(un[static_cast<std::size_t>(i)], c));
      f.grad_u(c, 0) += v * du(i, 0);
      f.grad_u(c, 1) += v * du(i, 1);
    }
  const auto& qn = dofs.q1_nodes(ai);
  for (int j = 0; j < 4; ++j) {
    const int n = qn[static_cast<std::size_t>(j)];
    if (dofs.has_pressure()) f.p += s1.values(j) * x(dofs.p_dof(n));
    f.phi += s1.values(j) * x(dofs.phi_dof(n));
  }
  return f;
}

}  // namespace

ForceRecord boundary_force(const Assembler& asmb, const Vector& x, BoundaryTag tag, StressEval eval) {
  const Mesh& mesh = asmb.mesh();
  const MaterialParams& m = asmb.material();
  std::vector<double> gx, gw;
  gauss_legendre_1d(3, gx, gw);
  ForceRecord rec;
  rec.tag = tag;
  bool found = false;
  for (int ai = 0; ai < mesh.n_active(); ++ai) {
    const Cell& cl = mesh.cell(mesh.active_cells()[static_cast<std::size_t>(ai)]);
    for (int k = 0; k < 4; ++k) {
      if (mesh.edge(cl.e[static_cast<std::size_t>(k)]).tag != tag) continue;
      found = true;
      const Vec2 p0 = mesh.vertex(cl.v[static_cast<std::size_t>(k)]);
      const Vec2 p1 = mesh.vertex(cl.v[static_cast<std::size_t>((k + 1) % 4)]);
      const Vec2 d = p1 - p0;
      const double len = d.norm();
      const Vec2 n(d.y() / len, -d.x() / len);
      rec.length += len;
      for (std::size_t g = 0; g < gx.size(); ++g) {
        const auto f = eval_point(asmb, x, ai, edge_reference_point(k, gx[g]));
        const Mat2 E = 0.5 * (f.grad_u + f.grad_u.transpose());
        Mat2 sigma;
        if (eval == StressEval::undegraded) {
          sigma = 2.0 * m.mu * E + m.lambda * E.trace() * Mat2::Identity();
        } else {
          const auto ps = point_stress(E, f.p, m, asmb.model());
          sigma = degradation(f.phi, m.kappa) * ps.split.plus + ps.split.minus;
        }
        rec.integral += sigma * n * (0.5 * len * gw[g]);
      }
    }
  }
  if (!found) throw std::invalid_argument("boundary_force: no boundary edges tagged " + std::string(to_string(tag)));
  return rec;
}

Energies energies(const Assembler& asmb, const Vector& x) {
  const Mesh& mesh = asmb.mesh();
  const DofMap& dofs = asmb.dofs();
  const MaterialParams& m = asmb.material();
  const auto& tables = asmb.tables();
  Energies en;
  CellValues cv;
  for (int ai = 0; ai < mesh.n_active(); ++ai) {
    const int cell = mesh.active_cells()[static_cast<std::size_t>(ai)];
    tables.reinit(mesh.corners(cell), cv);
    const auto& un = dofs.u_nodes(ai);
    const auto& qn = dofs.q1_nodes(ai);
    for (int q = 0; q < cv.n_q; ++q) {
      const auto sq = static_cast<std::size_t>(q);
      Mat2 G = Mat2::Zero();
      for (int i = 0; i < dofs.u_nodes_per_cell(); ++i) {
        const Vec2 grad = dofs.u_degree() == 2 ? Vec2(cv.q2_grad[sq].row(i).transpose()) : Vec2(cv.q1_grad[sq].row(i).transpose());
        for (int c = 0; c < 2; ++c) G.row(c) += x(dofs.u_dof(un[static_cast<std::size_t>(i)], c)) * grad.transpose();
      }
      double p = 0.0, phi = 0.0;
      Vec2 gphi = Vec2::Zero();
      for (int j = 0; j < 4; ++j) {
        const int n = qn[static_cast<std::size_t>(j)];
        if (dofs.has_pressure()) p += cv.q1[sq](j) * x(dofs.p_dof(n));
        phi += cv.q1[sq](j) * x(dofs.phi_dof(n));
        gphi += x(dofs.phi_dof(n)) * cv.q1_grad[sq].row(j).transpose();
      }
      const Mat2 E = 0.5 * (G + G.transpose());
      const auto ps = point_stress(E, p, m, asmb.model());
      const Mat2 S = degradation(phi, m.kappa) * ps.split.plus + ps.split.minus;
      en.elastic += 0.5 * (S.array() * E.array()).sum() * cv.JxW[sq];
      en.crack += crack_energy_density(asmb.model().crack, phi, gphi, m.Gc, m.eps) * cv.JxW[sq];
    }
  }
  return en;
}

double CrackPath::max_height() const {
  double h = -std::numeric_limits<double>::infinity();
  for (const Vec2& p : points) h = std::max(h, p.y());
  return h;
}

Vector phi_nodes(const DofMap& dofs, const Vector& x) { return x.segment(dofs.phi_offset(), dofs.n_phi()); }

namespace {

std::set<int> q1_nodes_tagged(const Mesh& mesh, const DofMap& dofs, const std::vector<BoundaryTag>& tags) {
  std::set<int> s;
  for (BoundaryTag t : tags)
    for (int n : dofs.q1_nodes_on(mesh, t)) s.insert(n);
  return s;
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto cross = [](const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); };
  const double d1 = cross(b - a, c - a), d2 = cross(b - a, d - a);
  const double d3 = cross(d - c, a - c), d4 = cross(d - c, b - c);
  return d1 * d2 < 0.0 && d3 * d4 < 0.0;
}

}  // namespace

CrackPath crack_path(const Mesh& mesh, const DofMap& dofs, const Vector& phi, double threshold, double bin_width) {
  CrackPath path;
  std::vector<int> nodes;
  for (int n = 0; n < dofs.n_q1_nodes(); ++n)
    if (phi(n) < threshold) nodes.push_back(n);
  if (nodes.empty()) return path;

  Vec2 lo = dofs.q1_point(nodes.front()), hi = lo;
  for (int n : nodes) {
    lo = lo.cwiseMin(dofs.q1_point(n));
    hi = hi.cwiseMax(dofs.q1_point(n));
  }
  const int axis = (hi - lo).x() >= (hi - lo).y() ? 0 : 1;
  if (bin_width <= 0.0) bin_width = 2.0 * mesh.min_diameter();
  std::map<long, std::pair<Vec2, int>> bins;
  for (int n : nodes) {
    const Vec2 p = dofs.q1_point(n);
    const long b = static_cast<long>(std::floor((p(axis) - lo(axis)) / bin_width));
    auto& e = bins[b];
    if (e.second == 0) e.first = Vec2::Zero();
    e.first += p;
    ++e.second;
  }
  for (const auto& [b, e] : bins) path.points.push_back(e.first / e.second);

  const auto left = q1_nodes_tagged(mesh, dofs, {BoundaryTag::left});
  const auto right = q1_nodes_tagged(mesh, dofs, {BoundaryTag::right});
  const auto hole = q1_nodes_tagged(mesh, dofs, {BoundaryTag::hole});
  for (int n : nodes) {
    path.touches_left = path.touches_left || left.count(n);
    path.touches_right = path.touches_right || right.count(n);
    path.touches_hole = path.touches_hole || hole.count(n);
  }
  for (std::size_t i = 0; i + 1 < path.points.size() && path.simple; ++i)
    for (std::size_t j = i + 2; j + 1 < path.points.size(); ++j)
      if (segments_cross(path.points[i], path.points[i + 1], path.points[j], path.points[j + 1])) {
        path.simple = false;
        break;
      }
  return path;
}

double crack_length(const CrackPath& path) {
  double l = 0.0;
  for (std::size_t i = 0; i + 1 < path.points.size(); ++i) l += (path.points[i + 1] - path.points[i]).norm();
  return l;
}

std::vector<std::vector<int>> broken_components(const Mesh& mesh, const DofMap& dofs, const Vector& phi,
                                                double threshold) {
  const int n = dofs.n_q1_nodes();
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  };
  auto broken = [&](int a) { return phi(a) < threshold; };
  for (int ai = 0; ai < mesh.n_active(); ++ai) {
    const auto& qn = dofs.q1_nodes(ai);
    // Hanging vertices sit on the cell boundary too.
    std::vector<int> cell_nodes(qn.begin(), qn.end());
    const Cell& cl = mesh.cell(mesh.active_cells()[static_cast<std::size_t>(ai)]);
    for (int e : cl.e)
      if (mesh.edge(e).is_split()) cell_nodes.push_back(dofs.q1_node_of_vertex(mesh.edge(e).mid));
    int first = -1;
    for (int a : cell_nodes) {
      if (!broken(a)) continue;
      if (first < 0)
        first = a;
      else
        parent[static_cast<std::size_t>(find(a))] = find(first);
    }
  }
  std::map<int, std::vector<int>> groups;
  for (int a = 0; a < n; ++a)
    if (broken(a)) groups[find(a)].push_back(a);
  std::vector<std::vector<int>> out;
  for (auto& [r, g] : groups) out.push_back(std::move(g));
  return out;
}

bool band_connects(const Mesh& mesh, const DofMap& dofs, const Vector& phi, const std::vector<BoundaryTag>& a,
                   const std::vector<BoundaryTag>& b, double threshold) {
  const auto sa = q1_nodes_tagged(mesh, dofs, a);
  const auto sb = q1_nodes_tagged(mesh, dofs, b);
  for (const auto& comp : broken_components(mesh, dofs, phi, threshold)) {
    bool ta = false, tb = false;
    for (int n : comp) {
      ta = ta || sa.count(n);
      tb = tb || sb.count(n);
    }
    if (ta && tb) return true;
  }
  return false;
}

bool intact_connects(const Mesh& mesh, const DofMap& dofs, const Vector& phi, BoundaryTag a, BoundaryTag b,
                     double threshold) {
  const int n = dofs.n_q1_nodes();
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int e : mesh.leaf_edges()) {
    const Edge& ed = mesh.edge(e);
    const int x = dofs.q1_node_of_vertex(ed.v[0]), y = dofs.q1_node_of_vertex(ed.v[1]);
    if (x < 0 || y < 0) continue;
    adj[static_cast<std::size_t>(x)].push_back(y);
    adj[static_cast<std::size_t>(y)].push_back(x);
  }
  const auto targets = q1_nodes_tagged(mesh, dofs, {b});
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::queue<int> q;
  for (int s : dofs.q1_nodes_on(mesh, a))
    if (phi(s) >= threshold) {
      q.push(s);
      seen[static_cast<std::size_t>(s)] = 1;
    }
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    if (targets.count(v)) return true;
    for (int w : adj[static_cast<std::size_t>(v)])
      if (!seen[static_cast<std::size_t>(w)] && phi(w) >= threshold) {
        seen[static_cast<std::size_t>(w)] = 1;
        q.push(w);
      }
  }
  return false;
}

}  // namespace mixfrac
