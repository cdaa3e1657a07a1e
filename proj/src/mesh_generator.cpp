#include "mixfrac/mesh_generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace mixfrac {

namespace {

constexpr double kTol = 1e-9;

std::vector<double> sorted_breaks(std::vector<double> b) {
  std::sort(b.begin(), b.end());
  std::vector<double> out;
  for (double v : b)
    if (out.empty() || v - out.back() > kTol) out.push_back(v);
  return out;
}

double block_half_width(const MeshSpec& s) {
  const double r = 0.5 * s.hole_diameter;
  const Vec2 c = *s.hole_center;
  double a = s.block_half_width > 0.0 ? s.block_half_width : 1.5 * r;
  a = std::min({a, c.x(), s.width - c.x(), c.y(), s.height - c.y()});
  if (s.has_notch() && s.notch_length > c.x() - a) a = c.x() - s.notch_length;
  return a;
}

std::string fmt(const char* what, double v) {
  std::ostringstream os;
  os << what << " (" << v << ")";
  return os.str();
}

}  // namespace

void validate(const MeshSpec& s) {
  if (!(s.width > 0.0)) throw MeshError(fmt("width must be positive", s.width));
  if (!(s.height > 0.0)) throw MeshError(fmt("height must be positive", s.height));
  if (!(s.target_h > 0.0)) throw MeshError(fmt("target_h must be positive", s.target_h));
  if (s.notch_height) {
    if (!(*s.notch_height > 0.0 && *s.notch_height < s.height))
      throw MeshError(fmt("notch height must lie strictly inside the strip", *s.notch_height));
    if (s.notch_length < 0.0 || s.notch_length >= s.width)
      throw MeshError(fmt("notch length must be in [0, width)", s.notch_length));
  }
  if (s.hole_center) {
    const Vec2 c = *s.hole_center;
    const double r = 0.5 * s.hole_diameter;
    if (!(r > 0.0)) throw MeshError(fmt("hole diameter must be positive", s.hole_diameter));
    const double clearance = std::min({c.x(), s.width - c.x(), c.y(), s.height - c.y()}) - r;
    if (clearance <= 0.0) throw MeshError(fmt("hole touches or crosses the domain boundary; clearance", clearance));
    if (s.has_notch()) {
      const double dy = std::abs(*s.notch_height - c.y());
      if (dy < r && s.notch_length >= c.x() - std::sqrt(r * r - dy * dy))
        throw MeshError("notch intersects the hole");
    }
    const double a = block_half_width(s);
    if (a < 1.1 * r)
      throw MeshError(fmt("no room for the ring around the hole; block half-width", a));
  }
  for (const auto& reg : s.prerefine_regions)
    if (reg.levels < 0) throw MeshError("prerefine levels must be non-negative");
}

GridSubdivision subdivide(const std::vector<double>& xb, const std::vector<double>& yb, double h) {
  auto lengths = [](const std::vector<double>& b) {
    std::vector<double> L;
    for (std::size_t i = 0; i + 1 < b.size(); ++i) L.push_back(b[i + 1] - b[i]);
    return L;
  };
  const auto Lx = lengths(xb);
  const auto Ly = lengths(yb);
  auto counts = [](const std::vector<double>& L, double s) {
    std::vector<long> n;
    for (double l : L) n.push_back(std::max(1L, static_cast<long>(std::ceil(l / s - 1e-12))));
    return n;
  };
  auto max_spacing = [](const std::vector<double>& L, const std::vector<long>& n) {
    double m = 0.0;
    for (std::size_t i = 0; i < L.size(); ++i) m = std::max(m, L[i] / static_cast<double>(n[i]));
    return m;
  };

  // The x spacing is always L_i/n for some interval; try every such value that
  // leaves room for a positive y spacing.
  std::set<double> candidates;
  for (double l : Lx) {
    const long n0 = std::max(1L, static_cast<long>(std::ceil(l / h - 1e-12)));
    for (long n = n0; static_cast<double>(n) <= n0 * 64.0; ++n) {
      const double s = l / static_cast<double>(n);
      if (s < h) candidates.insert(s);
      if (s < 0.05 * h) break;
    }
  }
  long best = std::numeric_limits<long>::max();
  std::vector<long> bx, by;
  for (double s : candidates) {
    const auto nx = counts(Lx, s);
    const double dx = max_spacing(Lx, nx);
    if (dx >= h) continue;
    const double sy = std::sqrt(h * h - dx * dx);
    const auto ny = counts(Ly, sy);
    long sum_x = 0, sum_y = 0;
    for (long v : nx) sum_x += v;
    for (long v : ny) sum_y += v;
    if (sum_x * sum_y < best) {
      best = sum_x * sum_y;
      bx = nx;
      by = ny;
    }
  }
  if (bx.empty()) throw MeshError("could not subdivide the grid for the requested target_h");

  auto lines = [](const std::vector<double>& b, const std::vector<long>& n) {
    std::vector<double> out{b.front()};
    for (std::size_t i = 0; i + 1 < b.size(); ++i)
      for (long k = 1; k <= n[i]; ++k)
        out.push_back(k == n[i] ? b[i + 1] : b[i] + (b[i + 1] - b[i]) * static_cast<double>(k) / static_cast<double>(n[i]));
    return out;
  };
  return {lines(xb, bx), lines(yb, by)};
}

Mesh generate_mesh(const MeshSpec& s) {
  validate(s);
  const bool notch = s.has_notch();
  const bool hole = s.has_hole();

  std::vector<double> xb{0.0, s.width}, yb{0.0, s.height};
  double a = 0.0, r = 0.0;
  Vec2 c = Vec2::Zero();
  if (notch) {
    xb.push_back(s.notch_length);
    yb.push_back(*s.notch_height);
  }
  if (hole) {
    c = *s.hole_center;
    r = 0.5 * s.hole_diameter;
    a = block_half_width(s);
    xb.insert(xb.end(), {c.x() - a, c.x() + a});
    yb.insert(yb.end(), {c.y() - a, c.y() + a});
  }
  const auto grid = subdivide(sorted_breaks(xb), sorted_breaks(yb), s.target_h);
  const auto& X = grid.x;
  const auto& Y = grid.y;
  const int nx = static_cast<int>(X.size()) - 1;
  const int ny = static_cast<int>(Y.size()) - 1;

  auto index_of = [](const std::vector<double>& g, double v) {
    for (std::size_t i = 0; i < g.size(); ++i)
      if (std::abs(g[i] - v) <= kTol) return static_cast<int>(i);
    throw MeshError("internal: breakpoint missing from grid");
  };
  int ia0 = -1, ia1 = -1, ja0 = -1, ja1 = -1;
  if (hole) {
    ia0 = index_of(X, c.x() - a);
    ia1 = index_of(X, c.x() + a);
    ja0 = index_of(Y, c.y() - a);
    ja1 = index_of(Y, c.y() + a);
  }
  auto in_block_interior = [&](int i, int j) { return hole && i > ia0 && i < ia1 && j > ja0 && j < ja1; };
  auto cell_in_block = [&](int i, int j) { return hole && i >= ia0 && i < ia1 && j >= ja0 && j < ja1; };

  MeshBuilder b;
  std::vector<int> vid(static_cast<std::size_t>((nx + 1) * (ny + 1)), -1);
  auto gid = [&](int i, int j) -> int& { return vid[static_cast<std::size_t>(j * (nx + 1) + i)]; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      if (!in_block_interior(i, j)) gid(i, j) = b.add_vertex(Vec2(X[static_cast<std::size_t>(i)], Y[static_cast<std::size_t>(j)]));

  // Seam: vertices left of the tip get an upper twin; the tip itself is shared.
  int jn = -1;
  std::map<int, int> upper;  // grid column -> twin vertex
  std::set<int> twins;
  if (notch) {
    jn = index_of(Y, *s.notch_height);
    for (int i = 0; i <= nx && X[static_cast<std::size_t>(i)] < s.notch_length - kTol; ++i) {
      const int t = b.add_vertex(b.vertex(gid(i, jn)));
      upper[i] = t;
      twins.insert(t);
    }
  }
  auto vertex_for_cell = [&](int i, int j, int cell_row) {
    if (notch && j == jn && cell_row == jn) {
      if (auto it = upper.find(i); it != upper.end()) return it->second;
    }
    return gid(i, j);
  };

  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (cell_in_block(i, j)) continue;
      b.add_cell({vertex_for_cell(i, j, j), vertex_for_cell(i + 1, j, j), vertex_for_cell(i + 1, j + 1, j),
                  vertex_for_cell(i, j + 1, j)});
    }

  std::set<int> ring_inner;
  if (hole) {
    std::vector<int> outer;
    for (int i = ia0; i < ia1; ++i) outer.push_back(gid(i, ja0));
    for (int j = ja0; j < ja1; ++j) outer.push_back(gid(ia1, j));
    for (int i = ia1; i > ia0; --i) outer.push_back(gid(i, ja1));
    for (int j = ja1; j > ja0; --j) outer.push_back(gid(ia0, j));
    const std::size_t m = outer.size();

    std::vector<Vec2> P(m), Q(m);
    for (std::size_t k = 0; k < m; ++k) {
      P[k] = b.vertex(outer[k]);
      Q[k] = c + r * (P[k] - c).normalized();
    }
    auto layer_point = [&](std::size_t k, int layer, int nr) {
      return Vec2(Q[k] + (static_cast<double>(layer) / nr) * (P[k] - Q[k]));
    };
    int nr = s.ring_layers;
    if (nr <= 0) {
      for (nr = 1; nr < 1000; ++nr) {
        double dmax = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
          const std::size_t k1 = (k + 1) % m;
          const Vec2 p00 = layer_point(k, 0, nr), p01 = layer_point(k1, 0, nr);
          const Vec2 p10 = layer_point(k, 1, nr), p11 = layer_point(k1, 1, nr);
          const Vec2 q00 = layer_point(k, nr - 1, nr), q01 = layer_point(k1, nr - 1, nr);
          dmax = std::max({dmax, (p00 - p11).norm(), (p01 - p10).norm(), (q00 - P[k1]).norm(), (q01 - P[k]).norm()});
        }
        if (dmax <= s.target_h) break;
      }
    }
    std::vector<std::vector<int>> layer(static_cast<std::size_t>(nr + 1), std::vector<int>(m));
    for (std::size_t k = 0; k < m; ++k) {
      for (int l = 0; l < nr; ++l) layer[static_cast<std::size_t>(l)][k] = b.add_vertex(layer_point(k, l, nr));
      layer[static_cast<std::size_t>(nr)][k] = outer[k];
      ring_inner.insert(layer[0][k]);
    }
    for (int l = 0; l < nr; ++l)
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t k1 = (k + 1) % m;
        const auto& in = layer[static_cast<std::size_t>(l)];
        const auto& out = layer[static_cast<std::size_t>(l + 1)];
        b.add_cell({in[k], out[k], out[k1], in[k1]});
      }
    b.set_hole(Circle{c, r});
  }

  // Tag every edge that bounds exactly one cell.
  Mesh coarse = b.build();
  std::map<std::pair<int, int>, int> use;
  for (const Cell& cl : coarse.cells())
    for (std::size_t k = 0; k < 4; ++k) {
      const int v0 = cl.v[k], v1 = cl.v[(k + 1) % 4];
      ++use[{std::min(v0, v1), std::max(v0, v1)}];
    }
  MeshBuilder tagger;
  for (const Vec2& p : coarse.vertices()) tagger.add_vertex(p);
  for (const Cell& cl : coarse.cells()) tagger.add_cell(cl.v);
  if (coarse.hole()) tagger.set_hole(*coarse.hole());
  for (const auto& [key, count] : use) {
    if (count != 1) continue;
    const auto [v0, v1] = key;
    const Vec2 p0 = coarse.vertex(v0), p1 = coarse.vertex(v1);
    BoundaryTag tag;
    if (ring_inner.count(v0) && ring_inner.count(v1))
      tag = BoundaryTag::hole;
    else if (notch && std::abs(p0.y() - *s.notch_height) < kTol && std::abs(p1.y() - *s.notch_height) < kTol &&
             std::max(p0.x(), p1.x()) <= s.notch_length + kTol)
      tag = (twins.count(v0) || twins.count(v1)) ? BoundaryTag::notch_upper : BoundaryTag::notch_lower;
    else if (std::abs(p0.x()) < kTol && std::abs(p1.x()) < kTol)
      tag = BoundaryTag::left;
    else if (std::abs(p0.x() - s.width) < kTol && std::abs(p1.x() - s.width) < kTol)
      tag = BoundaryTag::right;
    else if (std::abs(p0.y()) < kTol && std::abs(p1.y()) < kTol)
      tag = BoundaryTag::bottom;
    else if (std::abs(p0.y() - s.height) < kTol && std::abs(p1.y() - s.height) < kTol)
      tag = BoundaryTag::top;
    else {
      std::ostringstream os;
      os << "unexpected boundary edge between " << p0.transpose() << " and " << p1.transpose();
      throw MeshError(os.str());
    }
    tagger.tag_edge(v0, v1, tag);
  }
  Mesh mesh = tagger.build();
  mesh.check_invariants();

  for (const auto& reg : s.prerefine_regions)
    for (int l = 0; l < reg.levels; ++l) mesh = refine(mesh, mark_box(mesh, reg.lo, reg.hi));
  mesh.check_invariants();
  return mesh;
}

}  // namespace mixfrac
