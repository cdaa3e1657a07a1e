#include "mixfrac/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mixfrac {

namespace {

void normalize(std::vector<std::pair<int, double>>& entries) {
  std::sort(entries.begin(), entries.end());
  std::vector<std::pair<int, double>> out;
  for (const auto& [m, w] : entries) {
    if (!out.empty() && out.back().first == m)
      out.back().second += w;
    else
      out.emplace_back(m, w);
  }
  out.erase(std::remove_if(out.begin(), out.end(), [](const auto& e) { return std::abs(e.second) < 1e-15; }),
            out.end());
  entries = std::move(out);
}

bool same_line(const ConstraintLine& a, const ConstraintLine& b) {
  if (std::abs(a.inhomogeneity - b.inhomogeneity) > 1e-12 * (1.0 + std::abs(a.inhomogeneity))) return false;
  if (a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    if (a.entries[i].first != b.entries[i].first || std::abs(a.entries[i].second - b.entries[i].second) > 1e-12)
      return false;
  return true;
}

}  // namespace

void ConstraintSet::add_line(int dof, std::vector<std::pair<int, double>> entries, double inhomogeneity) {
  normalize(entries);
  for (const auto& e : entries)
    if (e.first == dof) throw ConstraintError("constraint on dof " + std::to_string(dof) + " refers to itself");
  ConstraintLine line{std::move(entries), inhomogeneity};
  auto it = lines_.find(dof);
  if (it == lines_.end()) {
    lines_.emplace(dof, std::move(line));
    return;
  }
  if (!same_line(it->second, line)) {
    std::ostringstream os;
    os << "conflicting constraints on dof " << dof << " (inhomogeneities " << it->second.inhomogeneity << " and "
       << line.inhomogeneity << ")";
    throw ConstraintError(os.str());
  }
}

void ConstraintSet::close() {
  // 0 = unvisited, 1 = on the stack, 2 = resolved.
  std::map<int, int> state;
  auto resolve = [&](auto&& self, int dof) -> void {
    int& s = state[dof];
    if (s == 2) return;
    if (s == 1) throw ConstraintError("cyclic constraint chain through dof " + std::to_string(dof));
    s = 1;
    ConstraintLine& line = lines_.at(dof);
    std::vector<std::pair<int, double>> out;
    double inhom = line.inhomogeneity;
    for (const auto& [m, w] : line.entries) {
      auto it = lines_.find(m);
      if (it == lines_.end()) {
        out.emplace_back(m, w);
        continue;
      }
      self(self, m);
      const ConstraintLine& ml = lines_.at(m);
      for (const auto& [mm, ww] : ml.entries) out.emplace_back(mm, w * ww);
      inhom += w * ml.inhomogeneity;
    }
    normalize(out);
    // `line` may be invalidated only by insertion, which never happens here.
    line.entries = std::move(out);
    line.inhomogeneity = inhom;
    state[dof] = 2;
  };
  for (auto& [dof, line] : lines_) resolve(resolve, dof);
}

bool ConstraintSet::is_closed() const {
  for (const auto& [dof, line] : lines_)
    for (const auto& e : line.entries)
      if (lines_.count(e.first)) return false;
  return true;
}

void ConstraintSet::distribute(Vector& x) const {
  for (const auto& [dof, line] : lines_) {
    double v = line.inhomogeneity;
    for (const auto& [m, w] : line.entries) v += w * x(m);
    x(dof) = v;
  }
}

ConstraintSet build_constraints(const Mesh& mesh, const DofMap& dofs, const std::vector<DirichletCondition>& dirichlet) {
  ConstraintSet cs;
  for (const auto& [h, e] : mesh.hanging_vertices()) {
    const Edge& ed = mesh.edge(e);
    const int a = ed.v[0], b = ed.v[1];
    // Q1 fields.
    const int qh = dofs.q1_node_of_vertex(h), qa = dofs.q1_node_of_vertex(a), qb = dofs.q1_node_of_vertex(b);
    if (dofs.has_pressure()) cs.add_line(dofs.p_dof(qh), {{dofs.p_dof(qa), 0.5}, {dofs.p_dof(qb), 0.5}});
    cs.add_line(dofs.phi_dof(qh), {{dofs.phi_dof(qa), 0.5}, {dofs.phi_dof(qb), 0.5}});
    const int ua = dofs.u_node_of_vertex(a), ub = dofs.u_node_of_vertex(b), uh = dofs.u_node_of_vertex(h);
    if (dofs.u_degree() == 1) {
      for (int comp = 0; comp < 2; ++comp)
        cs.add_line(dofs.u_dof(uh, comp), {{dofs.u_dof(ua, comp), 0.5}, {dofs.u_dof(ub, comp), 0.5}});
      continue;
    }
    // Q2: the hanging vertex is the coarse edge's middle node and stays free; the
    // fine edge nodes at the quarter points follow the coarse quadratic.
    for (int k = 0; k < 2; ++k) {
      const int node = dofs.u_node_of_edge(ed.child[static_cast<std::size_t>(k)]);
      if (node < 0) throw ConstraintError("hanging edge without a fine-side edge node");
      const int near = k == 0 ? ua : ub, far = k == 0 ? ub : ua;
      for (int comp = 0; comp < 2; ++comp)
        cs.add_line(dofs.u_dof(node, comp),
                    {{dofs.u_dof(near, comp), 0.375}, {dofs.u_dof(uh, comp), 0.75}, {dofs.u_dof(far, comp), -0.125}});
    }
  }
  for (const auto& d : dirichlet) {
    if (d.component == Component::phi) {
      for (int n : dofs.q1_nodes_on(mesh, d.tag))
        cs.add_dirichlet(dofs.phi_dof(n), d.fn ? d.fn(dofs.q1_point(n)) : d.value);
    } else {
      const int comp = d.component == Component::ux ? 0 : 1;
      for (int n : dofs.u_nodes_on(mesh, d.tag))
        cs.add_dirichlet(dofs.u_dof(n, comp), d.fn ? d.fn(dofs.u_point(n)) : d.value);
    }
  }
  cs.close();
  return cs;
}

Condenser::Condenser(const ConstraintSet& cs, const DofMap& dofs) {
  if (!cs.is_closed()) throw ConstraintError("condensation requires a closed constraint set");
  const int n = dofs.n_total();
  full_to_free_.assign(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (cs.is_constrained(i)) continue;
    full_to_free_[static_cast<std::size_t>(i)] = static_cast<int>(free_to_full_.size());
    free_to_full_.push_back(i);
    if (i < dofs.n_u())
      ++n_free_u_;
    else if (i < dofs.phi_offset())
      ++n_free_p_;
  }
  b_ = Vector::Zero(n);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(n) + 3 * cs.size());
  for (int i = 0; i < n; ++i)
    if (full_to_free_[static_cast<std::size_t>(i)] >= 0) t.emplace_back(i, full_to_free_[static_cast<std::size_t>(i)], 1.0);
  for (const auto& [dof, line] : cs.lines()) {
    b_(dof) = line.inhomogeneity;
    for (const auto& [m, w] : line.entries) t.emplace_back(dof, full_to_free_[static_cast<std::size_t>(m)], w);
  }
  C_.resize(n, n_free());
  C_.setFromTriplets(t.begin(), t.end());
  C_.makeCompressed();
}

Vector Condenser::restrict(const Vector& x) const {
  Vector y(n_free());
  for (int i = 0; i < n_free(); ++i) y(i) = x(free_to_full_[static_cast<std::size_t>(i)]);
  return y;
}

SparseMatrix Condenser::reduce(const SparseMatrix& J) const {
  SparseMatrix JC = J * C_;
  SparseMatrix r = C_.transpose() * JC;
  r.makeCompressed();
  return r;
}

BlockReduction::BlockReduction(const Condenser& cond, const SparseMatrix& pattern)
    : C_(cond.C()), nnz_full_(pattern.nonZeros()), n_up_(cond.n_free_u() + cond.n_free_p()) {
  if (!pattern.isCompressed()) throw ConstraintError("block reduction needs a compressed pattern");
  const int n_full = cond.n_full();
  // Free index and weight of every full DoF's dependence on the free DoFs.
  std::vector<std::vector<std::pair<int, double>>> rows(static_cast<std::size_t>(n_full));
  for (Eigen::Index c = 0; c < C_.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(C_, c); it; ++it)
      rows[static_cast<std::size_t>(it.row())].emplace_back(static_cast<int>(c), it.value());

  const int n_phi = cond.n_free() - n_up_;
  struct Contribution {
    int block, r, c, source;
    double w;
  };
  std::vector<Contribution> contrib;
  contrib.reserve(static_cast<std::size_t>(pattern.nonZeros()));
  for (Eigen::Index j = 0; j < pattern.outerSize(); ++j) {
    const auto& cj = rows[static_cast<std::size_t>(j)];
    for (int k = pattern.outerIndexPtr()[j]; k < pattern.outerIndexPtr()[j + 1]; ++k) {
      for (const auto& [fi, wi] : rows[static_cast<std::size_t>(pattern.innerIndexPtr()[k])])
        for (const auto& [fj, wj] : cj) {
          const bool ri = fi < n_up_, cj_up = fj < n_up_;
          if (ri && !cj_up) continue;
          const int block = ri ? 0 : (cj_up ? 1 : 2);
          contrib.push_back({block, ri ? fi : fi - n_up_, cj_up ? fj : fj - n_up_, k, wi * wj});
        }
    }
  }
  auto build = [&](int block, int nr, int nc, SparseMatrix& M, std::vector<Entry>& out) {
    std::vector<Triplet> t;
    for (const auto& e : contrib)
      if (e.block == block) t.emplace_back(e.r, e.c, 0.0);
    M.resize(nr, nc);
    M.setFromTriplets(t.begin(), t.end());
    M.makeCompressed();
    for (const auto& e : contrib) {
      if (e.block != block) continue;
      const int* first = M.innerIndexPtr() + M.outerIndexPtr()[e.c];
      const int* last = M.innerIndexPtr() + M.outerIndexPtr()[e.c + 1];
      const int* pos = std::lower_bound(first, last, e.r);
      out.push_back({e.source, static_cast<int>(pos - M.innerIndexPtr()), e.w});
    }
  };
  build(0, n_up_, n_up_, A0_, to_A_);
  build(1, n_phi, n_up_, B0_, to_B_);
  build(2, n_phi, n_phi, P0_, to_P_);
}

bool BlockReduction::matches(const Condenser& cond) const {
  const SparseMatrix& C = cond.C();
  if (C.rows() != C_.rows() || C.cols() != C_.cols() || C.nonZeros() != C_.nonZeros()) return false;
  return std::equal(C.outerIndexPtr(), C.outerIndexPtr() + C.outerSize() + 1, C_.outerIndexPtr()) &&
         std::equal(C.innerIndexPtr(), C.innerIndexPtr() + C.nonZeros(), C_.innerIndexPtr()) &&
         std::equal(C.valuePtr(), C.valuePtr() + C.nonZeros(), C_.valuePtr());
}

void BlockReduction::apply(const SparseMatrix& J, SparseMatrix& A, SparseMatrix& B, SparseMatrix& P) const {
  if (J.nonZeros() != nnz_full_) throw ConstraintError("block reduction: Jacobian pattern changed");
  auto run = [&](const SparseMatrix& M0, const std::vector<Entry>& plan, SparseMatrix& M) {
    M = M0;
    double* v = M.valuePtr();
    const double* src = J.valuePtr();
    for (const auto& e : plan) v[e.target] += e.weight * src[e.source];
  };
  run(A0_, to_A_, A);
  run(B0_, to_B_, B);
  run(P0_, to_P_, P);
}

}  // namespace mixfrac
