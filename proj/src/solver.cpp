#include "mixfrac/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>

namespace mixfrac {

std::vector<DirichletCondition> LoadProgram::conditions(double t) const {
  std::vector<DirichletCondition> bc;
  bc.push_back({BoundaryTag::top, Component::uy, 0.0, {}});
  bc.push_back({BoundaryTag::bottom, Component::uy, -traverse(t), {}});
  if (clamp_horizontal) {
    bc.push_back({BoundaryTag::top, Component::ux, 0.0, {}});
    bc.push_back({BoundaryTag::bottom, Component::ux, 0.0, {}});
  }
  if (notch_phase_field) {
    bc.push_back({BoundaryTag::notch_upper, Component::phi, 0.0, {}});
    bc.push_back({BoundaryTag::notch_lower, Component::phi, 0.0, {}});
  }
  return bc;
}

Discretization::Discretization(Mesh mesh, const MaterialParams& material, const ModelOptions& model, int u_degree,
                               int quad_points)
    : mesh_(std::make_unique<Mesh>(std::move(mesh))) {
  DofMap::Layout layout;
  layout.u_degree = u_degree;
  layout.pressure = model.formulation == Formulation::mixed;
  dofs_ = std::make_unique<DofMap>(*mesh_, layout);
  assembler_ = std::make_unique<Assembler>(*mesh_, *dofs_, material, model, quad_points);
  mass_ = assembler_->lumped_q1_mass();
}

const BlockReduction& Discretization::reduction(const Condenser& cond) {
  if (!reduction_ || !reduction_->matches(cond)) reduction_ = std::make_unique<BlockReduction>(cond, assembler_->pattern());
  return *reduction_;
}

Vector intact_state(const DofMap& dofs) {
  Vector x = Vector::Zero(dofs.n_total());
  x.segment(dofs.phi_offset(), dofs.n_phi()).setOnes();
  return x;
}

namespace {

void log_line(const SolverConfig& cfg, int level, const std::string& s) {
  if (cfg.verbosity >= level) std::cerr << s << '\n';
}

class Stopwatch {
 public:
  explicit Stopwatch(double& acc) : acc_(acc), t0_(std::chrono::steady_clock::now()) {}
  ~Stopwatch() { acc_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

 private:
  double& acc_;
  std::chrono::steady_clock::time_point t0_;
};

/// Overwrites the listed rows with identity rows (or zero rows), keeping the sparsity pattern.
void pin_rows(SparseMatrix& A, const std::vector<char>& pinned, bool identity) {
  for (Eigen::Index c = 0; c < A.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(A, c); it; ++it)
      if (pinned[static_cast<std::size_t>(it.row())]) it.valueRef() = identity && it.row() == it.col() ? 1.0 : 0.0;
}

}  // namespace

IncrementResult solve_increment(Discretization& disc, const std::vector<DirichletCondition>& bcs, const Vector& x_prev,
                                const Vector& guess, const SolverConfig& cfg, BlockSolvers& linear,
                                const std::vector<int>& initial_active) {
  const Mesh& mesh = disc.mesh();
  const DofMap& dofs = disc.dofs();
  Assembler& asmb = disc.assembler();
  asmb.set_mode(cfg.assembly_mode);
  const MaterialParams& mat = asmb.material();

  IncrementResult out;
  IncrementTimings& tm = out.timings;
  std::optional<Stopwatch> sw(std::in_place, tm.setup);
  const ConstraintSet cs = build_constraints(mesh, dofs, bcs);
  const Condenser cond(cs, dofs);
  sw.reset();
  const int n = cond.n_free();
  const int phi0 = cond.n_free_u() + cond.n_free_p();
  const int nphi = cond.n_free_phi();
  linear.up.set_blocks({cond.n_free_u(), cond.n_free_p(), 0});
  linear.phi.set_blocks({nphi, 0, 0});
  linear.up.set_reuse_factorization(cfg.reuse_factorization);
  linear.phi.set_reuse_factorization(cfg.reuse_factorization);
  const BlockReduction& plan = disc.reduction(cond);

  const Vector phi_lag = phi_nodes(dofs, x_prev);
  Vector lag(nphi), mass(nphi);
  for (int k = 0; k < nphi; ++k) {
    const int node = cond.full_index(phi0 + k) - dofs.phi_offset();
    lag(k) = phi_lag(node);
    mass(k) = disc.lumped_mass()(node);
  }
  const double c = cfg.active_set_c_factor * mat.Gc / mat.eps;

  AssembledSystem sys;
  // Load-scale reference: elasticity residual of the previous state under the new boundary values.
  asmb.assemble(cond.expand(cond.restrict(x_prev)), phi_lag, sys, false);
  const double ref = cond.reduce(sys.residual).head(phi0).norm();
  const double tol = std::max(cfg.newton_abs_tol, cfg.newton_rel_tol * ref);

  Vector y = cond.restrict(guess);
  Vector x = cond.expand(y);
  std::vector<char> active(static_cast<std::size_t>(nphi), 0);
  for (int k : initial_active)
    if (k >= 0 && k < nphi) active[static_cast<std::size_t>(k)] = 1;

  std::vector<char> pinned(static_cast<std::size_t>(nphi), 0);

  auto modified_residual = [&](const Vector& Rr, const Vector& yy) {
    Vector r = Rr;
    for (int k = 0; k < nphi; ++k)
      if (active[static_cast<std::size_t>(k)]) r(phi0 + k) = yy(phi0 + k) - lag(k);
    return r;
  };

  for (int it = 1; it <= cfg.max_newton_iters; ++it) {
    {
      Stopwatch w(tm.assemble);
      asmb.assemble(x, phi_lag, sys, true);
    }
    const Vector Rr = cond.reduce(sys.residual);
    if (!Rr.allFinite()) {
      out.message = "non-finite residual";
      return out;
    }
    bool changed = false;
    for (int k = 0; k < nphi; ++k) {
      const double mult = -Rr(phi0 + k) / mass(k);
      const char a = mult + c * (y(phi0 + k) - lag(k)) > cfg.complementarity_tol ? 1 : 0;
      if (a != active[static_cast<std::size_t>(k)]) changed = true;
      active[static_cast<std::size_t>(k)] = a;
    }
    if (changed && ++out.active_set_changes > cfg.max_active_set_iters) {
      std::ostringstream os;
      os << "active set still changing after " << cfg.max_active_set_iters << " updates";
      out.message = os.str();
      return out;
    }
    const Vector r = modified_residual(Rr, y);
    const double res = r.norm();
    {
      std::ostringstream os;
      os << "    newton " << it << " residual " << res << " (tol " << tol << ") active "
         << std::count(active.begin(), active.end(), 1) << (changed ? " changed" : "");
      if (cfg.verbosity >= 3)
        os << " [u " << r.head(cond.n_free_u()).norm() << " p " << r.segment(cond.n_free_u(), cond.n_free_p()).norm()
           << " phi " << r.tail(nphi).norm() << "]";
      log_line(cfg, 2, os.str());
    }
    out.newton_iterations = it;
    if (!changed && res <= tol) {
      out.converged = true;
      break;
    }
    SparseMatrix A, B, P;
    {
      Stopwatch w(tm.reduce);
      plan.apply(sys.jacobian, A, B, P);
    }
    std::fill(pinned.begin(), pinned.end(), 0);
    for (int k = 0; k < nphi; ++k) pinned[static_cast<std::size_t>(k)] = active[static_cast<std::size_t>(k)];
    pin_rows(P, pinned, true);
    pin_rows(B, pinned, false);
    Vector dy(n);
    try {
      Stopwatch w(tm.solve);
      dy.head(phi0) = linear.up.solve(A, -r.head(phi0));
      dy.tail(nphi) = linear.phi.solve(P, Vector(-r.tail(nphi) - B * dy.head(phi0)));
    } catch (const SolverError& e) {
      out.message = e.what();
      return out;
    }
    double alpha = 1.0;
    if (cfg.line_search) {
      // Backtrack only when the full step does not reduce the residual.
      for (int ls = 0; ls < 6; ++ls) {
        const Vector yt = y + alpha * dy;
        {
          Stopwatch w(tm.assemble);
          asmb.assemble(cond.expand(yt), phi_lag, sys, false);
        }
        const double rt = modified_residual(cond.reduce(sys.residual), yt).norm();
        if (std::isfinite(rt) && rt < res) break;
        alpha *= 0.5;
      }
      if (alpha < 1.0 / 32.0) alpha = 1.0 / 32.0;
    }
    y += alpha * dy;
    x = cond.expand(y);
  }
  if (!out.converged) {
    if (out.message.empty()) out.message = "Newton did not converge within " + std::to_string(cfg.max_newton_iters) + " iterations";
    return out;
  }
  // Defensive projection onto [0, min(1, phi_prev)].
  for (int k = 0; k < nphi; ++k) {
    double& v = y(phi0 + k);
    const double bound = std::min(1.0, lag(k));
    if (v > bound + cfg.complementarity_tol || v < -cfg.complementarity_tol) out.clamped = true;
    v = std::clamp(v, 0.0, bound);
  }
  if (out.clamped) log_line(cfg, 1, "    defensive phi clamp changed the solution");
  out.x = cond.expand(y);
  for (int k = 0; k < nphi; ++k)
    if (active[static_cast<std::size_t>(k)]) out.active_set.push_back(k);
  out.active_set_size = static_cast<int>(out.active_set.size());
  return out;
}

RefinementMarks predictor_marks(const Mesh& mesh, const DofMap& dofs, const Vector& x, double threshold, int max_level) {
  RefinementMarks m = RefinementMarks::none(mesh);
  for (int ai = 0; ai < mesh.n_active(); ++ai) {
    const Cell& cl = mesh.cell(mesh.active_cells()[static_cast<std::size_t>(ai)]);
    if (cl.level >= max_level) continue;
    double lo = 1.0;
    for (int nd : dofs.q1_nodes(ai)) lo = std::min(lo, x(dofs.phi_dof(nd)));
    m.flags[static_cast<std::size_t>(ai)] = lo < threshold;
  }
  return m;
}

Vector transfer_state(const Mesh& from, const DofMap& fd, const Vector& x, const Mesh& to, const DofMap& td) {
  std::map<int, int> old_active;
  for (int ai = 0; ai < from.n_active(); ++ai) old_active[from.active_cells()[static_cast<std::size_t>(ai)]] = ai;
  const auto& corners = q1_nodes();
  Vector y = Vector::Zero(td.n_total());

  for (int ai = 0; ai < to.n_active(); ++ai) {
    const int cell = to.active_cells()[static_cast<std::size_t>(ai)];
    // Chain of child indices from the old active ancestor down to this cell.
    std::vector<int> path;
    int a = cell;
    while (!old_active.count(a)) {
      const int parent = to.cell(a).parent;
      if (parent < 0) throw MeshError("transfer_state: target mesh does not refine the source mesh");
      path.push_back(a - to.cell(parent).first_child);
      a = parent;
    }
    const int oai = old_active.at(a);
    auto to_ancestor = [&](Vec2 r) {
      for (int k : path) r = 0.5 * (r + corners[static_cast<std::size_t>(k)]);
      return r;
    };
    auto eval = [&](const Vec2& r) {
      struct V {
        Vec2 u;
        double p, phi;
      } v{Vec2::Zero(), 0.0, 0.0};
      const auto su = shape_eval(fd.u_degree() == 2 ? ElementKind::Q2_vector2 : ElementKind::Q1_scalar, r);
      const auto s1 = shape_eval(ElementKind::Q1_scalar, r);
      const auto& un = fd.u_nodes(oai);
      for (int i = 0; i < fd.u_nodes_per_cell(); ++i)
        for (int comp = 0; comp < 2; ++comp)
          v.u(comp) += su.values(i) * x(fd.u_dof(un[static_cast<std::size_t>(i)], comp));
      const auto& qn = fd.q1_nodes(oai);
      for (int j = 0; j < 4; ++j) {
        if (fd.has_pressure()) v.p += s1.values(j) * x(fd.p_dof(qn[static_cast<std::size_t>(j)]));
        v.phi += s1.values(j) * x(fd.phi_dof(qn[static_cast<std::size_t>(j)]));
      }
      return v;
    };
    const auto& un = td.u_nodes(ai);
    const auto& unodes_ref = q2_nodes();
    for (int i = 0; i < td.u_nodes_per_cell(); ++i) {
      const auto v = eval(to_ancestor(unodes_ref[static_cast<std::size_t>(i)]));
      for (int comp = 0; comp < 2; ++comp) y(td.u_dof(un[static_cast<std::size_t>(i)], comp)) = v.u(comp);
    }
    const auto& qn = td.q1_nodes(ai);
    for (int j = 0; j < 4; ++j) {
      const auto v = eval(to_ancestor(corners[static_cast<std::size_t>(j)]));
      if (td.has_pressure()) y(td.p_dof(qn[static_cast<std::size_t>(j)])) = v.p;
      y(td.phi_dof(qn[static_cast<std::size_t>(j)])) = v.phi;
    }
  }
  return y;
}

namespace {

StepRecord make_record(const RunSettings& s, const Discretization& disc, const Vector& x, const Vector& x_prev) {
  const Assembler& asmb = disc.assembler();
  StepRecord r;
  const ForceRecord lit = boundary_force(asmb, x, BoundaryTag::top, StressEval::undegraded);
  const ForceRecord rep = boundary_force(asmb, x, BoundaryTag::top, s.qoi.reported);
  r.fy_mean_traction = lit.mean_traction().y();
  r.fy_thickness_scaled = rep.integral.y() * s.qoi.thickness_mm;
  r.fx = rep.integral.x() * s.qoi.thickness_mm;
  const Vector phi = phi_nodes(disc.dofs(), x);
  const Vector phi_prev = phi_nodes(disc.dofs(), x_prev);
  r.crack_mm = crack_length(crack_path(disc.mesh(), disc.dofs(), phi, s.qoi.crack_threshold));
  const Energies en = energies(asmb, x);
  r.e_elastic = en.elastic;
  r.e_crack = en.crack;
  r.dof_u = disc.dofs().n_u();
  r.dof_p_phi = disc.dofs().n_p() + disc.dofs().n_phi();
  r.phi_min = phi.minCoeff();
  r.irreversibility_violation = std::max(0.0, (phi - phi_prev).maxCoeff());
  r.bound_violation = std::max({0.0, -phi.minCoeff(), phi.maxCoeff() - 1.0});
  return r;
}

Vector extrapolate(const DofMap& dofs, const Vector& x1, const Vector& x0, double ratio) {
  Vector g = x1;
  const int n = dofs.phi_offset();
  g.head(n) += ratio * (x1.head(n) - x0.head(n));
  return g;
}

}  // namespace

RunResult run_load_loop(const RunSettings& s, const StepObserver& observer) {
  s.material.validate();
  const SolverConfig& cfg = s.solver;
  RunResult result;
  const int u_degree = s.model.formulation == Formulation::mixed ? 2 : 1;
  Mesh mesh0 = s.initial_mesh ? *s.initial_mesh : generate_mesh(s.mesh);
  auto disc = std::make_unique<Discretization>(std::move(mesh0), s.material, s.model, u_degree);
  BlockSolvers linear(cfg.linear_solver);

  // Initial state: intact, with the notch faces pinned if requested.
  Vector x = intact_state(disc->dofs());
  build_constraints(disc->mesh(), disc->dofs(), s.load.conditions(0.0)).distribute(x);
  Vector x_old;  // state before x, for the predictor
  double dt_last = 0.0;
  std::vector<int> active;
  double t = 0.0;
  double fmax = 0.0;

  for (int step = 1; t < s.t_end - 1e-12; ++step) {
    double dt = std::min(cfg.dt, s.t_end - t);
    int halvings = 0;
    int redos = 0;
    IncrementResult inc;
    for (;;) {
      const double t_new = t + dt;
      const auto bcs = s.load.conditions(t_new);
      Vector guess = x;
      if (cfg.extrapolate_predictor && x_old.size() == x.size() && dt_last > 0.0)
        guess = extrapolate(disc->dofs(), x, x_old, dt / dt_last);
      inc = solve_increment(*disc, bcs, x, guess, cfg, linear, active);
      if (!inc.converged) {
        if (halvings >= cfg.max_halvings) {
          std::ostringstream os;
          os << "increment " << step << " at t=" << t_new << " failed after " << halvings
             << " step halvings: " << inc.message;
          throw SolverError(os.str());
        }
        ++halvings;
        dt *= 0.5;
        active.clear();
        log_line(cfg, 1, "  halving step: " + inc.message);
        continue;
      }
      if (cfg.max_refine_levels > 0) {
        const auto marks = predictor_marks(disc->mesh(), disc->dofs(), inc.x, cfg.refine_threshold, cfg.max_refine_levels);
        if (marks.count() > 0) {
          Mesh refined = refine(disc->mesh(), marks);
          auto next = std::make_unique<Discretization>(std::move(refined), s.material, s.model, u_degree);
          Vector xt = transfer_state(disc->mesh(), disc->dofs(), x, next->mesh(), next->dofs());
          if (x_old.size() == x.size())
            x_old = transfer_state(disc->mesh(), disc->dofs(), x_old, next->mesh(), next->dofs());
          else
            x_old.resize(0);
          x = std::move(xt);
          disc = std::move(next);
          linear = BlockSolvers(cfg.linear_solver);
          active.clear();
          ++redos;
          {
            std::ostringstream os;
            os << "  refined " << marks.count() << " cells, redo step " << step << " on " << disc->mesh().n_active()
               << " cells";
            log_line(cfg, 1, os.str());
          }
          continue;
        }
      }
      break;
    }
    const double t_new = t + dt;
    StepRecord rec = make_record(s, *disc, inc.x, x);
    rec.step = step;
    rec.t = t_new;
    rec.traverse = s.load.traverse(t_new);
    rec.newton_iters = inc.newton_iterations;
    rec.active_set = inc.active_set_size;
    rec.redos = redos;
    result.series.push_back(rec);
    if (observer) observer(rec, *disc, inc.x);
    {
      std::ostringstream os;
      os << "step " << step << " t=" << t_new << " u=" << rec.traverse << " Fy=" << rec.fy_thickness_scaled
         << " crack=" << rec.crack_mm << " newton=" << rec.newton_iters << " phi_min=" << rec.phi_min;
      if (cfg.verbosity >= 2)
        os << " [setup " << inc.timings.setup << "s assemble " << inc.timings.assemble << "s reduce "
           << inc.timings.reduce << "s solve " << inc.timings.solve << "s]";
      log_line(cfg, 1, os.str());
    }

    x_old = std::move(x);
    x = inc.x;
    active = inc.active_set;
    dt_last = dt;
    t = t_new;

    fmax = std::max(fmax, rec.fy_thickness_scaled);
    if (fmax > 0.0 && rec.fy_thickness_scaled < s.failure_force_fraction * fmax) {
      result.failed = true;
      result.stop_reason = "force dropped below the failure fraction of its maximum";
    } else if (!intact_connects(disc->mesh(), disc->dofs(), phi_nodes(disc->dofs(), x), BoundaryTag::top,
                                BoundaryTag::bottom, s.qoi.crack_threshold)) {
      result.failed = true;
      result.stop_reason = "broken band separates top from bottom";
    }
    if (result.failed && s.stop_on_failure) break;
  }
  if (!result.failed) result.stop_reason = "reached t_end";
  result.disc = std::move(disc);
  result.x = std::move(x);
  return result;
}

}  // namespace mixfrac
