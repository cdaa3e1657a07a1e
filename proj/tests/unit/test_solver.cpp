#include "../support/phase_oracle.hpp"
#include "doctest.h"
#include "../support/grid.hpp"
#include "mixfrac/solver.hpp"

#include <algorithm>
#include <random>

using namespace mixfrac;

namespace {

MaterialParams at2_material() { return MaterialParams::from_E_nu(1.0, 0.3, 1.0, 0.01, 0.5); }

ModelOptions at2_model() {
  ModelOptions m;
  m.crack = CrackEnergyKind::AT2;
  return m;
}

std::vector<DirichletCondition> stretch(double delta) {
  return {{BoundaryTag::top, Component::ux, 0.0, {}},
          {BoundaryTag::top, Component::uy, 0.0, {}},
          {BoundaryTag::bottom, Component::ux, 0.0, {}},
          {BoundaryTag::bottom, Component::uy, -delta, {}}};
}

Vector with_phi(const DofMap& d, const Vector& phi) {
  Vector x = intact_state(d);
  x.segment(d.phi_offset(), d.n_phi()) = phi;
  return x;
}

struct OracleCase {
  IncrementResult inc;
  Vector oracle;
};

OracleCase solve_and_compare(Discretization& disc, const Vector& lag, double delta) {
  const DofMap& d = disc.dofs();
  const Vector x_prev = with_phi(d, lag);
  SolverConfig cfg;
  cfg.newton_rel_tol = 1e-12;
  cfg.newton_abs_tol = 1e-13;
  BlockSolvers lin;
  OracleCase oc;
  oc.inc = solve_increment(disc, stretch(delta), x_prev, x_prev, cfg, lin);
  REQUIRE(oc.inc.converged);
  oc.oracle = test::constrained_phi_minimizer(disc.assembler(), oc.inc.x, lag);
  return oc;
}

}  // namespace

TEST_CASE("zero load increment is a fixed point") {
  Discretization disc(test::grid(3, 3), at2_material(), at2_model());
  const Vector x0 = intact_state(disc.dofs());
  BlockSolvers lin;
  const IncrementResult r = solve_increment(disc, stretch(0.0), x0, x0, SolverConfig{}, lin);
  REQUIRE(r.converged);
  CHECK(r.newton_iterations == 1);
  CHECK(r.active_set_changes == 0);
  CHECK(r.active_set.empty());
  CHECK((r.x - x0).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("small stretch leaves the specimen intact with an empty active set") {
  Discretization disc(test::grid(4, 4), at2_material(), at2_model());
  const Vector lag = Vector::Ones(disc.dofs().n_phi());
  const OracleCase oc = solve_and_compare(disc, lag, 0.01);
  const Vector phi = phi_nodes(disc.dofs(), oc.inc.x);
  CHECK(phi.minCoeff() >= 0.99);
  CHECK(oc.inc.active_set.empty());
  CHECK((phi - oc.oracle).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("active set pins a node whose unconstrained value exceeds its bound") {
  Discretization disc(test::grid(1, 1), at2_material(), at2_model());
  Vector lag = Vector::Ones(4);
  lag(0) = 0.3;
  const OracleCase oc = solve_and_compare(disc, lag, 0.02);
  const Vector phi = phi_nodes(disc.dofs(), oc.inc.x);
  // No phi DoF is constrained, so free phi indices coincide with Q1 nodes.
  const auto& act = oc.inc.active_set;
  CHECK(std::find(act.begin(), act.end(), 0) != act.end());
  CHECK(phi(0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(oc.oracle(0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK((phi - oc.oracle).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("four-cell increment matches the constrained minimizer") {
  Discretization disc(test::grid(2, 2), at2_material(), at2_model());
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> U(0.4, 1.0);
  Vector lag(disc.dofs().n_phi());
  for (int i = 0; i < lag.size(); ++i) lag(i) = U(rng);
  const OracleCase oc = solve_and_compare(disc, lag, 0.3);
  const Vector phi = phi_nodes(disc.dofs(), oc.inc.x);
  CHECK(!oc.inc.active_set.empty());
  CHECK(static_cast<int>(oc.inc.active_set.size()) < lag.size());
  CHECK((phi - oc.oracle).lpNorm<Eigen::Infinity>() < 1e-6);
  CHECK((phi - lag).maxCoeff() <= 1e-10);
}

TEST_CASE("predictor marks") {
  const Mesh m = test::grid(4, 4, 4.0, 4.0);
  const DofMap d(m);
  Vector x = intact_state(d);
  CHECK(predictor_marks(m, d, x, 0.7, 2).count() == 0);

  int centre = -1;
  for (int n = 0; n < d.n_q1_nodes(); ++n)
    if ((d.q1_point(n) - Vec2(2.0, 2.0)).norm() < 1e-12) centre = n;
  x(d.phi_dof(centre)) = 0.5;
  CHECK(predictor_marks(m, d, x, 0.7, 2).count() == 4);
  CHECK(predictor_marks(m, d, x, 0.7, 0).count() == 0);

  // A stationary crack stops triggering refinement once the level cap is reached.
  Mesh cur = m;
  DofMap cur_d(cur);
  Vector cur_x = x;
  int redos = 0;
  for (;;) {
    const RefinementMarks marks = predictor_marks(cur, cur_d, cur_x, 0.7, 3);
    if (marks.count() == 0) break;
    REQUIRE(++redos <= 3);
    Mesh next = refine(cur, marks);
    DofMap next_d(next);
    cur_x = transfer_state(cur, cur_d, cur_x, next, next_d);
    cur = std::move(next);
    cur_d = DofMap(cur);
  }
  CHECK(redos == 3);
}

TEST_CASE("state transfer is exact for fields in the element spaces") {
  const Mesh coarse = test::grid(2, 2, 2.0, 2.0);
  const DofMap cd(coarse);
  auto fu = [](const Vec2& p, int c) { return 0.1 + p.x() * p.x() * p.y() * (c + 1) - 0.3 * p.y() * p.y(); };
  auto fq = [](const Vec2& p) { return 0.5 + 0.1 * p.x() - 0.2 * p.y() + 0.05 * p.x() * p.y(); };
  auto interpolate = [&](const DofMap& d) {
    Vector x(d.n_total());
    for (int n = 0; n < d.n_u_nodes(); ++n)
      for (int c = 0; c < 2; ++c) x(d.u_dof(n, c)) = fu(d.u_point(n), c);
    for (int n = 0; n < d.n_q1_nodes(); ++n) x(d.p_dof(n)) = x(d.phi_dof(n)) = fq(d.q1_point(n));
    return x;
  };
  Mesh fine = refine(coarse, test::mark_near(coarse, Vec2(0.5, 0.5)));
  fine = refine(fine, test::mark_near(fine, Vec2(0.75, 0.75)));
  const DofMap fd(fine);
  const Vector y = transfer_state(coarse, cd, interpolate(cd), fine, fd);
  CHECK((y - interpolate(fd)).lpNorm<Eigen::Infinity>() < 1e-13);
}

TEST_CASE("linear solver") {
  {
    SparseMatrix I(5, 5);
    I.setIdentity();
    LinearSolver s;
    const Vector b = Vector::LinSpaced(5, 1.0, 5.0);
    CHECK((s.solve(I, b) - b).norm() == 0.0);
  }
  {
    SparseMatrix A(2, 2);
    A.insert(0, 0) = 4.0;
    A.insert(0, 1) = 1.0;
    A.insert(1, 0) = 1.0;
    A.insert(1, 1) = 3.0;
    A.makeCompressed();
    LinearSolver s;
    const Vector x = s.solve(A, Vector::Ones(2));
    // inverse = [3 -1; -1 4] / 11
    CHECK(std::abs(x(0) - 2.0 / 11.0) < 1e-12);
    CHECK(std::abs(x(1) - 3.0 / 11.0) < 1e-12);
  }
  {
    SparseMatrix S(3, 3);
    S.insert(0, 0) = 1.0;
    S.insert(1, 1) = 1.0;
    S.insert(2, 0) = 1.0;
    S.makeCompressed();
    LinearSolver s;
    CHECK_THROWS_AS(s.solve(S, Vector::Ones(3)), SolverError);
  }
}

TEST_CASE("elasticity system: sparse solvers agree with a dense factorization") {
  const Mesh m = test::grid(4, 4);
  ModelOptions model;
  model.split = SplitKind::None;
  const MaterialParams mat = MaterialParams::from_E_nu(7.2, 0.3, 1.0, 0.01, 0.5);
  const DofMap d(m);
  const Assembler a(m, d, mat, model);
  const ConstraintSet cs = build_constraints(m, d, stretch(0.1));
  const Condenser cond(cs, d);
  AssembledSystem sys;
  Vector x = intact_state(d);
  cs.distribute(x);
  a.assemble(x, Vector::Ones(d.n_phi()), sys);
  const int nup = cond.n_free_u() + cond.n_free_p();
  const SparseMatrix K = cond.reduce(sys.jacobian).topLeftCorner(nup, nup);
  const Vector rhs = -cond.reduce(sys.residual).head(nup);
  const Vector dense = Eigen::MatrixXd(K).fullPivLu().solve(rhs);

  LinearSolver direct(LinearSolverKind::direct_sparse);
  CHECK((direct.solve(K, rhs) - dense).norm() <= 1e-9 * dense.norm());
  LinearSolver iterative(LinearSolverKind::iterative_block);
  iterative.set_blocks({cond.n_free_u(), cond.n_free_p(), 0});
  CHECK((iterative.solve(K, rhs) - dense).norm() <= 1e-6 * dense.norm());
}

TEST_CASE("direct solver reuses a stale factorization only when it still converges") {
  const int n = 50;
  auto tridiag = [&](double diag, double off) {
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < n; ++i) {
      t.emplace_back(i, i, diag + 0.01 * i);
      if (i > 0) t.emplace_back(i, i - 1, off);
      if (i + 1 < n) t.emplace_back(i, i + 1, off);
    }
    SparseMatrix A(n, n);
    A.setFromTriplets(t.begin(), t.end());
    return A;
  };
  const Vector b = Vector::LinSpaced(n, -1.0, 2.0);
  LinearSolver s;
  s.set_reuse_factorization(true);
  const SparseMatrix A0 = tridiag(4.0, -1.0), A1 = tridiag(4.01, -1.0), A2 = tridiag(-3.0, 2.5);
  for (const SparseMatrix* A : {&A0, &A1}) {
    const Vector x = s.solve(*A, b);
    CHECK((*A * x - b).norm() <= LinearSolver::direct_tolerance * b.norm());
  }
  CHECK(s.factorizations() == 1);
  const Vector x2 = s.solve(A2, b);
  CHECK((A2 * x2 - b).norm() <= LinearSolver::direct_tolerance * b.norm());
  CHECK(s.factorizations() == 2);

  LinearSolver fresh;
  fresh.solve(A0, b);
  fresh.solve(A1, b);
  CHECK(fresh.factorizations() == 2);
}
