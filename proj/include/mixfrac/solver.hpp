#pragma once

#include "mixfrac/assembly.hpp"
#include "mixfrac/linear_solver.hpp"
#include "mixfrac/mesh_generator.hpp"
#include "mixfrac/qoi.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mixfrac {

struct SolverConfig {
  double dt = 1e-2;  ///< s
  double newton_rel_tol = 1e-8;
  double newton_abs_tol = 1e-10;
  int max_newton_iters = 40;
  /// Upper bound on the number of active-set changes within one increment.
  int max_active_set_iters = 30;
  double complementarity_tol = 1e-10;
  /// Weight c = factor * Gc / eps in the active-set indicator.
  double active_set_c_factor = 100.0;
  double refine_threshold = 0.7;
  int max_refine_levels = 0;
  int max_halvings = 4;
  bool line_search = true;
  bool extrapolate_predictor = true;
  LinearSolverKind linear_solver = LinearSolverKind::direct_sparse;
  /// Precondition with the previous LU before paying for a new one.
  bool reuse_factorization = true;
  ExecutionMode assembly_mode = ExecutionMode::parallel;
  int verbosity = 0;
};

/// Traverse program: top held, bottom pulled down at a fixed speed.
struct LoadProgram {
  double speed_mm_per_s = 200.0 / 60.0;
  /// Pins phi = 0 on the notch faces in addition to the slit.
  bool notch_phase_field = true;
  /// Fixes u_x on the top and bottom boundaries.
  bool clamp_horizontal = true;

  double traverse(double t) const { return speed_mm_per_s * t; }
  std::vector<DirichletCondition> conditions(double t) const;
};

/// Mesh, DoF map and assembler for one mesh of the load history.
class Discretization {
 public:
  Discretization(Mesh mesh, const MaterialParams& material, const ModelOptions& model, int u_degree = 2,
                 int quad_points = 3);

  const Mesh& mesh() const { return *mesh_; }
  const DofMap& dofs() const { return *dofs_; }
  Assembler& assembler() { return *assembler_; }
  const Assembler& assembler() const { return *assembler_; }
  const Vector& lumped_mass() const { return mass_; }
  /// Cached scatter plan, rebuilt when the constraint weights change.
  const BlockReduction& reduction(const Condenser& cond);

 private:
  std::unique_ptr<Mesh> mesh_;
  std::unique_ptr<DofMap> dofs_;
  std::unique_ptr<Assembler> assembler_;
  Vector mass_;
  std::unique_ptr<BlockReduction> reduction_;
};

/// Linear solvers for the two diagonal blocks of the block lower-triangular
/// increment Jacobian: elasticity (u, p) and phase field.
struct BlockSolvers {
  explicit BlockSolvers(LinearSolverKind kind = LinearSolverKind::direct_sparse) : up(kind), phi(kind) {}
  LinearSolver up;
  LinearSolver phi;
};

/// Full state vector with phi = 1 and all other entries zero.
Vector intact_state(const DofMap& dofs);

/// Wall-clock seconds spent in the phases of one increment.
struct IncrementTimings {
  double setup = 0.0;  ///< constraints and condensation operator
  double assemble = 0.0;
  double reduce = 0.0;
  double solve = 0.0;
};

struct IncrementResult {
  Vector x;
  bool converged = false;
  int newton_iterations = 0;
  int active_set_size = 0;
  int active_set_changes = 0;
  bool clamped = false;  ///< defensive clamp changed phi by more than the tolerance
  std::string message;
  std::vector<int> active_set;  ///< free phi indices (into the reduced vector)
  IncrementTimings timings;
};

/// One load increment: Newton on (u, p, phi) with primal-dual active-set
/// enforcement of phi <= phi_prev.
/// `x_prev` is the converged previous state, `guess` the starting point; both
/// are full vectors on `disc`. `initial_active` seeds the active set.
IncrementResult solve_increment(Discretization& disc, const std::vector<DirichletCondition>& bcs, const Vector& x_prev,
                                const Vector& guess, const SolverConfig& cfg, BlockSolvers& linear,
                                const std::vector<int>& initial_active = {});

/// Marks active cells with min nodal phi below the threshold and level below the cap.
RefinementMarks predictor_marks(const Mesh& mesh, const DofMap& dofs, const Vector& x, double threshold,
                                int max_level);

/// Interpolates a state from `from` onto `to`, where `to` refines `from`. Values
/// are evaluated in reference coordinates of the coarse ancestor.
Vector transfer_state(const Mesh& from, const DofMap& from_dofs, const Vector& x, const Mesh& to, const DofMap& to_dofs);

struct QoIOptions {
  double thickness_mm = 2.0;
  double crack_threshold = 0.1;
  StressEval reported = StressEval::degraded;
};

struct StepRecord {
  int step = 0;
  double t = 0.0;
  double traverse = 0.0;
  double fy_mean_traction = 0.0;
  double fy_thickness_scaled = 0.0;
  double fx = 0.0;
  double crack_mm = 0.0;
  double e_elastic = 0.0;
  double e_crack = 0.0;
  int newton_iters = 0;
  int active_set = 0;
  int dof_u = 0;
  int dof_p_phi = 0;
  int redos = 0;
  double phi_min = 1.0;
  /// max over DoFs of phi_n - phi_{n-1} and the extent of phi outside [0,1]
  double irreversibility_violation = 0.0;
  double bound_violation = 0.0;
};

struct RunSettings {
  MeshSpec mesh;
  MaterialParams material;
  ModelOptions model;
  SolverConfig solver;
  LoadProgram load;
  QoIOptions qoi;
  double t_end = 30.0;
  double failure_force_fraction = 0.01;
  bool stop_on_failure = true;
  /// Extra prerefinement applied before the first step (same boxes as MeshSpec).
  std::optional<Mesh> initial_mesh;
};

struct RunResult {
  std::vector<StepRecord> series;
  std::unique_ptr<Discretization> disc;
  Vector x;
  bool failed = false;  ///< total failure detected
  std::string stop_reason;
};

using StepObserver = std::function<void(const StepRecord&, const Discretization&, const Vector&)>;

/// Quasi-static load stepping until total failure or t_end. Throws SolverError
/// if an increment fails after the allowed number of step halvings.
RunResult run_load_loop(const RunSettings& settings, const StepObserver& observer = {});

}  // namespace mixfrac
