#pragma once

#include "mixfrac/constraints.hpp"
#include "mixfrac/dof_map.hpp"
#include "mixfrac/fem.hpp"
#include "mixfrac/material.hpp"

#include <functional>
#include <vector>

namespace mixfrac {

enum class Formulation { mixed, classical };

struct ModelOptions {
  Formulation formulation = Formulation::mixed;
  CrackEnergyKind crack = CrackEnergyKind::Wu;
  SplitKind split = SplitKind::AmorMixed;
  /// Simulations keep compressive deviatoric stiffness undegraded; without it
  /// the intact material has no shear stiffness along compressed directions.
  SplitOptions split_options{PositivePart::spectral, 1.0 / 3.0, true};
};

enum class ExecutionMode { serial, parallel };

struct Traction {
  BoundaryTag tag = BoundaryTag::none;
  Vec2 value = Vec2::Zero();  ///< force per length, MPa * mm
};

/// Additional data terms, used by manufactured-solution and cantilever tests.
struct ExtraLoads {
  std::function<Vec2(const Vec2&)> body_force;
  /// Right-hand side s of the pressure equation g(div u) - p/lambda = s.
  std::function<double(const Vec2&)> pressure_source;
  std::vector<Traction> tractions;
};

struct AssembledSystem {
  Vector residual;
  SparseMatrix jacobian;
};

/// Stress pair at one point of a given state, shared by assembly and post-processing.
struct PointStress {
  Mat2 E = Mat2::Zero();
  double p = 0.0;  ///< independent pressure (mixed) or lambda tr E (classical)
  StressSplit split;
};
PointStress point_stress(const Mat2& E, double p_mixed, const MaterialParams& m, const ModelOptions& model);

/// Residual and Jacobian of the incremental phase-field system on the full
/// (unconstrained) DoF vector. The degradation in the elasticity rows uses the
/// lagged phase field; the phase-field row uses the current one.
class Assembler {
 public:
  Assembler(const Mesh& mesh, const DofMap& dofs, const MaterialParams& material, const ModelOptions& model,
            int quad_points = 3);

  void set_mode(ExecutionMode mode) { mode_ = mode; }
  ExecutionMode mode() const { return mode_; }
  void set_extra_loads(ExtraLoads loads) { loads_ = std::move(loads); }

  const Mesh& mesh() const { return mesh_; }
  const DofMap& dofs() const { return dofs_; }
  const MaterialParams& material() const { return material_; }
  const ModelOptions& model() const { return model_; }
  const ReferenceTables& tables() const { return tables_; }

  /// x is the full state vector, phi_lag holds one value per Q1 node.
  /// Throws SolverError naming the cell and field on non-finite entries.
  void assemble(const Vector& x, const Vector& phi_lag, AssembledSystem& out, bool with_jacobian = true) const;

  /// Jacobian sparsity with every cell-coupled pair present (values zero).
  const SparseMatrix& pattern() const { return pattern_; }

  /// Row sums of the Q1 mass matrix, one per Q1 node.
  Vector lumped_q1_mass() const;

 private:
  template <int NU>
  void assemble_impl(const Vector& x, const Vector& phi_lag, AssembledSystem& out, bool with_jacobian) const;
  void build_pattern();

  const Mesh& mesh_;
  const DofMap& dofs_;
  MaterialParams material_;
  ModelOptions model_;
  ReferenceTables tables_;
  ExecutionMode mode_ = ExecutionMode::parallel;
  ExtraLoads loads_;
  SparseMatrix pattern_;
  /// Per active cell, the value-array offsets of its local matrix entries (row-major local order).
  std::vector<std::vector<int>> scatter_;
};

/// Reference coordinates of the point at parameter t in [-1,1] along edge k.
Vec2 edge_reference_point(int k, double t);

}  // namespace mixfrac
