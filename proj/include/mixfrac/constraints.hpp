#pragma once

#include "mixfrac/dof_map.hpp"

#include <functional>
#include <map>
#include <utility>
#include <vector>

namespace mixfrac {

/// x_dof = sum(weight * x_master) + inhomogeneity
struct ConstraintLine {
  std::vector<std::pair<int, double>> entries;
  double inhomogeneity = 0.0;
};

class ConstraintSet {
 public:
  /// Throws ConstraintError if `dof` is already constrained differently.
  void add_line(int dof, std::vector<std::pair<int, double>> entries, double inhomogeneity = 0.0);
  void add_dirichlet(int dof, double value) { add_line(dof, {}, value); }

  bool is_constrained(int dof) const { return lines_.count(dof) > 0; }
  const std::map<int, ConstraintLine>& lines() const { return lines_; }
  std::size_t size() const { return lines_.size(); }
  bool empty() const { return lines_.empty(); }

  /// Substitutes constrained masters until every master is unconstrained.
  /// Throws ConstraintError on cyclic constraints.
  void close();
  bool is_closed() const;

  /// Sets constrained entries of x from its unconstrained entries.
  void distribute(Vector& x) const;

 private:
  std::map<int, ConstraintLine> lines_;
};

enum class Component { ux, uy, phi };

struct DirichletCondition {
  BoundaryTag tag = BoundaryTag::none;
  Component component = Component::ux;
  double value = 0.0;
  /// Position-dependent value; overrides `value` when set.
  std::function<double(const Vec2&)> fn;
};

/// Hanging-node constraints for every field plus the Dirichlet conditions, closed.
ConstraintSet build_constraints(const Mesh& mesh, const DofMap& dofs, const std::vector<DirichletCondition>& dirichlet);

/// Elimination x = C y + b of constrained DoFs. Free DoFs keep the global
/// ordering, so the reduced vector is again laid out as [u | p | phi].
class Condenser {
 public:
  Condenser(const ConstraintSet& constraints, const DofMap& dofs);

  int n_full() const { return static_cast<int>(full_to_free_.size()); }
  int n_free() const { return static_cast<int>(free_to_full_.size()); }
  int n_free_u() const { return n_free_u_; }
  int n_free_p() const { return n_free_p_; }
  int n_free_phi() const { return n_free() - n_free_u_ - n_free_p_; }

  const SparseMatrix& C() const { return C_; }
  const Vector& b() const { return b_; }
  int free_index(int full) const { return full_to_free_[static_cast<std::size_t>(full)]; }
  int full_index(int free) const { return free_to_full_[static_cast<std::size_t>(free)]; }

  Vector expand(const Vector& y) const { return C_ * y + b_; }
  Vector restrict(const Vector& x) const;
  Vector reduce(const Vector& full_residual) const { return C_.transpose() * full_residual; }
  SparseMatrix reduce(const SparseMatrix& full_jacobian) const;

 private:
  SparseMatrix C_;
  Vector b_;
  std::vector<int> full_to_free_;
  std::vector<int> free_to_full_;
  int n_free_u_ = 0;
  int n_free_p_ = 0;
};

/// Scatter plan from a full Jacobian with a fixed pattern into the reduced
/// blocks A = [up, up], B = [phi, up] and P = [phi, phi], where up is the free
/// (u, p) range. The [up, phi] block is dropped: elasticity rows never depend on
/// the current phase field.
class BlockReduction {
 public:
  BlockReduction(const Condenser& cond, const SparseMatrix& full_pattern);

  /// True if `cond` has the same constraint weights as the one this plan was built for.
  bool matches(const Condenser& cond) const;
  int n_up() const { return n_up_; }
  /// J must have the pattern passed at construction.
  void apply(const SparseMatrix& J, SparseMatrix& A, SparseMatrix& B, SparseMatrix& P) const;

 private:
  struct Entry {
    int source;  ///< value index into J
    int target;  ///< value index into the block
    double weight;
  };
  SparseMatrix C_;
  Eigen::Index nnz_full_ = 0;
  int n_up_ = 0;
  SparseMatrix A0_, B0_, P0_;
  std::vector<Entry> to_A_, to_B_, to_P_;
};

}  // namespace mixfrac
