#pragma once

#include "mixfrac/types.hpp"

#include <memory>

namespace mixfrac {

enum class LinearSolverKind { direct_sparse, iterative_block };

/// Field block sizes of a [u | p | phi] ordered system; p may be empty.
struct BlockSizes {
  int u = 0;
  int p = 0;
  int phi = 0;
};

/// Solves A x = b and verifies the relative residual: 1e-10 for the direct
/// solver, 1e-8 for the iterative one. The symbolic factorization is reused
/// while the sparsity pattern stays the same.
class LinearSolver {
 public:
  explicit LinearSolver(LinearSolverKind kind = LinearSolverKind::direct_sparse);
  ~LinearSolver();
  LinearSolver(LinearSolver&&) noexcept;
  LinearSolver& operator=(LinearSolver&&) noexcept;

  void set_blocks(const BlockSizes& blocks) { blocks_ = blocks; }
  /// Direct solver only: try GMRES preconditioned by the previous numeric
  /// factorization before refactoring. The residual check is unchanged.
  void set_reuse_factorization(bool on) { reuse_factorization_ = on; }
  long factorizations() const { return factorizations_; }
  /// Throws SolverError on a singular matrix or a failed residual check.
  Vector solve(const SparseMatrix& A, const Vector& b);

  double last_relative_residual() const { return last_residual_; }
  int last_iterations() const { return last_iterations_; }
  LinearSolverKind kind() const { return kind_; }

  static constexpr double direct_tolerance = 1e-10;
  static constexpr double iterative_tolerance = 1e-8;
  static constexpr int reuse_max_iterations = 12;

 private:
  struct Impl;
  LinearSolverKind kind_;
  BlockSizes blocks_;
  std::unique_ptr<Impl> impl_;
  double last_residual_ = 0.0;
  int last_iterations_ = 0;
  bool reuse_factorization_ = false;
  long factorizations_ = 0;
};

}  // namespace mixfrac
