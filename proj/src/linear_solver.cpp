#include "mixfrac/linear_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/UmfPackSupport>
#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>
#include <sstream>

namespace mixfrac {

namespace {

/// Block lower-triangular preconditioner for [u | p | phi] systems. The pressure
/// Schur complement is approximated with the diagonal of the u block.
class BlockTriangularPreconditioner {
 public:
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

  BlockTriangularPreconditioner() = default;

  void set_blocks(const BlockSizes& b) { b_ = b; }

  template <typename MatType>
  BlockTriangularPreconditioner& analyzePattern(const MatType&) {
    return *this;
  }

  template <typename MatType>
  BlockTriangularPreconditioner& factorize(const MatType& A) {
    return compute(A);
  }

  template <typename MatType>
  BlockTriangularPreconditioner& compute(const MatType& A) {
    const int nu = b_.u, np = b_.p, nf = b_.phi;
    if (nu + np + nf != A.rows()) {
      // Unknown structure: fall back to a single ILUT.
      b_ = BlockSizes{static_cast<int>(A.rows()), 0, 0};
    }
    const SparseMatrix Auu = A.topLeftCorner(b_.u, b_.u);
    uu_.setDroptol(1e-6);
    uu_.setFillfactor(20);
    uu_.compute(Auu);
    ok_ = uu_.info() == Eigen::Success;
    if (b_.p > 0) {
      pu_ = A.block(b_.u, 0, b_.p, b_.u);
      const SparseMatrix up = A.block(0, b_.u, b_.u, b_.p);
      Vector dinv = Auu.diagonal();
      for (Eigen::Index i = 0; i < dinv.size(); ++i) dinv(i) = std::abs(dinv(i)) > 0.0 ? 1.0 / dinv(i) : 0.0;
      SparseMatrix S = A.block(b_.u, b_.u, b_.p, b_.p);
      S -= SparseMatrix(pu_ * dinv.asDiagonal() * up);
      pp_.setDroptol(1e-8);
      pp_.compute(S);
      ok_ = ok_ && pp_.info() == Eigen::Success;
    }
    if (b_.phi > 0) {
      const int o = b_.u + b_.p;
      fu_ = A.block(o, 0, b_.phi, o);
      ff_.setDroptol(1e-8);
      ff_.compute(SparseMatrix(A.block(o, o, b_.phi, b_.phi)));
      ok_ = ok_ && ff_.info() == Eigen::Success;
    }
    return *this;
  }

  template <typename Rhs>
  Vector solve(const Rhs& r) const {
    Vector y(r.size());
    y.head(b_.u) = uu_.solve(Vector(r.head(b_.u)));
    if (b_.p > 0) y.segment(b_.u, b_.p) = pp_.solve(Vector(r.segment(b_.u, b_.p) - pu_ * y.head(b_.u)));
    if (b_.phi > 0) {
      const int o = b_.u + b_.p;
      y.tail(b_.phi) = ff_.solve(Vector(r.tail(b_.phi) - fu_ * y.head(o)));
    }
    return y;
  }

  Eigen::ComputationInfo info() const { return ok_ ? Eigen::Success : Eigen::NumericalIssue; }

 private:
  BlockSizes b_;
  Eigen::IncompleteLUT<double, int> uu_, pp_, ff_;
  SparseMatrix pu_, fu_;
  bool ok_ = false;
};

/// Applies a previously computed LU factorization of a nearby matrix.
class StaleLuPreconditioner {
 public:
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic };

  void set(const Eigen::UmfPackLU<SparseMatrix>* lu) { lu_ = lu; }

  template <typename MatType>
  StaleLuPreconditioner& analyzePattern(const MatType&) {
    return *this;
  }
  template <typename MatType>
  StaleLuPreconditioner& factorize(const MatType&) {
    return *this;
  }
  template <typename MatType>
  StaleLuPreconditioner& compute(const MatType&) {
    return *this;
  }

  template <typename Rhs>
  Vector solve(const Rhs& r) const {
    return lu_->solve(Vector(r));
  }

  Eigen::ComputationInfo info() const { return lu_ ? Eigen::Success : Eigen::InvalidInput; }

 private:
  const Eigen::UmfPackLU<SparseMatrix>* lu_ = nullptr;
};

std::string singular_diagnostic(const SparseMatrix& A) {
  // Report the first structurally or numerically empty column, else the smallest diagonal.
  Eigen::Index worst = -1;
  double wval = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < A.outerSize(); ++c) {
    double colmax = 0.0;
    for (SparseMatrix::InnerIterator it(A, c); it; ++it) colmax = std::max(colmax, std::abs(it.value()));
    if (colmax == 0.0) {
      std::ostringstream os;
      os << "singular matrix: column " << c << " is zero";
      return os.str();
    }
    const double d = std::abs(A.coeff(c, c)) / colmax;
    if (d < wval) {
      wval = d;
      worst = c;
    }
  }
  std::ostringstream os;
  os << "singular matrix: smallest relative pivot candidate at row " << worst << " (|a_ii|/max|a_ji| = " << wval << ")";
  return os.str();
}

}  // namespace

struct LinearSolver::Impl {
  Eigen::UmfPackLU<SparseMatrix> lu;
  Eigen::Index rows = -1;
  Eigen::Index nnz = -1;
  std::vector<int> outer, inner;
  Eigen::BiCGSTAB<SparseMatrix, BlockTriangularPreconditioner> bicg;
  Eigen::GMRES<SparseMatrix, StaleLuPreconditioner> gmres;
  bool factored = false;
  // UMFPACK's solve reads the factored matrix, so it must outlive the call.
  SparseMatrix factored_matrix;

  bool same_pattern(const SparseMatrix& A) const {
    if (A.rows() != rows || A.nonZeros() != nnz) return false;
    return std::equal(outer.begin(), outer.end(), A.outerIndexPtr()) &&
           std::equal(inner.begin(), inner.end(), A.innerIndexPtr());
  }
  void store_pattern(const SparseMatrix& A) {
    rows = A.rows();
    nnz = A.nonZeros();
    outer.assign(A.outerIndexPtr(), A.outerIndexPtr() + A.outerSize() + 1);
    inner.assign(A.innerIndexPtr(), A.innerIndexPtr() + A.nonZeros());
  }
};

LinearSolver::LinearSolver(LinearSolverKind kind) : kind_(kind), impl_(std::make_unique<Impl>()) {}
LinearSolver::~LinearSolver() = default;
LinearSolver::LinearSolver(LinearSolver&&) noexcept = default;
LinearSolver& LinearSolver::operator=(LinearSolver&&) noexcept = default;

Vector LinearSolver::solve(const SparseMatrix& A_in, const Vector& b) {
  if (A_in.rows() != A_in.cols() || A_in.rows() != b.size()) throw SolverError("linear system has inconsistent sizes");
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    last_residual_ = 0.0;
    last_iterations_ = 0;
    return Vector::Zero(b.size());
  }
  SparseMatrix A = A_in;
  A.makeCompressed();
  Vector x;
  if (kind_ == LinearSolverKind::direct_sparse) {
    auto& lu = impl_->lu;
    if (!impl_->same_pattern(A)) {
      lu.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_AMD;
      // Refinement is done here against the residual check, not inside UMFPACK.
      lu.umfpackControl()(UMFPACK_IRSTEP) = 0;
      lu.analyzePattern(A);
      impl_->store_pattern(A);
      impl_->factored = false;
    } else if (reuse_factorization_ && impl_->factored) {
      // The last factorization usually preconditions the new matrix well enough
      // to converge in a few Krylov steps; refactor otherwise.
      auto& g = impl_->gmres;
      g.preconditioner().set(&lu);
      g.set_restart(reuse_max_iterations);
      g.setMaxIterations(reuse_max_iterations);
      g.setTolerance(0.01 * direct_tolerance);
      g.compute(A);
      x = g.solve(b);
      const double res = (A * x - b).norm() / bnorm;
      if (std::isfinite(res) && res <= direct_tolerance) {
        last_iterations_ = static_cast<int>(g.iterations());
        last_residual_ = res;
        return x;
      }
    }
    impl_->factored = false;
    impl_->factored_matrix = A;
    lu.factorize(impl_->factored_matrix);
    if (lu.info() != Eigen::Success) {
      impl_->rows = -1;
      throw SolverError(singular_diagnostic(A));
    }
    impl_->factored = true;
    ++factorizations_;
    x = lu.solve(b);
    // A couple of refinement sweeps guard against poor pivoting on stiff blocks.
    for (int k = 0; k < 3 && (A * x - b).norm() > direct_tolerance * bnorm; ++k) x += lu.solve(Vector(b - A * x));
    last_iterations_ = 1;
    last_residual_ = (A * x - b).norm() / bnorm;
    if (!std::isfinite(last_residual_) || last_residual_ > direct_tolerance) {
      std::ostringstream os;
      os << "direct solve residual check failed: " << last_residual_ << " > " << direct_tolerance << "; "
         << singular_diagnostic(A);
      throw SolverError(os.str());
    }
    return x;
  }
  auto& it = impl_->bicg;
  it.preconditioner().set_blocks(blocks_);
  it.setTolerance(0.1 * iterative_tolerance);
  it.setMaxIterations(std::max<Eigen::Index>(1000, A.rows()));
  it.compute(A);
  if (it.info() != Eigen::Success) throw SolverError("block preconditioner setup failed");
  x = it.solve(b);
  last_iterations_ = static_cast<int>(it.iterations());
  last_residual_ = (A * x - b).norm() / bnorm;
  if (!std::isfinite(last_residual_) || last_residual_ > iterative_tolerance) {
    std::ostringstream os;
    os << "iterative solve residual check failed after " << it.iterations() << " iterations: " << last_residual_
       << " > " << iterative_tolerance;
    throw SolverError(os.str());
  }
  return x;
}

}  // namespace mixfrac
