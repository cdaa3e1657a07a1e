#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace mixfrac {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

/// Invalid geometric input or a mesh that violates its invariants.
class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Contradictory constraints, bad DoF layouts.
class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite assembly output, singular factorizations, Newton or active-set failure.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration and input-file schema violations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Rejected inputs of the material identification routines.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mixfrac
