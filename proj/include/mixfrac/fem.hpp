#pragma once

#include "mixfrac/mesh.hpp"

#include <array>
#include <vector>

namespace mixfrac {

enum class ElementKind { Q1_scalar, Q2_vector2 };

struct QuadratureRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int degree = 0;  ///< exact per axis up to this polynomial degree
};

/// 1D Gauss-Legendre points and weights on [-1,1], 1 <= n <= 5.
void gauss_legendre_1d(int n, std::vector<double>& x, std::vector<double>& w);

/// Tensor-product Gauss rule on [-1,1]^2.
QuadratureRule gauss_rule(int points_per_axis);

/// Reference node coordinates. Q1: the four corners in cell order. Q2: corners,
/// then edge midpoints in edge order, then the centre.
const std::array<Vec2, 4>& q1_nodes();
const std::array<Vec2, 9>& q2_nodes();

/// Scalar Lagrange basis values and reference gradients. For Q2_vector2 these are
/// the nine scalar functions; component k of node i is handled by the DoF map.
struct ShapeEval {
  Eigen::VectorXd values;
  Eigen::MatrixX2d grads;
};
ShapeEval shape_eval(ElementKind kind, const Vec2& ref);

/// Bilinear geometry map of one cell.
class CellMap {
 public:
  explicit CellMap(const std::array<Vec2, 4>& corners) : p_(corners) {}
  Vec2 point(const Vec2& ref) const;
  /// Columns are d x / d xi and d x / d eta.
  Mat2 jacobian(const Vec2& ref) const;
  /// Newton inversion; throws MeshError if it does not converge.
  Vec2 inverse(const Vec2& x) const;
  bool contains(const Vec2& x, double tol = 1e-10) const;

 private:
  std::array<Vec2, 4> p_;
};

/// Values and physical gradients of both element families at every quadrature
/// point of one cell.
struct CellValues {
  int n_q = 0;
  std::vector<double> JxW;
  std::vector<Vec2> x;
  std::vector<Eigen::Matrix<double, 9, 1>> q2;
  std::vector<Eigen::Matrix<double, 9, 2>> q2_grad;
  std::vector<Eigen::Vector4d> q1;
  std::vector<Eigen::Matrix<double, 4, 2>> q1_grad;
};

/// Shape tables on the reference cell, evaluated once per rule.
class ReferenceTables {
 public:
  explicit ReferenceTables(const QuadratureRule& rule);
  const QuadratureRule& rule() const { return rule_; }
  /// Throws MeshError if the Jacobian determinant is not positive at a quadrature point.
  void reinit(const std::array<Vec2, 4>& corners, CellValues& out) const;

 private:
  QuadratureRule rule_;
  std::vector<Eigen::Matrix<double, 9, 1>> q2_;
  std::vector<Eigen::Matrix<double, 9, 2>> q2_ref_grad_;
  std::vector<Eigen::Vector4d> q1_;
  std::vector<Eigen::Matrix<double, 4, 2>> q1_ref_grad_;
};

}  // namespace mixfrac
