#include "mixfrac/fem.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace mixfrac {

void gauss_legendre_1d(int n, std::vector<double>& x, std::vector<double>& w) {
  switch (n) {
    case 1:
      x = {0.0};
      w = {2.0};
      return;
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      x = {-a, a};
      w = {1.0, 1.0};
      return;
    }
    case 3: {
      const double a = std::sqrt(0.6);
      x = {-a, 0.0, a};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      return;
    }
    case 4: {
      const double s = 2.0 * std::sqrt(6.0 / 5.0);
      const double a = std::sqrt((3.0 - s) / 7.0), b = std::sqrt((3.0 + s) / 7.0);
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0, wb = (18.0 - std::sqrt(30.0)) / 36.0;
      x = {-b, -a, a, b};
      w = {wb, wa, wa, wb};
      return;
    }
    case 5: {
      const double s = 2.0 * std::sqrt(10.0 / 7.0);
      const double a = std::sqrt(5.0 - s) / 3.0, b = std::sqrt(5.0 + s) / 3.0;
      const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0, wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
      x = {-b, -a, 0.0, a, b};
      w = {wb, wa, 128.0 / 225.0, wa, wb};
      return;
    }
    default:
      throw std::invalid_argument("gauss rule supports 1 to 5 points per axis, got " + std::to_string(n));
  }
}

QuadratureRule gauss_rule(int n) {
  std::vector<double> x, w;
  gauss_legendre_1d(n, x, w);
  QuadratureRule r;
  r.degree = 2 * n - 1;
  for (std::size_t j = 0; j < x.size(); ++j)
    for (std::size_t i = 0; i < x.size(); ++i) {
      r.points.emplace_back(x[i], x[j]);
      r.weights.push_back(w[i] * w[j]);
    }
  return r;
}

const std::array<Vec2, 4>& q1_nodes() {
  static const std::array<Vec2, 4> n{Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)};
  return n;
}

const std::array<Vec2, 9>& q2_nodes() {
  static const std::array<Vec2, 9> n{Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1), Vec2(0, -1),
                                     Vec2(1, 0),   Vec2(0, 1),  Vec2(-1, 0), Vec2(0, 0)};
  return n;
}

namespace {

// 1D quadratic Lagrange basis on nodes -1, 0, 1 (indexed 0, 1, 2).
inline double l2(int k, double t) {
  switch (k) {
    case 0: return 0.5 * t * (t - 1.0);
    case 1: return 1.0 - t * t;
    default: return 0.5 * t * (t + 1.0);
  }
}
inline double dl2(int k, double t) {
  switch (k) {
    case 0: return t - 0.5;
    case 1: return -2.0 * t;
    default: return t + 0.5;
  }
}
inline int axis_index(double c) { return c < -0.5 ? 0 : (c > 0.5 ? 2 : 1); }

}  // namespace

ShapeEval shape_eval(ElementKind kind, const Vec2& r) {
  ShapeEval s;
  if (kind == ElementKind::Q1_scalar) {
    s.values.resize(4);
    s.grads.resize(4, 2);
    const auto& nodes = q1_nodes();
    for (int i = 0; i < 4; ++i) {
      const double a = nodes[static_cast<std::size_t>(i)].x(), b = nodes[static_cast<std::size_t>(i)].y();
      s.values(i) = 0.25 * (1 + a * r.x()) * (1 + b * r.y());
      s.grads(i, 0) = 0.25 * a * (1 + b * r.y());
      s.grads(i, 1) = 0.25 * b * (1 + a * r.x());
    }
    return s;
  }
  s.values.resize(9);
  s.grads.resize(9, 2);
  const auto& nodes = q2_nodes();
  for (int i = 0; i < 9; ++i) {
    const int ix = axis_index(nodes[static_cast<std::size_t>(i)].x());
    const int iy = axis_index(nodes[static_cast<std::size_t>(i)].y());
    s.values(i) = l2(ix, r.x()) * l2(iy, r.y());
    s.grads(i, 0) = dl2(ix, r.x()) * l2(iy, r.y());
    s.grads(i, 1) = l2(ix, r.x()) * dl2(iy, r.y());
  }
  return s;
}

Vec2 CellMap::point(const Vec2& r) const {
  const auto s = shape_eval(ElementKind::Q1_scalar, r);
  Vec2 x = Vec2::Zero();
  for (std::size_t k = 0; k < 4; ++k) x += s.values(static_cast<Eigen::Index>(k)) * p_[k];
  return x;
}

Mat2 CellMap::jacobian(const Vec2& r) const {
  const auto s = shape_eval(ElementKind::Q1_scalar, r);
  Mat2 J = Mat2::Zero();
  for (std::size_t k = 0; k < 4; ++k) {
    J.col(0) += s.grads(static_cast<Eigen::Index>(k), 0) * p_[k];
    J.col(1) += s.grads(static_cast<Eigen::Index>(k), 1) * p_[k];
  }
  return J;
}

Vec2 CellMap::inverse(const Vec2& x) const {
  Vec2 r = Vec2::Zero();
  for (int it = 0; it < 50; ++it) {
    const Vec2 res = point(r) - x;
    const Vec2 dr = jacobian(r).lu().solve(res);
    r -= dr;
    if (dr.norm() < 1e-14) return r;
  }
  const Vec2 res = point(r) - x;
  if (res.norm() < 1e-10 * (1.0 + x.norm())) return r;
  std::ostringstream os;
  os << "inverse cell map did not converge for point " << x.transpose();
  throw MeshError(os.str());
}

bool CellMap::contains(const Vec2& x, double tol) const {
  const Vec2 r = inverse(x);
  return std::abs(r.x()) <= 1.0 + tol && std::abs(r.y()) <= 1.0 + tol;
}

ReferenceTables::ReferenceTables(const QuadratureRule& rule) : rule_(rule) {
  for (const Vec2& r : rule_.points) {
    const auto s2 = shape_eval(ElementKind::Q2_vector2, r);
    const auto s1 = shape_eval(ElementKind::Q1_scalar, r);
    q2_.push_back(s2.values);
    q2_ref_grad_.push_back(s2.grads);
    q1_.push_back(s1.values);
    q1_ref_grad_.push_back(s1.grads);
  }
}

void ReferenceTables::reinit(const std::array<Vec2, 4>& p, CellValues& out) const {
  const auto nq = rule_.points.size();
  out.n_q = static_cast<int>(nq);
  out.JxW.resize(nq);
  out.x.resize(nq);
  out.q2.resize(nq);
  out.q2_grad.resize(nq);
  out.q1.resize(nq);
  out.q1_grad.resize(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    Mat2 J = Mat2::Zero();
    Vec2 x = Vec2::Zero();
    for (std::size_t k = 0; k < 4; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      J.col(0) += q1_ref_grad_[q](kk, 0) * p[k];
      J.col(1) += q1_ref_grad_[q](kk, 1) * p[k];
      x += q1_[q](kk) * p[k];
    }
    const double det = J.determinant();
    if (!(det > 0.0)) {
      std::ostringstream os;
      os << "non-positive Jacobian determinant " << det << " near " << x.transpose();
      throw MeshError(os.str());
    }
    // Physical gradient rows: grad_x N = J^{-T} grad_ref N.
    const Mat2 Jinv = J.inverse();
    out.JxW[q] = det * rule_.weights[q];
    out.x[q] = x;
    out.q2[q] = q2_[q];
    out.q2_grad[q] = q2_ref_grad_[q] * Jinv;
    out.q1[q] = q1_[q];
    out.q1_grad[q] = q1_ref_grad_[q] * Jinv;
  }
}

}  // namespace mixfrac
