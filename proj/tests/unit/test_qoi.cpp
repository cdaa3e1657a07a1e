#include "doctest.h"
#include "../support/grid.hpp"
#include "mixfrac/qoi.hpp"
#include "mixfrac/solver.hpp"

#include <random>

using namespace mixfrac;

namespace {

const MaterialParams kMat = MaterialParams::from_E_nu(7.2, 0.45, 1.0, 0.01, 0.5);

Vector affine(const DofMap& d, const Mat2& G, const Vec2& c) {
  Vector x = intact_state(d);
  for (int n = 0; n < d.n_u_nodes(); ++n) {
    const Vec2 u = G * d.u_point(n) + c;
    x(d.u_dof(n, 0)) = u.x();
    x(d.u_dof(n, 1)) = u.y();
  }
  return x;
}

}  // namespace

TEST_CASE("boundary force of simple fields") {
  const Mesh m = test::grid(2, 2);
  const DofMap d(m);
  const Assembler a(m, d, kMat, ModelOptions{});

  const ForceRecord zero = boundary_force(a, intact_state(d), BoundaryTag::top, StressEval::undegraded);
  CHECK(zero.integral.norm() == 0.0);
  CHECK(zero.length == doctest::Approx(1.0));

  const double e = 0.01;
  Mat2 G = Mat2::Zero();
  G(1, 1) = e;
  const Vector xs = affine(d, G, Vec2::Zero());
  const ForceRecord f = boundary_force(a, xs, BoundaryTag::top, StressEval::undegraded);
  CHECK(f.mean_traction().y() == doctest::Approx((2 * kMat.mu + kMat.lambda) * e));
  CHECK(std::abs(f.mean_traction().x()) < 1e-14);

  const ForceRecord rigid =
      boundary_force(a, affine(d, Mat2::Zero(), Vec2(0.3, -0.2)), BoundaryTag::top, StressEval::undegraded);
  CHECK(rigid.integral.norm() < 1e-14);

  std::mt19937 rng(8);
  std::normal_distribution<double> N;
  Vector x1 = intact_state(d), x2 = intact_state(d);
  for (int i = 0; i < d.n_u(); ++i) {
    x1(i) = 0.01 * N(rng);
    x2(i) = 0.01 * N(rng);
  }
  Vector x3 = intact_state(d);
  x3.head(d.n_u()) = x1.head(d.n_u()) + 2.0 * x2.head(d.n_u());
  const Vec2 f1 = boundary_force(a, x1, BoundaryTag::bottom, StressEval::undegraded).integral;
  const Vec2 f2 = boundary_force(a, x2, BoundaryTag::bottom, StressEval::undegraded).integral;
  const Vec2 f3 = boundary_force(a, x3, BoundaryTag::bottom, StressEval::undegraded).integral;
  CHECK((f3 - f1 - 2.0 * f2).norm() <= 1e-12 * f3.norm());

  CHECK_THROWS_AS(boundary_force(a, xs, BoundaryTag::hole, StressEval::undegraded), std::invalid_argument);
}

TEST_CASE("crack path of a horizontal band") {
  const Mesh m = test::grid(4, 8, 4.0, 8.0);
  const DofMap d(m);
  Vector phi = Vector::Ones(d.n_q1_nodes());
  const CrackPath none = crack_path(m, d, phi);
  CHECK(none.points.empty());
  CHECK_FALSE(none.touches_left);
  CHECK_FALSE(none.touches_right);
  CHECK_FALSE(none.touches_hole);
  CHECK(crack_length(none) == 0.0);
  CHECK(intact_connects(m, d, phi, BoundaryTag::top, BoundaryTag::bottom));

  for (int n = 0; n < d.n_q1_nodes(); ++n) {
    const double y = d.q1_point(n).y();
    if (std::abs(y - 3.0) < 1e-12 || std::abs(y - 4.0) < 1e-12) phi(n) = 0.0;
  }
  const CrackPath band = crack_path(m, d, phi);
  REQUIRE(band.points.size() >= 2);
  for (const Vec2& p : band.points) CHECK(p.y() == doctest::Approx(3.5));
  CHECK(band.touches_left);
  CHECK(band.touches_right);
  CHECK(band.simple);
  CHECK(band.max_height() == doctest::Approx(3.5));
  CHECK(broken_components(m, d, phi).size() == 1);
  CHECK(band_connects(m, d, phi, {BoundaryTag::left}, {BoundaryTag::right}));
  CHECK_FALSE(intact_connects(m, d, phi, BoundaryTag::top, BoundaryTag::bottom));
}

TEST_CASE("crack length") {
  CrackPath p;
  CHECK(crack_length(p) == 0.0);
  p.points = {Vec2(0, 0), Vec2(3, 0)};
  CHECK(crack_length(p) == 3.0);
  p.points = {Vec2(0, 0), Vec2(3, 0), Vec2(3, 4)};
  CHECK(crack_length(p) == 7.0);
}
