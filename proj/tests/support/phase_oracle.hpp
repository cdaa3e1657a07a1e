#pragma once

#include "mixfrac/qoi.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

namespace mixfrac::test {

/// Brute-force minimizer of the stored energy over the phase field with the
/// displacement and pressure held at `x`, subject to phi <= upper at every node
/// and phi fixed at the nodes listed in `fixed`.
///
/// The energy is quadratic in phi for the AT2 density, so its Hessian and
/// gradient are recovered exactly from energy evaluations; the bound-constrained
/// problem is then solved by projected gradient descent.
inline Vector constrained_phi_minimizer(const Assembler& a, const Vector& x, const Vector& upper,
                                        const std::vector<int>& fixed = {}, int max_iters = 2000000) {
  const DofMap& d = a.dofs();
  const int n = d.n_phi();
  auto energy = [&](const Vector& phi) {
    Vector s = x;
    s.segment(d.phi_offset(), n) = phi;
    const Energies e = energies(a, s);
    return e.elastic + e.crack;
  };
  const Vector zero = Vector::Zero(n);
  const double e0 = energy(zero);
  Vector e1(n);
  for (int i = 0; i < n; ++i) e1(i) = energy(Vector::Unit(n, i));
  Eigen::MatrixXd H(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      if (i == j) {
        H(i, i) = energy(2.0 * Vector::Unit(n, i)) - 2.0 * e1(i) + e0;
      } else {
        H(i, j) = H(j, i) = energy(Vector::Unit(n, i) + Vector::Unit(n, j)) - e1(i) - e1(j) + e0;
      }
    }
  // e(t e_i) = e0 + t g_i + t^2 H_ii / 2
  Vector g(n);
  for (int i = 0; i < n; ++i) g(i) = e1(i) - e0 - 0.5 * H(i, i);

  std::vector<char> is_fixed(static_cast<std::size_t>(n), 0);
  for (int i : fixed) is_fixed[static_cast<std::size_t>(i)] = 1;
  Vector phi = x.segment(d.phi_offset(), n);
  const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H).eigenvalues().maxCoeff();
  const double step = 1.0 / L;
  for (int it = 0; it < max_iters; ++it) {
    const Vector grad = H * phi + g;
    Vector next = phi - step * grad;
    for (int i = 0; i < n; ++i)
      next(i) = is_fixed[static_cast<std::size_t>(i)] ? phi(i) : std::min(next(i), upper(i));
    const double change = (next - phi).lpNorm<Eigen::Infinity>();
    phi = next;
    if (change < 1e-15) break;
  }
  return phi;
}

}  // namespace mixfrac::test
