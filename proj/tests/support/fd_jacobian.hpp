#pragma once

#include "mixfrac/assembly.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <random>

namespace mixfrac::test {

/// Random state with phi in (0.2, 0.9) and a lagged field above it.
inline void random_state(const DofMap& d, unsigned seed, Vector& x, Vector& lag) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-0.05, 0.05), P(0.2, 0.9), D(0.0, 0.1);
  x.resize(d.n_total());
  for (int i = 0; i < d.n_u(); ++i) x(i) = U(rng);
  for (int i = 0; i < d.n_p(); ++i) x(d.p_offset() + i) = 20.0 * U(rng);
  lag.resize(d.n_phi());
  for (int i = 0; i < d.n_phi(); ++i) {
    x(d.phi_offset() + i) = P(rng);
    lag(i) = x(d.phi_offset() + i) + D(rng);
  }
}

/// Largest entry-wise deviation between the assembled Jacobian and central
/// differences of the residual, relative to the largest Jacobian entry.
inline double fd_jacobian_error(const Assembler& a, const Vector& x, const Vector& lag) {
  AssembledSystem sys;
  a.assemble(x, lag, sys);
  const Eigen::MatrixXd J(sys.jacobian);
  const double scale = std::max(1.0, x.lpNorm<Eigen::Infinity>());
  const double h = 1e-7 * scale;
  double err = 0.0;
  AssembledSystem sp, sm;
  for (int j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    a.assemble(xp, lag, sp, false);
    a.assemble(xm, lag, sm, false);
    const Vector col = (sp.residual - sm.residual) / (2 * h);
    err = std::max(err, (col - J.col(j)).lpNorm<Eigen::Infinity>());
  }
  return err / J.cwiseAbs().maxCoeff();
}

}  // namespace mixfrac::test
