#include "mixfrac/material.hpp"

#include <cmath>
#include <numbers>
#include <tuple>
#include <stdexcept>

namespace mixfrac {

std::pair<double, double> lame_from_E_nu(double E, double nu) {
  if (!(E > 0.0)) throw std::invalid_argument("E must be positive");
  if (!(nu > 0.0 && nu < 0.5)) throw std::invalid_argument("nu must lie in (0, 0.5); lambda is singular at 0.5");
  const double mu = E / (2.0 * (1.0 + nu));
  const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  return {mu, lambda};
}

std::pair<double, double> lame_from_E_K(double E, double K) {
  if (!(E > 0.0) || !(K > 0.0)) throw std::invalid_argument("E and K must be positive");
  if (!(E < 9.0 * K)) throw std::invalid_argument("E must be below 9K");
  const double mu = 3.0 * K * E / (9.0 * K - E);
  return {mu, K - 2.0 * mu / 3.0};
}

double bulk_from_lame(double mu, double lambda) { return lambda + 2.0 * mu / 3.0; }

double nu_from_lame(double mu, double lambda) { return lambda / (2.0 * (lambda + mu)); }

double youngs_from_lame(double mu, double lambda) { return mu * (3.0 * lambda + 2.0 * mu) / (lambda + mu); }

MaterialParams MaterialParams::from_E_K(double E, double K, double Gc, double kappa, double eps, double nu_nominal) {
  MaterialParams m;
  m.E = E;
  m.K = K;
  std::tie(m.mu, m.lambda) = lame_from_E_K(E, K);
  m.nu = nu_nominal > 0.0 ? nu_nominal : nu_from_lame(m.mu, m.lambda);
  m.Gc = Gc;
  m.kappa = kappa;
  m.eps = eps;
  return m;
}

MaterialParams MaterialParams::from_E_nu(double E, double nu, double Gc, double kappa, double eps) {
  MaterialParams m;
  m.E = E;
  m.nu = nu;
  std::tie(m.mu, m.lambda) = lame_from_E_nu(E, nu);
  m.K = bulk_from_lame(m.mu, m.lambda);
  m.Gc = Gc;
  m.kappa = kappa;
  m.eps = eps;
  return m;
}

void MaterialParams::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!(Gc > 0.0)) throw std::invalid_argument("Gc must be positive");
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must lie in (0, 1)");
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
}

std::string to_string(CrackEnergyKind k) {
  switch (k) {
    case CrackEnergyKind::Wu: return "wu";
    case CrackEnergyKind::AT1: return "at1";
    case CrackEnergyKind::AT2: return "at2";
  }
  return "?";
}

std::string to_string(SplitKind k) { return k == SplitKind::AmorMixed ? "amor" : "none"; }

CrackEnergyKind parse_crack_energy(const std::string& s) {
  if (s == "wu") return CrackEnergyKind::Wu;
  if (s == "at1") return CrackEnergyKind::AT1;
  if (s == "at2") return CrackEnergyKind::AT2;
  throw std::invalid_argument("unknown crack energy '" + s + "' (expected wu, at1 or at2)");
}

SplitKind parse_split(const std::string& s) {
  if (s == "amor") return SplitKind::AmorMixed;
  if (s == "none") return SplitKind::None;
  throw std::invalid_argument("unknown split '" + s + "' (expected amor or none)");
}

double crack_energy_density(CrackEnergyKind kind, double phi, const Vec2& g, double Gc, double eps) {
  const double s = 1.0 - phi;
  const double gg = g.squaredNorm();
  switch (kind) {
    case CrackEnergyKind::Wu: return Gc / std::numbers::pi * ((2.0 * s - s * s) / eps + eps * gg);
    case CrackEnergyKind::AT2: return 0.5 * Gc * (s * s / eps + eps * gg);
    case CrackEnergyKind::AT1: return 0.375 * Gc * (s / eps + eps * gg);
  }
  return 0.0;
}

CrackCoefficients crack_coefficients(CrackEnergyKind kind, double Gc, double eps) {
  switch (kind) {
    case CrackEnergyKind::Wu: return {0.0, -2.0 * Gc / (std::numbers::pi * eps), 2.0 * Gc * eps / std::numbers::pi};
    case CrackEnergyKind::AT2: return {-Gc / eps, Gc / eps, Gc * eps};
    case CrackEnergyKind::AT1: return {-0.375 * Gc / eps, 0.0, 0.75 * Gc * eps};
  }
  return {};
}

namespace {

const std::array<Mat2, 3>& sym_units() {
  static const std::array<Mat2, 3> u = [] {
    std::array<Mat2, 3> a;
    a[0] << 1, 0, 0, 0;
    a[1] << 0, 0, 0, 1;
    a[2] << 0, 1, 1, 0;
    return a;
  }();
  return u;
}

struct Eig2 {
  double l1, l2;  // l1 >= l2
  Vec2 n1, n2;
};

Eig2 eig_sym(const Mat2& E) {
  const double a = E(0, 0), b = E(1, 1), c = 0.5 * (E(0, 1) + E(1, 0));
  const double m = 0.5 * (a + b);
  const double r = std::hypot(0.5 * (a - b), c);
  const double th = 0.5 * std::atan2(2.0 * c, a - b);
  return {m + r, m - r, Vec2(std::cos(th), std::sin(th)), Vec2(-std::sin(th), std::cos(th))};
}

inline double pos(double x) { return x > 0.0 ? x : 0.0; }
inline double heaviside(double x) { return x >= 0.0 ? 1.0 : 0.0; }

}  // namespace

Mat2 positive_part(const Mat2& E, PositivePart kind) {
  if (kind == PositivePart::componentwise) return E.unaryExpr([](double v) { return pos(v); });
  const Eig2 e = eig_sym(E);
  return pos(e.l1) * e.n1 * e.n1.transpose() + pos(e.l2) * e.n2 * e.n2.transpose();
}

std::array<Mat2, 3> positive_part_tangent(const Mat2& E, PositivePart kind) {
  std::array<Mat2, 3> out;
  const auto& units = sym_units();
  if (kind == PositivePart::componentwise) {
    const Mat2 H = E.unaryExpr([](double v) { return heaviside(v); });
    for (std::size_t k = 0; k < 3; ++k) out[k] = H.cwiseProduct(units[k]);
    return out;
  }
  const Eig2 e = eig_sym(E);
  const double d1 = heaviside(e.l1), d2 = heaviside(e.l2);
  const double diff = e.l1 - e.l2;
  // Divided difference of max(., 0); falls back to the derivative for equal eigenvalues.
  const double q = diff > 1e-14 * (1.0 + std::abs(e.l1) + std::abs(e.l2)) ? (pos(e.l1) - pos(e.l2)) / diff : d1;
  const Mat2 P11 = e.n1 * e.n1.transpose(), P22 = e.n2 * e.n2.transpose();
  const Mat2 P12 = e.n1 * e.n2.transpose() + e.n2 * e.n1.transpose();
  for (std::size_t k = 0; k < 3; ++k) {
    const Mat2& dE = units[k];
    const double a11 = e.n1.dot(dE * e.n1), a22 = e.n2.dot(dE * e.n2), a12 = e.n1.dot(dE * e.n2);
    out[k] = d1 * a11 * P11 + d2 * a22 * P22 + q * a12 * P12;
  }
  return out;
}

StressSplit stress_split(const Mat2& E, double p, double mu, const SplitOptions& opt) {
  const Mat2 I = Mat2::Identity();
  const Mat2 Ep = positive_part(E, opt.positive_part);
  const double tr = Ep.trace();
  const double trp = pos(tr);
  const double pp = pos(p);
  StressSplit s;
  s.plus = mu * trp * I + 2.0 * mu * (Ep - opt.deviator_factor * tr * I) + pp * I;
  s.minus = mu * (tr - trp) * I + (p - pp) * I;
  if (opt.compressive_deviator) {
    const Mat2 Em = E - Ep;
    s.minus += 2.0 * mu * (Em - opt.deviator_factor * Em.trace() * I);
  }
  return s;
}

StressSplitTangent stress_split_tangent(const Mat2& E, double p, double mu, const SplitOptions& opt) {
  StressSplitTangent t;
  t.value = stress_split(E, p, mu, opt);
  const Mat2 I = Mat2::Identity();
  const Mat2 Ep = positive_part(E, opt.positive_part);
  const double tr = Ep.trace();
  const double htr = heaviside(tr);
  const auto dEp = positive_part_tangent(E, opt.positive_part);
  for (std::size_t k = 0; k < 3; ++k) {
    const double dtr = dEp[k].trace();
    t.dplus_dE[k] = mu * htr * dtr * I + 2.0 * mu * (dEp[k] - opt.deviator_factor * dtr * I);
    t.dminus_dE[k] = mu * (dtr - htr * dtr) * I;
    if (opt.compressive_deviator) {
      const Mat2 dEm = sym_units()[k] - dEp[k];
      t.dminus_dE[k] += 2.0 * mu * (dEm - opt.deviator_factor * dEm.trace() * I);
    }
  }
  const double hp = heaviside(p);
  t.dplus_dp = hp * I;
  t.dminus_dp = (1.0 - hp) * I;
  return t;
}

}  // namespace mixfrac
