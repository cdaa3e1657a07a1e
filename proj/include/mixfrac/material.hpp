#pragma once

#include "mixfrac/types.hpp"

#include <array>
#include <string>
#include <utility>

namespace mixfrac {

/// Units: MPa for moduli, N/mm for Gc, mm for eps.
struct MaterialParams {
  double E = 0.0;
  double nu = 0.0;  ///< reported only; assembly uses mu and lambda
  double mu = 0.0;
  double lambda = 0.0;
  double K = 0.0;
  double Gc = 0.0;
  double kappa = 0.0;
  double eps = 0.0;

  /// Fills mu, lambda and K from E and nu.
  static MaterialParams from_E_nu(double E, double nu, double Gc, double kappa, double eps);
  /// Fills mu and lambda from E and K; nu is computed unless `nu_nominal` > 0.
  static MaterialParams from_E_K(double E, double K, double Gc, double kappa, double eps, double nu_nominal = 0.0);
  /// Throws std::invalid_argument naming the first violated bound.
  void validate() const;
};

/// mu = E/(2(1+nu)), lambda = E nu/((1+nu)(1-2nu)). Rejects nu outside (0, 0.5).
std::pair<double, double> lame_from_E_nu(double E, double nu);
/// mu = 3 K E / (9 K - E), lambda = K - 2 mu / 3. Rejects E >= 9K.
std::pair<double, double> lame_from_E_K(double E, double K);
/// K = lambda + 2 mu / 3
double bulk_from_lame(double mu, double lambda);
/// nu = lambda / (2 (lambda + mu))
double nu_from_lame(double mu, double lambda);
/// E = mu (3 lambda + 2 mu) / (lambda + mu)
double youngs_from_lame(double mu, double lambda);

enum class CrackEnergyKind { Wu, AT1, AT2 };
enum class SplitKind { AmorMixed, None };
enum class PositivePart { spectral, componentwise };

std::string to_string(CrackEnergyKind k);
std::string to_string(SplitKind k);
CrackEnergyKind parse_crack_energy(const std::string& s);
SplitKind parse_split(const std::string& s);

/// g(phi) = (1 - kappa) phi^2 + kappa
inline double degradation(double phi, double kappa) { return (1.0 - kappa) * phi * phi + kappa; }

double crack_energy_density(CrackEnergyKind kind, double phi, const Vec2& grad_phi, double Gc, double eps);

/// d/dphi of the local crack density is a + b*phi; d/d(grad phi) is grad_coef * grad phi.
struct CrackCoefficients {
  double a = 0.0;
  double b = 0.0;
  double grad_coef = 0.0;
};
CrackCoefficients crack_coefficients(CrackEnergyKind kind, double Gc, double eps);

struct SplitOptions {
  PositivePart positive_part = PositivePart::spectral;
  /// Factor in the deviatoric part E+ - f tr(E+) I.
  double deviator_factor = 1.0 / 3.0;
  /// Adds the undegraded 2 mu (E- - f tr(E-) I), E- = E - E+, to sigma-.
  bool compressive_deviator = false;
};

struct StressSplit {
  Mat2 plus = Mat2::Zero();
  Mat2 minus = Mat2::Zero();
};

/// Amor-type split with the pressure as an independent argument.
StressSplit stress_split(const Mat2& E, double p, double mu, const SplitOptions& opt = {});

/// Positive part of a symmetric 2x2 tensor.
Mat2 positive_part(const Mat2& E, PositivePart kind);

/// Derivatives of the split, with branches frozen at the linearization point.
/// dplus_dE[k] is the response to the symmetric unit tensor k, ordered xx, yy
/// and xy (the last with both off-diagonal entries 1).
struct StressSplitTangent {
  StressSplit value;
  std::array<Mat2, 3> dplus_dE;
  std::array<Mat2, 3> dminus_dE;
  Mat2 dplus_dp = Mat2::Zero();
  Mat2 dminus_dp = Mat2::Zero();
};
StressSplitTangent stress_split_tangent(const Mat2& E, double p, double mu, const SplitOptions& opt = {});

/// Derivative of the positive part applied to the three symmetric unit tensors.
std::array<Mat2, 3> positive_part_tangent(const Mat2& E, PositivePart kind);

}  // namespace mixfrac
