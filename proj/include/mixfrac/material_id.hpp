#pragma once

#include "mixfrac/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace mixfrac {

/// Sampled curve with strictly increasing abscissa.
struct Curve {
  std::vector<double> x;
  std::vector<double> y;
  std::string x_name;
  std::string y_name;

  std::size_t size() const { return x.size(); }
  /// Throws DataError on unequal lengths, non-finite values or a non-increasing abscissa.
  void validate() const;
  /// Linear interpolation; throws DataError outside [x.front(), x.back()].
  double at(double xi) const;
  /// Trapezoidal integral of y dx from x.front() to xi.
  double integral_to(double xi) const;
};

/// Reads a headered CSV and returns the two named columns. Throws DataError if
/// a column is missing or a value does not parse.
Curve read_curve_csv(const std::string& path, const std::string& x_column, const std::string& y_column);

enum class FitNorm { L1, L2 };

struct ModulusFitOptions {
  double strain_max = 1.0;
  FitNorm norm = FitNorm::L1;
  bool intercept = false;
};

struct ModulusFit {
  double E = 0.0;
  double intercept = 0.0;
  int samples = 0;
  double objective = 0.0;  ///< sum |r| for L1, sum r^2 for L2
};

/// Slope of sigma = E eps (+ b) over samples with eps <= strain_max. The L1 fit
/// runs a golden-section search on [0.5, 1.5] times the least-squares slope.
ModulusFit fit_modulus(const Curve& stress_strain, const ModulusFitOptions& opt = {});

struct BulkFitOptions {
  double force_lo = 1000.0;  ///< N
  double force_hi = 2000.0;  ///< N
  double area_mm2 = 0.0;     ///< required
  double height_mm = 0.0;    ///< required
};

struct BulkFit {
  double K = 0.0;
  double slope = 0.0;  ///< N/mm
  int samples = 0;
};

/// Confined compression: K = (dF/du) height / area with dF/du the least-squares
/// slope over the samples whose force lies in the window.
BulkFit fit_bulk(const Curve& force_displacement, const BulkFitOptions& opt);

struct GcOptions {
  double c0_mm = 47.0;
  double thickness_mm = 1.8;
  double window_min_crack_mm = 5.0;  ///< stationary mean over c > this
  std::vector<double> grid;          ///< displacements; empty uses the notched samples
};

struct GcSample {
  double u = 0.0;
  double c = 0.0;
  double dU = 0.0;
  double Gc = 0.0;
};

struct GcEstimate {
  std::vector<GcSample> samples;
  double stationary = 0.0;
  int window_samples = 0;
};

/// Gc(u) = dU / ((c0 + c) t) with dU = int F_unnotched du - int F_notched du.
/// `crack_growth` maps displacement to crack length and must be nondecreasing.
GcEstimate estimate_gc(const Curve& unnotched, const Curve& notched, const Curve& crack_growth,
                       const GcOptions& opt = {});

}  // namespace mixfrac
