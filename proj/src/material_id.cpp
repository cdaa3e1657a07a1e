#include "mixfrac/material_id.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mixfrac {

void Curve::validate() const {
  if (x.size() != y.size()) throw DataError("curve '" + y_name + "': column lengths differ");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw DataError("curve '" + y_name + "': non-finite value in row " + std::to_string(i + 1));
    if (i > 0 && !(x[i] > x[i - 1]))
      throw DataError("curve '" + y_name + "': abscissa '" + x_name + "' not strictly increasing at row " +
                      std::to_string(i + 1));
  }
}

double Curve::at(double xi) const {
  if (x.empty() || xi < x.front() - 1e-12 || xi > x.back() + 1e-12) {
    std::ostringstream os;
    os << "curve '" << y_name << "': " << x_name << " = " << xi << " outside the sampled range";
    throw DataError(os.str());
  }
  if (x.size() == 1) return y.front();
  auto it = std::upper_bound(x.begin(), x.end(), xi);
  std::size_t k = static_cast<std::size_t>(std::distance(x.begin(), it));
  k = std::clamp<std::size_t>(k, 1, x.size() - 1);
  const double s = (xi - x[k - 1]) / (x[k] - x[k - 1]);
  return (1.0 - s) * y[k - 1] + s * y[k];
}

double Curve::integral_to(double xi) const {
  const double yi = at(xi);
  double sum = 0.0;
  for (std::size_t k = 1; k < x.size() && x[k - 1] < xi; ++k) {
    const double xr = std::min(x[k], xi);
    const double yr = x[k] <= xi ? y[k] : yi;
    sum += 0.5 * (y[k - 1] + yr) * (xr - x[k - 1]);
  }
  return sum;
}

namespace {

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) || c == '"'; };
  while (!s.empty() && ws(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && ws(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

}  // namespace

Curve read_curve_csv(const std::string& path, const std::string& x_column, const std::string& y_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  std::vector<std::string> header;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    header = split_csv(line);
    break;
  }
  if (header.empty()) throw DataError(path + ": missing header row");
  auto find = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(path + ": missing column '" + name + "' in header");
    return static_cast<std::size_t>(std::distance(header.begin(), it));
  };
  const std::size_t ix = find(x_column), iy = find(y_column);
  Curve c;
  c.x_name = x_column;
  c.y_name = y_column;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line)[0] == '#') continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size())
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " fields");
    auto num = [&](std::size_t i) {
      double v = 0.0;
      const auto& s = cells[i];
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || p != s.data() + s.size())
        throw DataError(path + ":" + std::to_string(lineno) + ": column '" + header[i] + "' is not a number");
      return v;
    };
    c.x.push_back(num(ix));
    c.y.push_back(num(iy));
  }
  c.validate();
  return c;
}

namespace {

double median(std::vector<double> v) {
  const std::size_t m = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m), v.end());
  double hi = v[m];
  if (v.size() % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m)));
}

}  // namespace

ModulusFit fit_modulus(const Curve& curve, const ModulusFitOptions& opt) {
  curve.validate();
  std::vector<double> e, s;
  for (std::size_t i = 0; i < curve.size(); ++i)
    if (curve.x[i] <= opt.strain_max) {
      e.push_back(curve.x[i]);
      s.push_back(curve.y[i]);
    }
  if (e.size() < 2) throw DataError("fit_modulus: fewer than 2 samples with strain <= strain_max");
  const double n = static_cast<double>(e.size());

  // Least-squares slope (and intercept).
  double see = 0, ses = 0, se = 0, ss = 0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    see += e[i] * e[i];
    ses += e[i] * s[i];
    se += e[i];
    ss += s[i];
  }
  double E_ls, b_ls = 0.0;
  if (opt.intercept) {
    const double det = n * see - se * se;
    if (std::abs(det) <= 1e-300) throw DataError("fit_modulus: strains are all equal");
    E_ls = (n * ses - se * ss) / det;
    b_ls = (ss - E_ls * se) / n;
  } else {
    if (see <= 0.0) throw DataError("fit_modulus: all strains are zero");
    E_ls = ses / see;
  }

  auto best_intercept = [&](double E) {
    if (!opt.intercept) return 0.0;
    std::vector<double> r(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) r[i] = s[i] - E * e[i];
    return median(r);
  };
  auto l1 = [&](double E) {
    const double b = best_intercept(E);
    double sum = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) sum += std::abs(s[i] - E * e[i] - b);
    return sum;
  };

  ModulusFit fit;
  fit.samples = static_cast<int>(e.size());
  if (opt.norm == FitNorm::L2) {
    fit.E = E_ls;
    fit.intercept = b_ls;
    for (std::size_t i = 0; i < e.size(); ++i) fit.objective += std::pow(s[i] - E_ls * e[i] - b_ls, 2);
    return fit;
  }
  double lo = std::min(0.5 * E_ls, 1.5 * E_ls), hi = std::max(0.5 * E_ls, 1.5 * E_ls);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
  double fa = l1(a), fb = l1(b);
  const double tol = 1e-12 * std::max(1.0, std::abs(E_ls));
  while (hi - lo > tol) {
    if (fa <= fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - g * (hi - lo);
      fa = l1(a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + g * (hi - lo);
      fb = l1(b);
    }
  }
  fit.E = 0.5 * (lo + hi);
  fit.intercept = best_intercept(fit.E);
  fit.objective = l1(fit.E);
  return fit;
}

BulkFit fit_bulk(const Curve& curve, const BulkFitOptions& opt) {
  curve.validate();
  if (!(opt.area_mm2 > 0.0) || !(opt.height_mm > 0.0))
    throw DataError("fit_bulk: specimen area and height are required and must be positive");
  if (!(opt.force_hi > opt.force_lo)) throw DataError("fit_bulk: empty force window");
  std::vector<double> u, f;
  for (std::size_t i = 0; i < curve.size(); ++i)
    if (curve.y[i] >= opt.force_lo && curve.y[i] <= opt.force_hi) {
      u.push_back(curve.x[i]);
      f.push_back(curve.y[i]);
    }
  if (u.size() < 2) throw DataError("fit_bulk: fewer than 2 samples inside the force window");
  const double n = static_cast<double>(u.size());
  double su = 0, sf = 0, suu = 0, suf = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    su += u[i];
    sf += f[i];
    suu += u[i] * u[i];
    suf += u[i] * f[i];
  }
  BulkFit fit;
  fit.samples = static_cast<int>(u.size());
  fit.slope = (n * suf - su * sf) / (n * suu - su * su);
  fit.K = fit.slope * opt.height_mm / opt.area_mm2;
  return fit;
}

GcEstimate estimate_gc(const Curve& unnotched, const Curve& notched, const Curve& crack_growth, const GcOptions& opt) {
  unnotched.validate();
  notched.validate();
  crack_growth.validate();
  if (!(opt.c0_mm > 0.0) || !(opt.thickness_mm > 0.0)) throw DataError("estimate_gc: c0 and thickness must be positive");
  for (std::size_t i = 1; i < crack_growth.size(); ++i)
    if (crack_growth.y[i] < crack_growth.y[i - 1])
      throw DataError("estimate_gc: crack growth is not monotone at row " + std::to_string(i + 1));
  if (notched.x.front() < crack_growth.x.front() - 1e-12 || notched.x.back() > crack_growth.x.back() + 1e-12)
    throw DataError("estimate_gc: crack growth does not cover the notched displacement range");
  const std::vector<double>& grid = opt.grid.empty() ? notched.x : opt.grid;
  GcEstimate est;
  double sum = 0.0;
  for (double u : grid) {
    // at() rejects grid points outside either curve.
    GcSample s;
    s.u = u;
    s.dU = unnotched.integral_to(u) - notched.integral_to(u);
    s.c = crack_growth.at(u);
    s.Gc = s.dU / ((opt.c0_mm + s.c) * opt.thickness_mm);
    est.samples.push_back(s);
    if (s.c > opt.window_min_crack_mm) {
      sum += s.Gc;
      ++est.window_samples;
    }
  }
  if (est.window_samples == 0) throw DataError("estimate_gc: no grid point inside the stationary crack-length window");
  est.stationary = sum / est.window_samples;
  return est;
}

}  // namespace mixfrac
