#include "mixfrac/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <omp.h>

namespace mixfrac {

Vec2 edge_reference_point(int k, double t) {
  switch (k) {
    case 0: return {t, -1.0};
    case 1: return {1.0, t};
    case 2: return {-t, 1.0};
    default: return {-1.0, -t};
  }
}

namespace {

const std::array<Mat2, 3>& units() {
  static const std::array<Mat2, 3> u = [] {
    std::array<Mat2, 3> a;
    a[0] << 1, 0, 0, 0;
    a[1] << 0, 0, 0, 1;
    a[2] << 0, 1, 1, 0;
    return a;
  }();
  return u;
}

constexpr std::array<double, 3> kUnitTrace{1.0, 1.0, 0.0};

inline double ddot(const Mat2& a, const Mat2& b) { return (a.array() * b.array()).sum(); }

struct LocalStress {
  Mat2 plus = Mat2::Zero();
  Mat2 minus = Mat2::Zero();
  std::array<Mat2, 3> dplus;
  std::array<Mat2, 3> dminus;
  double dplus_dp = 0.0;  ///< coefficient of I; only meaningful with an independent pressure
  double dminus_dp = 0.0;
};

LocalStress local_stress(const Mat2& E, double p, const MaterialParams& m, const ModelOptions& model) {
  LocalStress s;
  const Mat2 I = Mat2::Identity();
  const auto& U = units();
  const bool mixed = model.formulation == Formulation::mixed;
  if (model.split == SplitKind::None) {
    const double pe = mixed ? p : m.lambda * E.trace();
    s.plus = 2.0 * m.mu * E + pe * I;
    for (std::size_t k = 0; k < 3; ++k) {
      s.dplus[k] = 2.0 * m.mu * U[k] + (mixed ? 0.0 : m.lambda * kUnitTrace[k]) * I;
      s.dminus[k] = Mat2::Zero();
    }
    s.dplus_dp = mixed ? 1.0 : 0.0;
    return s;
  }
  const double pe = mixed ? p : m.lambda * E.trace();
  const auto t = stress_split_tangent(E, pe, m.mu, model.split_options);
  s.plus = t.value.plus;
  s.minus = t.value.minus;
  const double hp = t.dplus_dp(0, 0);
  for (std::size_t k = 0; k < 3; ++k) {
    s.dplus[k] = t.dplus_dE[k];
    s.dminus[k] = t.dminus_dE[k];
    if (!mixed) {
      s.dplus[k] += hp * m.lambda * kUnitTrace[k] * I;
      s.dminus[k] += (1.0 - hp) * m.lambda * kUnitTrace[k] * I;
    }
  }
  s.dplus_dp = mixed ? hp : 0.0;
  s.dminus_dp = mixed ? 1.0 - hp : 0.0;
  return s;
}

}  // namespace

PointStress point_stress(const Mat2& E, double p_mixed, const MaterialParams& m, const ModelOptions& model) {
  PointStress ps;
  ps.E = E;
  ps.p = model.formulation == Formulation::mixed ? p_mixed : m.lambda * E.trace();
  const LocalStress s = local_stress(E, p_mixed, m, model);
  ps.split.plus = s.plus;
  ps.split.minus = s.minus;
  return ps;
}

Assembler::Assembler(const Mesh& mesh, const DofMap& dofs, const MaterialParams& material, const ModelOptions& model,
                     int quad_points)
    : mesh_(mesh), dofs_(dofs), material_(material), model_(model), tables_(gauss_rule(quad_points)) {
  if (model_.formulation == Formulation::mixed && !dofs_.has_pressure())
    throw std::invalid_argument("mixed formulation needs a DoF map with pressure");
  if (model_.formulation == Formulation::classical && dofs_.has_pressure())
    throw std::invalid_argument("classical formulation needs a DoF map without pressure");
  build_pattern();
}

void Assembler::build_pattern() {
  const int n = dofs_.n_total();
  std::vector<Triplet> t;
  const int nc = mesh_.n_active();
  for (int ai = 0; ai < nc; ++ai) {
    const auto d = dofs_.cell_dofs(ai);
    for (int r : d)
      for (int c : d) t.emplace_back(r, c, 0.0);
  }
  pattern_.resize(n, n);
  pattern_.setFromTriplets(t.begin(), t.end());
  pattern_.makeCompressed();

  scatter_.resize(static_cast<std::size_t>(nc));
  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  for (int ai = 0; ai < nc; ++ai) {
    const auto d = dofs_.cell_dofs(ai);
    auto& s = scatter_[static_cast<std::size_t>(ai)];
    s.resize(d.size() * d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
      for (std::size_t j = 0; j < d.size(); ++j) {
        const int col = d[j], row = d[i];
        const int* b = inner + outer[col];
        const int* e = inner + outer[col + 1];
        const int* it = std::lower_bound(b, e, row);
        s[i * d.size() + j] = static_cast<int>(it - inner);
      }
  }
}

void Assembler::assemble(const Vector& x, const Vector& phi_lag, AssembledSystem& out, bool with_jacobian) const {
  if (x.size() != dofs_.n_total()) throw std::invalid_argument("state vector has the wrong length");
  if (phi_lag.size() != dofs_.n_q1_nodes()) throw std::invalid_argument("lagged phase field has the wrong length");
  if (dofs_.u_nodes_per_cell() == 9)
    assemble_impl<9>(x, phi_lag, out, with_jacobian);
  else
    assemble_impl<4>(x, phi_lag, out, with_jacobian);
}

template <int NU>
void Assembler::assemble_impl(const Vector& x, const Vector& phi_lag, AssembledSystem& out, bool with_jacobian) const {
  const bool mixed = model_.formulation == Formulation::mixed;
  const int nloc = 2 * NU + (mixed ? 8 : 4);
  const int off_p = 2 * NU;
  const int off_phi = 2 * NU + (mixed ? 4 : 0);
  const MaterialParams& m = material_;
  const double kappa = m.kappa;
  const CrackCoefficients cc = crack_coefficients(model_.crack, m.Gc, m.eps);

  out.residual = Vector::Zero(dofs_.n_total());
  if (with_jacobian) {
    if (out.jacobian.rows() != pattern_.rows() || out.jacobian.nonZeros() != pattern_.nonZeros()) out.jacobian = pattern_;
    std::fill(out.jacobian.valuePtr(), out.jacobian.valuePtr() + out.jacobian.nonZeros(), 0.0);
  }
  double* jval = with_jacobian ? out.jacobian.valuePtr() : nullptr;
  double* rval = out.residual.data();
  const bool parallel = mode_ == ExecutionMode::parallel;
  const int nc = mesh_.n_active();

  std::string error;

#pragma omp parallel if (parallel)
  {
    CellValues cv;
    Eigen::MatrixXd K(nloc, nloc);
    Eigen::VectorXd R(nloc);
    Eigen::Matrix<double, NU, 2> U;
    Eigen::Vector4d P, F, FL;
    std::array<Mat2, 2 * NU> Ea;
    std::array<Mat2, 2 * NU> Sa;
    std::array<Mat2, 2 * NU> Pa;
    std::array<double, 2 * NU> diva;
    std::array<double, 2 * NU> Na;

#pragma omp for schedule(dynamic, 32)
    for (int ai = 0; ai < nc; ++ai) {
      const int cell = mesh_.active_cells()[static_cast<std::size_t>(ai)];
      try {
        tables_.reinit(mesh_.corners(cell), cv);
      } catch (const MeshError& e) {
#pragma omp critical(assembly_error)
        if (error.empty()) error = e.what();
        continue;
      }
      const auto& un = dofs_.u_nodes(ai);
      const auto& qn = dofs_.q1_nodes(ai);
      for (int i = 0; i < NU; ++i)
        for (int c = 0; c < 2; ++c) U(i, c) = x(dofs_.u_dof(un[static_cast<std::size_t>(i)], c));
      for (int j = 0; j < 4; ++j) {
        const int nd = qn[static_cast<std::size_t>(j)];
        P(j) = mixed ? x(dofs_.p_dof(nd)) : 0.0;
        F(j) = x(dofs_.phi_dof(nd));
        FL(j) = phi_lag(nd);
      }
      K.setZero();
      R.setZero();

      for (int q = 0; q < cv.n_q; ++q) {
        const double w = cv.JxW[static_cast<std::size_t>(q)];
        const Vec2& xq = cv.x[static_cast<std::size_t>(q)];
        Eigen::Matrix<double, NU, 1> N;
        Eigen::Matrix<double, NU, 2> dN;
        if constexpr (NU == 9) {
          N = cv.q2[static_cast<std::size_t>(q)];
          dN = cv.q2_grad[static_cast<std::size_t>(q)];
        } else {
          N = cv.q1[static_cast<std::size_t>(q)];
          dN = cv.q1_grad[static_cast<std::size_t>(q)];
        }
        const Eigen::Vector4d& M = cv.q1[static_cast<std::size_t>(q)];
        const Eigen::Matrix<double, 4, 2>& dM = cv.q1_grad[static_cast<std::size_t>(q)];

        const Mat2 G = U.transpose() * dN;  // G(a,b) = d u_a / d x_b
        const Mat2 E = 0.5 * (G + G.transpose());
        const double divu = G.trace();
        const double p = M.dot(P);
        const double phi = M.dot(F);
        const Vec2 gphi = dM.transpose() * F;
        const double gl = degradation(M.dot(FL), kappa);

        const LocalStress s = local_stress(E, p, m, model_);
        const Mat2 S = gl * s.plus + s.minus;
        const double drive = ddot(s.plus, E);

        for (int i = 0; i < NU; ++i)
          for (int c = 0; c < 2; ++c) {
            const int a = 2 * i + c;
            const double c0 = c == 0 ? dN(i, 0) : 0.0;
            const double c1 = c == 1 ? dN(i, 1) : 0.0;
            const double c2 = 0.5 * dN(i, 1 - c);
            Mat2 Ei;
            Ei << c0, c2, c2, c1;
            Ea[static_cast<std::size_t>(a)] = Ei;
            diva[static_cast<std::size_t>(a)] = dN(i, c);
            Na[static_cast<std::size_t>(a)] = N(i);
            const Mat2 dsp = c0 * s.dplus[0] + c1 * s.dplus[1] + c2 * s.dplus[2];
            const Mat2 dsm = c0 * s.dminus[0] + c1 * s.dminus[1] + c2 * s.dminus[2];
            Pa[static_cast<std::size_t>(a)] = dsp;
            Sa[static_cast<std::size_t>(a)] = gl * dsp + dsm;
          }

        Vec2 f = Vec2::Zero();
        if (loads_.body_force) f = loads_.body_force(xq);

        // u rows
        for (int a = 0; a < 2 * NU; ++a) {
          const auto sa = static_cast<std::size_t>(a);
          R(a) += (ddot(S, Ea[sa]) - f(a % 2) * Na[sa]) * w;
          if (!with_jacobian) continue;
          for (int b = 0; b < 2 * NU; ++b) K(a, b) += ddot(Sa[static_cast<std::size_t>(b)], Ea[sa]) * w;
          if (mixed) {
            const double coef = gl * s.dplus_dp + s.dminus_dp;
            for (int k = 0; k < 4; ++k) K(a, off_p + k) += coef * M(k) * diva[sa] * w;
          }
        }
        // p rows
        if (mixed) {
          const double src = loads_.pressure_source ? loads_.pressure_source(xq) : 0.0;
          for (int j = 0; j < 4; ++j) {
            R(off_p + j) += (gl * divu - p / m.lambda - src) * M(j) * w;
            if (!with_jacobian) continue;
            for (int b = 0; b < 2 * NU; ++b) K(off_p + j, b) += gl * diva[static_cast<std::size_t>(b)] * M(j) * w;
            for (int k = 0; k < 4; ++k) K(off_p + j, off_p + k) -= M(j) * M(k) / m.lambda * w;
          }
        }
        // phi rows
        const double local = (1.0 - kappa) * phi * drive + cc.a + cc.b * phi;
        for (int j = 0; j < 4; ++j) {
          const Vec2 gj = dM.row(j).transpose();
          R(off_phi + j) += (local * M(j) + cc.grad_coef * gphi.dot(gj)) * w;
          if (!with_jacobian) continue;
          for (int k = 0; k < 4; ++k) {
            const Vec2 gk = dM.row(k).transpose();
            K(off_phi + j, off_phi + k) +=
                (((1.0 - kappa) * drive + cc.b) * M(j) * M(k) + cc.grad_coef * gj.dot(gk)) * w;
          }
          const double pre = (1.0 - kappa) * phi * M(j) * w;
          for (int b = 0; b < 2 * NU; ++b) {
            const auto sb = static_cast<std::size_t>(b);
            K(off_phi + j, b) += pre * (ddot(Pa[sb], E) + ddot(s.plus, Ea[sb]));
          }
          if (mixed)
            for (int k = 0; k < 4; ++k) K(off_phi + j, off_p + k) += pre * s.dplus_dp * M(k) * E.trace();
        }
      }

      // Boundary tractions.
      if (!loads_.tractions.empty()) {
        const Cell& cl = mesh_.cell(cell);
        std::vector<double> gx, gw;
        gauss_legendre_1d(3, gx, gw);
        for (int k = 0; k < 4; ++k) {
          const BoundaryTag tag = mesh_.edge(cl.e[static_cast<std::size_t>(k)]).tag;
          if (tag == BoundaryTag::none) continue;
          for (const auto& tr : loads_.tractions) {
            if (tr.tag != tag) continue;
            const Vec2 p0 = mesh_.vertex(cl.v[static_cast<std::size_t>(k)]);
            const Vec2 p1 = mesh_.vertex(cl.v[static_cast<std::size_t>((k + 1) % 4)]);
            const double half = 0.5 * (p1 - p0).norm();
            for (std::size_t g = 0; g < gx.size(); ++g) {
              const auto sh = shape_eval(NU == 9 ? ElementKind::Q2_vector2 : ElementKind::Q1_scalar,
                                         edge_reference_point(k, gx[g]));
              for (int i = 0; i < NU; ++i)
                for (int c = 0; c < 2; ++c) R(2 * i + c) -= tr.value(c) * sh.values(i) * half * gw[g];
            }
          }
        }
      }

      if (!R.allFinite() || (with_jacobian && !K.allFinite())) {
        int bad = 0;
        for (int r = 0; r < nloc; ++r)
          if (!std::isfinite(R(r)) || (with_jacobian && !K.row(r).allFinite())) {
            bad = r;
            break;
          }
        const char* field = bad < off_p ? "u" : (bad < off_phi ? "p" : "phi");
        std::ostringstream os;
        os << "non-finite entry in cell " << cell << " (centroid " << mesh_.centroid(cell).transpose()
           << "), field " << field;
#pragma omp critical(assembly_error)
        if (error.empty()) error = os.str();
        continue;
      }

      const auto d = dofs_.cell_dofs(ai);
      const auto& sc = scatter_[static_cast<std::size_t>(ai)];
      if (parallel) {
        for (int i = 0; i < nloc; ++i) {
#pragma omp atomic
          rval[d[static_cast<std::size_t>(i)]] += R(i);
        }
        if (with_jacobian)
          for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j) {
#pragma omp atomic
              jval[sc[static_cast<std::size_t>(i * nloc + j)]] += K(i, j);
            }
      } else {
        for (int i = 0; i < nloc; ++i) rval[d[static_cast<std::size_t>(i)]] += R(i);
        if (with_jacobian)
          for (int i = 0; i < nloc; ++i)
            for (int j = 0; j < nloc; ++j) jval[sc[static_cast<std::size_t>(i * nloc + j)]] += K(i, j);
      }
    }
  }
  if (!error.empty()) throw SolverError(error);
}

Vector Assembler::lumped_q1_mass() const {
  Vector mass = Vector::Zero(dofs_.n_q1_nodes());
  CellValues cv;
  for (int ai = 0; ai < mesh_.n_active(); ++ai) {
    tables_.reinit(mesh_.corners(mesh_.active_cells()[static_cast<std::size_t>(ai)]), cv);
    const auto& qn = dofs_.q1_nodes(ai);
    for (int q = 0; q < cv.n_q; ++q)
      for (int j = 0; j < 4; ++j)
        mass(qn[static_cast<std::size_t>(j)]) += cv.q1[static_cast<std::size_t>(q)](j) * cv.JxW[static_cast<std::size_t>(q)];
  }
  return mass;
}

}  // namespace mixfrac
