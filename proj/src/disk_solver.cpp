#include "tumor/disk_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tumor/errors.hpp"
#include "tumor/radial_ode.hpp"

namespace tumor {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void GridSettings::validate() const {
  if (n_theta < 8 || n_theta % 2) throw ValidationError("n_theta must be even and >= 8");
  if (n_r < 4) throw ValidationError("n_r must be >= 4");
  if (!(newton_tol > 0.0)) throw ValidationError("newton_tol must be > 0");
  if (max_newton_iters < 1) throw ValidationError("max_newton_iters must be >= 1");
  if (!(linear_tol > 0.0 && linear_tol < 1.0)) throw ValidationError("linear_tol must lie in (0, 1)");
  if (gmres_restart < 1 || gmres_max_iters < 1) throw ValidationError("GMRES limits must be >= 1");
}

// ---------------------------------------------------------------------------------------------
// Grid

DiskGrid::DiskGrid(int n_r, int n_theta) : n_r_(n_r), n_theta_(n_theta), fourier_(n_theta) {
  const int N = 2 * n_r - 1;
  const VectorXd x = spectral::chebyshev_lobatto(N);
  const MatrixXd D = spectral::chebyshev_diff(N);
  const MatrixXd D2 = D * D;
  line_nodes_.assign(x.data(), x.data() + N + 1);
  s_.assign(x.data(), x.data() + n_r);
  d1_pos_ = D.topLeftCorner(n_r, n_r);
  d2_pos_ = D2.topLeftCorner(n_r, n_r);
  d1_neg_.resize(n_r, n_r);
  d2_neg_.resize(n_r, n_r);
  // node N - j is the mirror image -s_j
  for (int j = 0; j < n_r; ++j) {
    d1_neg_.col(j) = D.col(N - j).head(n_r);
    d2_neg_.col(j) = D2.col(N - j).head(n_r);
  }
}

MatrixXd DiskGrid::half_turn(const MatrixXd& F) const {
  const int h = n_theta_ / 2;
  MatrixXd out(F.rows(), F.cols());
  out.leftCols(h) = F.rightCols(h);
  out.rightCols(h) = F.leftCols(h);
  return out;
}

MatrixXd DiskGrid::ds(const MatrixXd& F) const { return d1_pos_ * F + d1_neg_ * half_turn(F); }
MatrixXd DiskGrid::dss(const MatrixXd& F) const { return d2_pos_ * F + d2_neg_ * half_turn(F); }
// Removing the ring means first keeps roundoff in near-radial fields from being amplified by m^2.
MatrixXd DiskGrid::dth(const MatrixXd& F) const {
  return (F.colwise() - F.rowwise().mean()) * fourier_.d1().transpose();
}
MatrixXd DiskGrid::dthth(const MatrixXd& F) const {
  return (F.colwise() - F.rowwise().mean()) * fourier_.d2().transpose();
}

MatrixXd DiskGrid::d1_mode(int m) const { return d1_pos_ + (m % 2 ? -1.0 : 1.0) * d1_neg_; }
MatrixXd DiskGrid::d2_mode(int m) const { return d2_pos_ + (m % 2 ? -1.0 : 1.0) * d2_neg_; }

spectral::ChebyshevInterpolant DiskGrid::diameter(const MatrixXd& F, int j, bool odd) const {
  const int N = 2 * n_r_ - 1;
  const int opposite = (j + n_theta_ / 2) % n_theta_;
  std::vector<double> line(N + 1);
  for (int i = 0; i < n_r_; ++i) {
    line[i] = F(i, j);
    line[N - i] = odd ? -F(i, opposite) : F(i, opposite);
  }
  return {line_nodes_, std::move(line)};
}

double DiskGrid::centre_value(const MatrixXd& F) const {
  const int h = n_theta_ / 2;
  double acc = 0.0;
  for (int j = 0; j < h; ++j) acc += diameter(F, j)(0.0);
  return acc / h;
}

// ---------------------------------------------------------------------------------------------
// Boundary geometry

namespace {

struct Harmonics {
  // P and its derivatives on an (s, theta) grid
  MatrixXd P, Ps, Pss, Pt, Ptt, Pst;
};

Harmonics harmonic_extension(const ShapeState& shape, const std::vector<double>& s, int n_theta, int cutoff) {
  const int nr = static_cast<int>(s.size());
  Harmonics h;
  for (MatrixXd* m : {&h.P, &h.Ps, &h.Pss, &h.Pt, &h.Ptt, &h.Pst}) m->setZero(nr, n_theta);
  h.P.array() += shape.coeff(0).real();
  const int top = std::min(shape.n_modes(), cutoff);
  for (int k = 1; k <= top; ++k) {
    const auto c = shape.coeff(k);
    if (c == std::complex<double>{}) continue;
    VectorXd E(n_theta), Et(n_theta);
    for (int j = 0; j < n_theta; ++j) {
      const double t = 2.0 * M_PI * j / n_theta;
      const double ck = std::cos(k * t), sk = std::sin(k * t);
      E(j) = 2.0 * (c.real() * ck - c.imag() * sk);
      Et(j) = -2.0 * k * (c.real() * sk + c.imag() * ck);
    }
    for (int i = 0; i < nr; ++i) {
      const double sk = std::pow(s[i], k);
      const double sk1 = std::pow(s[i], k - 1);
      const double sk2 = k >= 2 ? std::pow(s[i], k - 2) : 0.0;
      h.P.row(i) += sk * E.transpose();
      h.Ps.row(i) += k * sk1 * E.transpose();
      h.Pss.row(i) += k * (k - 1) * sk2 * E.transpose();
      h.Pt.row(i) += sk * Et.transpose();
      h.Ptt.row(i) += -double(k) * k * sk * E.transpose();
      h.Pst.row(i) += k * sk1 * Et.transpose();
    }
  }
  return h;
}

std::vector<double> dealias(const std::vector<double>& v, const spectral::FourierBasis& fb, int cutoff) {
  const Eigen::Map<const VectorXd> x(v.data(), v.size());
  VectorXd c = fb.analysis() * x;
  for (int m = cutoff + 1; m <= fb.max_mode(); ++m) {
    c(fb.cos_index(m)) = 0.0;
    if (fb.sin_index(m) >= 0) c(fb.sin_index(m)) = 0.0;
  }
  const VectorXd y = fb.synthesis() * c;
  return {y.data(), y.data() + y.size()};
}

BoundaryGeometry geometry_from(const Harmonics& h, double R, const spectral::FourierBasis& fb, int cutoff) {
  const int n = static_cast<int>(h.P.cols());
  BoundaryGeometry g;
  g.rho.resize(n);
  g.drho.resize(n);
  g.d2rho.resize(n);
  g.curvature.resize(n);
  g.normal_field_factor.resize(n);
  for (int j = 0; j < n; ++j) {
    const double r = h.P(0, j), r1 = h.Pt(0, j), r2 = h.Ptt(0, j);
    g.rho[j] = r;
    g.drho[j] = r1;
    g.d2rho[j] = r2;
    const double a = 1.0 + r;
    const double q = a * a + r1 * r1;
    if (!(q > 0.0)) throw DomainExitError("curvature: (1 + rho)^2 + rho'^2 vanishes");
    g.curvature[j] = (a * a + 2.0 * r1 * r1 - a * r2) / (R * std::pow(q, 1.5));
    g.normal_field_factor[j] = std::sqrt(1.0 + (r1 / a) * (r1 / a));
  }
  g.curvature = dealias(g.curvature, fb, cutoff);
  return g;
}

void require_admissible(const ShapeState& shape) {
  const double sup = shape.sup_norm();
  if (!(sup < 0.25)) {
    std::ostringstream msg;
    msg << "shape left the admissible neighbourhood: ||rho||_inf = " << sup << " >= 1/4";
    throw DomainExitError(msg.str());
  }
}

}  // namespace

BoundaryGeometry boundary_geometry(const ShapeState& shape, int n_theta) {
  if (n_theta < 8 || n_theta % 2) throw ValidationError("n_theta must be even and >= 8");
  require_admissible(shape);
  const spectral::FourierBasis fb(n_theta);
  const Harmonics h = harmonic_extension(shape, {1.0}, n_theta, n_theta / 3);
  return geometry_from(h, shape.radius_scale(), fb, n_theta / 3);
}

std::vector<double> curvature(const ShapeState& shape, int n_theta) {
  return boundary_geometry(shape, n_theta).curvature;
}

// ---------------------------------------------------------------------------------------------
// Krylov solver

namespace {

struct GmresOutcome {
  int iterations = 0;
  double residual = 0.0;
};

/// Restarted GMRES on the left-preconditioned system M^{-1} A x = M^{-1} b.
template <class Op, class Prec>
GmresOutcome gmres(const Op& A, const Prec& Minv, const VectorXd& b, VectorXd& x, double tol, int restart,
                   int max_iters) {
  GmresOutcome out;
  VectorXd r = Minv(b - A(x));
  double beta = r.norm();
  while (beta > tol && out.iterations < max_iters) {
    const int m = restart;
    MatrixXd V(b.size(), m + 1);
    MatrixXd H = MatrixXd::Zero(m + 1, m);
    VectorXd cs(m), sn(m), g = VectorXd::Zero(m + 1);
    V.col(0) = r / beta;
    g(0) = beta;
    int j = 0;
    while (j < m && out.iterations < max_iters) {
      VectorXd w = Minv(A(V.col(j)));
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const double hij = w.dot(V.col(i));
          H(i, j) += hij;
          w -= hij * V.col(i);
        }
      }
      H(j + 1, j) = w.norm();
      const bool breakdown = H(j + 1, j) <= 1e-300;
      if (!breakdown) V.col(j + 1) = w / H(j + 1, j);
      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * H(i, j) + sn(i) * H(i + 1, j);
        H(i + 1, j) = -sn(i) * H(i, j) + cs(i) * H(i + 1, j);
        H(i, j) = t;
      }
      const double rr = std::hypot(H(j, j), H(j + 1, j));
      cs(j) = H(j, j) / rr;
      sn(j) = H(j + 1, j) / rr;
      H(j, j) = rr;
      H(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);
      ++j;
      ++out.iterations;
      if (std::abs(g(j)) <= tol || breakdown) break;
    }
    const VectorXd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    x += V.leftCols(j) * y;
    r = Minv(b - A(x));
    const double next = r.norm();
    if (next >= beta && std::abs(g(j)) > tol) {
      beta = next;
      break;  // stagnation at the roundoff floor
    }
    beta = next;
  }
  out.residual = beta;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Solver on the mapped disk

struct DiskSolver::ModeSolvers {
  std::vector<Eigen::PartialPivLU<MatrixXd>> lu;  // one per angular mode, interior rows/cols
};

DiskSolver::DiskSolver(const ShapeState& shape, const GridSettings& settings)
    : settings_(settings), grid_(settings.n_r, settings.n_theta), R_(shape.radius_scale()) {
  settings_.validate();
  require_admissible(shape);
  const int nr = settings_.n_r, nt = settings_.n_theta;
  const Harmonics h = harmonic_extension(shape, grid_.s(), nt, settings_.mode_cutoff());
  geom_ = geometry_from(h, R_, grid_.fourier(), settings_.mode_cutoff());

  g_.resize(nr, nt);
  gs_.resize(nr, nt);
  gth_.resize(nr, nt);
  c_ss_.resize(nr, nt);
  c_sth_.resize(nr, nt);
  c_thth_.resize(nr, nt);
  c_s_.resize(nr, nt);
  for (int i = 0; i < nr; ++i) {
    const double s = grid_.s()[i];
    for (int j = 0; j < nt; ++j) {
      const double P = h.P(i, j), Ps = h.Ps(i, j), Pss = h.Pss(i, j);
      const double Pt = h.Pt(i, j), Ptt = h.Ptt(i, j), Pst = h.Pst(i, j);
      const double g = s * R_ * (1.0 + P);
      const double gs = R_ * (1.0 + P + s * Ps);
      const double gss = R_ * (2.0 * Ps + s * Pss);
      const double gt = s * R_ * Pt;
      const double gtt = s * R_ * Ptt;
      const double gst = R_ * (Pt + s * Pst);
      if (!(gs > 0.0) || !(g > 0.0)) {
        throw SolverError("disk map is not invertible for this shape (radial stretch folds); the shape is too "
                          "oscillatory for the harmonic-extension map");
      }
      const double c = gt / gs;
      const double cs = (gst * gs - gt * gss) / (gs * gs);
      const double ct = (gtt * gs - gt * gst) / (gs * gs);
      g_(i, j) = g;
      gs_(i, j) = gs;
      gth_(i, j) = gt;
      c_ss_(i, j) = 1.0 / (gs * gs) + c * c / (g * g);
      c_sth_(i, j) = -2.0 * c / (g * g);
      c_thth_(i, j) = 1.0 / (g * g);
      c_s_(i, j) = -gss / (gs * gs * gs) + 1.0 / (g * gs) + (c * cs - ct) / (g * g);
    }
  }
}

double DiskSolver::value_at(const MatrixXd& F, int j, double radius) const {
  if (j < 0 || j >= settings_.n_theta) throw ValidationError("value_at: angle index out of range");
  if (!(radius >= 0.0 && radius <= g_(0, j) * (1.0 + 1e-14))) throw ValidationError("value_at: point outside the domain");
  // the mapped radius is odd across the centre; invert it by bisection along the diameter
  const auto g = grid_.diameter(g_, j, true);
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < radius ? lo : hi) = mid;
  }
  return grid_.diameter(F, j)(0.5 * (lo + hi));
}

MatrixXd DiskSolver::laplacian(const MatrixXd& F) const {
  const MatrixXd Ft = grid_.dth(F);
  return c_ss_.cwiseProduct(grid_.dss(F)) + c_sth_.cwiseProduct(grid_.ds(Ft)) +
         c_thth_.cwiseProduct(grid_.dthth(F)) + c_s_.cwiseProduct(grid_.ds(F));
}

DiskSolver::ModeSolvers DiskSolver::build_preconditioner(const MatrixXd& reaction) const {
  const int nr = settings_.n_r, ni = nr - 1;
  const VectorXd a = c_ss_.rowwise().mean(), d = c_s_.rowwise().mean(), t = c_thth_.rowwise().mean();
  const VectorXd q = reaction.rowwise().mean();
  ModeSolvers ms;
  for (int m = 0; m <= grid_.fourier().max_mode(); ++m) {
    const MatrixXd D1 = grid_.d1_mode(m).bottomRightCorner(ni, ni);
    const MatrixXd D2 = grid_.d2_mode(m).bottomRightCorner(ni, ni);
    MatrixXd M = a.tail(ni).asDiagonal() * D2 + d.tail(ni).asDiagonal() * D1;
    M.diagonal() -= double(m) * m * t.tail(ni) + q.tail(ni);
    ms.lu.emplace_back(M);
  }
  return ms;
}

namespace {

/// Applies the per-mode radial solves to interior residuals stored column-major (n_r - 1) x n_theta.
VectorXd apply_modes(const VectorXd& r, int ni, const spectral::FourierBasis& fb,
                     const std::vector<Eigen::PartialPivLU<MatrixXd>>& lu) {
  const int nt = fb.size();
  const Eigen::Map<const MatrixXd> R(r.data(), ni, nt);
  MatrixXd C = R * fb.analysis().transpose();
  for (int c = 0; c < nt; ++c) {
    const int m = c == 0 ? 0 : (c % 2 ? (c + 1) / 2 : c / 2);
    C.col(c) = lu[m].solve(C.col(c));
  }
  MatrixXd X = C * fb.synthesis().transpose();
  return Eigen::Map<VectorXd>(X.data(), X.size());
}

}  // namespace

void DiskSolver::finish(DiskField& field) const {
  field.n_r = settings_.n_r;
  field.n_theta = settings_.n_theta;
  const Eigen::RowVectorXd rim = field.values.row(0);
  field.boundary_trace.assign(rim.data(), rim.data() + rim.size());
  field.normal_derivative_trace = boundary_flux(field.values);
  for (int j = 0; j < settings_.n_theta; ++j) field.normal_derivative_trace[j] /= geom_.normal_field_factor[j];
}

std::vector<double> DiskSolver::boundary_flux(const MatrixXd& F) const {
  const Eigen::RowVectorXd Ws = grid_.ds(F).row(0);
  const Eigen::RowVectorXd Wt = grid_.dth(F.topRows(1)).row(0);
  std::vector<double> out(settings_.n_theta);
  for (int j = 0; j < settings_.n_theta; ++j) {
    const double wr = Ws(j) / gs_(0, j);
    const double wphi = Wt(j) - gth_(0, j) * wr;
    const double a = 1.0 + geom_.rho[j];
    out[j] = wr - geom_.drho[j] / (R_ * a * a) * wphi;
  }
  return out;
}

DiskField DiskSolver::solve_nutrient(const NutrientModel& model, const DiskField* initial) const {
  const int nr = settings_.n_r, nt = settings_.n_theta, ni = nr - 1;
  const std::size_t n = std::size_t(ni) * nt;
  DiskField field;
  if (initial && initial->values.rows() == nr && initial->values.cols() == nt) {
    field.values = initial->values;
  } else {
    // radial profile of the unperturbed disk in mapped coordinates
    const RadialProfile U = solve_U(R_ * R_, model);
    field.values.resize(nr, nt);
    for (int i = 0; i < nr; ++i) field.values.row(i).setConstant(U(grid_.s()[i]));
  }
  field.values.row(0).setOnes();

  auto residual = [&](const MatrixXd& psi) {
    MatrixXd F = laplacian(psi) - psi.unaryExpr([&](double v) { return model.f(v); });
    MatrixXd Fi = F.bottomRows(ni);
    return VectorXd(Eigen::Map<VectorXd>(Fi.data(), n));
  };

  for (int it = 0;; ++it) {
    const MatrixXd fp = field.values.unaryExpr([&](double v) { return model.fprime(v); });
    const ModeSolvers ms = build_preconditioner(fp);
    auto Minv = [&](const VectorXd& r) { return apply_modes(r, ni, grid_.fourier(), ms.lu); };
    const VectorXd F = residual(field.values);
    const VectorXd PF = Minv(F);
    const double res = PF.lpNorm<Eigen::Infinity>();
    field.residual_history.push_back(res);
    field.residual = res;
    if (!std::isfinite(res)) throw SolverError("solve_nutrient: residual is not finite");
    if (res <= settings_.newton_tol) break;
    if (it >= settings_.max_newton_iters) {
      std::ostringstream msg;
      msg << "solve_nutrient: Newton did not converge in " << settings_.max_newton_iters
          << " iterations; residual history:";
      for (double h : field.residual_history) msg << ' ' << h;
      throw SolverError(msg.str());
    }
    auto J = [&](const VectorXd& v) {
      MatrixXd full = MatrixXd::Zero(nr, nt);
      full.bottomRows(ni) = Eigen::Map<const MatrixXd>(v.data(), ni, nt);
      MatrixXd Jv = laplacian(full) - fp.cwiseProduct(full);
      MatrixXd Ji = Jv.bottomRows(ni);
      return VectorXd(Eigen::Map<VectorXd>(Ji.data(), n));
    };
    VectorXd delta = VectorXd::Zero(n);
    const double tol = std::max(settings_.linear_tol * PF.norm(), 1e-15 * std::sqrt(double(n)));
    const GmresOutcome g =
        gmres(J, Minv, VectorXd(-F), delta, tol, settings_.gmres_restart, settings_.gmres_max_iters);
    field.linear_iterations += g.iterations;
    field.values.bottomRows(ni) += Eigen::Map<const MatrixXd>(delta.data(), ni, nt);
  }
  finish(field);
  return field;
}

DiskField DiskSolver::solve_pressure(const std::vector<double>& boundary_values) const {
  const int nr = settings_.n_r, nt = settings_.n_theta, ni = nr - 1;
  const std::size_t n = std::size_t(ni) * nt;
  if (static_cast<int>(boundary_values.size()) != nt) throw ValidationError("solve_pressure: wrong trace length");
  // constants are harmonic: solve only for the oscillating part
  double mean = 0.0;
  for (double v : boundary_values) mean += v;
  mean /= nt;
  MatrixXd lift = MatrixXd::Zero(nr, nt);
  double scale = 0.0;
  for (int j = 0; j < nt; ++j) {
    lift(0, j) = boundary_values[j] - mean;
    scale = std::max(scale, std::abs(lift(0, j)));
  }

  const ModeSolvers ms = build_preconditioner(MatrixXd::Zero(nr, nt));
  auto Minv = [&](const VectorXd& r) { return apply_modes(r, ni, grid_.fourier(), ms.lu); };
  auto L = [&](const VectorXd& v) {
    MatrixXd full = MatrixXd::Zero(nr, nt);
    full.bottomRows(ni) = Eigen::Map<const MatrixXd>(v.data(), ni, nt);
    MatrixXd Lv = laplacian(full).bottomRows(ni);
    return VectorXd(Eigen::Map<VectorXd>(Lv.data(), n));
  };
  MatrixXd Ll = laplacian(lift).bottomRows(ni);
  const VectorXd b = -Eigen::Map<VectorXd>(Ll.data(), n);

  DiskField field;
  VectorXd x = VectorXd::Zero(n);
  if (scale > 0.0) {
    const double tol = std::max(settings_.linear_tol * Minv(b).norm(), 1e-16 * scale * std::sqrt(double(n)));
    const GmresOutcome g = gmres(L, Minv, b, x, tol, settings_.gmres_restart, settings_.gmres_max_iters);
    field.linear_iterations = g.iterations;
  }
  field.values = lift;
  field.values.bottomRows(ni) = Eigen::Map<const MatrixXd>(x.data(), ni, nt);
  const VectorXd harmonic_residual = Minv(L(x) - b);
  field.residual = harmonic_residual.lpNorm<Eigen::Infinity>();
  if (!std::isfinite(field.residual)) throw SolverError("solve_pressure: linear solve produced non-finite values");
  if (field.residual > std::max(settings_.newton_tol, 1e-8 * scale)) {
    std::ostringstream msg;
    msg << "solve_pressure: linear solve stalled at residual " << field.residual;
    throw SolverError(msg.str());
  }
  field.values.array() += mean;
  finish(field);
  return field;
}

DiskField DiskSolver::solve_pressure(double A, double G) const {
  std::vector<double> data(settings_.n_theta);
  for (int j = 0; j < settings_.n_theta; ++j) {
    const double a = 1.0 + geom_.rho[j];
    data[j] = geom_.curvature[j] - A * G * R_ * R_ / 4.0 * a * a;
  }
  return solve_pressure(dealias(data, grid_.fourier(), settings_.mode_cutoff()));
}

}  // namespace tumor
