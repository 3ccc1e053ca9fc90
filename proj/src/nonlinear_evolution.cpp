#include "tumor/nonlinear_evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tumor/errors.hpp"

namespace tumor {

namespace {

void check_radius(const ShapeState& shape, const ModelParameters& params) {
  if (std::abs(shape.radius_scale() - params.R) > 1e-12 * params.R)
    throw ValidationError("shape radius_scale does not match params.R");
}

}  // namespace

PhiEvaluation evaluate_phi(const ShapeState& shape, const ModelParameters& params, const GridSettings& grid,
                           const DiskField* warm) {
  check_radius(shape, params);
  const DiskSolver solver(shape, grid);
  PhiEvaluation out;
  out.nutrient = solver.solve_nutrient(params.model, warm);
  out.pressure = solver.solve_pressure(params.A, params.G);

  const int nt = grid.n_theta;
  const auto& geo = solver.geometry();
  const std::vector<double> Bpsi = solver.boundary_flux(out.nutrient.values);
  const std::vector<double> Bp = solver.boundary_flux(out.pressure.values);
  std::vector<double> v(nt);
  for (int j = 0; j < nt; ++j) {
    v[j] = (params.G * Bpsi[j] - Bp[j]) / params.R - params.A * params.G / 2.0 * (1.0 + geo.rho[j]);
  }
  out.tangent = ShapeState::from_samples(v, grid.mode_cutoff(), params.R);
  out.values = out.tangent.sample(nt);
  return out;
}

ShapeState phi(const ShapeState& shape, const ModelParameters& params, const GridSettings& grid) {
  return evaluate_phi(shape, params, grid).tangent;
}

DiskField solve_nutrient(const ShapeState& shape, const ModelParameters& params, const GridSettings& grid,
                         const DiskField* warm) {
  check_radius(shape, params);
  return DiskSolver(shape, grid).solve_nutrient(params.model, warm);
}

DiskField solve_pressure(const ShapeState& shape, const ModelParameters& params, const GridSettings& grid) {
  check_radius(shape, params);
  return DiskSolver(shape, grid).solve_pressure(params.A, params.G);
}

void StepperSettings::validate() const {
  if (!(dt_initial > 0.0 && dt_min > 0.0 && dt_max >= dt_min)) throw ValidationError("invalid step sizes");
  if (!(abs_tol > 0.0) || !(rel_tol >= 0.0)) throw ValidationError("invalid step tolerances");
  if (!(record_interval > 0.0)) throw ValidationError("record_interval must be > 0");
  if (stop_sup_norm && !(*stop_sup_norm > 0.0)) throw ValidationError("stop_sup_norm must be > 0");
  if (max_steps < 1) throw ValidationError("max_steps must be >= 1");
}

namespace {

double coeff_norm(const ShapeState& s) {
  double m = 0.0;
  for (const auto& c : s.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

/// One exponential Euler step: y_k <- e^{l_k h} y_k + h phi1(l_k h) (Phi_k - l_k y_k).
ShapeState etd_step(const ShapeState& y, const ShapeState& f, double h, double R) {
  ShapeState out = y;
  for (int k = 0; k <= y.n_modes(); ++k) {
    const double lam = lambda_k(k, R);
    const auto rest = f.coeff(k) - lam * y.coeff(k);
    const double z = lam * h;
    const double phi1 = z == 0.0 ? 1.0 : std::expm1(z) / z;
    out.set_coeff(k, std::exp(z) * y.coeff(k) + h * phi1 * rest);
  }
  return out;
}

}  // namespace

Trajectory evolve_nonlinear(const ShapeState& shape0, double t_end, const ModelParameters& params,
                            const GridSettings& grid, const StepperSettings& stepper) {
  grid.validate();
  stepper.validate();
  check_radius(shape0, params);
  if (!(t_end >= 0.0)) throw ValidationError("t_end must be >= 0");
  const int K = grid.mode_cutoff();
  for (int k = K + 1; k <= shape0.n_modes(); ++k) {
    if (shape0.coeff(k) != std::complex<double>{}) {
      std::ostringstream msg;
      msg << "initial shape has mode " << k << " above the resolved cutoff n_theta/3 = " << K;
      throw ValidationError(msg.str());
    }
  }
  ShapeState y(K, params.R);
  for (int k = 0; k <= std::min(K, shape0.n_modes()); ++k) y.set_coeff(k, shape0.coeff(k));
  y.set_period(shape0.period());

  Trajectory tr;
  if (!y.in_neighbourhood()) {
    tr.times.push_back(0.0);
    tr.states.push_back(y);
    tr.phi_norms.push_back(NAN);
    tr.left_neighbourhood = true;
    tr.halt_reason = "left neighbourhood";
    return tr;
  }

  auto sup_of = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };

  DiskField warm;
  bool have_warm = false;
  auto eval = [&](const ShapeState& s) {
    PhiEvaluation e = evaluate_phi(s, params, grid, have_warm ? &warm : nullptr);
    warm = e.nutrient;
    have_warm = true;
    return e;
  };

  double t = 0.0;
  double dt = std::min(stepper.dt_initial, stepper.dt_max);
  long next_record = 1;
  tr.times.push_back(0.0);
  tr.states.push_back(y);

  PhiEvaluation fy = eval(y);
  tr.phi_norms.push_back(sup_of(fy.values));

  auto halt = [&](const std::string& reason, bool left) {
    tr.halt_reason = reason;
    tr.left_neighbourhood = left;
  };

  for (int step = 0; t < t_end; ++step) {
    if (step >= stepper.max_steps) throw SolverError("evolve_nonlinear: max_steps exceeded");
    const double t_record = std::min(t_end, next_record * stepper.record_interval);
    double h = std::min(dt, t_record - t);
    const bool hits_record = h >= t_record - t;

    ShapeState accepted;
    double err = 0.0, tol = 0.0;
    try {
      const ShapeState full = etd_step(y, fy.tangent, h, params.R);
      const ShapeState mid = etd_step(y, fy.tangent, h / 2.0, params.R);
      const PhiEvaluation fm = eval(mid);
      const ShapeState half = etd_step(mid, fm.tangent, h / 2.0, params.R);
      err = coeff_norm(half - full);
      tol = stepper.abs_tol + stepper.rel_tol * coeff_norm(half);
      accepted = 2.0 * half - full;
    } catch (const DomainExitError& e) {
      if (h <= stepper.dt_min) {
        halt("left neighbourhood", true);
        break;
      }
      dt = h / 4.0;
      continue;
    }
    const double factor = err > 0.0 ? 0.9 * std::sqrt(tol / err) : 4.0;
    if (err > tol) {
      if (h <= stepper.dt_min) throw SolverError("evolve_nonlinear: step size underflow");
      dt = std::max(stepper.dt_min, h * std::clamp(factor, 0.2, 0.9));
      continue;
    }
    t = hits_record ? t_record : t + h;
    y = accepted;
    if (hits_record) {
      ++next_record;
    } else {
      dt = std::min(stepper.dt_max, h * std::clamp(factor, 1.0, 4.0));
    }

    const double sup = y.sup_norm();
    if (!(sup < 0.25)) {
      tr.times.push_back(t);
      tr.states.push_back(y);
      tr.phi_norms.push_back(NAN);
      halt("left neighbourhood", true);
      break;
    }
    try {
      fy = eval(y);
    } catch (const DomainExitError&) {
      tr.times.push_back(t);
      tr.states.push_back(y);
      tr.phi_norms.push_back(NAN);
      halt("left neighbourhood", true);
      break;
    }
    const bool stop = stepper.stop_sup_norm && sup >= *stepper.stop_sup_norm;
    if (hits_record || stop || t >= t_end) {
      tr.times.push_back(t);
      tr.states.push_back(y);
      tr.phi_norms.push_back(sup_of(fy.values));
    }
    if (stop) {
      halt("sup_norm threshold reached", false);
      break;
    }
  }
  return tr;
}

}  // namespace tumor
