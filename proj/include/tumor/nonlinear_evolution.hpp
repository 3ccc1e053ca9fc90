#pragma once

#include <optional>
#include <vector>

#include "tumor/disk_solver.hpp"
#include "tumor/shape.hpp"
#include "tumor/spectrum.hpp"

namespace tumor {

struct PhiEvaluation {
  /// Boundary velocity, dealiased to modes <= n_theta / 3.
  ShapeState tangent;
  /// Same, on the theta grid.
  std::vector<double> values;
  DiskField nutrient;
  DiskField pressure;
};

/// Phi(rho) = (1/R) <G grad psi - grad p - A G x / 2, grad N> on the boundary of Omega_rho.
/// params.R must equal shape.radius_scale(). `warm` seeds the nutrient Newton iteration.
PhiEvaluation evaluate_phi(const ShapeState& shape, const ModelParameters& params, const GridSettings& grid,
                           const DiskField* warm = nullptr);
ShapeState phi(const ShapeState& shape, const ModelParameters& params, const GridSettings& grid = {});

DiskField solve_nutrient(const ShapeState& shape, const ModelParameters& params, const GridSettings& grid = {},
                         const DiskField* warm = nullptr);
DiskField solve_pressure(const ShapeState& shape, const ModelParameters& params, const GridSettings& grid = {});

struct StepperSettings {
  double dt_initial = 1e-3;
  double dt_min = 1e-10;
  double dt_max = 0.05;
  /// Accept a step when |step-doubling difference| <= abs_tol + rel_tol ||rho_hat||_inf.
  double abs_tol = 1e-6;
  double rel_tol = 1e-4;
  /// States are recorded at multiples of this interval (and at the final time).
  double record_interval = 0.01;
  /// Stop early once ||rho||_inf reaches this value.
  std::optional<double> stop_sup_norm;
  int max_steps = 200000;

  void validate() const;
};

/// Integrates d rho / dt = Phi(rho) with exponential Euler on the principal symbol -|k|^3/R^3,
/// step doubling and Richardson extrapolation. Leaving ||rho||_inf < 1/4 halts the run and sets
/// Trajectory::left_neighbourhood.
Trajectory evolve_nonlinear(const ShapeState& shape0, double t_end, const ModelParameters& params,
                            const GridSettings& grid = {}, const StepperSettings& stepper = {});

}  // namespace tumor
