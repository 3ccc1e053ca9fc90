#pragma once

#include <string>
#include <vector>

#include "tumor/nutrient_model.hpp"
#include "tumor/spectral.hpp"

namespace tumor {

struct SolverSettings {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  /// Radius at which the Taylor start hands over to the integrator.
  double series_start_radius = 1e-4;
  int max_newton_iters = 200;
  /// Shooting bracket for the centre value U(0, lambda).
  double bracket_lo = 1e-12;
  double bracket_hi = 1.0;
  /// Lobatto intervals of the stored profile grid (nodes = profile_intervals + 1).
  int profile_intervals = 64;

  void validate() const;
};

/// A radially symmetric field on [0, 1], stored on Chebyshev-Lobatto nodes.
struct RadialProfile {
  enum class Kind { u_n, U, v0, A_k };

  Kind kind = Kind::U;
  /// n for u_n, k for A_k; unused otherwise.
  int index = 0;
  /// lambda for U / v0 profiles, R_A for u_n and A_k.
  double parameter = 0.0;

  std::vector<double> grid;    ///< ascending, grid.front() == 0, grid.back() == 1
  std::vector<double> values;
  std::vector<double> derivs;  ///< first derivative at each node
  double deriv_at_0 = 0.0;
  double deriv_at_1 = 0.0;

  double value_at_1() const { return values.back(); }
  /// Spectral interpolation of the values.
  double operator()(double r) const;
  double derivative(double r) const;
};

/// Solves U'' + U'/r = lambda f(U), U'(0) = 0, U(1) = 1 by shooting on U(0).
RadialProfile solve_U(double lambda, const NutrientModel& model, const SolverSettings& settings = {});

/// Solves u'' + (2n+1)/r u' = R_A^2 f'(v0) u, u(0) = 1, u'(0) = 0.
RadialProfile solve_u_n(int n, double R_A, const RadialProfile& v0, const NutrientModel& model,
                        const SolverSettings& settings = {});

/// u_n'(1) / u_n(1).
double boundary_ratio(int n, double R_A, const RadialProfile& v0, const NutrientModel& model,
                      const SolverSettings& settings = {});

struct SteadyState {
  double A = 0.0;
  double R_A = 0.0;
  /// R_A^2 (f(1) - A/2) = v0''(1).
  double alpha_A = 0.0;
  /// U_r(1, R_A^2) - A R_A^2 / 2 at the returned radius.
  double residual = 0.0;
  RadialProfile v0;
};

/// Radius of the radially symmetric equilibrium: root of U_r(1, R^2) = A R^2 / 2.
SteadyState steady_radius(double A, const NutrientModel& model, const SolverSettings& settings = {});

enum class AppendixSeries { u0, u1 };

/// Partial sum (first `terms` terms, constant term included) of the power series of u_0 or u_1
/// for f = id, R_A = 1.
double appendix_series(AppendixSeries which, double x, int terms);
/// Coefficient of x^(2k) in the same series.
double appendix_coefficient(AppendixSeries which, int k);

/// Max residual of the profile's defining ODE at the midpoints of its grid, using
/// spectral derivatives of the stored values/derivatives. Needs `model` and, for u_n, `v0`.
double ode_residual(const RadialProfile& profile, const NutrientModel& model,
                    const RadialProfile* v0 = nullptr);

}  // namespace tumor
