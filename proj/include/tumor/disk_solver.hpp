#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tumor/nutrient_model.hpp"
#include "tumor/shape.hpp"
#include "tumor/spectral.hpp"

namespace tumor {

struct GridSettings {
  int n_theta = 128;
  int n_r = 64;
  double newton_tol = 1e-10;
  int max_newton_iters = 30;
  /// Relative tolerance of each inner linear solve.
  double linear_tol = 1e-12;
  int gmres_restart = 40;
  int gmres_max_iters = 800;

  void validate() const;
  /// Highest Fourier mode kept after 2/3-rule dealiasing.
  int mode_cutoff() const { return n_theta / 3; }
};

/// Polar collocation grid on the unit disk: Chebyshev nodes of the doubled interval [-1, 1]
/// (odd count, so the centre is not a node) times equispaced angles. Row 0 is the rim s = 1.
/// Fields are even across the centre in the sense u(-s, theta) = u(s, theta + pi).
class DiskGrid {
 public:
  DiskGrid(int n_r, int n_theta);

  int n_r() const { return n_r_; }
  int n_theta() const { return n_theta_; }
  const std::vector<double>& s() const { return s_; }
  double theta(int j) const { return fourier_.theta(j); }
  const spectral::FourierBasis& fourier() const { return fourier_; }

  Eigen::MatrixXd ds(const Eigen::MatrixXd& F) const;
  Eigen::MatrixXd dss(const Eigen::MatrixXd& F) const;
  Eigen::MatrixXd dth(const Eigen::MatrixXd& F) const;
  Eigen::MatrixXd dthth(const Eigen::MatrixXd& F) const;
  /// Columns rotated by pi.
  Eigen::MatrixXd half_turn(const Eigen::MatrixXd& F) const;

  /// Radial derivative matrices restricted to one angular mode m (interior rows/columns included).
  Eigen::MatrixXd d1_mode(int m) const;
  Eigen::MatrixXd d2_mode(int m) const;

  /// Value at the centre (mean of the interpolants along all diameters).
  double centre_value(const Eigen::MatrixXd& F) const;
  /// Interpolant along the diameter through theta_j; `odd` for fields with u(-s, t) = -u(s, t + pi).
  spectral::ChebyshevInterpolant diameter(const Eigen::MatrixXd& F, int j, bool odd = false) const;

 private:
  int n_r_, n_theta_;
  std::vector<double> s_;
  std::vector<double> line_nodes_;
  spectral::FourierBasis fourier_;
  Eigen::MatrixXd d1_pos_, d1_neg_, d2_pos_, d2_neg_;
};

struct BoundaryGeometry {
  std::vector<double> rho, drho, d2rho;
  std::vector<double> curvature;
  /// |grad N| = sqrt(1 + (rho' / (1 + rho))^2) with N(x) = |x| / R - 1 - rho(x / |x|).
  std::vector<double> normal_field_factor;
};

/// Samples of rho and its derivatives, plus the curvature of r = R (1 + rho(theta)).
/// Throws DomainExitError when ||rho||_inf >= 1/4.
BoundaryGeometry boundary_geometry(const ShapeState& shape, int n_theta);
std::vector<double> curvature(const ShapeState& shape, int n_theta);

struct DiskField {
  int n_r = 0;
  int n_theta = 0;
  /// n_r x n_theta, row i at mapped radius s_i.
  Eigen::MatrixXd values;
  std::vector<double> boundary_trace;
  /// d/dnu on the physical boundary.
  std::vector<double> normal_derivative_trace;
  /// Final residual after preconditioning, and one entry per Newton step (nutrient only).
  double residual = 0.0;
  std::vector<double> residual_history;
  int linear_iterations = 0;
};

/// Elliptic solves on Omega_rho = { R r (1 + rho(theta)) } pulled back to the unit disk by
/// x = R y (1 + P(y)), P the harmonic extension of rho. The map is ray preserving, so the
/// physical polar angle equals the grid angle.
class DiskSolver {
 public:
  DiskSolver(const ShapeState& shape, const GridSettings& settings);

  const DiskGrid& grid() const { return grid_; }
  const BoundaryGeometry& geometry() const { return geom_; }
  const GridSettings& settings() const { return settings_; }
  double R() const { return R_; }

  /// Physical Laplacian of a grid field.
  Eigen::MatrixXd laplacian(const Eigen::MatrixXd& F) const;

  /// Delta psi = f(psi), psi = 1 on the boundary. `initial` is a warm start on the same grid.
  DiskField solve_nutrient(const NutrientModel& model, const DiskField* initial = nullptr) const;
  /// Delta p = 0 with p = boundary_values on the boundary.
  DiskField solve_pressure(const std::vector<double>& boundary_values) const;
  /// Delta p = 0, p = kappa - A G R^2 (1 + rho)^2 / 4 on the boundary.
  DiskField solve_pressure(double A, double G) const;

  /// <grad w, grad N> on the boundary, grad N = e_r - rho'/(1 + rho) e_phi.
  std::vector<double> boundary_flux(const Eigen::MatrixXd& F) const;

  /// Physical radius of node (i, j).
  double radius(int i, int j) const { return g_(i, j); }
  /// Field value at physical polar point (radius, theta_j), 0 <= radius <= R (1 + rho(theta_j)).
  double value_at(const Eigen::MatrixXd& F, int j, double radius) const;

 private:
  struct ModeSolvers;
  ModeSolvers build_preconditioner(const Eigen::MatrixXd& reaction) const;
  void finish(DiskField& field) const;

  GridSettings settings_;
  DiskGrid grid_;
  double R_;
  BoundaryGeometry geom_;
  Eigen::MatrixXd g_, gs_, gth_;
  Eigen::MatrixXd c_ss_, c_sth_, c_thth_, c_s_;
};

}  // namespace tumor
