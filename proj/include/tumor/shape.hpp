#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace tumor {

/// Boundary perturbation rho(theta) = sum_k rho_hat(k) e^{ik theta}, stored for k >= 0 only;
/// rho_hat(-k) = conj(rho_hat(k)) keeps rho real by construction.
class ShapeState {
 public:
  using Complex = std::complex<double>;

  ShapeState() : ShapeState(128) {}
  explicit ShapeState(int n_modes, double radius_scale = 1.0);

  int n_modes() const { return static_cast<int>(coeffs_.size()) - 1; }
  double radius_scale() const { return radius_scale_; }
  void set_radius_scale(double R);

  /// rho_hat(k) for any integer k; zero beyond n_modes.
  Complex coeff(int k) const;
  /// Sets rho_hat(k) (and so rho_hat(-k)). The mean mode is forced real.
  void set_coeff(int k, Complex value);
  const std::vector<Complex>& coeffs() const { return coeffs_; }

  /// Values on theta_j = 2 pi j / n_theta.
  std::vector<double> sample(int n_theta) const;
  /// Discrete Fourier analysis of equispaced samples; keeps modes below n_theta / 2.
  static ShapeState from_samples(const std::vector<double>& values, int n_modes, double radius_scale);

  /// max |rho| on a fine grid (at least 8 points per retained mode).
  double sup_norm() const;
  /// ||rho||_inf < 1/4 with a margin for the sampling error of sup_norm.
  bool in_neighbourhood() const;
  /// Throws ValidationError unless in_neighbourhood().
  void require_in_neighbourhood() const;

  /// Optional 2 pi / l symmetry flag; set_period zeroes nothing, it only records the lattice.
  std::optional<int> period() const { return period_; }
  void set_period(std::optional<int> l);
  /// Largest |rho_hat(k)| over k not divisible by l.
  double lattice_leakage(int l) const;
  bool respects_period(int l, double tol = 0.0) const { return lattice_leakage(l) <= tol; }

  /// Parses "k:amp:phase[,...]" meaning sum amp cos(k theta + phase).
  static ShapeState from_seed(const std::string& spec, int n_modes, double radius_scale);
  void add_cosine(int k, double amplitude, double phase);

  ShapeState& operator+=(const ShapeState& other);
  ShapeState& operator*=(double s);

 private:
  std::vector<Complex> coeffs_;
  double radius_scale_ = 1.0;
  std::optional<int> period_;
};

ShapeState operator+(ShapeState a, const ShapeState& b);
ShapeState operator-(ShapeState a, const ShapeState& b);
ShapeState operator*(double s, ShapeState a);

/// Recorded states of a shape evolution.
struct Trajectory {
  std::vector<double> times;
  std::vector<ShapeState> states;
  /// ||Phi(rho)||_inf at each recorded state (nonlinear runs only).
  std::vector<double> phi_norms;
  bool left_neighbourhood = false;
  std::string halt_reason;
};

}  // namespace tumor
