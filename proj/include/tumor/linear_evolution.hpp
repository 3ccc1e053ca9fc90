#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "tumor/radial_ode.hpp"
#include "tumor/shape.hpp"
#include "tumor/spectrum.hpp"

namespace tumor {

/// Exact diagonal flow rho_hat(k, t) = e^{mu_k t} rho_hat(k, 0).
/// Every nonzero mode of shape0 must be covered by the table.
ShapeState evolve_linear(const ShapeState& shape0, double t, const SpectrumTable& table);

/// Samples the diagonal flow at the given times.
Trajectory evolve_linear_trajectory(const ShapeState& shape0, const std::vector<double>& times,
                                    const SpectrumTable& table);

/// First-order nutrient perturbation of mode k, A_k(r) = -v0'(1)/u_k(1) rho_hat r^|k| u_k(r).
/// Complex rho_hat gives a complex profile, returned as its real and imaginary parts.
struct LinearizedMode {
  RadialProfile re;
  RadialProfile im;
  std::complex<double> operator()(double r) const { return {re(r), im(r)}; }
};

LinearizedMode linearized_mode_profile(int k, std::complex<double> rho_hat_k, const RadialProfile& v0,
                                       const RadialProfile& u_k);

struct GrowthFit {
  double rate = 0.0;
  double intercept = 0.0;
  /// RMS misfit of log(amplitude).
  double residual = 0.0;
};

/// Least-squares slope of log(amplitude) against t. Needs >= 3 samples, all amplitudes > 0.
GrowthFit fit_growth_rate(const std::vector<std::pair<double, double>>& series);

}  // namespace tumor
