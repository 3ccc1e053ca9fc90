#include "tumor/linear_evolution.hpp"

#include <cmath>
#include <sstream>

#include "tumor/errors.hpp"

namespace tumor {

ShapeState evolve_linear(const ShapeState& shape0, double t, const SpectrumTable& table) {
  if (!(t >= 0.0)) throw ValidationError("evolve_linear: t must be >= 0");
  const double R = table.params.R;
  if (std::abs(shape0.radius_scale() - R) > 1e-12 * R)
    throw ValidationError("evolve_linear: shape radius does not match the table radius");
  ShapeState out = shape0;
  for (int k = 0; k <= shape0.n_modes(); ++k) {
    const auto c = shape0.coeff(k);
    if (c == std::complex<double>{}) continue;
    if (k > table.k_max) {
      std::ostringstream msg;
      msg << "evolve_linear: mode " << k << " is beyond the table k_max = " << table.k_max;
      throw ValidationError(msg.str());
    }
    out.set_coeff(k, c * std::exp(table.mu[k] * t));
  }
  return out;
}

Trajectory evolve_linear_trajectory(const ShapeState& shape0, const std::vector<double>& times,
                                    const SpectrumTable& table) {
  Trajectory tr;
  for (double t : times) {
    if (!tr.times.empty() && t < tr.times.back())
      throw ValidationError("evolve_linear_trajectory: times must be nondecreasing");
    tr.times.push_back(t);
    tr.states.push_back(evolve_linear(shape0, t, table));
  }
  return tr;
}

namespace {
RadialProfile scaled_mode(int k, double c, const RadialProfile& u) {
  RadialProfile p;
  p.kind = RadialProfile::Kind::A_k;
  p.index = k;
  p.parameter = u.parameter;
  p.grid = u.grid;
  p.values.resize(u.grid.size());
  p.derivs.resize(u.grid.size());
  for (std::size_t j = 0; j < u.grid.size(); ++j) {
    const double r = u.grid[j];
    const double rk = std::pow(r, k);
    const double drk = k == 0 ? 0.0 : k * std::pow(r, k - 1);
    p.values[j] = c * rk * u.values[j];
    p.derivs[j] = c * (drk * u.values[j] + rk * u.derivs[j]);
  }
  p.deriv_at_0 = k == 1 ? c * u.values.front() : 0.0;
  p.deriv_at_1 = p.derivs.back();
  return p;
}
}  // namespace

LinearizedMode linearized_mode_profile(int k, std::complex<double> rho_hat_k, const RadialProfile& v0,
                                       const RadialProfile& u_k) {
  const int a = std::abs(k);
  if (u_k.index != a) throw ValidationError("linearized_mode_profile: u_k index does not match k");
  // rho_hat(-k) = conj(rho_hat(k)), A_{-k} = conj(A_k)
  const double c = -v0.deriv_at_1 / u_k.value_at_1();
  return {scaled_mode(a, c * rho_hat_k.real(), u_k), scaled_mode(a, c * rho_hat_k.imag(), u_k)};
}

GrowthFit fit_growth_rate(const std::vector<std::pair<double, double>>& series) {
  const std::size_t n = series.size();
  if (n < 3) throw ValidationError("fit_growth_rate: need at least 3 samples");
  double st = 0, sy = 0;
  for (const auto& [t, a] : series) {
    if (!(a > 0.0)) throw ValidationError("fit_growth_rate: amplitudes must be positive");
    st += t;
    sy += std::log(a);
  }
  const double tm = st / n, ym = sy / n;
  double stt = 0, sty = 0;
  for (const auto& [t, a] : series) {
    stt += (t - tm) * (t - tm);
    sty += (t - tm) * (std::log(a) - ym);
  }
  if (!(stt > 0.0)) throw ValidationError("fit_growth_rate: sample times must not all coincide");
  GrowthFit fit;
  fit.rate = sty / stt;
  fit.intercept = ym - fit.rate * tm;
  double ss = 0;
  for (const auto& [t, a] : series) {
    const double e = std::log(a) - (fit.intercept + fit.rate * t);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

}  // namespace tumor
