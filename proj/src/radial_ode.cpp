#include "tumor/radial_ode.hpp"

#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <functional>
#include <memory>
#include <sstream>

#include "tumor/errors.hpp"

namespace tumor {

namespace odeint = boost::numeric::odeint;

namespace {

using State = std::array<double, 2>;

auto make_stepper(const SolverSettings& s) {
  return odeint::make_controlled(s.abs_tol, s.rel_tol, odeint::runge_kutta_fehlberg78<State>());
}

double initial_step(const SolverSettings& s) { return 0.1 * s.series_start_radius; }

/// U'' + U'/r = lambda f(U) written for (U, V = U'/lambda) so that the flux V stays O(1)
/// as lambda -> 0.
struct ParamSystem {
  const NutrientModel& model;
  double lambda;
  void operator()(const State& y, State& dy, double r) const {
    dy[0] = lambda * y[1];
    dy[1] = model.f(y[0]) - y[1] / r;
  }
};

State param_series(const NutrientModel& model, double lambda, double centre, double r) {
  const double fc = model.f(centre);
  return {centre + lambda * fc * r * r / 4.0, fc * r / 2.0};
}

/// Integrates `system` from the series start through every grid node, filling values/derivs.
/// `series(r)` gives (value, derivative) for r <= series_start_radius.
/// Thrown from an observer when a trajectory exceeds `blowup_cap`.
struct BlowUp {};
constexpr double blowup_cap = 1e6;

template <class System, class Series, class Transform>
void fill_profile(RadialProfile& p, System system, Series series, Transform to_profile,
                  const SolverSettings& s, double cap = blowup_cap) {
  const double r0 = s.series_start_radius;
  const std::size_t n = p.grid.size();
  p.values.assign(n, 0.0);
  p.derivs.assign(n, 0.0);
  std::vector<double> times{r0};
  std::vector<std::size_t> slots;
  for (std::size_t j = 0; j < n; ++j) {
    if (p.grid[j] <= r0) {
      const auto [v, d] = to_profile(series(p.grid[j]));
      p.values[j] = v;
      p.derivs[j] = d;
    } else {
      times.push_back(p.grid[j]);
      slots.push_back(j);
    }
  }
  State y = series(r0);
  std::size_t seen = 0;
  // Cap checked inside the right-hand side: past a finite-r blow-up the controlled stepper
  // would otherwise keep shrinking its step.
  auto capped = [&](const State& state, State& dy, double r) {
    if (!(std::abs(state[0]) < cap)) throw BlowUp{};
    system(state, dy, r);
  };
  odeint::integrate_times(make_stepper(s), capped, y, times.begin(), times.end(), initial_step(s),
                          [&](const State& state, double) {
                            if (seen > 0) {
                              const auto [v, d] = to_profile(state);
                              p.values[slots[seen - 1]] = v;
                              p.derivs[slots[seen - 1]] = d;
                            }
                            ++seen;
                          });
  p.deriv_at_0 = p.derivs.front();
  p.deriv_at_1 = p.derivs.back();
}

/// Profile of U for a given centre value; U(1) is the shooting map. Shooting and the final
/// profile share one integration path, so the boundary miss is exactly what the root finder saw.
RadialProfile shoot_profile(const NutrientModel& model, double lambda, double centre,
                            const SolverSettings& s) {
  RadialProfile p;
  p.kind = RadialProfile::Kind::U;
  p.parameter = lambda;
  p.grid = spectral::unit_interval_nodes(s.profile_intervals);
  fill_profile(
      p, ParamSystem{model, lambda},
      [&](double r) { return param_series(model, lambda, centre, r); },
      [lambda](const State& y) { return std::pair{y[0], lambda * y[1]}; }, s);
  return p;
}

/// U(1;c) - 1, saturating at the blow-up cap (the trajectory overshoots 1 either way).
double shooting_miss(const NutrientModel& model, double lambda, double centre,
                     const SolverSettings& s) {
  try {
    const double end = shoot_profile(model, lambda, centre, s).values.back();
    return std::isfinite(end) ? end - 1.0 : blowup_cap;
  } catch (const BlowUp&) {
    return blowup_cap;
  }
}

void require_finite(const RadialProfile& p, const std::string& what) {
  for (std::size_t j = 0; j < p.values.size(); ++j) {
    if (!std::isfinite(p.values[j]) || !std::isfinite(p.derivs[j])) {
      std::ostringstream msg;
      msg << what << ": range error (non-finite value at r = " << p.grid[j] << ")";
      throw SolverError(msg.str());
    }
  }
}

/// Derivative on the profile's Lobatto grid: r = (1 - x) / 2, so d/dr = -2 d/dx.
std::vector<double> grid_derivative(const std::vector<double>& data) {
  const int n = static_cast<int>(data.size()) - 1;
  const Eigen::MatrixXd d = -2.0 * spectral::chebyshev_diff(n);
  const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(data.data(), n + 1);
  const Eigen::VectorXd dv = d * v;
  return {dv.data(), dv.data() + dv.size()};
}

}  // namespace

void SolverSettings::validate() const {
  if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) throw ValidationError("solver tolerances must be > 0");
  if (!(series_start_radius > 0.0 && series_start_radius <= 1e-2)) {
    throw ValidationError("series_start_radius must lie in (0, 1e-2]");
  }
  if (!(bracket_lo > 0.0 && bracket_lo < bracket_hi)) throw ValidationError("bad shooting bracket");
  if (profile_intervals < 8) throw ValidationError("profile_intervals must be >= 8");
}

double RadialProfile::operator()(double r) const {
  return spectral::ChebyshevInterpolant(grid, values)(r);
}

double RadialProfile::derivative(double r) const {
  return spectral::ChebyshevInterpolant(grid, derivs)(r);
}

RadialProfile solve_U(double lambda, const NutrientModel& model, const SolverSettings& settings) {
  settings.validate();
  if (!(lambda >= 0.0)) throw ValidationError("solve_U: lambda must be >= 0");

  RadialProfile p;
  p.kind = RadialProfile::Kind::U;
  p.parameter = lambda;
  p.grid = spectral::unit_interval_nodes(settings.profile_intervals);

  if (lambda == 0.0) {
    p.values.assign(p.grid.size(), 1.0);
    p.derivs.assign(p.grid.size(), 0.0);
    return p;
  }

  auto miss = [&](double c) { return shooting_miss(model, lambda, c, settings); };
  const double lo = settings.bracket_lo;
  const double hi = settings.bracket_hi;

  // Shooting map must increase on the bracket; a dip means f' <= 0 somewhere.
  constexpr int samples = 12;
  std::vector<double> sampled;
  for (int i = 0; i < samples; ++i) {
    const double c = lo * std::pow(hi / lo, static_cast<double>(i) / (samples - 1));
    sampled.push_back(miss(c));
    const bool saturated = i > 0 && sampled[i] == blowup_cap && sampled[i - 1] == blowup_cap;
    if (i > 0 && !saturated && !(sampled[i] > sampled[i - 1])) {
      throw SolverError("solve_U: shooting map c -> U(1;c) is not increasing; check f' > 0");
    }
  }
  const double f_lo = sampled.front();
  const double f_hi = sampled.back();
  if (!(f_lo < 0.0 && f_hi >= 0.0)) {
    std::ostringstream msg;
    msg << "solve_U: no sign change of U(1;c)-1 on [" << lo << ", " << hi << "] (values " << f_lo
        << ", " << f_hi << "); lambda = " << lambda << " is outside the solvable range";
    throw SolverError(msg.str());
  }

  double centre = hi;
  if (f_hi != 0.0) {
    boost::uintmax_t iters = settings.max_newton_iters;
    const auto [a, b] = boost::math::tools::toms748_solve(
        miss, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52), iters);
    centre = std::abs(miss(a)) < std::abs(miss(b)) ? a : b;
  }

  p = shoot_profile(model, lambda, centre, settings);
  require_finite(p, "solve_U");
  if (std::abs(p.values.back() - 1.0) > 10.0 * settings.abs_tol) {
    std::ostringstream msg;
    msg << "solve_U: boundary miss " << p.values.back() - 1.0 << " exceeds tolerance";
    throw SolverError(msg.str());
  }
  p.values.back() = 1.0;
  return p;
}

RadialProfile solve_u_n(int n, double R_A, const RadialProfile& v0, const NutrientModel& model,
                        const SolverSettings& settings) {
  settings.validate();
  if (n < 0) throw ValidationError("solve_u_n: n must be >= 0");
  if (!(R_A > 0.0)) throw ValidationError("solve_u_n: R_A must be > 0");

  const spectral::ChebyshevInterpolant v0_at(v0.grid, v0.values);
  const double R2 = R_A * R_A;
  const double odd = 2.0 * n + 1.0;
  auto system = [&](const State& y, State& dy, double r) {
    dy[0] = y[1];
    dy[1] = R2 * model.fprime(v0_at(r)) * y[0] - odd / r * y[1];
  };
  const double a2 = R2 * model.fprime(v0.values.front()) / (2.0 * (2.0 * n + 2.0));
  auto series = [a2](double r) { return State{1.0 + a2 * r * r, 2.0 * a2 * r}; };

  RadialProfile p;
  p.kind = RadialProfile::Kind::u_n;
  p.index = n;
  p.parameter = R_A;
  p.grid = spectral::unit_interval_nodes(settings.profile_intervals);
  try {
    fill_profile(p, system, series, [](const State& y) { return std::pair{y[0], y[1]}; },
                 settings, 1e300);
  } catch (const BlowUp&) {
    throw SolverError("solve_u_n: range error (overflow before r = 1)");
  }
  require_finite(p, "solve_u_n");
  return p;
}

double boundary_ratio(int n, double R_A, const RadialProfile& v0, const NutrientModel& model,
                      const SolverSettings& settings) {
  const RadialProfile u = solve_u_n(n, R_A, v0, model, settings);
  return u.deriv_at_1 / u.value_at_1();
}

SteadyState steady_radius(double A, const NutrientModel& model, const SolverSettings& settings) {
  const double f1 = model.f(1.0);
  if (!(A > 0.0 && A < f1)) {
    std::ostringstream msg;
    msg << "steady_radius: A = " << A << " must lie in (0, f(1)) = (0, " << f1 << ")";
    throw ValidationError(msg.str());
  }
  // h(R) = U_r(1,R^2)/R^2 - A/2; same positive roots as g(R) = U_r(1,R^2) - A R^2/2.
  auto flux = [&](double R) {
    const double lambda = R * R;
    const RadialProfile U = solve_U(lambda, model, settings);
    return U.deriv_at_1 / lambda - A / 2.0;
  };

  std::vector<std::pair<double, double>> sampled;
  double lo = 1e-3;
  double h_lo = flux(lo);
  sampled.emplace_back(lo, h_lo);
  double hi = lo;
  double h_hi = h_lo;
  double growth = 2.0;
  while (h_hi > 0.0 && growth > 1.01) {
    hi = growth * lo;
    try {
      h_hi = flux(hi);
    } catch (const SolverError&) {
      // Past the shooting range; creep up to its edge before giving up.
      growth = std::sqrt(growth);
      continue;
    }
    sampled.emplace_back(hi, h_hi);
    if (h_hi > 0.0) {
      lo = hi;
      h_lo = h_hi;
    }
  }
  if (!(h_lo > 0.0 && h_hi <= 0.0)) {
    std::ostringstream msg;
    msg << "steady_radius: no sign change of U_r(1,R^2) - A R^2/2; sampled (R, g/R^2):";
    for (const auto& [R, h] : sampled) msg << " (" << R << ", " << h << ")";
    throw SolverError(msg.str());
  }

  double R_A = hi;
  if (h_hi != 0.0) {
    boost::uintmax_t iters = settings.max_newton_iters;
    const auto [a, b] = boost::math::tools::toms748_solve(
        flux, lo, hi, h_lo, h_hi, boost::math::tools::eps_tolerance<double>(52), iters);
    R_A = std::abs(flux(a)) < std::abs(flux(b)) ? a : b;
  }

  SteadyState st;
  st.A = A;
  st.R_A = R_A;
  st.alpha_A = R_A * R_A * (f1 - A / 2.0);
  st.v0 = solve_U(R_A * R_A, model, settings);
  st.v0.kind = RadialProfile::Kind::v0;
  st.residual = st.v0.deriv_at_1 - A * R_A * R_A / 2.0;
  return st;
}

double appendix_coefficient(AppendixSeries which, int k) {
  double a = 1.0;
  for (int m = 1; m <= k; ++m) {
    a /= (which == AppendixSeries::u0) ? (2.0 * m) * (2.0 * m) : (2.0 * m) * (2.0 * m + 2.0);
  }
  return a;
}

double appendix_series(AppendixSeries which, double x, int terms) {
  if (terms < 1) throw ValidationError("appendix_series: terms must be >= 1");
  double sum = 0.0;
  double power = 1.0;
  const double x2 = x * x;
  for (int k = 0; k < terms; ++k) {
    sum += appendix_coefficient(which, k) * power;
    power *= x2;
  }
  return sum;
}

double ode_residual(const RadialProfile& p, const NutrientModel& model, const RadialProfile* v0) {
  using Quad = boost::math::quadrature::gauss<double, 20>;
  const spectral::ChebyshevInterpolant val(p.grid, p.values), der(p.grid, p.derivs);
  std::unique_ptr<spectral::ChebyshevInterpolant> v0_at;
  if (p.kind == RadialProfile::Kind::u_n || p.kind == RadialProfile::Kind::A_k) {
    if (v0 == nullptr) throw ValidationError("ode_residual: u_n/A_k residual needs v0");
    v0_at = std::make_unique<spectral::ChebyshevInterpolant>(v0->grid, v0->values);
  }
  const double R2 = p.parameter * p.parameter;
  const int k = p.index;

  // Integrated (twice) form of each equation, the same route that gives u_n its integral
  // representation: for w'' + (m/r) w' = S(r, w),
  //   w'(r) = int_0^r (s/r)^m S(s, w(s)) ds,   w(r) - w(0) = int_0^r w'(s) ds.
  // A_k is checked through B = A_k / r^k, which satisfies the u_k equation.
  double weight = 1.0;
  std::function<double(double)> w, dw, source;
  switch (p.kind) {
    case RadialProfile::Kind::U:
    case RadialProfile::Kind::v0:
      w = [&](double r) { return val(r); };
      dw = [&](double r) { return der(r); };
      source = [&](double s) { return p.parameter * model.f(val(s)); };
      break;
    case RadialProfile::Kind::u_n:
      weight = 2.0 * k + 1.0;
      w = [&](double r) { return val(r); };
      dw = [&](double r) { return der(r); };
      source = [&](double s) { return R2 * model.fprime((*v0_at)(s)) * val(s); };
      break;
    case RadialProfile::Kind::A_k:
      weight = 2.0 * k + 1.0;
      w = [&](double r) { return val(r) / std::pow(r, k); };
      dw = [&](double r) { return (r * der(r) - k * val(r)) / std::pow(r, k + 1); };
      source = [&](double s) { return R2 * model.fprime((*v0_at)(s)) * w(s); };
      break;
  }

  // Marching node to node: C(b) = (a/b)^m C(a) + int_a^b (s/b)^m S ds keeps the weight <= 1.
  // A_k / r^k loses all accuracy where r^k is tiny, so that check starts away from the centre
  // and takes its initial flux from the measured derivative there.
  std::size_t j0 = 0;
  if (p.kind == RadialProfile::Kind::A_k) {
    j0 = 1;
    while (k >= 2 && j0 + 2 < p.grid.size() && p.grid[j0] < 0.1) ++j0;
  }
  const double start = p.grid[j0];
  double flux_acc = j0 > 0 ? dw(start) : 0.0;  // int_0^{r_j} (s/r_j)^m S ds
  double rise_acc = 0.0;                       // int_start^{r_j} w' ds
  double worst = 0.0;
  for (std::size_t j = j0; j + 1 < p.grid.size(); ++j) {
    const double a = p.grid[j];
    const double b = p.grid[j + 1];
    const double mid = 0.5 * (a + b);
    auto flux_to = [&](double end) {
      const double carried = a > 0.0 ? std::pow(a / end, weight) * flux_acc : 0.0;
      return carried + Quad::integrate([&](double s) { return std::pow(s / end, weight) * source(s); }, a, end);
    };
    auto rise_to = [&](double end) {
      return a >= start ? rise_acc + Quad::integrate(dw, a, end) : 0.0;
    };

    const double scale = std::max(1.0, std::abs(w(mid)));
    double miss = std::abs(dw(mid) - flux_to(mid)) / scale;
    if (a >= start && start < mid) {
      miss = std::max(miss, std::abs(w(mid) - w(start) - rise_to(mid)) / scale);
    }
    worst = std::max(worst, miss);

    flux_acc = flux_to(b);
    rise_acc = rise_to(b);
  }
  return worst;
}

}  // namespace tumor
