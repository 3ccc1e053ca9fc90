#include "tumor/spectrum.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "tumor/errors.hpp"

namespace tumor {

void ModelParameters::validate() const {
  const double f1 = model.f(1.0);
  if (!(A > 0.0 && A < f1)) {
    std::ostringstream msg;
    msg << "A = " << A << " must lie in (0, f(1)) = (0, " << f1 << ")";
    throw ValidationError(msg.str());
  }
  if (!(R > 0.0)) throw ValidationError("R must be > 0");
  if (!std::isfinite(G)) throw ValidationError("G must be finite");
}

ModelParameters ModelParameters::at_equilibrium(double A, double G, NutrientModel model,
                                                const SolverSettings& settings) {
  const SteadyState st = steady_radius(A, model, settings);
  return ModelParameters{A, G, st.R_A, std::move(model)};
}

double lambda_k(int k, double R) {
  if (k == 0) return 0.0;
  const double a = std::abs(k);
  return -a * a * a / (R * R * R);
}

double growth_denominator(const ModelParameters& params, double ratio) {
  return params.A / 2.0 * ratio + params.A - params.model.f(1.0);
}

double mu_k(int k, const ModelParameters& params, double ratio) {
  const double a = std::abs(k);
  const double R3 = params.R * params.R * params.R;
  return (-a * a * a + a) / R3 - params.G * growth_denominator(params, ratio);
}

std::optional<double> g_threshold(int k, const ModelParameters& params, double ratio,
                                  double denom_tol) {
  const double d = growth_denominator(params, ratio);
  if (std::abs(d) <= denom_tol) return std::nullopt;
  const double a = std::abs(k);
  const double R3 = params.R * params.R * params.R;
  return (-a * a * a + a) / R3 / d;
}

std::vector<double> boundary_ratios(int n_max, double R, const RadialProfile& v0,
                                    const NutrientModel& model, const SolverSettings& settings) {
  std::vector<double> out(n_max + 1);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int n = next++; n <= n_max; n = next++) {
      try {
        out[n] = boundary_ratio(n, R, v0, model, settings);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned workers = std::clamp(std::thread::hardware_concurrency(), 1u, 8u);
  std::vector<std::jthread> pool;
  for (unsigned i = 0; i < workers; ++i) pool.emplace_back(worker);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
  return out;
}

double SpectrumTable::mu_at(int k) const { return mu.at(std::abs(k)); }
double SpectrumTable::lambda_at(int k) const { return lambda.at(std::abs(k)); }

SpectrumTable build_spectrum(const ModelParameters& params, int k_max,
                             const SolverSettings& settings, double denom_tol) {
  params.validate();
  if (k_max < 2) throw ValidationError("k_max must be >= 2");
  SpectrumTable t;
  t.params = params;
  t.k_max = k_max;
  t.denom_tol = denom_tol;
  RadialProfile v0 = solve_U(params.R * params.R, params.model, settings);
  t.ratio = boundary_ratios(k_max, params.R, v0, params.model, settings);
  for (int k = 0; k <= k_max; ++k) {
    t.lambda.push_back(lambda_k(k, params.R));
    t.mu.push_back(mu_k(k, params, t.ratio[k]));
    t.denominator.push_back(growth_denominator(params, t.ratio[k]));
    t.g_threshold.push_back(k == 1 ? std::nullopt : g_threshold(k, params, t.ratio[k], denom_tol));
  }
  // mu_1 vanishes identically at the equilibrium radius, so d_1 is zero up to roundoff.
  t.assumption_eq_ass_holds = t.denominator[0] > 0.0;
  return t;
}

GStar g_star(const SpectrumTable& t) {
  std::optional<GStar> best;
  for (int k = 2; k <= t.k_max; ++k) {
    if (!(t.denominator[k] < 0.0) || !t.g_threshold[k]) continue;
    if (!best || *t.g_threshold[k] < best->value) best = GStar{*t.g_threshold[k], k};
  }
  if (!best) {
    std::ostringstream msg;
    msg << "g_star: no k <= k_max = " << t.k_max << " with A/2 r_k + A - f(1) < 0; increase k_max";
    throw SolverError(msg.str());
  }
  // Certify that the minimum is not in the unscanned tail.
  if (t.k_max < 3) throw SolverError("g_star: k_max >= 3 needed to certify the minimum");
  const int from = std::max(2, t.k_max - t.k_max / 4);
  for (int k = from + 1; k <= t.k_max; ++k) {
    const auto& prev = t.g_threshold[k - 1];
    const auto& cur = t.g_threshold[k];
    const bool increasing = prev && cur && t.denominator[k - 1] < 0.0 && t.denominator[k] < 0.0 &&
                            *cur > *prev;
    if (!increasing) {
      std::ostringstream msg;
      msg << "g_star: G_k not increasing over k in [" << from << ", " << t.k_max
          << "]; cannot certify the minimum, increase k_max";
      throw SolverError(msg.str());
    }
  }
  return *best;
}

const char* to_string(StabilityRegime regime) {
  switch (regime) {
    case StabilityRegime::unstable_high_vascularisation:
      return "unstable_high_vascularisation";
    case StabilityRegime::hele_shaw:
      return "hele_shaw";
    case StabilityRegime::inconclusive_below_threshold:
      return "inconclusive_below_threshold";
    case StabilityRegime::unstable_above_threshold:
      return "unstable_above_threshold";
  }
  return "unknown";
}

StabilityReport classify_stability(const SpectrumTable& t) {
  StabilityReport rep;
  rep.neutral_mu = t.mu[1];
  rep.spectral_bound = t.mu[0];
  for (int k = 0; k <= t.k_max; ++k) {
    if (k >= 2) rep.spectral_bound = std::max(rep.spectral_bound, t.mu[k]);
    if (t.mu[k] > 0.0) {
      if (k > 0) rep.unstable_modes.push_back(-k);
      rep.unstable_modes.push_back(k);
    }
  }
  std::sort(rep.unstable_modes.begin(), rep.unstable_modes.end());
  try {
    rep.g_star = g_star(t);
  } catch (const SolverError&) {
    rep.g_star.reset();
  }
  const double G = t.params.G;
  if (G < 0.0) {
    rep.regime = StabilityRegime::unstable_high_vascularisation;
  } else if (G == 0.0) {
    rep.regime = StabilityRegime::hele_shaw;
  } else if (rep.g_star && G > rep.g_star->value) {
    rep.regime = StabilityRegime::unstable_above_threshold;
  } else {
    rep.regime = StabilityRegime::inconclusive_below_threshold;
  }
  return rep;
}

int l_G_index(const SpectrumTable& t) {
  if (!t.assumption_eq_ass_holds) {
    throw ValidationError(
        "l_G: assumption (eq:ass) A/2 r_0 + A - f(1) > 0 fails, so mu_0 is not negative for G > 0");
  }
  const double mu0 = t.mu[0];
  int l = 2;
  for (int k = t.k_max; k >= 2; --k) {
    if (t.mu[k] > mu0) {
      l = k + 1;
      break;
    }
  }
  // Tail: d_k lies between A - f(1) and d_0 because 0 <= r_k <= r_0, so
  // mu_k <= (-k^3 + k)/R^3 + |G| max(|A - f(1)|, |d_0|), decreasing in k.
  const ModelParameters& p = t.params;
  const double bound = std::abs(p.G) * std::max(std::abs(p.A - p.model.f(1.0)), std::abs(t.denominator[0]));
  const double k = t.k_max + 1.0;
  const double tail = (-k * k * k + k) / (p.R * p.R * p.R) + bound;
  if (tail > mu0) {
    std::ostringstream msg;
    msg << "l_G: cannot certify mu_k <= mu_0 beyond k_max = " << t.k_max << "; increase k_max";
    throw SolverError(msg.str());
  }
  return l;
}

}  // namespace tumor
