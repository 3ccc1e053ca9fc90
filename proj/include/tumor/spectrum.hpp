#pragma once

#include <optional>
#include <vector>

#include "tumor/nutrient_model.hpp"
#include "tumor/radial_ode.hpp"

namespace tumor {

/// Biological constants of the model plus the reference radius R of the parametrisation.
struct ModelParameters {
  double A = 0.0;  ///< mitosis/apoptosis balance, must lie in (0, f(1))
  double G = 0.0;  ///< mitosis rate (any sign)
  double R = 1.0;  ///< reference radius; R = R_A for equilibrium analysis
  NutrientModel model = NutrientModel::identity();

  void validate() const;

  /// Parameters with R set to the steady radius R_A(A).
  static ModelParameters at_equilibrium(double A, double G, NutrientModel model,
                                        const SolverSettings& settings = {});
};

/// Principal symbol -|k|^3 / R^3.
double lambda_k(int k, double R);

/// A/2 r_k + A - f(1): the factor multiplying -G in the symbol.
double growth_denominator(const ModelParameters& params, double ratio);

/// Full symbol (-|k|^3 + |k|)/R^3 - G (A/2 r_|k| + A - f(1)).
double mu_k(int k, const ModelParameters& params, double ratio);

/// Threshold G_k where mu_k changes sign; empty when |denominator| <= denom_tol.
std::optional<double> g_threshold(int k, const ModelParameters& params, double ratio,
                                  double denom_tol = 1e-12);

/// r_n = u_n'(1)/u_n(1) for n = 0..n_max, computed concurrently.
std::vector<double> boundary_ratios(int n_max, double R, const RadialProfile& v0,
                                    const NutrientModel& model, const SolverSettings& settings = {});

struct SpectrumTable {
  ModelParameters params;
  int k_max = 0;
  double denom_tol = 1e-12;
  /// Indexed by k = 0..k_max; negative k use |k|.
  std::vector<double> lambda;
  std::vector<double> mu;
  std::vector<double> ratio;
  std::vector<double> denominator;
  std::vector<std::optional<double>> g_threshold;
  /// d_0 > 0, i.e. mu_0 < 0 for every G > 0.
  bool assumption_eq_ass_holds = false;

  double mu_at(int k) const;
  double lambda_at(int k) const;
};

/// Evaluates the whole table for |k| <= k_max. Requires k_max >= 2.
SpectrumTable build_spectrum(const ModelParameters& params, int k_max,
                             const SolverSettings& settings = {}, double denom_tol = 1e-12);

struct GStar {
  double value = 0.0;
  int k0 = 0;
};

/// min{ G_k : d_k < 0, 2 <= k <= k_max }. Throws SolverError when there is no candidate or
/// when G_k is not increasing over the last quarter of the scan (minimum not certified).
GStar g_star(const SpectrumTable& table);

enum class StabilityRegime {
  unstable_high_vascularisation,  ///< G < 0
  hele_shaw,                      ///< G = 0
  inconclusive_below_threshold,   ///< 0 < G <= G*
  unstable_above_threshold,       ///< G > G*
};

const char* to_string(StabilityRegime regime);

struct StabilityReport {
  std::vector<int> unstable_modes;  ///< every k with mu_k > 0, both signs
  double spectral_bound = 0.0;      ///< max of mu_k over k = 0 and 2 <= |k| <= k_max
  double neutral_mu = 0.0;          ///< mu_{+-1}
  StabilityRegime regime = StabilityRegime::hele_shaw;
  std::optional<GStar> g_star;
};

StabilityReport classify_stability(const SpectrumTable& table);

/// Smallest l >= 2 with mu_k <= mu_0 for all |k| >= l. The scan covers k <= k_max and the tail
/// is certified from r_k in [0, r_0]. Throws ValidationError unless d_0 > 0.
int l_G_index(const SpectrumTable& table);

}  // namespace tumor
