#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracle/bessel_series.hpp"
#include "tumor/errors.hpp"
#include "tumor/spectrum.hpp"

using namespace tumor;

namespace {
const NutrientModel id = NutrientModel::identity();
const double A_unit = oracle::steady_A_identity(1.0);  // R_A = 1 for f = id

ModelParameters unit_params(double G) { return ModelParameters{A_unit, G, 1.0, id}; }

double oracle_d(int k) { return A_unit / 2.0 * oracle::ratio_identity(k, 1.0) + A_unit - 1.0; }
double oracle_mu(int k, double G) {
  const double a = std::abs(k);
  return -a * a * a + a - G * oracle_d(k);
}
}  // namespace

TEST_CASE("lambda_k is the even cubic symbol") {
  CHECK(lambda_k(0, 1.0) == 0.0);
  CHECK(lambda_k(1, 1.0) == -1.0);
  CHECK(lambda_k(-3, 1.0) == -27.0);
  CHECK(lambda_k(-3, 1.0) == lambda_k(3, 1.0));
  CHECK(lambda_k(2, 2.0) == -1.0);
}

TEST_CASE("mu_0 at G = 10 for f = id, R_A = 1") {
  const SpectrumTable t = build_spectrum(unit_params(10.0), 8);
  CHECK(t.mu[0] == doctest::Approx(-0.921).epsilon(1e-3));
  CHECK(t.mu[0] == doctest::Approx(oracle_mu(0, 10.0)).epsilon(1e-10));
  CHECK(t.mu_at(0) == doctest::Approx(-0.920439334461783).epsilon(1e-10));
  for (int k = 0; k <= 8; ++k) {
    CHECK(t.mu_at(k) == t.mu_at(-k));
    CHECK(t.lambda_at(k) == t.lambda_at(-k));
    CHECK(t.mu[k] == doctest::Approx(oracle_mu(k, 10.0)).epsilon(1e-9));
  }
}

TEST_CASE("neutral mode vanishes at the steady radius") {
  for (const char* spec : {"identity", "poly:1,1"}) {
    const NutrientModel m = NutrientModel::parse(spec);
    for (double frac : {0.1, 0.2, 0.4, 0.6, 0.8}) {
      const auto p = ModelParameters::at_equilibrium(frac * m.f(1.0), 3.0, m);
      const SpectrumTable t = build_spectrum(p, 4);
      CHECK(std::abs(t.mu[1]) <= 1e-8);
      CHECK(!t.g_threshold[1].has_value());
    }
  }
}

TEST_CASE("Hele-Shaw reduction at G = 0") {
  const auto p = ModelParameters::at_equilibrium(0.5, 0.0, id);
  const SpectrumTable t = build_spectrum(p, 16);
  const double R3 = p.R * p.R * p.R;
  for (int k = 0; k <= 16; ++k) CHECK(t.mu[k] == (-double(k) * k * k + k) / R3);
  const StabilityReport rep = classify_stability(t);
  CHECK(rep.unstable_modes.empty());
  // mu_0 = -G d_0 vanishes at G = 0, so the bound over {0} and |k| >= 2 is zero
  CHECK(t.mu[2] == -6.0 / R3);
  CHECK(rep.spectral_bound == 0.0);
  CHECK(rep.regime == StabilityRegime::hele_shaw);
}

TEST_CASE("g_threshold and G* against the Bessel oracle") {
  const SpectrumTable t = build_spectrum(unit_params(1.0), 64);
  CHECK(t.denominator[2] == doctest::Approx(-0.0342).epsilon(2e-3));
  REQUIRE(t.g_threshold[2].has_value());
  CHECK(*t.g_threshold[2] == doctest::Approx(175.0).epsilon(1.0 / 175.0));
  CHECK(*t.g_threshold[2] == doctest::Approx(-6.0 / oracle_d(2)).epsilon(1e-9));
  REQUIRE(t.g_threshold[0].has_value());
  CHECK(*t.g_threshold[0] == 0.0);
  CHECK(t.assumption_eq_ass_holds);

  // brute-force minimum over the oracle thresholds
  double best = INFINITY;
  int best_k = -1;
  for (int k = 2; k <= 64; ++k) {
    const double d = oracle_d(k);
    if (d < 0.0 && (-double(k) * k * k + k) / d < best) {
      best = (-double(k) * k * k + k) / d;
      best_k = k;
    }
  }
  const GStar gs = g_star(t);
  CHECK(gs.k0 == best_k);
  CHECK(gs.k0 == 2);
  CHECK(gs.value == doctest::Approx(best).epsilon(1e-9));
  CHECK(gs.value == doctest::Approx(174.815721247).epsilon(1e-8));
  CHECK(gs.value > 0.0);
}

TEST_CASE("threshold consistency: mu_k vanishes at G_k and flips sign") {
  const SpectrumTable base = build_spectrum(unit_params(1.0), 8);
  for (int k = 2; k <= 8; ++k) {
    if (!(base.denominator[k] < 0.0)) continue;
    const double Gk = *base.g_threshold[k];
    CHECK(std::abs(mu_k(k, unit_params(Gk), base.ratio[k])) <= 1e-8);
    CHECK(mu_k(k, unit_params(Gk * 0.99), base.ratio[k]) < 0.0);
    CHECK(mu_k(k, unit_params(Gk * 1.01), base.ratio[k]) > 0.0);
  }
}

TEST_CASE("g_star fails without a candidate or without certification") {
  // k_max = 2 is too short to see G_k increase over a quarter of the scan
  CHECK_THROWS_AS(g_star(build_spectrum(unit_params(1.0), 2)), SolverError);
  // G_k is increasing from k = 2 on, so a modest scan certifies
  CHECK_NOTHROW(g_star(build_spectrum(unit_params(1.0), 12)));
  // no k with a negative denominator
  SpectrumTable t = build_spectrum(unit_params(1.0), 12);
  for (auto& d : t.denominator) d = std::abs(d) + 1.0;
  CHECK_THROWS_AS(g_star(t), SolverError);
}

TEST_CASE("classification across the G axis") {
  const SpectrumTable t200 = build_spectrum(unit_params(200.0), 16);
  const StabilityReport r200 = classify_stability(t200);
  CHECK(r200.regime == StabilityRegime::unstable_above_threshold);
  CHECK(std::find(r200.unstable_modes.begin(), r200.unstable_modes.end(), 2) != r200.unstable_modes.end());
  CHECK(std::find(r200.unstable_modes.begin(), r200.unstable_modes.end(), -2) != r200.unstable_modes.end());

  const SpectrumTable tn = build_spectrum(unit_params(-1.0), 16);
  const StabilityReport rn = classify_stability(tn);
  CHECK(tn.mu[0] == doctest::Approx(0.0920439334461783).epsilon(1e-9));
  CHECK(rn.regime == StabilityRegime::unstable_high_vascularisation);
  CHECK(rn.unstable_modes.front() == 0);
  CHECK(rn.spectral_bound > 0.0);

  const StabilityReport r10 = classify_stability(build_spectrum(unit_params(10.0), 16));
  CHECK(r10.regime == StabilityRegime::inconclusive_below_threshold);
  CHECK(r10.unstable_modes.empty());

  const SpectrumTable base = build_spectrum(unit_params(1.0), 16);
  const GStar gs = g_star(base);
  const StabilityReport above = classify_stability(build_spectrum(unit_params(1.01 * gs.value), 16));
  CHECK(std::find(above.unstable_modes.begin(), above.unstable_modes.end(), gs.k0) != above.unstable_modes.end());
}

TEST_CASE("l_G index") {
  CHECK(l_G_index(build_spectrum(unit_params(1.0), 64)) == 2);
  int prev = 2;
  for (double G : {0.0, 1.0, 10.0, 50.0, 100.0, 150.0, 170.0}) {
    const SpectrumTable t = build_spectrum(unit_params(G), 64);
    const int l = l_G_index(t);
    CHECK(l >= 2);
    CHECK(l >= prev);
    prev = l;
    // direct scan oracle
    int expect = 2;
    for (int k = 64; k >= 2; --k) {
      if (oracle_mu(k, G) > oracle_mu(0, G)) {
        expect = k + 1;
        break;
      }
    }
    CHECK(l == expect);
  }
  for (double A : {0.1, 0.5, 0.999}) {
    CHECK(build_spectrum(ModelParameters::at_equilibrium(A, 1.0, id), 16).assumption_eq_ass_holds);
  }
  SpectrumTable t = build_spectrum(unit_params(1.0), 16);
  t.assumption_eq_ass_holds = false;
  CHECK_THROWS_AS(l_G_index(t), ValidationError);
  // a scan too short to certify the tail
  CHECK_THROWS_AS(l_G_index(build_spectrum(unit_params(170.0), 2)), SolverError);
}

TEST_CASE("G-term stays bounded in k") {
  const SpectrumTable t = build_spectrum(unit_params(50.0), 40);
  for (int k = 0; k <= 40; ++k) {
    const double rest = t.mu[k] + double(k) * k * k - k;
    CHECK(std::abs(rest) <= 50.0 * std::max(std::abs(A_unit - 1.0), oracle_d(0)) + 1e-12);
    CHECK(t.ratio[k] >= 0.0);
    CHECK(t.ratio[k] <= t.ratio[0]);
  }
}

TEST_CASE("build_spectrum preconditions") {
  CHECK_THROWS_AS(build_spectrum(ModelParameters{1.2, 1.0, 1.0, id}, 8), ValidationError);
  CHECK_THROWS_AS(build_spectrum(ModelParameters{0.5, 1.0, -1.0, id}, 8), ValidationError);
  CHECK_THROWS_AS(build_spectrum(unit_params(1.0), 1), ValidationError);
}
