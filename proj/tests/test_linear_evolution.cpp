#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "oracle/bessel_series.hpp"
#include "tumor/errors.hpp"
#include "tumor/linear_evolution.hpp"

using namespace tumor;

namespace {
const NutrientModel id = NutrientModel::identity();
const double A_unit = oracle::steady_A_identity(1.0);

const SpectrumTable& unit_table(double G) {
  static std::map<double, SpectrumTable> cache;
  auto it = cache.find(G);
  if (it == cache.end()) it = cache.emplace(G, build_spectrum(ModelParameters{A_unit, G, 1.0, id}, 32)).first;
  return it->second;
}
}  // namespace

TEST_CASE("shape state keeps rho real and samples consistently") {
  ShapeState s(8);
  s.set_coeff(3, {0.01, -0.02});
  s.set_coeff(-2, {0.005, 0.004});
  s.set_coeff(0, {0.03, 0.7});
  CHECK(s.coeff(0).imag() == 0.0);
  CHECK(s.coeff(-3) == std::conj(s.coeff(3)));
  CHECK(s.coeff(2) == std::complex<double>(0.005, -0.004));
  CHECK(s.coeff(20) == std::complex<double>{});

  const auto v = s.sample(32);
  const ShapeState back = ShapeState::from_samples(v, 8, 1.0);
  for (int k = -8; k <= 8; ++k) CHECK(std::abs(back.coeff(k) - s.coeff(k)) <= 1e-15);
  CHECK_THROWS_AS(s.set_coeff(9, 1.0), ValidationError);
}

TEST_CASE("seed parsing uses amp cos(k theta + phase)") {
  const ShapeState s = ShapeState::from_seed("2:0.001:0.5,0:0.01,-3:0.002:0.25", 8, 1.0);
  const auto v = s.sample(16);
  for (int j = 0; j < 16; ++j) {
    const double t = 2.0 * M_PI * j / 16;
    const double expect = 0.001 * std::cos(2 * t + 0.5) + 0.01 + 0.002 * std::cos(-3 * t + 0.25);
    CHECK(v[j] == doctest::Approx(expect).epsilon(1e-14));
  }
  CHECK(ShapeState::from_seed("2:1e-3", 8, 1.0).coeff(2) == std::complex<double>(5e-4, 0.0));
  CHECK_THROWS_AS(ShapeState::from_seed("2:abc", 8, 1.0), ValidationError);
  CHECK_THROWS_AS(ShapeState::from_seed("2", 8, 1.0), ValidationError);
  CHECK_THROWS_AS(ShapeState::from_seed("9:0.1", 8, 1.0), ValidationError);
}

TEST_CASE("neighbourhood membership") {
  CHECK(ShapeState::from_seed("3:0.2", 8, 1.0).in_neighbourhood());
  CHECK(!ShapeState::from_seed("3:0.26", 8, 1.0).in_neighbourhood());
  CHECK(ShapeState::from_seed("3:0.26", 8, 1.0).sup_norm() == doctest::Approx(0.26));
  CHECK_THROWS_AS(ShapeState::from_seed("0:0.25", 8, 1.0).require_in_neighbourhood(), ValidationError);
}

TEST_CASE("evolve_linear basics") {
  const SpectrumTable& t = unit_table(10.0);
  const ShapeState s0 = ShapeState::from_seed("1:1e-3,2:1e-3:0.3,5:2e-4", 32, 1.0);
  const ShapeState same = evolve_linear(s0, 0.0, t);
  for (int k = 0; k <= 32; ++k) CHECK(same.coeff(k) == s0.coeff(k));

  const ShapeState s1 = evolve_linear(s0, 3.7, t);
  CHECK(std::abs(std::abs(s1.coeff(1)) - std::abs(s0.coeff(1))) <= 1e-8 * std::abs(s0.coeff(1)));
  const ShapeState s2 = evolve_linear(s0, 1.0, t);
  CHECK(std::abs(s2.coeff(2) / s0.coeff(2)) == doctest::Approx(std::exp(t.mu[2])).epsilon(1e-14));
  CHECK(std::abs(s2.coeff(5) / s0.coeff(5)) == doctest::Approx(std::exp(t.mu[5])).epsilon(1e-14));

  CHECK_THROWS_AS(evolve_linear(ShapeState::from_seed("40:1e-3", 64, 1.0), 1.0, t), ValidationError);
  CHECK_THROWS_AS(evolve_linear(ShapeState(8, 2.0), 1.0, t), ValidationError);
  CHECK_THROWS_AS(evolve_linear(s0, -1.0, t), ValidationError);
}

TEST_CASE("semigroup, lattice invariance, decay bound under random shapes") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double G : {1.0, 10.0, 100.0}) {
    const SpectrumTable& t = unit_table(G);
    const int lG = l_G_index(t);
    for (int trial = 0; trial < 20; ++trial) {
      const int l = 2 + trial % 4;
      ShapeState s(32, 1.0);
      for (int k = 0; k <= 32; ++k) s.set_coeff(k, 1e-3 / (1 + k * k) * std::complex<double>(u(rng), u(rng)));
      ShapeState lat(32, 1.0);
      for (int k = 0; k <= 32; k += l) lat.set_coeff(k, s.coeff(k));

      const double t1 = 0.1 * (1 + u(rng)), t2 = 0.2 * (1 + u(rng));
      const ShapeState a = evolve_linear(evolve_linear(s, t1, t), t2, t);
      const ShapeState b = evolve_linear(s, t1 + t2, t);
      for (int k = 0; k <= 32; ++k) CHECK(std::abs(a.coeff(k) - b.coeff(k)) <= 1e-15 * (1e-3 + std::abs(b.coeff(k))));

      const ShapeState le = evolve_linear(lat, t1 + t2, t);
      CHECK(le.lattice_leakage(l) == 0.0);
      for (int k = -32; k <= 32; ++k) CHECK(le.coeff(-k) == std::conj(le.coeff(k)));

      if (l >= lG) {
        for (int k = l; k <= 32; k += l)
          CHECK(std::abs(le.coeff(k)) <= std::exp(t.mu[0] * (t1 + t2)) * std::abs(lat.coeff(k)) * (1 + 1e-14));
      }
    }
  }
}

TEST_CASE("linearized mode profiles") {
  const SteadyState st = steady_radius(A_unit, id);
  CHECK(st.R_A == doctest::Approx(1.0).epsilon(1e-9));
  for (int k : {0, 1, 2, 4}) {
    const RadialProfile uk = solve_u_n(k, st.R_A, st.v0, id);
    const LinearizedMode zero = linearized_mode_profile(k, 0.0, st.v0, uk);
    for (double v : zero.re.values) CHECK(v == 0.0);

    const std::complex<double> rho{0.3, -0.2};
    const LinearizedMode m = linearized_mode_profile(k, rho, st.v0, uk);
    const std::complex<double> at1 = m(1.0);
    CHECK(std::abs(at1 / rho + A_unit * st.R_A * st.R_A / 2.0) <= 1e-10);
    CHECK(ode_residual(m.re, id, &st.v0) <= 1e-10);
    CHECK(ode_residual(m.im, id, &st.v0) <= 1e-10);
  }
  // k = 1: A_1(r)/A_1(1) = I_1(r)/I_1(1)
  const RadialProfile u1 = solve_u_n(1, st.R_A, st.v0, id);
  const LinearizedMode m1 = linearized_mode_profile(1, 1.0, st.v0, u1);
  for (double r : {0.1, 0.35, 0.7, 0.95})
    CHECK(m1.re(r) / m1.re(1.0) == doctest::Approx(oracle::bessel_i(1, r) / oracle::bessel_i(1, 1.0)).epsilon(1e-10));
}

TEST_CASE("fit_growth_rate") {
  CHECK(fit_growth_rate({{0, 1}, {0.5, std::exp(-1.0)}, {1, std::exp(-2.0)}}).rate ==
        doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(std::abs(fit_growth_rate({{0, 3}, {1, 3}, {2, 3}}).rate) <= 1e-15);
  CHECK_THROWS_AS(fit_growth_rate({{0, 1}, {1, 0}, {2, 1}}), ValidationError);
  CHECK_THROWS_AS(fit_growth_rate({{0, 1}, {1, 1}}), ValidationError);

  const SpectrumTable& t = unit_table(100.0);
  const ShapeState s0 = ShapeState::from_seed("3:1e-3", 32, 1.0);
  std::vector<std::pair<double, double>> series;
  for (double tt = 0; tt <= 1.0; tt += 0.125) series.push_back({tt, std::abs(evolve_linear(s0, tt, t).coeff(3))});
  const GrowthFit f = fit_growth_rate(series);
  CHECK(std::abs(f.rate - t.mu[3]) <= 1e-10);
  CHECK(f.residual <= 1e-12);
}
