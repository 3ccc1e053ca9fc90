#include "tumor/shape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "tumor/errors.hpp"

namespace tumor {

ShapeState::ShapeState(int n_modes, double radius_scale) {
  if (n_modes < 0) throw ValidationError("n_modes must be >= 0");
  coeffs_.assign(n_modes + 1, Complex{});
  set_radius_scale(radius_scale);
}

void ShapeState::set_radius_scale(double R) {
  if (!(R > 0.0)) throw ValidationError("radius_scale must be > 0");
  radius_scale_ = R;
}

ShapeState::Complex ShapeState::coeff(int k) const {
  const int a = std::abs(k);
  if (a > n_modes()) return {};
  return k >= 0 ? coeffs_[a] : std::conj(coeffs_[a]);
}

void ShapeState::set_coeff(int k, Complex value) {
  const int a = std::abs(k);
  if (a > n_modes()) {
    std::ostringstream msg;
    msg << "mode " << k << " exceeds n_modes = " << n_modes();
    throw ValidationError(msg.str());
  }
  if (k < 0) value = std::conj(value);
  if (a == 0) value = value.real();
  coeffs_[a] = value;
}

std::vector<double> ShapeState::sample(int n_theta) const {
  std::vector<double> out(n_theta, coeffs_[0].real());
  for (int j = 0; j < n_theta; ++j) {
    const double t = 2.0 * std::numbers::pi * j / n_theta;
    double s = 0.0;
    for (int k = 1; k <= n_modes(); ++k) {
      if (coeffs_[k] == Complex{}) continue;
      s += coeffs_[k].real() * std::cos(k * t) - coeffs_[k].imag() * std::sin(k * t);
    }
    out[j] += 2.0 * s;
  }
  return out;
}

ShapeState ShapeState::from_samples(const std::vector<double>& values, int n_modes, double radius_scale) {
  const int n = static_cast<int>(values.size());
  ShapeState s(n_modes, radius_scale);
  const int top = std::min(n_modes, (n - 1) / 2);
  for (int k = 0; k <= top; ++k) {
    Complex acc{};
    for (int j = 0; j < n; ++j) {
      const double t = 2.0 * std::numbers::pi * j / n;
      acc += values[j] * Complex(std::cos(k * t), -std::sin(k * t));
    }
    s.set_coeff(k, acc / double(n));
  }
  return s;
}

double ShapeState::sup_norm() const {
  int top = 0;
  for (int k = 0; k <= n_modes(); ++k)
    if (coeffs_[k] != Complex{}) top = k;
  const int n = std::max(64, 8 * top);
  const auto v = sample(n);
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

bool ShapeState::in_neighbourhood() const { return sup_norm() < 0.25; }

void ShapeState::require_in_neighbourhood() const {
  const double s = sup_norm();
  if (!(s < 0.25)) {
    std::ostringstream msg;
    msg << "shape leaves the admissible neighbourhood: ||rho||_inf = " << s << " >= 1/4";
    throw ValidationError(msg.str());
  }
}

void ShapeState::set_period(std::optional<int> l) {
  if (l && *l < 1) throw ValidationError("period l must be >= 1");
  period_ = l;
}

double ShapeState::lattice_leakage(int l) const {
  double m = 0.0;
  for (int k = 1; k <= n_modes(); ++k)
    if (k % l != 0) m = std::max(m, std::abs(coeffs_[k]));
  return m;
}

void ShapeState::add_cosine(int k, double amplitude, double phase) {
  // amp cos(k theta + phase) = amp/2 (e^{i phase} e^{ik theta} + c.c.)
  if (k < 0) {
    k = -k;
    phase = -phase;
  }
  if (k == 0) {
    set_coeff(0, coeff(0) + amplitude * std::cos(phase));
  } else {
    set_coeff(k, coeff(k) + 0.5 * amplitude * std::polar(1.0, phase));
  }
}

ShapeState ShapeState::from_seed(const std::string& spec, int n_modes, double radius_scale) {
  ShapeState s(n_modes, radius_scale);
  std::stringstream items(spec);
  std::string item;
  while (std::getline(items, item, ',')) {
    if (item.empty()) continue;
    std::stringstream parts(item);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(parts, field, ':')) f.push_back(field);
    if (f.size() < 2 || f.size() > 3) throw ValidationError("seed entry '" + item + "' is not k:amp[:phase]");
    try {
      std::size_t used = 0;
      const int k = std::stoi(f[0], &used);
      if (used != f[0].size()) throw std::invalid_argument(f[0]);
      const double amp = std::stod(f[1], &used);
      if (used != f[1].size()) throw std::invalid_argument(f[1]);
      double phase = 0.0;
      if (f.size() == 3) {
        phase = std::stod(f[2], &used);
        if (used != f[2].size()) throw std::invalid_argument(f[2]);
      }
      s.add_cosine(k, amp, phase);
    } catch (const std::logic_error&) {
      throw ValidationError("seed entry '" + item + "' has a malformed number");
    }
  }
  return s;
}

ShapeState& ShapeState::operator+=(const ShapeState& other) {
  if (other.n_modes() > n_modes()) coeffs_.resize(other.n_modes() + 1);
  for (int k = 0; k <= other.n_modes(); ++k) coeffs_[k] += other.coeffs_[k];
  return *this;
}

ShapeState& ShapeState::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

ShapeState operator+(ShapeState a, const ShapeState& b) { return a += b; }
ShapeState operator-(ShapeState a, const ShapeState& b) { return a += (-1.0) * b; }
ShapeState operator*(double s, ShapeState a) { return a *= s; }

}  // namespace tumor
