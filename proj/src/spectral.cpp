#include "tumor/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tumor::spectral {

using std::numbers::pi;

Eigen::VectorXd chebyshev_lobatto(int n) {
  Eigen::VectorXd x(n + 1);
  for (int j = 0; j <= n; ++j) x(j) = std::cos(pi * j / n);
  return x;
}

Eigen::MatrixXd chebyshev_diff(int n) {
  const Eigen::VectorXd x = chebyshev_lobatto(n);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n + 1, n + 1);
  auto c = [n](int j) { return ((j == 0 || j == n) ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0); };
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      if (i != j) d(i, j) = c(i) / c(j) / (x(i) - x(j));
    }
  }
  // Negative-sum trick for the diagonal keeps rows exact on constants.
  for (int i = 0; i <= n; ++i) d(i, i) = -d.row(i).sum();
  return d;
}

std::vector<double> unit_interval_nodes(int n) {
  std::vector<double> r(n + 1);
  for (int j = 0; j <= n; ++j) r[j] = 0.5 * (1.0 - std::cos(pi * j / n));
  r.front() = 0.0;
  r.back() = 1.0;
  return r;
}

ChebyshevInterpolant::ChebyshevInterpolant(std::vector<double> nodes, std::vector<double> values)
    : nodes_(std::move(nodes)), values_(std::move(values)), weights_(nodes_.size()) {
  if (nodes_.size() != values_.size() || nodes_.size() < 2) {
    throw std::invalid_argument("ChebyshevInterpolant: node/value size mismatch");
  }
  const std::size_t last = nodes_.size() - 1;
  for (std::size_t j = 0; j <= last; ++j) {
    weights_[j] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == last) ? 0.5 : 1.0);
  }
}

double ChebyshevInterpolant::operator()(double x) const {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < nodes_.size(); ++j) {
    const double diff = x - nodes_[j];
    if (diff == 0.0) return values_[j];
    const double t = weights_[j] / diff;
    num += t * values_[j];
    den += t;
  }
  return num / den;
}

FourierBasis::FourierBasis(int n) : n_(n) {
  if (n < 4 || n % 2) throw std::invalid_argument("FourierBasis needs an even size >= 4");
  const int half = n / 2;
  synthesis_.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const double t = theta(i);
    synthesis_(i, 0) = 1.0;
    for (int m = 1; m < half; ++m) {
      synthesis_(i, cos_index(m)) = std::cos(m * t);
      synthesis_(i, sin_index(m)) = std::sin(m * t);
    }
    synthesis_(i, cos_index(half)) = std::cos(half * t);
  }
  analysis_.resize(n, n);
  for (int i = 0; i < n; ++i) {
    const double t = theta(i);
    analysis_(0, i) = 1.0 / n;
    for (int m = 1; m < half; ++m) {
      analysis_(cos_index(m), i) = 2.0 * std::cos(m * t) / n;
      analysis_(sin_index(m), i) = 2.0 * std::sin(m * t) / n;
    }
    analysis_(cos_index(half), i) = std::cos(half * t) / n;
  }

  // Derivatives in coefficient space; the Nyquist cosine differentiates to a sine the grid
  // cannot hold, so it is dropped (standard for even-length collocation).
  Eigen::MatrixXd c1 = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd c2 = Eigen::MatrixXd::Zero(n, n);
  for (int m = 1; m < half; ++m) {
    c1(sin_index(m), cos_index(m)) = -m;
    c1(cos_index(m), sin_index(m)) = m;
    c2(cos_index(m), cos_index(m)) = -m * m;
    c2(sin_index(m), sin_index(m)) = -m * m;
  }
  c2(cos_index(half), cos_index(half)) = -half * half;
  d1_ = synthesis_ * c1 * analysis_;
  d2_ = synthesis_ * c2 * analysis_;
}

double FourierBasis::theta(int i) const { return 2.0 * pi * i / n_; }

Eigen::MatrixXd FourierBasis::truncation(int cutoff) const {
  Eigen::MatrixXd keep = Eigen::MatrixXd::Zero(n_, n_);
  for (int m = 0; m <= std::min(cutoff, n_ / 2); ++m) {
    keep(cos_index(m), cos_index(m)) = 1.0;
    if (sin_index(m) >= 0) keep(sin_index(m), sin_index(m)) = 1.0;
  }
  return synthesis_ * keep * analysis_;
}

}  // namespace tumor::spectral
