#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace tumor::spectral {

/// Chebyshev-Gauss-Lobatto points x_j = cos(j pi / n), j = 0..n (descending from 1 to -1).
Eigen::VectorXd chebyshev_lobatto(int n);

/// First-derivative collocation matrix on the points returned by chebyshev_lobatto(n).
Eigen::MatrixXd chebyshev_diff(int n);

/// Barycentric Lagrange interpolation on Chebyshev-Lobatto nodes mapped to [a, b].
class ChebyshevInterpolant {
 public:
  ChebyshevInterpolant() = default;
  /// `nodes` must be the mapped Lobatto points (in either order) and `values` the data on them.
  ChebyshevInterpolant(std::vector<double> nodes, std::vector<double> values);

  double operator()(double x) const;
  bool empty() const { return nodes_.empty(); }

 private:
  std::vector<double> nodes_;
  std::vector<double> values_;
  std::vector<double> weights_;
};

/// Lobatto nodes on [0, 1], ascending: r_j = (1 - cos(j pi / n)) / 2.
std::vector<double> unit_interval_nodes(int n);

/// Real trigonometric basis on n equispaced points theta_i = 2 pi i / n (n even).
///
/// Coefficient layout: [a_0, a_1, b_1, ..., a_{n/2-1}, b_{n/2-1}, a_{n/2}], so that
/// u(theta) = a_0 + sum_m (a_m cos m theta + b_m sin m theta) + a_{n/2} cos(n theta / 2).
class FourierBasis {
 public:
  explicit FourierBasis(int n);

  int size() const { return n_; }
  int max_mode() const { return n_ / 2; }
  double theta(int i) const;

  /// coefficients = analysis * values; values = synthesis * coefficients.
  const Eigen::MatrixXd& analysis() const { return analysis_; }
  const Eigen::MatrixXd& synthesis() const { return synthesis_; }
  /// Collocation derivative matrices acting on grid values.
  const Eigen::MatrixXd& d1() const { return d1_; }
  const Eigen::MatrixXd& d2() const { return d2_; }
  /// Projector onto modes |m| <= cutoff (grid values in, grid values out).
  Eigen::MatrixXd truncation(int cutoff) const;

  /// Index of the cosine / sine coefficient of mode m in the layout above (-1 if absent).
  static int cos_index(int m) { return m == 0 ? 0 : 2 * m - 1; }
  int sin_index(int m) const { return (m == 0 || m == n_ / 2) ? -1 : 2 * m; }

 private:
  int n_;
  Eigen::MatrixXd analysis_;
  Eigen::MatrixXd synthesis_;
  Eigen::MatrixXd d1_;
  Eigen::MatrixXd d2_;
};

}  // namespace tumor::spectral
