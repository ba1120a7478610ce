#pragma once

#include <vector>

#include <Eigen/Core>

namespace eqlab {

/// Gauss-Legendre rule on [-1, 1], nodes ascending.
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussLegendre gauss_legendre(int n);

/// Differentiation matrix of the polynomial interpolant through `nodes`
/// (barycentric form).
Eigen::MatrixXd barycentric_diff_matrix(const std::vector<double>& nodes);

/// Differentiation matrix of the trigonometric interpolant on n uniform
/// periodic nodes 2 pi j / n (n even).
Eigen::MatrixXd periodic_diff_matrix(int n);

/// Parity of a grid quantity under the antipodal relabelling
/// (theta, phi) -> (-theta, phi + pi), which names the same surface point.
/// Scalars and phi-derivatives are even; theta-derivatives and the signed area
/// density are odd.
enum class Parity { Even = 1, Odd = -1 };

/// Spectral derivatives on a (theta, phi) tensor grid with theta_i = arccos x_i
/// at Gauss-Legendre nodes x_i and uniform phi (n_phi even).
///
/// Along a meridian great circle the data splits into the part even across the
/// poles, which is a polynomial in x = cos(theta), and the odd part, which is
/// sin(theta) times a polynomial in x. Each part is differentiated with the
/// barycentric matrix on the Gauss-Legendre nodes, so smooth surface functions
/// are differentiated at spectral accuracy with no pole nodes.
///
/// Values are laid out as (n_theta x n_phi) matrices, row = theta index.
class SphereDifferentiator {
 public:
  SphereDifferentiator(const std::vector<double>& x_nodes, int n_phi);

  int n_theta() const { return static_cast<int>(sin_.size()); }
  int n_phi() const { return n_phi_; }

  Eigen::MatrixXd d_theta(const Eigen::MatrixXd& values, Parity parity) const;
  Eigen::MatrixXd d_phi(const Eigen::MatrixXd& values) const;

 private:
  Eigen::MatrixXd dx_;
  Eigen::MatrixXd dphi_t_;  // transposed periodic matrix, applied on the right
  Eigen::VectorXd sin_, cos_;
  int n_phi_;
};

/// Neumaier-compensated sum in index order (deterministic).
double compensated_sum(const double* values, std::size_t n);

}  // namespace eqlab
