#include "eqlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "eqlab/error.hpp"

namespace eqlab {

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw ConfigError("Gauss-Legendre rule needs at least one node");
  GaussLegendre rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Three-term recurrence for P_n and its derivative.
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  // Newton from the cosine guesses yields descending nodes.
  std::reverse(rule.nodes.begin(), rule.nodes.end());
  std::reverse(rule.weights.begin(), rule.weights.end());
  return rule;
}

Eigen::MatrixXd barycentric_diff_matrix(const std::vector<double>& nodes) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  // Barycentric weights 1 / prod_{k != j}(x_j - x_k), kept in log form so that
  // large node counts neither overflow nor underflow.
  std::vector<double> logw(nodes.size()), sign(nodes.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    double l = 0.0, s = 1.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == j) continue;
      const double d = nodes[static_cast<std::size_t>(j)] - nodes[static_cast<std::size_t>(k)];
      l -= std::log(std::abs(d));
      if (d < 0.0) s = -s;
    }
    logw[static_cast<std::size_t>(j)] = l;
    sign[static_cast<std::size_t>(j)] = s;
  }
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto ui = static_cast<std::size_t>(i), uj = static_cast<std::size_t>(j);
      const double ratio = sign[uj] * sign[ui] * std::exp(logw[uj] - logw[ui]);
      d(i, j) = ratio / (nodes[ui] - nodes[uj]);
      diag -= d(i, j);
    }
    d(i, i) = diag;
  }
  return d;
}

Eigen::MatrixXd periodic_diff_matrix(int n) {
  if (n < 2 || n % 2 != 0) throw ConfigError("periodic differentiation needs an even node count");
  const double h = 2.0 * std::numbers::pi / n;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      if (j == k) continue;
      const int diff = j - k;
      const double s = (diff % 2 == 0) ? 1.0 : -1.0;
      d(j, k) = 0.5 * s / std::tan(0.5 * diff * h);
    }
  }
  return d;
}

SphereDifferentiator::SphereDifferentiator(const std::vector<double>& x_nodes, int n_phi)
    : dx_(barycentric_diff_matrix(x_nodes)),
      dphi_t_(periodic_diff_matrix(n_phi).transpose()),
      n_phi_(n_phi) {
  const auto n = static_cast<Eigen::Index>(x_nodes.size());
  sin_.resize(n);
  cos_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = x_nodes[static_cast<std::size_t>(i)];
    cos_(i) = x;
    sin_(i) = std::sqrt(1.0 - x * x);
  }
}

Eigen::MatrixXd SphereDifferentiator::d_theta(const Eigen::MatrixXd& values, Parity parity) const {
  const double sigma = parity == Parity::Even ? 1.0 : -1.0;
  const int half = n_phi_ / 2;
  Eigen::MatrixXd shifted(values.rows(), values.cols());
  shifted.leftCols(n_phi_ - half) = values.rightCols(n_phi_ - half);
  shifted.rightCols(half) = values.leftCols(half);

  const Eigen::MatrixXd even = 0.5 * (values + sigma * shifted);
  const Eigen::MatrixXd odd_over_sin =
      (0.5 * (values - sigma * shifted)).array().colwise() / sin_.array();

  Eigen::MatrixXd out = -((dx_ * even).array().colwise() * sin_.array()).matrix();
  out.array() += odd_over_sin.array().colwise() * cos_.array();
  out.array() -= (dx_ * odd_over_sin).array().colwise() * (sin_.array() * sin_.array());
  return out;
}

Eigen::MatrixXd SphereDifferentiator::d_phi(const Eigen::MatrixXd& values) const {
  return values * dphi_t_;
}

double compensated_sum(const double* values, std::size_t n) {
  double sum = 0.0, c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = values[i];
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) c += (sum - t) + v;
    else c += (v - t) + sum;
    sum = t;
  }
  return sum + c;
}

}  // namespace eqlab
