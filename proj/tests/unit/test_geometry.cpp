#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "eqlab/error.hpp"
#include "eqlab/fields.hpp"
#include "eqlab/geometry.hpp"
#include "eqlab/spectral.hpp"

using namespace eqlab;
constexpr double kPi = std::numbers::pi;

TEST(Frame, SphereAboutMonopole) {
  const Field f = ChargeEnsemble({{Vec3::Zero(), 1.0}});
  const Vec3 r(0.0, 1.2, 1.6);  // |r| = 2
  const SurfaceFrame s = frame(eval_jet(f, r), r);
  EXPECT_NEAR((s.normal - r / 2).norm(), 0.0, 1e-15);
  EXPECT_NEAR(s.mean_curvature, -0.5, 1e-14);
  EXPECT_NEAR(s.gauss_curvature, 0.25, 1e-14);
  EXPECT_NEAR(s.umbilic_deviation, 0.0, 1e-28);
  EXPECT_TRUE(is_convex(s));
  const auto k = principal_curvatures(s);
  EXPECT_NEAR(k[0], -0.5, 1e-14);
  EXPECT_NEAR(k[1], -0.5, 1e-14);
  EXPECT_NEAR((s.weingarten * s.normal).norm(), 0.0, 1e-15);
}

TEST(Frame, WeingartenIsMinusDerivativeOfNormal) {
  const Field f = AxialDipoleField(1.0, 0.3);
  const Vec3 r(0.6, -0.4, 0.9);
  const SurfaceFrame s = frame(eval_jet(f, r), r);
  const auto basis = tangent_basis(s.normal);
  const double h = 1e-6;
  for (const Vec3& t : basis) {
    const Vec3 np = -eval_jet(f, r + h * t).gradient.normalized();
    const Vec3 nm = -eval_jet(f, r - h * t).gradient.normalized();
    const Vec3 dn = (np - nm) / (2 * h);
    // The tangential part of dn is -W t; the normal part comes from leaving the level.
    const Vec3 tangential = dn - s.normal.dot(dn) * s.normal;
    EXPECT_NEAR((tangential + s.weingarten * t).norm(), 0.0, 1e-7);
  }
}

TEST(Frame, ClosedFormIdentities) {
  const Field f = ChargeEnsemble({{Vec3(0.2, 0, 0), 1.0}, {Vec3(-0.3, 0.1, 0), 0.5}});
  const Vec3 r(0.9, 0.8, -0.7);
  const FieldJet j = eval_jet(f, r);
  const SurfaceFrame s = frame(j, r);
  EXPECT_LT(normal_logE_identity(s, j), 1e-13 * std::abs(s.mean_curvature));
  EXPECT_NEAR(laplacian_logE(j) + 2 * s.gauss_curvature, 0.0, 1e-12 * std::abs(s.gauss_curvature));
  EXPECT_NEAR(s.umbilic_deviation, s.mean_curvature * s.mean_curvature - s.gauss_curvature, 1e-13);
}

TEST(Frame, LaplacianLogEMatchesFiniteDifferences) {
  const Field f = AxialDipoleField(1.0, 0.25);
  const Vec3 r(0.5, 0.3, 0.8);
  const auto logE = [&](const Vec3& x) { return std::log(eval_jet(f, x).gradient.norm()); };
  const double h = 1e-3;
  double lap = -6 * logE(r);
  for (int a = 0; a < 3; ++a) {
    Vec3 e = Vec3::Zero();
    e[a] = h;
    lap += logE(r + e) + logE(r - e);
  }
  lap /= h * h;
  EXPECT_NEAR(laplacian_logE(eval_jet(f, r)), lap, 1e-5 * std::abs(lap));
}

TEST(Frame, CriticalPointThrows) {
  // Two equal charges: the midpoint is a critical point.
  const Field f = ChargeEnsemble({{Vec3(1, 0, 0), 1.0}, {Vec3(-1, 0, 0), 1.0}});
  EXPECT_THROW(frame(eval_jet(f, Vec3::Zero()), Vec3::Zero()), CriticalPoint);
}

TEST(Frame, DipoleLevelNearAxisCanBeNonConvex) {
  // c10 comparable to c00 * rho: on the -z axis U = 1/r - 1/r^2 peaks at
  // 0.25, and the level 0.24 is pinched there (outer crossing r = 2.5).
  const AxialDipoleField d(1.0, 1.0);
  const Vec3 r(0, 0, -2.5);
  ASSERT_NEAR(d.value(r), 0.24, 1e-15);
  EXPECT_FALSE(is_convex(frame(d.jet(r), r)));
}

TEST(Spectral, GaussLegendreIntegratesPolynomials) {
  const auto gl = gauss_legendre(10);
  double s0 = 0, s2 = 0, s18 = 0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    s0 += gl.weights[i];
    s2 += gl.weights[i] * gl.nodes[i] * gl.nodes[i];
    s18 += gl.weights[i] * std::pow(gl.nodes[i], 18);
  }
  EXPECT_NEAR(s0, 2.0, 1e-15);
  EXPECT_NEAR(s2, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(s18, 2.0 / 19.0, 1e-15);
  EXPECT_TRUE(std::is_sorted(gl.nodes.begin(), gl.nodes.end()));
}

TEST(Spectral, PeriodicDerivativeIsExactForTrigPolynomials) {
  const int n = 16;
  const Eigen::MatrixXd d = periodic_diff_matrix(n);
  Eigen::VectorXd f(n), df(n);
  for (int j = 0; j < n; ++j) {
    const double t = 2 * kPi * j / n;
    f[j] = std::sin(3 * t) + std::cos(5 * t);
    df[j] = 3 * std::cos(3 * t) - 5 * std::sin(5 * t);
  }
  EXPECT_NEAR((d * f - df).norm(), 0.0, 1e-12);
}

TEST(Spectral, BarycentricDerivativeIsExactForPolynomials) {
  const auto gl = gauss_legendre(8);
  const Eigen::MatrixXd d = barycentric_diff_matrix(gl.nodes);
  Eigen::VectorXd f(8), df(8);
  for (int i = 0; i < 8; ++i) {
    const double x = gl.nodes[i];
    f[i] = std::pow(x, 7) - 2 * x * x;
    df[i] = 7 * std::pow(x, 6) - 4 * x;
  }
  EXPECT_NEAR((d * f - df).norm(), 0.0, 1e-12);
}

TEST(Spectral, SphereDifferentiatorThetaDerivative) {
  const int nt = 12, np = 16;
  const auto gl = gauss_legendre(nt);
  const SphereDifferentiator D(gl.nodes, np);
  Eigen::MatrixXd f(nt, np), fe(nt, np), g(nt, np), ge(nt, np);
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < np; ++j) {
      const double th = std::acos(gl.nodes[i]), ph = 2 * kPi * j / np;
      // z = cos(theta) (even), x = sin(theta) cos(phi) (even as a surface function)
      f(i, j) = std::cos(th);
      fe(i, j) = -std::sin(th);
      g(i, j) = std::sin(th) * std::cos(ph);
      ge(i, j) = std::cos(th) * std::cos(ph);
    }
  EXPECT_NEAR((D.d_theta(f, Parity::Even) - fe).norm(), 0.0, 1e-12);
  EXPECT_NEAR((D.d_theta(g, Parity::Even) - ge).norm(), 0.0, 1e-12);
}

TEST(Spectral, CompensatedSumIsAccurate) {
  std::vector<double> v = {1e16, 1.0, -1e16, 1.0};
  EXPECT_EQ(compensated_sum(v.data(), v.size()), 2.0);
}
