#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "eqlab/fields.hpp"
#include "eqlab/parallel.hpp"

namespace eqlab {

/// Convex body sum_i |(x - center)_i / a_i|^p <= 1 (p = 2: ellipsoid,
/// p > 2: superellipsoid).
class ConvexShape {
 public:
  static ConvexShape ellipsoid(const Vec3& semi_axes, const Vec3& center = Vec3::Zero());
  static ConvexShape superellipsoid(const Vec3& semi_axes, double exponent,
                                    const Vec3& center = Vec3::Zero());

  const Vec3& semi_axes() const { return axes_; }
  double exponent() const { return exponent_; }
  const Vec3& center() const { return center_; }

  /// sum_i |(x - center)_i / a_i|^p - 1: negative inside, zero on the boundary.
  double implicit(const Vec3& x) const;
  bool contains(const Vec3& x) const { return implicit(x) < 0.0; }

  /// Boundary point on the ray center + t * direction (closed form).
  Vec3 boundary_point(const Vec3& direction) const;
  /// Outward unit normal at a boundary point.
  Vec3 normal(const Vec3& boundary) const;

  /// Image of a unit vector u under the standard parametrization
  /// x_i = center_i + a_i sign(u_i) |u_i|^(2/p); lands on the boundary.
  Vec3 surface_point(const Vec3& unit) const;

  /// Images of quasi-uniform (Fibonacci) unit vectors under surface_point,
  /// pulled toward or pushed away from the center by `scale`.
  std::vector<Vec3> fibonacci_points(std::size_t count, double scale = 1.0) const;
  /// Boundary points along seeded random ray directions.
  std::vector<Vec3> random_points(std::size_t count, std::uint64_t seed) const;

  double max_semi_axis() const { return axes_.maxCoeff(); }
  double min_semi_axis() const { return axes_.minCoeff(); }

 private:
  ConvexShape(const Vec3& axes, double exponent, const Vec3& center);

  Vec3 axes_;
  double exponent_;
  Vec3 center_;
};

struct FitOptions {
  int sources = 400;
  int collocation_ratio = 4;          // collocation points per source
  double source_scale = 0.0;          // 0: 0.3 (exterior) or 2.5 (cavity)
  std::size_t check_points = 10000;
  std::uint64_t seed = 1;
  double residual_tolerance = 1e-6;
  double condition_cap = 1e14;
  bool enforce_residual = true;       // throw ResidualTooLarge above the tolerance
  Execution exec = Execution::Parallel;
};

struct FitReport {
  std::string problem;                // "exterior" or "cavity"
  int sources = 0;
  int collocation_points = 0;
  std::size_t check_points = 0;
  double source_scale = 0.0;
  double condition_estimate = 0.0;    // |R_00| / |R_nn| of the column-scaled QR
  double collocation_residual = 0.0;  // max relative residual at collocation points
  double residual_max = 0.0;          // on the fresh check set
  double residual_rms = 0.0;
  double boundary_value = 0.0;        // exterior only
  double flux = 0.0;                  // total source strength
  bool within_tolerance = false;
};

struct MfsFit {
  ChargeEnsemble ensemble;
  FitReport report;
};

/// Exterior conductor problem: U harmonic outside the body, constant on its
/// boundary, O(1/|r|) at infinity, total flux `flux`. Sources sit inside the
/// body on the scaled boundary. Residuals are relative to the boundary value.
MfsFit solve_exterior(const ConvexShape& shape, double flux, const FitOptions& opts = {});

/// Green's function of the body with the unit charge at the origin: the
/// charge plus sources outside the body that cancel it on the boundary.
/// Residual: |G(x)| * 4 pi |x| on the boundary. Throws OriginOutside unless
/// the origin is strictly inside.
MfsFit solve_cavity(const ConvexShape& shape, const FitOptions& opts = {});

/// Dense single-layer collocation matrix A_ij = 1 / (4 pi |x_i - y_j|).
Eigen::MatrixXd assemble_collocation(const std::vector<Vec3>& collocation,
                                     const std::vector<Vec3>& sources,
                                     Execution exec = Execution::Parallel);

nlohmann::json fit_report_to_json(const FitReport& r);
nlohmann::json shape_to_json(const ConvexShape& s);

}  // namespace eqlab
