#pragma once

#include <complex>
#include <iosfwd>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "eqlab/parallel.hpp"

namespace eqlab {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

struct PlanarJet {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
  Mat2 hessian = Mat2::Zero();
};

/// U = -(flux / 2 pi) log |z - center|.
struct LogMonopole {
  double flux = 2.0 * std::numbers::pi;
  Vec2 center = Vec2::Zero();
};

/// U = -(flux / 2 pi) log |z| + (p . z) / (2 pi |z|^2): a line charge plus a
/// line dipole p at the origin.
struct LogDipoleMix {
  double flux = 2.0 * std::numbers::pi;
  Vec2 dipole = Vec2::Zero();
};

/// Exterior of the ellipse with semi-axes scale (1 + m), scale (1 - m), via
/// z = scale (zeta + m / zeta), |zeta| >= 1, and U = -(flux / 2 pi) log |zeta|.
/// The boundary sits at level 0; exterior levels are negative. Levels are
/// confocal ellipses, circles when m = 0.
struct EllipseExterior {
  double scale = 1.0;
  double m = 0.0;
  double flux = 2.0 * std::numbers::pi;
};

/// Exact 2D harmonic potentials, each the real part of an explicit complex
/// potential w(z), so value, gradient and Hessian are closed form:
/// U = Re w, U_x - i U_y = w'(z), U_xx - i U_xy = w''(z).
class PlanarField {
 public:
  using Model = std::variant<LogMonopole, LogDipoleMix, EllipseExterior>;

  PlanarField(Model model);  // NOLINT: validates parameters
  const Model& model() const { return model_; }
  std::string kind() const;
  double flux() const;

  PlanarJet jet(const Vec2& x) const;
  double value(const Vec2& x) const { return jet(x).value; }

 private:
  Model model_;
};

struct CurveSpec {
  int n_nodes = 512;
  Vec2 center = Vec2::Zero();
  double r_min = 1e-3;
  double r_max = 1e3;
  void validate() const;
};

struct CurveNode {
  double theta = 0.0;
  Vec2 position = Vec2::Zero();
  PlanarJet jet;
  Vec2 tangent = Vec2::Zero();   // unit, counter-clockwise
  Vec2 normal = Vec2::Zero();    // -grad U / E
  double intensity = 0.0;        // E
  double curvature = 0.0;        // kappa = -t.Hess.t / E (= div n; unit circle: +1)
  double dlogE = 0.0;            // t . grad log E
  double speed = 0.0;            // |dr/dtheta|
  double ds = 0.0;               // trapezoidal arc-length weight
};

/// Level curve sampled at uniform polar angles about spec.center.
struct LevelCurveGrid {
  double level = 0.0;
  CurveSpec spec;
  std::vector<CurveNode> nodes;
  double max_level_defect = 0.0;
};

/// Radial root per angle (as in 3D), tangent by implicit differentiation.
LevelCurveGrid sample_curve(const PlanarField& field, double level, const CurveSpec& spec,
                            Execution exec = Execution::Parallel);

double turning_integral(const LevelCurveGrid& grid);      // oint kappa ds
double flux_integral(const LevelCurveGrid& grid);         // oint E ds
double curve_length(const LevelCurveGrid& grid);
/// oint (kappa^2 - |n x grad log E|^2) / E ds; constant in the level.
double conserved_integral(const LevelCurveGrid& grid);

struct GradProduct {
  double value = 0.0;       // oint d_s(kappa/E) d_s(1/E) ds
  double normalized = 0.0;  // value / (|d_s(kappa/E)|_2 |d_s(1/E)|_2), in [-1, 1]
};
/// Tangential derivatives by periodic spectral differentiation along the curve.
GradProduct grad_product_integral(const LevelCurveGrid& grid);

struct VarianceIdentity {
  double lhs = 0.0;  // oint (kappa/E - mean)^2 dmu, dmu = E ds / flux
  double rhs = 0.0;  // oint |D(1/E)|^2 dmu
  double rel_error = 0.0;
};
VarianceIdentity variance_identity(const LevelCurveGrid& grid, double flux);

/// (max - min) / mean of kappa over the nodes; zero on circles.
double curvature_spread(const LevelCurveGrid& grid);

struct PlanarLevelReport {
  double level = 0.0;
  double flux = 0.0;
  double turning = 0.0;
  double length = 0.0;
  double conserved = 0.0;
  GradProduct grad_product;
  VarianceIdentity variance;
  double curvature_spread = 0.0;
  double min_curvature = 0.0;
  double max_level_defect = 0.0;
};

PlanarLevelReport planar_level_report(const LevelCurveGrid& grid, double flux);

struct PlanarSweep {
  std::vector<PlanarLevelReport> levels;
  double expected_conserved = 0.0;   // 4 pi^2 / flux, from the variance identity
  double conserved_spread = 0.0;     // (max - min) / |mean|
  double max_variance_rel_error = 0.0;
  double max_flux_deviation = 0.0;   // relative to the field's flux
  double max_turning_deviation = 0.0;
  double max_grad_product = 0.0;     // largest value (should be <= 0)
  bool convex = true;
};

PlanarSweep planar_sweep(const PlanarField& field, const std::vector<double>& levels,
                         const CurveSpec& spec, Execution exec = Execution::Parallel);

/// 2D degeneracy of Delta log E + 2K = 0: with Delta U = 0,
/// |Hess|_F^2 E^2 = 2 |Hess grad U|^2 (Delta log E = 0). Relative residual.
double planar_logE_identity(const PlanarJet& jet);
/// Delta (n / E) = 0 by a 5-point stencil with step h; relative residual.
double planar_normal_over_E_identity(const PlanarField& field, const Vec2& x, double h);

PlanarField planar_field_from_json(const nlohmann::json& j);
nlohmann::json planar_field_to_json(const PlanarField& f);
nlohmann::json planar_level_to_json(const PlanarLevelReport& r);
nlohmann::json planar_sweep_to_json(const PlanarSweep& s);
/// Columns: theta,x,y,E,kappa,ds
void write_curve_csv(const LevelCurveGrid& grid, std::ostream& os);

}  // namespace eqlab
