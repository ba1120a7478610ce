#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "eqlab/error.hpp"
#include "eqlab/fields.hpp"
#include "eqlab/geometry.hpp"
#include "eqlab/parallel.hpp"
#include "eqlab/spectral.hpp"

namespace eqlab {

/// Tensor grid: Gauss-Legendre in cos(theta) times uniform phi, rays shot from
/// `center` and searched within [r_min, r_max].
struct GridSpec {
  int n_theta = 32;
  int n_phi = 64;
  Vec3 center = Vec3::Zero();
  double r_min = 1e-3;
  double r_max = 1e3;

  /// Throws ConfigError naming the violated bound.
  void validate() const;
};

struct LevelsetTolerances {
  double radial_root = 1e-13;        // |U - level| <= tol * max(1, |level|)
  double bisection = 1e-6;           // relative bracket width handed to Newton
  double flow_defect = 1e-10;        // terminal |U - target| after projection
  double critical_intensity = kCriticalIntensity;
};

struct RadialSolution {
  double radius = 0.0;
  double defect = 0.0;         // |U - level| at the returned radius
  bool bisection_fallback = false;  // Newton left the bracket
};

/// Radius rho with U(center + rho * direction) = level. Bisection to the
/// relative width `bisection`, then Newton; if Newton leaves the bracket the
/// solve finishes by bisection and reports the fallback.
/// Throws BracketError unless U(r_min) > level > U(r_max) along the ray.
RadialSolution radial_solve_detailed(const Field& field, double level, const Vec3& direction,
                                     const GridSpec& spec, const LevelsetTolerances& tol = {});

inline double radial_solve(const Field& field, double level, const Vec3& direction,
                           const GridSpec& spec, const LevelsetTolerances& tol = {}) {
  return radial_solve_detailed(field, level, direction, spec, tol).radius;
}

struct SurfaceNode {
  double theta = 0.0;
  double phi = 0.0;
  Vec3 direction = Vec3::Zero();
  double radius = 0.0;
  Vec3 position = Vec3::Zero();
  FieldJet jet;
  SurfaceFrame frame;
  Vec3 r_theta = Vec3::Zero();   // dr/dtheta, implicit differentiation
  Vec3 r_phi = Vec3::Zero();
  Eigen::Matrix2d metric = Eigen::Matrix2d::Zero();  // first fundamental form
  double area_density = 0.0;     // |r_theta x r_phi|
  double weight = 0.0;           // dS quadrature weight
};

struct GridDiagnostics {
  bool convex = true;
  int nonconvex_nodes = 0;
  double max_mean_curvature = 0.0;
  double min_gauss_curvature = 0.0;
  double max_level_defect = 0.0;
  int bisection_fallbacks = 0;
};

/// One equipotential surface sampled for quadrature. Node (i, j) sits at
/// theta_i = arccos(x_i), phi_j = 2 pi j / n_phi and is stored at i * n_phi + j.
struct LevelSurfaceGrid {
  double level = 0.0;
  GridSpec spec;
  std::vector<double> x_nodes;     // Gauss-Legendre nodes in cos(theta)
  std::vector<double> gl_weights;
  std::vector<double> thetas;
  std::vector<double> phis;
  std::vector<SurfaceNode> nodes;
  GridDiagnostics diagnostics;

  std::size_t size() const { return nodes.size(); }
  const SurfaceNode& at(int i, int j) const {
    return nodes[static_cast<std::size_t>(i * spec.n_phi + j)];
  }

  /// Per-node scalar laid out as an (n_theta x n_phi) matrix.
  template <class Fn>
  Eigen::MatrixXd gather(Fn&& fn) const {
    Eigen::MatrixXd m(spec.n_theta, spec.n_phi);
    for (int i = 0; i < spec.n_theta; ++i)
      for (int j = 0; j < spec.n_phi; ++j) m(i, j) = fn(at(i, j));
    return m;
  }

  SphereDifferentiator differentiator() const { return {x_nodes, spec.n_phi}; }
};

/// Samples the level surface on the spec's tensor grid. Per-node radial
/// solves and frames are independent; the parallel path gathers them in the
/// same order as the serial one. Non-convex nodes are recorded in the
/// diagnostics (and logged), never thrown.
LevelSurfaceGrid sample_surface(const Field& field, double level, const GridSpec& spec,
                                Execution exec = Execution::Parallel,
                                const LevelsetTolerances& tol = {});

// ---------------------------------------------------------------------------
// Gauss-Maxwell flow

struct FlowSample {
  double level;
  Vec3 position;
};

struct FlowTrajectory {
  double start_level = 0.0;
  double end_level = 0.0;
  std::vector<FlowSample> samples;
  double terminal_defect = 0.0;

  const Vec3& end() const { return samples.back().position; }
};

/// Raised when the flow meets a critical point; carries what was traced.
class FlowInterrupted : public CriticalPoint {
 public:
  FlowInterrupted(const std::string& what, FlowTrajectory partial)
      : CriticalPoint(what), partial_(std::move(partial)) {}
  const FlowTrajectory& partial() const { return partial_; }

 private:
  FlowTrajectory partial_;
};

/// Moves `start` (on its own level U(start)) to `target_level` along
/// dr/dphi = grad U / |grad U|^2 = -n / E with `steps` classical RK4 steps in
/// the level parameter, then projects onto the target level by Newton steps
/// along grad U.
FlowTrajectory flow_trace(const Field& field, const Vec3& start, double target_level, int steps,
                          const LevelsetTolerances& tol = {});

/// End point only (no sample storage).
Vec3 flow_endpoint(const Field& field, const Vec3& start, double target_level, int steps,
                   const LevelsetTolerances& tol = {});

// ---------------------------------------------------------------------------
// Surface calculus on a grid

/// Laplace-Beltrami operator (1/sqrt g) d_k (g^kl sqrt g d_l f) applied to
/// per-node samples (node order). Spectral in phi, parity-split barycentric in
/// theta.
std::vector<double> surface_laplacian(const LevelSurfaceGrid& grid, std::span<const double> samples);

/// Tangential gradient D f = g^kl (d_l f) d_k r.
std::vector<Vec3> tangential_gradient(const LevelSurfaceGrid& grid, std::span<const double> samples);

/// Positions differentiated spectrally: returns (r_theta, r_phi) per node.
/// Used on flow-transported grids, whose tangents are not known in closed form.
std::pair<std::vector<Vec3>, std::vector<Vec3>> spectral_tangents(
    const LevelSurfaceGrid& grid, std::span<const Vec3> positions);

// ---------------------------------------------------------------------------
// Export

/// Columns: theta,phi,x,y,z,E,H,K,dS,dlogE_norm
void write_grid_csv(const LevelSurfaceGrid& grid, std::ostream& os);
nlohmann::json grid_sidecar_json(const LevelSurfaceGrid& grid);

nlohmann::json grid_spec_to_json(const GridSpec& spec);

}  // namespace eqlab
