#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "eqlab/levelset.hpp"

namespace eqlab {

/// Every residual is relative: |lhs - rhs| divided by the sum of the
/// magnitudes of the terms that enter the identity, so it is scale free.
struct IdentityOptions {
  /// Finite-difference step as a fraction of |r - center|.
  double spatial_step = 1e-4;
  /// Flow step as a fraction of the level.
  double flow_step = 1e-3;
  int flow_substeps = 2;
  Vec3 center = Vec3::Zero();
  /// A stencil must stay this many steps away from every singular point.
  double stencil_clearance = 10.0;
  Execution exec = Execution::Parallel;
  LevelsetTolerances tol;
};

struct ResidualStats {
  double max = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
  std::size_t worst_index = 0;
};

ResidualStats summarize(std::span<const double> residuals);

/// Identities at one point of space.
///   normal_logE              n . grad log E = 2H                      (closed form)
///   laplacian_logE           Delta log E + 2K = 0                     (closed form)
///   grad_split               |grad log E|^2 = k^2 + 4H^2              (closed form)
///   laplacian_normal         Delta n = 2 (W - 2H) D log E - n (k^2 + 4H^2 - 2K)
///   laplacian_normal_over_E  Delta (n/E) = 4 [(2H - W) D(1/E) + K n / E]
/// The last two use a 7-point Laplacian of the closed-form n and n/E.
struct PointResiduals {
  double normal_logE = 0.0;
  double laplacian_logE = 0.0;
  double grad_split = 0.0;
  double laplacian_normal = 0.0;
  double laplacian_normal_over_E = 0.0;
};

/// Throws StencilOutOfDomain when the stencil comes within
/// stencil_clearance * h of a singular point.
PointResiduals point_identities(const Field& field, const Vec3& r, const IdentityOptions& opts = {});

struct PointSuite {
  ResidualStats normal_logE, laplacian_logE, grad_split, laplacian_normal, laplacian_normal_over_E;
};

PointSuite point_identity_suite(const Field& field, std::span<const Vec3> points,
                                const IdentityOptions& opts = {});

/// Identities that need surface derivatives, checked at every grid node.
///   weatherburn               Delta_S n = (2K - 4H^2) n - 2 D H
///   mean_curvature_evolution  2 dH/dphi + Delta_S (1/E) + (4H^2 - 2K)/E = 0
///   area_evolution            d log sqrt(g) / dphi = 2H / E
/// dphi derivatives follow the flow lines (centred, +-flow_step * level).
struct GridSuite {
  ResidualStats weatherburn, mean_curvature_evolution, area_evolution;
};

GridSuite grid_identity_suite(const Field& field, const LevelSurfaceGrid& grid,
                              const IdentityOptions& opts = {});

/// Deterministic points uniform in the shell r_inner <= |r - center| <= r_outer
/// (uniform in volume). The stream depends only on the seed.
std::vector<Vec3> sample_shell_points(std::uint64_t seed, std::size_t count, const Vec3& center,
                                      double r_inner, double r_outer);

nlohmann::json stats_to_json(const ResidualStats& s);
nlohmann::json point_suite_to_json(const PointSuite& s);
nlohmann::json grid_suite_to_json(const GridSuite& s);

}  // namespace eqlab
