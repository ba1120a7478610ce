#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "eqlab/levelset.hpp"

namespace eqlab {

/// Sum of integrand * dS over the grid, compensated and in node order.
/// Throws NonFinite if any node value is NaN or infinite.
double integrate(const LevelSurfaceGrid& grid, std::span<const double> integrand);

/// Surface integrals of one level, all from a single pass over the nodes.
///
///   flux          -oint n . grad U dS  (= oint E dS)
///   gauss_bonnet  oint K dS
///   W_value       oint (H^2 - K - |D log E|^2 / 4) dS / E
///   F_value       oint (4 (H^2 - K) - |n x grad log E|^2) / E dS   (= 4 W)
///   beta_integral oint <(2H I - W) D(1/E), D(1/E)> dS
struct LevelReport {
  double level = 0.0;
  double flux = 0.0;
  double gauss_bonnet = 0.0;
  double W_value = 0.0;
  double F_value = 0.0;
  double beta_integral = 0.0;
  double area = 0.0;
  bool convex = true;
  double max_mean_curvature = 0.0;
  double min_gauss_curvature = 0.0;
  /// Largest value of <(2H I - W) t, t> over unit tangents t and all nodes;
  /// non-positive on strictly convex grids.
  double beta_form_max = 0.0;
};

LevelReport level_report(const LevelSurfaceGrid& grid, Execution exec = Execution::Parallel);

struct SweepOptions {
  Execution exec = Execution::Parallel;
  LevelsetTolerances tol;
  double monotone_slack = 1e-9;
};

struct SweepReport {
  std::vector<double> levels;            // strictly ascending
  std::vector<LevelReport> reports;
  std::vector<GridDiagnostics> diagnostics;
  /// Three-point (non-uniform) centred differences of W; NaN at the two ends.
  std::vector<double> dW_fd;
  /// -(3/2) * beta_integral per level.
  std::vector<double> rhs_W1F1;
  bool convex = true;
  /// W nondecreasing within the slack; empty when some level is non-convex.
  std::optional<bool> monotone;
  double flux_spread = 0.0;              // (max - min) / |mean| of the flux
  double gauss_bonnet_deviation = 0.0;   // max |oint K dS - 4 pi|
  double max_derivative_rel_error = 0.0; // over interior levels
  double max_F_minus_4W_rel = 0.0;
};

/// Samples every level on its own grid (no flow transport: the integrals are
/// parametrization independent) and cross-checks the derivative formula.
/// Levels are sorted ascending; at least 5 distinct levels are required.
SweepReport sweep(const Field& field, std::vector<double> levels, const GridSpec& spec,
                  const SweepOptions& options = {});

/// max over levels of |oint K dS - 4 pi|.
double gauss_bonnet_invariance(const Field& field, std::span<const double> levels,
                               const GridSpec& spec, Execution exec = Execution::Parallel);

nlohmann::json level_report_to_json(const LevelReport& r);
nlohmann::json sweep_to_json(const SweepReport& s);
/// Columns: level,flux,gauss_bonnet,W,F,beta,dW_fd,rhs,convex
void write_sweep_csv(const SweepReport& s, std::ostream& os);

}  // namespace eqlab
