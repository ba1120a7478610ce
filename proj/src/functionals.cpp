#include "eqlab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include "eqlab/error.hpp"

namespace eqlab {

double integrate(const LevelSurfaceGrid& grid, std::span<const double> integrand) {
  if (integrand.size() != grid.size()) throw ConfigError("integrand size does not match the grid");
  std::vector<double> terms(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(integrand[k])) {
      throw NonFinite("integrand is not finite at node " + std::to_string(k));
    }
    terms[k] = integrand[k] * grid.nodes[k].weight;
  }
  return compensated_sum(terms.data(), terms.size());
}

namespace {

struct NodeIntegrands {
  double flux, gauss, w, f, beta, beta_max;
};

NodeIntegrands node_integrands(const SurfaceNode& node) {
  const SurfaceFrame& fr = node.frame;
  const double e = fr.intensity;
  const double h = fr.mean_curvature;
  const double dev = fr.umbilic_deviation;
  const double dlog2 = fr.dlogE.squaredNorm();

  // Tangential operator B = 2H P - W on the tangent plane.
  const auto [t1, t2] = tangent_basis(fr.normal);
  const Mat3 proj = Mat3::Identity() - fr.normal * fr.normal.transpose();
  const Mat3 b = 2.0 * h * proj - fr.weingarten;
  const Vec3 d_inv_e = -fr.dlogE / e;

  const double b11 = t1.dot(b * t1), b12 = t1.dot(b * t2), b22 = t2.dot(b * t2);
  const double beta_max = 0.5 * (b11 + b22) + std::hypot(0.5 * (b11 - b22), b12);

  NodeIntegrands out;
  out.flux = e;
  out.gauss = fr.gauss_curvature;
  out.w = (dev - 0.25 * dlog2) / e;
  out.f = (4.0 * dev - dlog2) / e;
  out.beta = d_inv_e.dot(b * d_inv_e);
  out.beta_max = beta_max;
  return out;
}

}  // namespace

LevelReport level_report(const LevelSurfaceGrid& grid, Execution exec) {
  const std::size_t n = grid.size();
  std::vector<NodeIntegrands> vals(n);
  for_each_index(n, exec, [&](std::size_t k) { vals[k] = node_integrands(grid.nodes[k]); });

  std::vector<double> col(n);
  auto integral = [&](double NodeIntegrands::*member) {
    for (std::size_t k = 0; k < n; ++k) col[k] = vals[k].*member;
    return integrate(grid, col);
  };

  LevelReport r;
  r.level = grid.level;
  r.flux = integral(&NodeIntegrands::flux);
  r.gauss_bonnet = integral(&NodeIntegrands::gauss);
  r.W_value = integral(&NodeIntegrands::w);
  r.F_value = integral(&NodeIntegrands::f);
  r.beta_integral = integral(&NodeIntegrands::beta);
  std::fill(col.begin(), col.end(), 1.0);
  r.area = integrate(grid, col);
  r.convex = grid.diagnostics.convex;
  r.max_mean_curvature = grid.diagnostics.max_mean_curvature;
  r.min_gauss_curvature = grid.diagnostics.min_gauss_curvature;
  r.beta_form_max = -std::numeric_limits<double>::infinity();
  for (const auto& v : vals) r.beta_form_max = std::max(r.beta_form_max, v.beta_max);
  return r;
}

SweepReport sweep(const Field& field, std::vector<double> levels, const GridSpec& spec,
                  const SweepOptions& options) {
  std::sort(levels.begin(), levels.end());
  if (std::adjacent_find(levels.begin(), levels.end()) != levels.end()) {
    throw ConfigError("sweep levels must be distinct");
  }
  if (levels.size() < 5) throw ConfigError("sweep needs at least 5 levels");

  SweepReport s;
  s.levels = levels;
  for (double lv : levels) {
    const LevelSurfaceGrid grid = sample_surface(field, lv, spec, options.exec, options.tol);
    s.reports.push_back(level_report(grid, options.exec));
    s.diagnostics.push_back(grid.diagnostics);
  }

  const std::size_t n = levels.size();
  s.dW_fd.assign(n, std::numeric_limits<double>::quiet_NaN());
  s.rhs_W1F1.resize(n);
  double flux_min = std::numeric_limits<double>::infinity(), flux_max = -flux_min, flux_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const LevelReport& r = s.reports[k];
    s.rhs_W1F1[k] = -1.5 * r.beta_integral;
    s.convex = s.convex && r.convex;
    flux_min = std::min(flux_min, r.flux);
    flux_max = std::max(flux_max, r.flux);
    flux_sum += r.flux;
    s.gauss_bonnet_deviation =
        std::max(s.gauss_bonnet_deviation, std::abs(r.gauss_bonnet - 4.0 * std::numbers::pi));
    const double scale = std::max(std::abs(r.F_value), std::abs(4.0 * r.W_value));
    if (scale > 0.0) {
      s.max_F_minus_4W_rel = std::max(s.max_F_minus_4W_rel, std::abs(r.F_value - 4.0 * r.W_value) / scale);
    }
  }
  s.flux_spread = (flux_max - flux_min) / std::abs(flux_sum / double(n));

  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double h1 = levels[k] - levels[k - 1];
    const double h2 = levels[k + 1] - levels[k];
    const double w0 = s.reports[k - 1].W_value, w1 = s.reports[k].W_value, w2 = s.reports[k + 1].W_value;
    s.dW_fd[k] = -h2 / (h1 * (h1 + h2)) * w0 + (h2 - h1) / (h1 * h2) * w1 + h1 / (h2 * (h1 + h2)) * w2;
    const double denom = std::max(std::abs(s.rhs_W1F1[k]), std::numeric_limits<double>::min());
    const double err = s.dW_fd[k] == s.rhs_W1F1[k] ? 0.0 : std::abs(s.dW_fd[k] - s.rhs_W1F1[k]) / denom;
    s.max_derivative_rel_error = std::max(s.max_derivative_rel_error, err);
  }

  if (s.convex) {
    bool mono = true;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      mono = mono && (s.reports[k + 1].W_value - s.reports[k].W_value >= -options.monotone_slack);
    }
    for (std::size_t k = 1; k + 1 < n; ++k) mono = mono && (s.dW_fd[k] >= -options.monotone_slack);
    s.monotone = mono;
  }
  return s;
}

double gauss_bonnet_invariance(const Field& field, std::span<const double> levels,
                               const GridSpec& spec, Execution exec) {
  double dev = 0.0;
  for (double lv : levels) {
    const LevelReport r = level_report(sample_surface(field, lv, spec, exec), exec);
    dev = std::max(dev, std::abs(r.gauss_bonnet - 4.0 * std::numbers::pi));
  }
  return dev;
}

nlohmann::json level_report_to_json(const LevelReport& r) {
  return {{"level", r.level},
          {"flux", r.flux},
          {"gauss_bonnet", r.gauss_bonnet},
          {"W", r.W_value},
          {"F", r.F_value},
          {"beta", r.beta_integral},
          {"area", r.area},
          {"convex", r.convex},
          {"max_mean_curvature", r.max_mean_curvature},
          {"min_gauss_curvature", r.min_gauss_curvature},
          {"beta_form_max", r.beta_form_max}};
}

namespace {

nlohmann::json nullable(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json sweep_to_json(const SweepReport& s) {
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t k = 0; k < s.levels.size(); ++k) {
    nlohmann::json j = level_report_to_json(s.reports[k]);
    j["dW_fd"] = nullable(s.dW_fd[k]);
    j["rhs"] = s.rhs_W1F1[k];
    j["bisection_fallbacks"] = s.diagnostics[k].bisection_fallbacks;
    j["max_level_defect"] = s.diagnostics[k].max_level_defect;
    levels.push_back(j);
  }
  return {{"levels", levels},
          {"convex", s.convex},
          {"monotone", s.monotone ? nlohmann::json(*s.monotone) : nlohmann::json(nullptr)},
          {"flux_spread", s.flux_spread},
          {"gauss_bonnet_deviation", s.gauss_bonnet_deviation},
          {"max_derivative_rel_error", s.max_derivative_rel_error},
          {"max_F_minus_4W_rel", s.max_F_minus_4W_rel}};
}

void write_sweep_csv(const SweepReport& s, std::ostream& os) {
  os << "level,flux,gauss_bonnet,W,F,beta,dW_fd,rhs,convex\n" << std::setprecision(17);
  for (std::size_t k = 0; k < s.levels.size(); ++k) {
    const LevelReport& r = s.reports[k];
    os << r.level << ',' << r.flux << ',' << r.gauss_bonnet << ',' << r.W_value << ',' << r.F_value
       << ',' << r.beta_integral << ',';
    if (std::isfinite(s.dW_fd[k])) os << s.dW_fd[k];
    os << ',' << s.rhs_W1F1[k] << ',' << (r.convex ? 1 : 0) << '\n';
  }
}

}  // namespace eqlab
