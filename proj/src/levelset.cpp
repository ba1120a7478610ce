#include "eqlab/levelset.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "eqlab/field_io.hpp"

namespace eqlab {

void GridSpec::validate() const {
  if (n_theta < 8) throw ConfigError("grid.n_theta must be >= 8, got " + std::to_string(n_theta));
  if (n_phi < 16) throw ConfigError("grid.n_phi must be >= 16, got " + std::to_string(n_phi));
  if (n_phi % 2 != 0) throw ConfigError("grid.n_phi must be even, got " + std::to_string(n_phi));
  if (!(r_min > 0.0)) throw ConfigError("grid.bracket: r_min must be positive");
  if (!(r_max > r_min)) throw ConfigError("grid.bracket: r_max must exceed r_min");
  if (!center.allFinite()) throw ConfigError("grid.center must be finite");
}

// ---------------------------------------------------------------------------

RadialSolution radial_solve_detailed(const Field& field, double level, const Vec3& direction,
                                     const GridSpec& spec, const LevelsetTolerances& tol) {
  const Vec3 w = direction.normalized();
  auto excess = [&](double r) { return field.value(spec.center + r * w) - level; };

  double lo = spec.r_min, hi = spec.r_max;
  const double f_lo = excess(lo), f_hi = excess(hi);
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    std::ostringstream os;
    os << std::setprecision(17) << "level " << level << " is not bracketed along ("
       << w.transpose() << "): U(r_min) - level = " << f_lo << ", U(r_max) - level = " << f_hi;
    throw BracketError(os.str());
  }
  const double target = tol.radial_root * std::max(1.0, std::abs(level));

  while (hi - lo > tol.bisection * lo) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }

  RadialSolution sol;
  double r = 0.5 * (lo + hi);
  double f = excess(r);
  for (int iter = 0; iter < 60 && std::abs(f) > target; ++iter) {
    const double slope = eval_jet(field, spec.center + r * w).gradient.dot(w);
    const double next = r - f / slope;
    if (!(slope < 0.0) || !(next > lo && next < hi)) {
      // Newton escaped; finish by bisection on the current bracket.
      sol.bisection_fallback = true;
      while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi && std::abs(f) > target) {
        const double mid = 0.5 * (lo + hi);
        const double fm = excess(mid);
        (fm > 0.0 ? lo : hi) = mid;
        r = mid;
        f = fm;
      }
      break;
    }
    r = next;
    f = excess(r);
    (f > 0.0 ? lo : hi) = r;
  }
  sol.radius = r;
  sol.defect = std::abs(f);
  return sol;
}

// ---------------------------------------------------------------------------

namespace {

SurfaceNode make_node(const Field& field, double level, const GridSpec& spec,
                      const LevelsetTolerances& tol, double theta, double phi, double x,
                      double gl_weight, bool& fallback) {
  const double st = std::sqrt(1.0 - x * x), ct = x;
  const double sp = std::sin(phi), cp = std::cos(phi);
  SurfaceNode node;
  node.theta = theta;
  node.phi = phi;
  node.direction = Vec3(st * cp, st * sp, ct);
  const Vec3 w_theta(ct * cp, ct * sp, -st);
  const Vec3 w_phi(-st * sp, st * cp, 0.0);

  const RadialSolution sol = radial_solve_detailed(field, level, node.direction, spec, tol);
  fallback = sol.bisection_fallback;
  node.radius = sol.radius;
  node.position = spec.center + sol.radius * node.direction;
  node.jet = eval_jet(field, node.position);
  node.frame = frame(node.jet, node.position, tol.critical_intensity);

  // U(center + rho(theta, phi) w(theta, phi)) = level, differentiated.
  const Vec3& g = node.jet.gradient;
  const double g_radial = g.dot(node.direction);
  const double rho_theta = -sol.radius * g.dot(w_theta) / g_radial;
  const double rho_phi = -sol.radius * g.dot(w_phi) / g_radial;
  node.r_theta = rho_theta * node.direction + sol.radius * w_theta;
  node.r_phi = rho_phi * node.direction + sol.radius * w_phi;
  node.metric << node.r_theta.dot(node.r_theta), node.r_theta.dot(node.r_phi),
      node.r_theta.dot(node.r_phi), node.r_phi.dot(node.r_phi);
  node.area_density = node.r_theta.cross(node.r_phi).norm();
  // Gauss-Legendre integrates in x = cos(theta): dtheta = dx / sin(theta).
  node.weight = node.area_density / st * gl_weight * (2.0 * std::numbers::pi / spec.n_phi);
  return node;
}

}  // namespace

LevelSurfaceGrid sample_surface(const Field& field, double level, const GridSpec& spec,
                                Execution exec, const LevelsetTolerances& tol) {
  spec.validate();
  LevelSurfaceGrid grid;
  grid.level = level;
  grid.spec = spec;
  const GaussLegendre rule = gauss_legendre(spec.n_theta);
  grid.x_nodes = rule.nodes;
  grid.gl_weights = rule.weights;
  for (double x : rule.nodes) grid.thetas.push_back(std::acos(x));
  for (int j = 0; j < spec.n_phi; ++j) grid.phis.push_back(2.0 * std::numbers::pi * j / spec.n_phi);

  const int total = spec.n_theta * spec.n_phi;
  grid.nodes.resize(static_cast<std::size_t>(total));
  std::vector<char> fallback(static_cast<std::size_t>(total), 0);

  for_each_index(static_cast<std::size_t>(total), exec, [&](std::size_t k) {
    const std::size_t i = k / static_cast<std::size_t>(spec.n_phi);
    const std::size_t j = k % static_cast<std::size_t>(spec.n_phi);
    bool fb = false;
    grid.nodes[k] = make_node(field, level, spec, tol, grid.thetas[i], grid.phis[j],
                              grid.x_nodes[i], grid.gl_weights[i], fb);
    fallback[k] = fb ? 1 : 0;
  });

  GridDiagnostics& diag = grid.diagnostics;
  diag.max_mean_curvature = -std::numeric_limits<double>::infinity();
  diag.min_gauss_curvature = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.nodes.size(); ++k) {
    const SurfaceNode& n = grid.nodes[k];
    diag.max_mean_curvature = std::max(diag.max_mean_curvature, n.frame.mean_curvature);
    diag.min_gauss_curvature = std::min(diag.min_gauss_curvature, n.frame.gauss_curvature);
    diag.max_level_defect = std::max(diag.max_level_defect, std::abs(n.jet.value - level));
    diag.bisection_fallbacks += fallback[k];
    if (!is_convex(n.frame)) ++diag.nonconvex_nodes;
  }
  diag.convex = diag.nonconvex_nodes == 0;
  if (!diag.convex) {
    spdlog::warn("level {}: {} of {} nodes fail strict convexity (max H = {}, min K = {})", level,
                 diag.nonconvex_nodes, total, diag.max_mean_curvature, diag.min_gauss_curvature);
  }
  if (diag.bisection_fallbacks > 0) {
    spdlog::warn("level {}: Newton left the bracket at {} nodes; finished by bisection", level,
                 diag.bisection_fallbacks);
  }
  return grid;
}

// ---------------------------------------------------------------------------

namespace {

Vec3 flow_velocity(const Field& field, const Vec3& r, double eps) {
  const Vec3 g = eval_jet(field, r).gradient;
  const double e2 = g.squaredNorm();
  if (!(std::sqrt(e2) > eps)) {
    std::ostringstream os;
    os << "critical point met by the flow at (" << r.transpose() << ")";
    throw CriticalPoint(os.str());
  }
  return g / e2;
}

Vec3 project_to_level(const Field& field, Vec3 r, double level, double& defect) {
  for (int iter = 0; iter < 8; ++iter) {
    const FieldJet j = eval_jet(field, r);
    const double f = level - j.value;
    defect = std::abs(f);
    if (defect <= 1e-15 * std::max(1.0, std::abs(level))) return r;
    r += f * j.gradient / j.gradient.squaredNorm();
  }
  defect = std::abs(level - field.value(r));
  return r;
}

template <class Record>
Vec3 integrate_flow(const Field& field, Vec3 r, double from, double to, int steps,
                    const LevelsetTolerances& tol, Record&& record) {
  if (steps < 1) throw ConfigError("flow: steps must be >= 1");
  const double h = (to - from) / steps;
  for (int s = 0; s < steps; ++s) {
    const Vec3 k1 = flow_velocity(field, r, tol.critical_intensity);
    const Vec3 k2 = flow_velocity(field, r + 0.5 * h * k1, tol.critical_intensity);
    const Vec3 k3 = flow_velocity(field, r + 0.5 * h * k2, tol.critical_intensity);
    const Vec3 k4 = flow_velocity(field, r + h * k3, tol.critical_intensity);
    r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double lv = from + (s + 1) * h;
    // U changes by exactly h per step along a true flow line. A step that
    // misses by a sizable fraction of h has jumped across a region where E
    // nearly vanishes (typically a saddle), so the trace is not trustworthy.
    const double miss = std::abs(field.value(r) - lv);
    if (!(miss <= 0.01 * std::abs(h))) {
      std::ostringstream os;
      os << "flow step " << s + 1 << " missed its level by " << miss << " (step " << h
         << "): near-critical region around (" << r.transpose() << ")";
      throw CriticalPoint(os.str());
    }
    record(lv, r);
  }
  return r;
}

}  // namespace

FlowTrajectory flow_trace(const Field& field, const Vec3& start, double target_level, int steps,
                          const LevelsetTolerances& tol) {
  FlowTrajectory traj;
  traj.start_level = field.value(start);
  traj.end_level = target_level;
  traj.samples.push_back({traj.start_level, start});
  try {
    const Vec3 end = integrate_flow(field, start, traj.start_level, target_level, steps, tol,
                                    [&](double lv, const Vec3& r) { traj.samples.push_back({lv, r}); });
    double defect = 0.0;
    traj.samples.back().position = project_to_level(field, end, target_level, defect);
    traj.samples.back().level = target_level;
    traj.terminal_defect = defect;
  } catch (const CriticalPoint& e) {
    throw FlowInterrupted(e.what(), traj);
  }
  if (traj.terminal_defect > tol.flow_defect) {
    spdlog::warn("flow terminal defect {} exceeds tolerance {}", traj.terminal_defect,
                 tol.flow_defect);
  }
  return traj;
}

Vec3 flow_endpoint(const Field& field, const Vec3& start, double target_level, int steps,
                   const LevelsetTolerances& tol) {
  const Vec3 end = integrate_flow(field, start, field.value(start), target_level, steps, tol,
                                  [](double, const Vec3&) {});
  double defect = 0.0;
  return project_to_level(field, end, target_level, defect);
}

// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd as_matrix(const LevelSurfaceGrid& grid, std::span<const double> samples) {
  if (samples.size() != grid.size()) throw ConfigError("sample count does not match the grid");
  Eigen::MatrixXd m(grid.spec.n_theta, grid.spec.n_phi);
  for (int i = 0; i < grid.spec.n_theta; ++i)
    for (int j = 0; j < grid.spec.n_phi; ++j)
      m(i, j) = samples[static_cast<std::size_t>(i * grid.spec.n_phi + j)];
  return m;
}

struct InverseMetric {
  Eigen::MatrixXd tt, tp, pp;  // g^{theta theta}, g^{theta phi}, g^{phi phi}
};

InverseMetric inverse_metric(const LevelSurfaceGrid& grid) {
  InverseMetric inv;
  inv.tt = grid.gather([](const SurfaceNode& n) { return n.metric(1, 1) / n.metric.determinant(); });
  inv.tp = grid.gather([](const SurfaceNode& n) { return -n.metric(0, 1) / n.metric.determinant(); });
  inv.pp = grid.gather([](const SurfaceNode& n) { return n.metric(0, 0) / n.metric.determinant(); });
  return inv;
}

}  // namespace

std::vector<double> surface_laplacian(const LevelSurfaceGrid& grid, std::span<const double> samples) {
  const SphereDifferentiator diff = grid.differentiator();
  const Eigen::MatrixXd f = as_matrix(grid, samples);
  const Eigen::MatrixXd f_t = diff.d_theta(f, Parity::Even);
  const Eigen::MatrixXd f_p = diff.d_phi(f);
  const InverseMetric inv = inverse_metric(grid);
  const Eigen::MatrixXd sqrt_g = grid.gather([](const SurfaceNode& n) { return n.area_density; });

  // Flux densities: the theta component is even across the poles, the phi
  // component odd (sqrt g itself is odd).
  const Eigen::MatrixXd v_t = sqrt_g.cwiseProduct(inv.tt.cwiseProduct(f_t) + inv.tp.cwiseProduct(f_p));
  const Eigen::MatrixXd v_p = sqrt_g.cwiseProduct(inv.tp.cwiseProduct(f_t) + inv.pp.cwiseProduct(f_p));
  const Eigen::MatrixXd lap =
      (diff.d_theta(v_t, Parity::Even) + diff.d_phi(v_p)).cwiseQuotient(sqrt_g);

  std::vector<double> out(grid.size());
  for (int i = 0; i < grid.spec.n_theta; ++i)
    for (int j = 0; j < grid.spec.n_phi; ++j)
      out[static_cast<std::size_t>(i * grid.spec.n_phi + j)] = lap(i, j);
  return out;
}

std::vector<Vec3> tangential_gradient(const LevelSurfaceGrid& grid, std::span<const double> samples) {
  const SphereDifferentiator diff = grid.differentiator();
  const Eigen::MatrixXd f = as_matrix(grid, samples);
  const Eigen::MatrixXd f_t = diff.d_theta(f, Parity::Even);
  const Eigen::MatrixXd f_p = diff.d_phi(f);
  const InverseMetric inv = inverse_metric(grid);
  std::vector<Vec3> out(grid.size());
  for (int i = 0; i < grid.spec.n_theta; ++i) {
    for (int j = 0; j < grid.spec.n_phi; ++j) {
      const SurfaceNode& n = grid.at(i, j);
      const double up_t = inv.tt(i, j) * f_t(i, j) + inv.tp(i, j) * f_p(i, j);
      const double up_p = inv.tp(i, j) * f_t(i, j) + inv.pp(i, j) * f_p(i, j);
      out[static_cast<std::size_t>(i * grid.spec.n_phi + j)] = up_t * n.r_theta + up_p * n.r_phi;
    }
  }
  return out;
}

std::pair<std::vector<Vec3>, std::vector<Vec3>> spectral_tangents(const LevelSurfaceGrid& grid,
                                                                  std::span<const Vec3> positions) {
  if (positions.size() != grid.size()) throw ConfigError("position count does not match the grid");
  const SphereDifferentiator diff = grid.differentiator();
  std::vector<Vec3> r_t(grid.size()), r_p(grid.size());
  for (int c = 0; c < 3; ++c) {
    Eigen::MatrixXd m(grid.spec.n_theta, grid.spec.n_phi);
    for (int i = 0; i < grid.spec.n_theta; ++i)
      for (int j = 0; j < grid.spec.n_phi; ++j)
        m(i, j) = positions[static_cast<std::size_t>(i * grid.spec.n_phi + j)][c];
    const Eigen::MatrixXd dt = diff.d_theta(m, Parity::Even);
    const Eigen::MatrixXd dp = diff.d_phi(m);
    for (int i = 0; i < grid.spec.n_theta; ++i) {
      for (int j = 0; j < grid.spec.n_phi; ++j) {
        const auto k = static_cast<std::size_t>(i * grid.spec.n_phi + j);
        r_t[k][c] = dt(i, j);
        r_p[k][c] = dp(i, j);
      }
    }
  }
  return {r_t, r_p};
}

// ---------------------------------------------------------------------------

void write_grid_csv(const LevelSurfaceGrid& grid, std::ostream& os) {
  os << "theta,phi,x,y,z,E,H,K,dS,dlogE_norm\n";
  os << std::setprecision(17);
  for (const auto& n : grid.nodes) {
    os << n.theta << ',' << n.phi << ',' << n.position.x() << ',' << n.position.y() << ','
       << n.position.z() << ',' << n.frame.intensity << ',' << n.frame.mean_curvature << ','
       << n.frame.gauss_curvature << ',' << n.weight << ',' << n.frame.fieldline_curvature << '\n';
  }
}

nlohmann::json grid_spec_to_json(const GridSpec& spec) {
  return {{"n_theta", spec.n_theta},
          {"n_phi", spec.n_phi},
          {"center", vec3_to_json(spec.center)},
          {"bracket", {spec.r_min, spec.r_max}}};
}

nlohmann::json grid_sidecar_json(const LevelSurfaceGrid& grid) {
  const auto& d = grid.diagnostics;
  return {{"level", grid.level},
          {"spec", grid_spec_to_json(grid.spec)},
          {"nodes", grid.size()},
          {"diagnostics",
           {{"convex", d.convex},
            {"nonconvex_nodes", d.nonconvex_nodes},
            {"max_mean_curvature", d.max_mean_curvature},
            {"min_gauss_curvature", d.min_gauss_curvature},
            {"max_level_defect", d.max_level_defect},
            {"bisection_fallbacks", d.bisection_fallbacks}}}};
}

}  // namespace eqlab
