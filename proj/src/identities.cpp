#include "eqlab/identities.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "eqlab/error.hpp"

namespace eqlab {

ResidualStats summarize(std::span<const double> residuals) {
  ResidualStats s;
  s.count = residuals.size();
  if (residuals.empty()) return s;
  s.mean = compensated_sum(residuals.data(), residuals.size()) / double(residuals.size());
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    if (!std::isfinite(residuals[k])) throw NonFinite("identity residual is not finite");
    if (residuals[k] > s.max) {
      s.max = residuals[k];
      s.worst_index = k;
    }
  }
  return s;
}

namespace {

/// |diff| / scale with 0/0 read as an exact match.
double relative(double diff, double scale) {
  diff = std::abs(diff);
  return diff == 0.0 ? 0.0 : diff / scale;
}

Vec3 unit_normal(const Field& field, const Vec3& r) {
  const Vec3 g = eval_jet(field, r).gradient;
  return -g / g.norm();
}

Vec3 normal_over_intensity(const Field& field, const Vec3& r) {
  const Vec3 g = eval_jet(field, r).gradient;
  return -g / g.squaredNorm();
}

template <class Fn>
Vec3 fd_laplacian(Fn&& f, const Vec3& r, double h) {
  const Vec3 centre = f(r);
  Vec3 acc = Vec3::Zero();
  for (int k = 0; k < 3; ++k) {
    const Vec3 e = h * Vec3::Unit(k);
    acc += (f(r + e) - centre) + (f(r - e) - centre);
  }
  return acc / (h * h);
}

}  // namespace

PointResiduals point_identities(const Field& field, const Vec3& r, const IdentityOptions& opts) {
  const FieldJet jet = eval_jet(field, r);
  const SurfaceFrame fr = frame(jet, r, opts.tol.critical_intensity);
  const double h = fr.mean_curvature, k = fr.gauss_curvature, e = fr.intensity;
  const Vec3& n = fr.normal;
  const Vec3& d = fr.dlogE;
  const double k2 = d.squaredNorm();

  PointResiduals out;
  const double n_dot = n.dot(fr.grad_log_intensity);
  out.normal_logE = relative(n_dot - 2.0 * h, std::abs(n_dot) + 2.0 * std::abs(h));
  const double lap_log = laplacian_logE(jet, opts.tol.critical_intensity);
  out.laplacian_logE = relative(lap_log + 2.0 * k, std::abs(lap_log) + 2.0 * std::abs(k));
  const double full = fr.grad_log_intensity.squaredNorm();
  out.grad_split = relative(full - (k2 + 4.0 * h * h), full + k2 + 4.0 * h * h);

  const double step = opts.spatial_step * (r - opts.center).norm();
  if (!(step > 0.0)) throw StencilOutOfDomain("finite-difference step vanishes at the grid center");
  if (field.distance_to_singularity(r) < opts.stencil_clearance * step) {
    std::ostringstream os;
    os << "stencil at (" << r.transpose() << ") with step " << step
       << " comes too close to a singular point";
    throw StencilOutOfDomain(os.str());
  }

  const Mat3 proj = Mat3::Identity() - n * n.transpose();
  const Mat3& w = fr.weingarten;

  const Vec3 lap_n = fd_laplacian([&](const Vec3& x) { return unit_normal(field, x); }, r, step);
  const Vec3 wd = w * d;
  const Vec3 rhs_n = 2.0 * (wd - 2.0 * h * d) - n * (k2 + 4.0 * h * h - 2.0 * k);
  const double scale_n = lap_n.norm() + 2.0 * wd.norm() + 4.0 * std::abs(h) * d.norm() + k2 +
                         4.0 * h * h + 2.0 * std::abs(k);
  out.laplacian_normal = relative((lap_n - rhs_n).norm(), scale_n);

  const Vec3 lap_m = fd_laplacian([&](const Vec3& x) { return normal_over_intensity(field, x); }, r, step);
  const Vec3 d_inv = -d / e;
  const Vec3 b_d = 2.0 * h * proj * d_inv - w * d_inv;
  const Vec3 rhs_m = 4.0 * (b_d + k * n / e);
  const double scale_m = lap_m.norm() + 4.0 * (2.0 * std::abs(h) * d_inv.norm() +
                                               (w * d_inv).norm() + std::abs(k) / e);
  out.laplacian_normal_over_E = relative((lap_m - rhs_m).norm(), scale_m);
  return out;
}

PointSuite point_identity_suite(const Field& field, std::span<const Vec3> points,
                                const IdentityOptions& opts) {
  std::vector<PointResiduals> res(points.size());
  for_each_index(points.size(), opts.exec,
                 [&](std::size_t k) { res[k] = point_identities(field, points[k], opts); });
  std::vector<double> col(points.size());
  auto stats = [&](double PointResiduals::*member) {
    for (std::size_t k = 0; k < res.size(); ++k) col[k] = res[k].*member;
    return summarize(col);
  };
  PointSuite s;
  s.normal_logE = stats(&PointResiduals::normal_logE);
  s.laplacian_logE = stats(&PointResiduals::laplacian_logE);
  s.grad_split = stats(&PointResiduals::grad_split);
  s.laplacian_normal = stats(&PointResiduals::laplacian_normal);
  s.laplacian_normal_over_E = stats(&PointResiduals::laplacian_normal_over_E);
  return s;
}

GridSuite grid_identity_suite(const Field& field, const LevelSurfaceGrid& grid,
                              const IdentityOptions& opts) {
  const std::size_t n = grid.size();
  const double level = grid.level;
  const double delta = opts.flow_step * std::abs(level);
  if (!(delta > 0.0)) throw ConfigError("identities: flow step must be positive");

  // Per-node scalar inputs for the surface operators.
  std::vector<double> mean(n), inv_e(n);
  std::array<std::vector<double>, 3> normal;
  for (auto& c : normal) c.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const SurfaceFrame& fr = grid.nodes[k].frame;
    mean[k] = fr.mean_curvature;
    inv_e[k] = 1.0 / fr.intensity;
    for (int c = 0; c < 3; ++c) normal[static_cast<std::size_t>(c)][k] = fr.normal[c];
  }
  std::array<std::vector<double>, 3> lap_normal;
  for (int c = 0; c < 3; ++c) {
    lap_normal[static_cast<std::size_t>(c)] = surface_laplacian(grid, normal[static_cast<std::size_t>(c)]);
  }
  const std::vector<Vec3> grad_h = tangential_gradient(grid, mean);
  const std::vector<double> lap_inv_e = surface_laplacian(grid, inv_e);

  // Transport every node by the flow to level +- delta.
  std::vector<Vec3> pos0(n), pos_plus(n), pos_minus(n);
  std::vector<double> h_plus(n), h_minus(n);
  for_each_index(n, opts.exec, [&](std::size_t k) {
    pos0[k] = grid.nodes[k].position;
    pos_plus[k] = flow_endpoint(field, pos0[k], level + delta, opts.flow_substeps, opts.tol);
    pos_minus[k] = flow_endpoint(field, pos0[k], level - delta, opts.flow_substeps, opts.tol);
    h_plus[k] = frame(eval_jet(field, pos_plus[k]), pos_plus[k], opts.tol.critical_intensity).mean_curvature;
    h_minus[k] = frame(eval_jet(field, pos_minus[k]), pos_minus[k], opts.tol.critical_intensity).mean_curvature;
  });
  const auto [tp, pp] = spectral_tangents(grid, pos_plus);
  const auto [tm, pm] = spectral_tangents(grid, pos_minus);

  std::vector<double> weather(n), evolution(n), area(n);
  for (std::size_t k = 0; k < n; ++k) {
    const SurfaceFrame& fr = grid.nodes[k].frame;
    const double h = fr.mean_curvature, kk = fr.gauss_curvature, e = fr.intensity;

    const Vec3 lap_n(lap_normal[0][k], lap_normal[1][k], lap_normal[2][k]);
    const Vec3 rhs = (2.0 * kk - 4.0 * h * h) * fr.normal - 2.0 * grad_h[k];
    weather[k] = relative((lap_n - rhs).norm(),
                          lap_n.norm() + 4.0 * h * h + 2.0 * std::abs(kk) + 2.0 * grad_h[k].norm());

    const double h_phi = (h_plus[k] - h_minus[k]) / (2.0 * delta);
    const double curv = (4.0 * h * h - 2.0 * kk) / e;
    evolution[k] = relative(2.0 * h_phi + lap_inv_e[k] + curv,
                            2.0 * std::abs(h_phi) + std::abs(lap_inv_e[k]) + std::abs(curv));

    const double a_plus = tp[k].cross(pp[k]).norm();
    const double a_minus = tm[k].cross(pm[k]).norm();
    const double d_log_area = std::log(a_plus / a_minus) / (2.0 * delta);
    const double expected = 2.0 * h / e;
    area[k] = relative(d_log_area - expected, std::abs(d_log_area) + std::abs(expected));
  }

  GridSuite s;
  s.weatherburn = summarize(weather);
  s.mean_curvature_evolution = summarize(evolution);
  s.area_evolution = summarize(area);
  return s;
}

namespace {

/// 53-bit uniform in [0, 1) straight from the engine output, so the stream is
/// identical across standard libraries.
double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<Vec3> sample_shell_points(std::uint64_t seed, std::size_t count, const Vec3& center,
                                      double r_inner, double r_outer) {
  if (!(r_inner > 0.0 && r_outer >= r_inner)) {
    throw ConfigError("sampling shell needs 0 < r_inner <= r_outer");
  }
  std::mt19937_64 rng(seed);
  std::vector<Vec3> pts;
  pts.reserve(count);
  const double a3 = r_inner * r_inner * r_inner, b3 = r_outer * r_outer * r_outer;
  for (std::size_t k = 0; k < count; ++k) {
    const double z = 2.0 * unit_uniform(rng) - 1.0;
    const double phi = 2.0 * std::numbers::pi * unit_uniform(rng);
    const double r = std::cbrt(a3 + (b3 - a3) * unit_uniform(rng));
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts.push_back(center + r * Vec3(s * std::cos(phi), s * std::sin(phi), z));
  }
  return pts;
}

nlohmann::json stats_to_json(const ResidualStats& s) {
  return {{"max", s.max}, {"mean", s.mean}, {"count", s.count}, {"worst_index", s.worst_index}};
}

nlohmann::json point_suite_to_json(const PointSuite& s) {
  return {{"normal_logE", stats_to_json(s.normal_logE)},
          {"laplacian_logE", stats_to_json(s.laplacian_logE)},
          {"grad_split", stats_to_json(s.grad_split)},
          {"laplacian_normal", stats_to_json(s.laplacian_normal)},
          {"laplacian_normal_over_E", stats_to_json(s.laplacian_normal_over_E)}};
}

nlohmann::json grid_suite_to_json(const GridSuite& s) {
  return {{"weatherburn", stats_to_json(s.weatherburn)},
          {"mean_curvature_evolution", stats_to_json(s.mean_curvature_evolution)},
          {"area_evolution", stats_to_json(s.area_evolution)}};
}

}  // namespace eqlab
