#include "eqlab/mfs.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/QR>
#include <spdlog/spdlog.h>

#include "eqlab/error.hpp"
#include "eqlab/field_io.hpp"

namespace eqlab {

ConvexShape::ConvexShape(const Vec3& axes, double exponent, const Vec3& center)
    : axes_(axes), exponent_(exponent), center_(center) {
  if (!(axes.minCoeff() > 0.0) || !axes.allFinite()) {
    throw GeometryError("shape semi-axes must be positive and finite");
  }
  if (!(exponent >= 2.0) || !std::isfinite(exponent)) {
    throw GeometryError("shape exponent must be >= 2 for a smooth convex body");
  }
  if (!center.allFinite()) throw GeometryError("shape center must be finite");
}

ConvexShape ConvexShape::ellipsoid(const Vec3& semi_axes, const Vec3& center) {
  return {semi_axes, 2.0, center};
}

ConvexShape ConvexShape::superellipsoid(const Vec3& semi_axes, double exponent, const Vec3& center) {
  return {semi_axes, exponent, center};
}

double ConvexShape::implicit(const Vec3& x) const {
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += std::pow(std::abs((x[i] - center_[i]) / axes_[i]), exponent_);
  return s - 1.0;
}

Vec3 ConvexShape::boundary_point(const Vec3& direction) const {
  const Vec3 d = direction.normalized();
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += std::pow(std::abs(d[i] / axes_[i]), exponent_);
  return center_ + std::pow(s, -1.0 / exponent_) * d;
}

Vec3 ConvexShape::normal(const Vec3& boundary) const {
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    const double u = (boundary[i] - center_[i]) / axes_[i];
    g[i] = std::copysign(std::pow(std::abs(u), exponent_ - 1.0), u) / axes_[i];
  }
  return g.normalized();
}

Vec3 ConvexShape::surface_point(const Vec3& unit) const {
  Vec3 p;
  for (int i = 0; i < 3; ++i) {
    p[i] = axes_[i] * std::copysign(std::pow(std::abs(unit[i]), 2.0 / exponent_), unit[i]);
  }
  return center_ + p;
}

std::vector<Vec3> ConvexShape::fibonacci_points(std::size_t count, double scale) const {
  std::vector<Vec3> pts;
  pts.reserve(count);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t k = 0; k < count; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / double(count);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * double(k);
    const Vec3 b = surface_point(Vec3(s * std::cos(phi), s * std::sin(phi), z));
    pts.push_back(center_ + scale * (b - center_));
  }
  return pts;
}

std::vector<Vec3> ConvexShape::random_points(std::size_t count, std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Vec3> pts;
  pts.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double z = 2.0 * uniform() - 1.0;
    const double phi = 2.0 * std::numbers::pi * uniform();
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts.push_back(boundary_point(Vec3(s * std::cos(phi), s * std::sin(phi), z)));
  }
  return pts;
}

Eigen::MatrixXd assemble_collocation(const std::vector<Vec3>& collocation,
                                     const std::vector<Vec3>& sources, Execution exec) {
  const auto m = static_cast<Eigen::Index>(collocation.size());
  const auto n = static_cast<Eigen::Index>(sources.size());
  Eigen::MatrixXd a(m, n);
  const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
  for_each_index(static_cast<std::size_t>(n), exec, [&](std::size_t j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      a(i, static_cast<Eigen::Index>(j)) =
          inv4pi / (collocation[static_cast<std::size_t>(i)] - sources[j]).norm();
    }
  });
  return a;
}

namespace {

struct LeastSquares {
  Eigen::VectorXd x;
  double condition = 0.0;
};

/// Column-scaled, column-pivoted Householder least squares.
LeastSquares solve_scaled(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double cap) {
  const Eigen::VectorXd norms = a.colwise().norm().transpose();
  const Eigen::MatrixXd scaled = a * norms.cwiseInverse().asDiagonal();
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  const Eigen::MatrixXd& r = qr.matrixR();
  const Eigen::Index k = std::min(r.rows(), r.cols()) - 1;
  LeastSquares out;
  out.condition = std::abs(r(0, 0)) / std::abs(r(k, k));
  if (!(out.condition <= cap)) {
    std::ostringstream os;
    os << "collocation matrix condition estimate " << out.condition << " exceeds the cap " << cap;
    throw IllConditioned(os.str());
  }
  out.x = qr.solve(b).cwiseQuotient(norms);
  return out;
}

/// Source points for the exterior problem. For an ellipsoid they sit on the
/// confocal ellipsoid with axes sqrt(a_i^2 - lambda), lambda = (1 - s^2) a_min^2,
/// which approaches the focal ellipse (where the exterior solution stops
/// continuing analytically) as s -> 0 and is the sphere of radius s a for a
/// sphere of radius a. Other shapes use the homothetic copy scaled by s.
std::vector<Vec3> exterior_sources(const ConvexShape& shape, std::size_t count, double s) {
  if (shape.exponent() != 2.0) return shape.fibonacci_points(count, s);
  const double amin = shape.min_semi_axis();
  const double lambda = (1.0 - s * s) * amin * amin;
  const Vec3 axes = (shape.semi_axes().array().square() - lambda).sqrt().matrix();
  return ConvexShape::ellipsoid(axes, shape.center()).fibonacci_points(count);
}

int collocation_count(const FitOptions& opts) {
  if (opts.sources < 4) throw ConfigError("mfs.sources must be >= 4");
  if (opts.collocation_ratio < 1) throw ConfigError("mfs.collocation_ratio must be >= 1");
  return opts.sources * opts.collocation_ratio;
}

void finish_report(FitReport& rep, const std::vector<double>& residuals, const FitOptions& opts) {
  double mx = 0.0, ss = 0.0;
  for (double r : residuals) {
    mx = std::max(mx, r);
    ss += r * r;
  }
  rep.residual_max = mx;
  rep.residual_rms = residuals.empty() ? 0.0 : std::sqrt(ss / double(residuals.size()));
  rep.within_tolerance = mx <= opts.residual_tolerance;
  spdlog::info("mfs {}: {} sources, cond {:.3e}, residual max {:.3e}", rep.problem, rep.sources,
               rep.condition_estimate, rep.residual_max);
  if (!rep.within_tolerance && opts.enforce_residual) {
    std::ostringstream os;
    os << "mfs " << rep.problem << " residual " << mx << " exceeds tolerance "
       << opts.residual_tolerance;
    throw ResidualTooLarge(os.str());
  }
}

}  // namespace

MfsFit solve_exterior(const ConvexShape& shape, double flux, const FitOptions& opts) {
  if (!(flux != 0.0) || !std::isfinite(flux)) throw ConfigError("mfs.flux must be finite and nonzero");
  const int m = collocation_count(opts);
  const double scale = opts.source_scale > 0.0 ? opts.source_scale : 0.3;
  if (!(scale > 0.0 && scale < 1.0)) throw ConfigError("mfs.source_scale must lie in (0, 1) for the exterior problem");

  const std::vector<Vec3> src = exterior_sources(shape, static_cast<std::size_t>(opts.sources), scale);
  const std::vector<Vec3> col = shape.fibonacci_points(static_cast<std::size_t>(m));
  const Eigen::MatrixXd a = assemble_collocation(col, src, opts.exec);
  const LeastSquares ls = solve_scaled(a, Eigen::VectorXd::Ones(m), opts.condition_cap);

  // Unit boundary value -> rescale to the requested flux.
  const double raw_total = ls.x.sum();
  const double factor = flux / raw_total;
  std::vector<PointCharge> charges;
  charges.reserve(src.size());
  for (std::size_t j = 0; j < src.size(); ++j) {
    charges.push_back({src[j], ls.x[static_cast<Eigen::Index>(j)] * factor});
  }

  MfsFit fit{ChargeEnsemble(std::move(charges)), {}};
  FitReport& rep = fit.report;
  rep.problem = "exterior";
  rep.sources = opts.sources;
  rep.collocation_points = m;
  rep.check_points = opts.check_points;
  rep.source_scale = scale;
  rep.condition_estimate = ls.condition;
  rep.boundary_value = factor;
  rep.flux = fit.ensemble.total_charge();
  rep.collocation_residual = ((a * ls.x).array() - 1.0).abs().maxCoeff();

  const std::vector<Vec3> check = shape.random_points(opts.check_points, opts.seed);
  std::vector<double> res(check.size());
  for_each_index(check.size(), opts.exec, [&](std::size_t k) {
    res[k] = std::abs(fit.ensemble.value(check[k]) - rep.boundary_value) / std::abs(rep.boundary_value);
  });
  finish_report(rep, res, opts);
  return fit;
}

MfsFit solve_cavity(const ConvexShape& shape, const FitOptions& opts) {
  if (!shape.contains(Vec3::Zero())) {
    throw OriginOutside("the unit charge at the origin must lie strictly inside the cavity");
  }
  const int m = collocation_count(opts);
  const double scale = opts.source_scale > 0.0 ? opts.source_scale : 2.5;
  if (!(scale > 1.0)) throw ConfigError("mfs.source_scale must be > 1 for the cavity problem");

  const std::vector<Vec3> src = shape.fibonacci_points(static_cast<std::size_t>(opts.sources), scale);
  const std::vector<Vec3> col = shape.fibonacci_points(static_cast<std::size_t>(m));
  const Eigen::MatrixXd a = assemble_collocation(col, src, opts.exec);
  // Cancel the point charge on the boundary; rows are weighted by 4 pi |x| so
  // the fit minimizes the same relative residual that is reported.
  Eigen::VectorXd w(m), b(m);
  for (int i = 0; i < m; ++i) {
    const double rad = col[static_cast<std::size_t>(i)].norm();
    w[i] = 4.0 * std::numbers::pi * rad;
    b[i] = -1.0 / (4.0 * std::numbers::pi * rad) * w[i];
  }
  const LeastSquares ls = solve_scaled(w.asDiagonal() * a, b, opts.condition_cap);

  std::vector<PointCharge> charges{{Vec3::Zero(), 1.0}};
  for (std::size_t j = 0; j < src.size(); ++j) {
    charges.push_back({src[j], ls.x[static_cast<Eigen::Index>(j)]});
  }
  MfsFit fit{ChargeEnsemble(std::move(charges)), {}};
  FitReport& rep = fit.report;
  rep.problem = "cavity";
  rep.sources = opts.sources;
  rep.collocation_points = m;
  rep.check_points = opts.check_points;
  rep.source_scale = scale;
  rep.condition_estimate = ls.condition;
  rep.flux = 1.0;
  rep.collocation_residual = ((w.asDiagonal() * a * ls.x) - b).cwiseAbs().maxCoeff();

  const std::vector<Vec3> check = shape.random_points(opts.check_points, opts.seed);
  std::vector<double> res(check.size());
  for_each_index(check.size(), opts.exec, [&](std::size_t k) {
    res[k] = std::abs(fit.ensemble.value(check[k])) * 4.0 * std::numbers::pi * check[k].norm();
  });
  finish_report(rep, res, opts);
  return fit;
}

nlohmann::json fit_report_to_json(const FitReport& r) {
  nlohmann::json j = {{"problem", r.problem},
                      {"sources", r.sources},
                      {"collocation_points", r.collocation_points},
                      {"check_points", r.check_points},
                      {"source_scale", r.source_scale},
                      {"condition_estimate", r.condition_estimate},
                      {"collocation_residual", r.collocation_residual},
                      {"residual_max", r.residual_max},
                      {"residual_rms", r.residual_rms},
                      {"flux", r.flux},
                      {"within_tolerance", r.within_tolerance}};
  if (r.problem == "exterior") j["boundary_value"] = r.boundary_value;
  return j;
}

nlohmann::json shape_to_json(const ConvexShape& s) {
  return {{"semi_axes", vec3_to_json(s.semi_axes())},
          {"exponent", s.exponent()},
          {"center", vec3_to_json(s.center())}};
}

}  // namespace eqlab
