#include "eqlab/planar.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "eqlab/error.hpp"
#include "eqlab/fields.hpp"
#include "eqlab/spectral.hpp"

namespace eqlab {

namespace {

using cplx = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct ComplexJet {
  double value;
  cplx d1;  // w'(z)
  cplx d2;  // w''(z)
};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_flux(double flux) {
  if (!(flux > 0.0) || !std::isfinite(flux)) {
    throw GeometryError("planar field flux must be positive and finite");
  }
}

/// Root of scale (zeta^2) - z zeta + scale m = 0 outside the focal segment.
cplx ellipse_zeta(const EllipseExterior& e, cplx z) {
  const cplx disc = std::sqrt(z * z - 4.0 * e.scale * e.scale * e.m);
  const cplx a = (z + disc) / (2.0 * e.scale);
  const cplx b = (z - disc) / (2.0 * e.scale);
  return std::abs(a) >= std::abs(b) ? a : b;
}

ComplexJet complex_jet(const PlanarField::Model& model, const Vec2& x) {
  const cplx z(x.x(), x.y());
  return std::visit(
      overloaded{
          [&](const LogMonopole& f) {
            const cplx u = z - cplx(f.center.x(), f.center.y());
            if (std::abs(u) < kSingularDistance) throw SingularPoint("planar log-monopole source");
            const double k = f.flux / kTwoPi;
            return ComplexJet{-k * std::log(std::abs(u)), -k / u, k / (u * u)};
          },
          [&](const LogDipoleMix& f) {
            if (std::abs(z) < kSingularDistance) throw SingularPoint("planar dipole source");
            const double k = f.flux / kTwoPi;
            const cplx p(f.dipole.x(), f.dipole.y());
            return ComplexJet{-k * std::log(std::abs(z)) + std::real(p / z) / kTwoPi,
                              -k / z - p / (kTwoPi * z * z),
                              k / (z * z) + p / (std::numbers::pi * z * z * z)};
          },
          [&](const EllipseExterior& f) {
            const cplx zeta = ellipse_zeta(f, z);
            const cplx dz = f.scale * (1.0 - f.m / (zeta * zeta));  // dz/dzeta
            if (std::abs(dz) < kSingularDistance * f.scale) throw SingularPoint("ellipse focal point");
            const cplx zp = 1.0 / dz;
            const cplx zpp = -(2.0 * f.scale * f.m / (zeta * zeta * zeta)) * zp * zp * zp;
            const double k = f.flux / kTwoPi;
            return ComplexJet{-k * std::log(std::abs(zeta)), -k * zp / zeta,
                              -k * (zpp / zeta - zp * zp / (zeta * zeta))};
          },
      },
      model);
}

}  // namespace

PlanarField::PlanarField(Model model) : model_(std::move(model)) {
  std::visit(overloaded{
                 [](const LogMonopole& f) {
                   check_flux(f.flux);
                   if (!f.center.allFinite()) throw GeometryError("log-monopole center must be finite");
                 },
                 [](const LogDipoleMix& f) {
                   check_flux(f.flux);
                   if (!f.dipole.allFinite()) throw GeometryError("dipole moment must be finite");
                 },
                 [](const EllipseExterior& f) {
                   check_flux(f.flux);
                   if (!(f.scale > 0.0)) throw GeometryError("ellipse scale must be positive");
                   if (!(f.m >= 0.0 && f.m < 1.0)) throw GeometryError("ellipse m must lie in [0, 1)");
                 },
             },
             model_);
}

std::string PlanarField::kind() const {
  return std::visit(overloaded{[](const LogMonopole&) { return std::string("log_monopole"); },
                               [](const LogDipoleMix&) { return std::string("log_dipole_mix"); },
                               [](const EllipseExterior&) { return std::string("ellipse_exterior"); }},
                    model_);
}

double PlanarField::flux() const {
  return std::visit([](const auto& f) { return f.flux; }, model_);
}

PlanarJet PlanarField::jet(const Vec2& x) const {
  const ComplexJet c = complex_jet(model_, x);
  PlanarJet j;
  j.value = c.value;
  j.gradient = Vec2(c.d1.real(), -c.d1.imag());
  j.hessian << c.d2.real(), -c.d2.imag(), -c.d2.imag(), -c.d2.real();
  return j;
}

void CurveSpec::validate() const {
  if (n_nodes < 8 || n_nodes % 2 != 0) {
    throw ConfigError("planar.n_nodes must be even and >= 8, got " + std::to_string(n_nodes));
  }
  if (!(r_min > 0.0)) throw ConfigError("planar.bracket: r_min must be positive");
  if (!(r_max > r_min)) throw ConfigError("planar.bracket: r_max must exceed r_min");
  if (!center.allFinite()) throw ConfigError("planar.center must be finite");
}

namespace {

double radial_root(const PlanarField& field, double level, const Vec2& w, const CurveSpec& spec) {
  auto excess = [&](double r) { return field.value(spec.center + r * w) - level; };
  double lo = spec.r_min, hi = spec.r_max;
  const double f_lo = excess(lo), f_hi = excess(hi);
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    std::ostringstream os;
    os << std::setprecision(17) << "planar level " << level << " is not bracketed along ("
       << w.transpose() << "): U(r_min) - level = " << f_lo << ", U(r_max) - level = " << f_hi;
    throw BracketError(os.str());
  }
  while (hi - lo > 1e-6 * lo) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) > 0.0 ? lo : hi) = mid;
  }
  const double target = 1e-14 * std::max(1.0, std::abs(level));
  double r = 0.5 * (lo + hi);
  double f = excess(r);
  for (int iter = 0; iter < 60 && std::abs(f) > target; ++iter) {
    const double slope = field.jet(spec.center + r * w).gradient.dot(w);
    const double next = r - f / slope;
    if (!(slope < 0.0) || !(next > lo && next < hi)) {
      while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi && std::abs(f) > target) {
        const double mid = 0.5 * (lo + hi);
        f = excess(mid);
        (f > 0.0 ? lo : hi) = mid;
        r = mid;
      }
      break;
    }
    r = next;
    f = excess(r);
    (f > 0.0 ? lo : hi) = r;
  }
  return r;
}

}  // namespace

LevelCurveGrid sample_curve(const PlanarField& field, double level, const CurveSpec& spec,
                            Execution exec) {
  spec.validate();
  LevelCurveGrid grid;
  grid.level = level;
  grid.spec = spec;
  const auto n = static_cast<std::size_t>(spec.n_nodes);
  grid.nodes.resize(n);
  for_each_index(n, exec, [&](std::size_t k) {
    CurveNode& node = grid.nodes[k];
    node.theta = kTwoPi * double(k) / double(n);
    const Vec2 w(std::cos(node.theta), std::sin(node.theta));
    const Vec2 w_theta(-w.y(), w.x());
    const double rho = radial_root(field, level, w, spec);
    node.position = spec.center + rho * w;
    node.jet = field.jet(node.position);
    const Vec2& g = node.jet.gradient;
    node.intensity = g.norm();
    if (!(node.intensity > 1e-10)) throw CriticalPoint("planar level curve meets a critical point");
    const double rho_theta = -rho * g.dot(w_theta) / g.dot(w);
    const Vec2 r_theta = rho_theta * w + rho * w_theta;
    node.speed = r_theta.norm();
    node.tangent = r_theta / node.speed;
    node.normal = -g / node.intensity;
    node.curvature = -node.tangent.dot(node.jet.hessian * node.tangent) / node.intensity;
    node.dlogE = node.tangent.dot(node.jet.hessian * g) / (node.intensity * node.intensity);
    node.ds = node.speed * kTwoPi / double(n);
  });
  for (const auto& node : grid.nodes) {
    grid.max_level_defect = std::max(grid.max_level_defect, std::abs(node.jet.value - level));
  }
  return grid;
}

namespace {

template <class Fn>
double curve_sum(const LevelCurveGrid& grid, Fn&& fn) {
  std::vector<double> terms(grid.nodes.size());
  for (std::size_t k = 0; k < terms.size(); ++k) {
    terms[k] = fn(grid.nodes[k]);
    if (!std::isfinite(terms[k])) throw NonFinite("planar integrand is not finite");
  }
  return compensated_sum(terms.data(), terms.size());
}

}  // namespace

double turning_integral(const LevelCurveGrid& grid) {
  return curve_sum(grid, [](const CurveNode& n) { return n.curvature * n.ds; });
}

double flux_integral(const LevelCurveGrid& grid) {
  return curve_sum(grid, [](const CurveNode& n) { return n.intensity * n.ds; });
}

double curve_length(const LevelCurveGrid& grid) {
  return curve_sum(grid, [](const CurveNode& n) { return n.ds; });
}

double conserved_integral(const LevelCurveGrid& grid) {
  return curve_sum(grid, [](const CurveNode& n) {
    return (n.curvature * n.curvature - n.dlogE * n.dlogE) / n.intensity * n.ds;
  });
}

GradProduct grad_product_integral(const LevelCurveGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.nodes.size());
  Eigen::VectorXd a(n), b(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const CurveNode& node = grid.nodes[static_cast<std::size_t>(k)];
    a[k] = node.curvature / node.intensity;
    b[k] = 1.0 / node.intensity;
  }
  const Eigen::MatrixXd d = periodic_diff_matrix(static_cast<int>(n));
  const Eigen::VectorXd da = d * a, db = d * b;
  // d_s = d_theta / speed, ds = speed dtheta.
  std::vector<double> prod(grid.nodes.size()), aa(grid.nodes.size()), bb(grid.nodes.size());
  const double dtheta = kTwoPi / double(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double sp = grid.nodes[static_cast<std::size_t>(k)].speed;
    const auto u = static_cast<std::size_t>(k);
    prod[u] = da[k] * db[k] / sp * dtheta;
    aa[u] = da[k] * da[k] / sp * dtheta;
    bb[u] = db[k] * db[k] / sp * dtheta;
  }
  GradProduct g;
  g.value = compensated_sum(prod.data(), prod.size());
  const double norm = std::sqrt(compensated_sum(aa.data(), aa.size()) * compensated_sum(bb.data(), bb.size()));
  g.normalized = norm > 0.0 ? g.value / norm : 0.0;
  if (!std::isfinite(g.value) || !std::isfinite(g.normalized)) throw NonFinite("grad-product integral");
  return g;
}

VarianceIdentity variance_identity(const LevelCurveGrid& grid, double flux) {
  const double mean = turning_integral(grid) / flux;  // oint (kappa/E) E ds / flux
  VarianceIdentity v;
  v.lhs = curve_sum(grid, [&](const CurveNode& n) {
            const double dev = n.curvature / n.intensity - mean;
            return dev * dev * n.intensity * n.ds;
          }) / flux;
  v.rhs = curve_sum(grid, [&](const CurveNode& n) {
            return n.dlogE * n.dlogE / n.intensity * n.ds;
          }) / flux;
  const double scale = std::max(std::abs(v.lhs), std::abs(v.rhs));
  v.rel_error = scale > 0.0 ? std::abs(v.lhs - v.rhs) / scale : 0.0;
  return v;
}

double curvature_spread(const LevelCurveGrid& grid) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  for (const auto& n : grid.nodes) {
    lo = std::min(lo, n.curvature);
    hi = std::max(hi, n.curvature);
    sum += n.curvature;
  }
  return (hi - lo) / std::abs(sum / double(grid.nodes.size()));
}

PlanarLevelReport planar_level_report(const LevelCurveGrid& grid, double flux) {
  PlanarLevelReport r;
  r.level = grid.level;
  r.flux = flux_integral(grid);
  r.turning = turning_integral(grid);
  r.length = curve_length(grid);
  r.conserved = conserved_integral(grid);
  r.grad_product = grad_product_integral(grid);
  r.variance = variance_identity(grid, flux);
  r.curvature_spread = curvature_spread(grid);
  r.min_curvature = std::numeric_limits<double>::infinity();
  for (const auto& n : grid.nodes) r.min_curvature = std::min(r.min_curvature, n.curvature);
  r.max_level_defect = grid.max_level_defect;
  return r;
}

PlanarSweep planar_sweep(const PlanarField& field, const std::vector<double>& levels,
                         const CurveSpec& spec, Execution exec) {
  if (levels.size() < 2) throw ConfigError("planar.levels needs at least 2 levels");
  PlanarSweep s;
  const double flux = field.flux();
  s.expected_conserved = kTwoPi * kTwoPi / flux;
  s.max_grad_product = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  for (double lv : levels) {
    const PlanarLevelReport r = planar_level_report(sample_curve(field, lv, spec, exec), flux);
    lo = std::min(lo, r.conserved);
    hi = std::max(hi, r.conserved);
    sum += r.conserved;
    s.max_variance_rel_error = std::max(s.max_variance_rel_error, r.variance.rel_error);
    s.max_flux_deviation = std::max(s.max_flux_deviation, std::abs(r.flux - flux) / flux);
    s.max_turning_deviation = std::max(s.max_turning_deviation, std::abs(r.turning - kTwoPi));
    s.max_grad_product = std::max(s.max_grad_product, r.grad_product.value);
    s.convex = s.convex && r.min_curvature > 0.0;
    s.levels.push_back(r);
  }
  s.conserved_spread = (hi - lo) / std::abs(sum / double(levels.size()));
  return s;
}

double planar_logE_identity(const PlanarJet& jet) {
  const double e2 = jet.gradient.squaredNorm();
  const double lhs = jet.hessian.squaredNorm() * e2;
  const double rhs = 2.0 * (jet.hessian * jet.gradient).squaredNorm();
  const double scale = std::max(lhs, rhs);
  return scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
}

double planar_normal_over_E_identity(const PlanarField& field, const Vec2& x, double h) {
  auto m = [&](const Vec2& p) {
    const Vec2 g = field.jet(p).gradient;
    return Vec2(-g / g.squaredNorm());
  };
  const Vec2 c = m(x);
  Vec2 lap = Vec2::Zero();
  double scale = 0.0;
  for (int k = 0; k < 2; ++k) {
    const Vec2 e = h * Vec2::Unit(k);
    const Vec2 second = m(x + e) - 2.0 * c + m(x - e);
    lap += second;
    scale += second.norm();
  }
  return scale > 0.0 ? lap.norm() / scale : 0.0;
}

namespace {

Vec2 vec2_from_json(const nlohmann::json& j, const char* key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(std::string(key) + " must be an array of 2 numbers");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

double number(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(std::string("planar.field.") + key + " must be a number");
  return j[key].get<double>();
}

}  // namespace

PlanarField planar_field_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("planar.field must be an object");
  if (!j.contains("type") || !j["type"].is_string()) throw ConfigError("planar.field.type must be a string");
  const std::string type = j["type"].get<std::string>();
  const double flux = number(j, "flux", kTwoPi);
  if (type == "log_monopole") {
    LogMonopole f{flux, Vec2::Zero()};
    if (j.contains("center")) f.center = vec2_from_json(j["center"], "planar.field.center");
    return PlanarField(f);
  }
  if (type == "log_dipole_mix") {
    LogDipoleMix f{flux, Vec2::Zero()};
    if (j.contains("dipole")) f.dipole = vec2_from_json(j["dipole"], "planar.field.dipole");
    return PlanarField(f);
  }
  if (type == "ellipse_exterior") {
    return PlanarField(EllipseExterior{number(j, "scale", 1.0), number(j, "m", 0.0), flux});
  }
  throw ConfigError("planar.field.type: unknown planar field type '" + type + "'");
}

nlohmann::json planar_field_to_json(const PlanarField& f) {
  return std::visit(
      overloaded{
          [](const LogMonopole& m) {
            return nlohmann::json{{"type", "log_monopole"}, {"flux", m.flux}, {"center", {m.center.x(), m.center.y()}}};
          },
          [](const LogDipoleMix& m) {
            return nlohmann::json{{"type", "log_dipole_mix"}, {"flux", m.flux}, {"dipole", {m.dipole.x(), m.dipole.y()}}};
          },
          [](const EllipseExterior& m) {
            return nlohmann::json{{"type", "ellipse_exterior"}, {"flux", m.flux}, {"scale", m.scale}, {"m", m.m}};
          },
      },
      f.model());
}

nlohmann::json planar_level_to_json(const PlanarLevelReport& r) {
  return {{"level", r.level},
          {"flux", r.flux},
          {"turning", r.turning},
          {"length", r.length},
          {"conserved", r.conserved},
          {"grad_product", r.grad_product.value},
          {"grad_product_normalized", r.grad_product.normalized},
          {"variance_lhs", r.variance.lhs},
          {"variance_rhs", r.variance.rhs},
          {"variance_rel_error", r.variance.rel_error},
          {"curvature_spread", r.curvature_spread},
          {"min_curvature", r.min_curvature},
          {"max_level_defect", r.max_level_defect}};
}

nlohmann::json planar_sweep_to_json(const PlanarSweep& s) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& r : s.levels) levels.push_back(planar_level_to_json(r));
  return {{"levels", levels},
          {"expected_conserved", s.expected_conserved},
          {"conserved_spread", s.conserved_spread},
          {"max_variance_rel_error", s.max_variance_rel_error},
          {"max_flux_deviation", s.max_flux_deviation},
          {"max_turning_deviation", s.max_turning_deviation},
          {"max_grad_product", s.max_grad_product},
          {"convex", s.convex}};
}

void write_curve_csv(const LevelCurveGrid& grid, std::ostream& os) {
  os << "theta,x,y,E,kappa,ds\n" << std::setprecision(17);
  for (const auto& n : grid.nodes) {
    os << n.theta << ',' << n.position.x() << ',' << n.position.y() << ',' << n.intensity << ','
       << n.curvature << ',' << n.ds << '\n';
  }
}

}  // namespace eqlab
