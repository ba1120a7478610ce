#include "eqlab/cli/commands.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "eqlab/error.hpp"
#include "eqlab/field_io.hpp"
#include "eqlab/functionals.hpp"
#include "eqlab/identities.hpp"
#include "eqlab/levelset.hpp"
#include "eqlab/mfs.hpp"
#include "eqlab/planar.hpp"

namespace eqlab::cli {

using nlohmann::json;
namespace fs = std::filesystem;

const char* flux_convention() {
  return "unit-flux convention: U = q / (4 pi |r - p|) per charge, so a point charge of strength +1 "
         "at the origin carries flux 1; dipole/multipole coefficients carry no 1/(4 pi) "
         "(flux = 4 pi c00); n = -grad U / E, unit sphere H = -1, K = +1";
}

namespace {

constexpr double kPi = std::numbers::pi;

/// Thrown while turning the config's field/shape into a model (exit 3).
struct FieldBuildFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Pass/fail bookkeeping; every check lands in the report.
class Checks {
 public:
  void add(const std::string& name, double value, const std::string& relation, double limit) {
    bool ok = false;
    if (std::isfinite(value)) {
      if (relation == "<=") ok = value <= limit;
      else if (relation == "<") ok = value < limit;
      else if (relation == ">=") ok = value >= limit;
      else if (relation == ">") ok = value > limit;
    }
    record(name, value, relation, limit, ok);
  }
  void flag(const std::string& name, bool ok) {
    json e = {{"name", name}, {"value", ok}, {"relation", "is"}, {"limit", true}, {"passed", ok}};
    entries_.push_back(e);
    print(name, ok ? "true" : "false", "is", "true", ok);
    passed_ = passed_ && ok;
  }
  bool passed() const { return passed_; }
  const json& entries() const { return entries_; }

 private:
  void record(const std::string& name, double value, const std::string& rel, double limit, bool ok) {
    entries_.push_back({{"name", name}, {"value", value}, {"relation", rel}, {"limit", limit}, {"passed", ok}});
    char v[32], l[32];
    std::snprintf(v, sizeof v, "%.6e", value);
    std::snprintf(l, sizeof l, "%.6e", limit);
    print(name, v, rel, l, ok);
    passed_ = passed_ && ok;
  }
  static void print(const std::string& name, const std::string& v, const std::string& rel,
                    const std::string& l, bool ok) {
    std::printf("  [%s] %s = %s %s %s\n", ok ? "PASS" : "FAIL", name.c_str(), v.c_str(), rel.c_str(),
                l.c_str());
  }
  json entries_ = json::array();
  bool passed_ = true;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write '" + path.string() + "' (check --out)");
  os << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

template <class Fn>
void write_stream(const fs::path& path, Fn&& fn) {
  std::ostringstream os;
  fn(os);
  write_text(path, os.str());
}

json report_header(const std::string& command, const RunConfig& cfg) {
  return {{"command", command},
          {"convention", flux_convention()},
          {"seed", cfg.seed},
          {"config", cfg.to_json()}};
}

int finish(json& report, const Checks& checks, bool convex, const fs::path& file) {
  int code = kExitOk;
  if (!convex) code = kExitNonConvex;
  else if (!checks.passed()) code = kExitToleranceFailure;
  report["checks"] = checks.entries();
  report["convex"] = convex;
  report["assertions"] = convex ? (checks.passed() ? "passed" : "failed")
                                : "suppressed: non-convex level found";
  report["exit_code"] = code;
  write_json(file, report);
  std::printf("%s: exit %d (report: %s)\n", report["command"].get<std::string>().c_str(), code,
              file.string().c_str());
  return code;
}

Field build_field(const RunConfig& cfg) {
  if (!cfg.field) throw ConfigError("config field 'field' is required for this command");
  try {
    return field_from_json(*cfg.field);
  } catch (const std::exception& e) {
    throw FieldBuildFailure(std::string("field construction failed: ") + e.what());
  }
}

LevelsetTolerances levelset_tolerances(const RunConfig& cfg) {
  LevelsetTolerances t;
  t.radial_root = cfg.tol.get("radial_root");
  t.flow_defect = cfg.tol.get("flow_defect");
  return t;
}

const std::vector<double>& require_levels(const RunConfig& cfg, std::size_t min_count) {
  if (cfg.levels.size() < min_count) {
    throw ConfigError("config field 'levels' needs at least " + std::to_string(min_count) +
                      " levels, got " + std::to_string(cfg.levels.size()));
  }
  return cfg.levels;
}

GridSpec refined(const GridSpec& g) {
  GridSpec r = g;
  r.n_theta = (3 * g.n_theta + 1) / 2;
  r.n_phi = 2 * ((3 * g.n_phi + 3) / 4);
  return r;
}

// ---------------------------------------------------------------------------
// identities

int cmd_identities(const RunConfig& cfg, const fs::path& out) {
  const Field field = build_field(cfg);
  IdentityOptions io;
  io.spatial_step = cfg.identities.spatial_step;
  io.flow_step = cfg.identities.flow_step;
  io.center = cfg.grid.center;
  io.tol = levelset_tolerances(cfg);

  const auto points = sample_shell_points(cfg.seed, cfg.identities.points, cfg.grid.center,
                                          cfg.identities.shell_inner, cfg.identities.shell_outer);
  const PointSuite ps = point_identity_suite(field, points, io);

  Checks checks;
  const double cf = cfg.tol.get("closed_form");
  const double fd = cfg.tol.get("finite_difference");
  const double ev = cfg.tol.get("evolution");
  checks.add("normal_logE", ps.normal_logE.max, "<=", cf);
  checks.add("laplacian_logE", ps.laplacian_logE.max, "<=", cf);
  checks.add("grad_split", ps.grad_split.max, "<=", cf);
  checks.add("laplacian_normal", ps.laplacian_normal.max, "<=", fd);
  checks.add("laplacian_normal_over_E", ps.laplacian_normal_over_E.max, "<=", fd);

  json report = report_header("identities", cfg);
  report["field"] = field_to_json(field);
  report["points"] = {{"count", points.size()}, {"suite", point_suite_to_json(ps)}};

  bool convex = true;
  json levels = json::array();
  for (double level : cfg.levels) {
    const auto grid = sample_surface(field, level, cfg.grid, Execution::Parallel, io.tol);
    convex = convex && grid.diagnostics.convex;
    const GridSuite gs = grid_identity_suite(field, grid, io);
    const std::string tag = "level " + std::to_string(level) + ": ";
    checks.add(tag + "weatherburn", gs.weatherburn.max, "<=", fd);
    checks.add(tag + "mean_curvature_evolution", gs.mean_curvature_evolution.max, "<=", ev);
    checks.add(tag + "area_evolution", gs.area_evolution.max, "<=", ev);
    json lj = grid_suite_to_json(gs);
    lj["level"] = level;
    lj["convex"] = grid.diagnostics.convex;
    levels.push_back(lj);
  }
  report["levels"] = levels;
  // Pointwise identities hold regardless of convexity; only surface suites are
  // reported as such, and non-convexity is still surfaced through exit 4.
  return finish(report, checks, convex, out / "identities.json");
}

// ---------------------------------------------------------------------------
// sweep

/// Sign, rigidity, monotonicity, derivative and conservation checks shared by
/// `sweep` and `mfs`. `interior` flips the expected sign of F.
void check_sweep(const SweepReport& s, const std::vector<double>& noise,
                 const std::vector<double>& dW_local, bool interior, double F_floor,
                 const RunConfig& cfg, Checks& checks, json& detail) {
  const double rigid = cfg.tol.get("rigidity");
  const double margin = cfg.tol.get("sign_margin");
  const double slack = cfg.tol.get("monotone_slack");
  const double drel = cfg.tol.get("derivative_rel");
  detail = json::array();
  for (std::size_t k = 0; k < s.levels.size(); ++k) {
    const auto& r = s.reports[k];
    const bool is_rigid = std::abs(r.F_value) <= rigid && std::abs(r.W_value) <= rigid;
    const double signed_F = interior ? -r.F_value : r.F_value;
    const std::string tag = "level " + std::to_string(s.levels[k]) + ": ";
    json e = {{"level", s.levels[k]}, {"F", r.F_value}, {"rigid", is_rigid}};
    if (!noise.empty()) e["noise"] = noise[k];
    if (F_floor > 0.0) {
      // Fitted fields: only the weak sign, up to the fit's accuracy.
      checks.add(tag + (interior ? "-F" : "F"), signed_F, ">=", -F_floor);
    } else if (!is_rigid) {
      checks.add(tag + (interior ? "-F" : "F"), signed_F, ">", 0.0);
      if (!noise.empty()) {
        const double ratio = noise[k] > 0.0 ? signed_F / noise[k] : INFINITY;
        e["margin_ratio"] = std::isfinite(ratio) ? json(ratio) : json("inf");
        checks.add(tag + "sign margin / quadrature noise", std::isfinite(ratio) ? ratio : 1e300,
                   ">=", margin);
      }
    }
    if (interior) checks.add(tag + "beta", r.beta_integral, "<=", slack);
    const auto rel_to_rhs = [&](double d) {
      const double rhs = std::abs(s.rhs_W1F1[k]);
      return rhs > 0.0 ? std::abs(d - s.rhs_W1F1[k]) / rhs : 0.0;
    };
    if (k > 0 && k + 1 < s.levels.size()) e["sweep_fd_rel_error"] = rel_to_rhs(s.dW_fd[k]);
    if (!dW_local.empty()) {
      // Below the rigidity threshold both sides vanish to rounding.
      e["dW_local"] = dW_local[k];
      e["derivative_rel_error"] = rel_to_rhs(dW_local[k]);
      if (std::abs(dW_local[k] - s.rhs_W1F1[k]) > rigid)
        checks.add(tag + "dW/dphi vs -(3/2) beta (relative)", rel_to_rhs(dW_local[k]), "<=", drel);
    }
    detail.push_back(e);
  }
  for (std::size_t k = 1; k < s.levels.size(); ++k) {
    checks.add("W increment " + std::to_string(k), s.reports[k].W_value - s.reports[k - 1].W_value,
               ">=", -slack);
  }
  checks.add("flux_spread", s.flux_spread, "<=", cfg.tol.get("flux_spread"));
  checks.add("gauss_bonnet_deviation", s.gauss_bonnet_deviation, "<=", cfg.tol.get("gauss_bonnet"));
}

/// Centred difference of W at each level with step h * level, each side on
/// its own grid.
std::vector<double> local_W_derivative(const Field& field, const SweepReport& s, const GridSpec& spec,
                                       const LevelsetTolerances& tol, double h) {
  std::vector<double> d;
  for (double level : s.levels) {
    const double up = level_report(sample_surface(field, level * (1 + h), spec, Execution::Parallel, tol)).W_value;
    const double dn = level_report(sample_surface(field, level * (1 - h), spec, Execution::Parallel, tol)).W_value;
    d.push_back((up - dn) / (2 * h * level));
  }
  return d;
}

std::vector<double> quadrature_noise(const Field& field, const SweepReport& s, const GridSpec& spec,
                                     const LevelsetTolerances& tol) {
  const GridSpec fine = refined(spec);
  std::vector<double> noise;
  for (std::size_t k = 0; k < s.levels.size(); ++k) {
    const auto grid = sample_surface(field, s.levels[k], fine, Execution::Parallel, tol);
    noise.push_back(std::abs(level_report(grid).F_value - s.reports[k].F_value));
  }
  return noise;
}

void export_grids(const Field& field, const std::vector<double>& levels, const GridSpec& spec,
                  const LevelsetTolerances& tol, const fs::path& out, const std::string& prefix) {
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto grid = sample_surface(field, levels[k], spec, Execution::Parallel, tol);
    const std::string stem = prefix + std::to_string(k);
    write_stream(out / (stem + ".csv"), [&](std::ostream& os) { write_grid_csv(grid, os); });
    write_json(out / (stem + ".json"), grid_sidecar_json(grid));
  }
}

int cmd_sweep(const RunConfig& cfg, const fs::path& out) {
  const Field field = build_field(cfg);
  const auto& levels = require_levels(cfg, 5);
  SweepOptions so;
  so.tol = levelset_tolerances(cfg);
  so.monotone_slack = cfg.tol.get("monotone_slack");
  const SweepReport s = sweep(field, levels, cfg.grid, so);
  const bool interior = cfg.kind == "interior";

  std::vector<double> noise;
  if (cfg.sweep.refine) noise = quadrature_noise(field, s, cfg.grid, so.tol);

  const auto dW_local = local_W_derivative(field, s, cfg.grid, so.tol, cfg.sweep.derivative_step);

  Checks checks;
  json detail;
  check_sweep(s, noise, dW_local, interior, 0.0, cfg, checks, detail);

  json report = report_header("sweep", cfg);
  report["field"] = field_to_json(field);
  report["kind"] = cfg.kind;
  report["sweep"] = sweep_to_json(s);
  report["sign_check"] = detail;
  if (!noise.empty()) report["refined_grid"] = grid_spec_to_json(refined(cfg.grid));

  write_stream(out / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(s, os); });
  if (cfg.sweep.export_grids) export_grids(field, s.levels, cfg.grid, so.tol, out, "grid_");
  return finish(report, checks, s.convex, out / "sweep.json");
}

// ---------------------------------------------------------------------------
// asymptotics

bool has_higher_modes(const Field& field) {
  const auto* m = std::get_if<MultipoleField>(&field.model());
  if (!m) return false;
  for (int l = 2; l <= m->degree(); ++l)
    for (int mm = -l; mm <= l; ++mm)
      if (m->coefficient(l, mm) != 0.0) return true;
  return false;
}

int cmd_asymptotics(const RunConfig& cfg, const fs::path& out) {
  const Field field = build_field(cfg);
  const auto& levels = require_levels(cfg, 6);
  if (std::log10(levels.back() / levels.front()) < 1.5) {
    throw ConfigError("config field 'levels' must span at least 1.5 decades for asymptotics");
  }
  SweepOptions so;
  so.tol = levelset_tolerances(cfg);
  so.monotone_slack = cfg.tol.get("monotone_slack");
  const SweepReport s = sweep(field, levels, cfg.grid, so);

  json report = report_header("asymptotics", cfg);
  report["field"] = field_to_json(field);
  json rows = json::array();
  for (std::size_t k = 0; k < s.levels.size(); ++k)
    rows.push_back({{"level", s.levels[k]}, {"W", s.reports[k].W_value}});
  report["W"] = rows;

  const double zero = cfg.tol.get("zero_W");
  const bool all_zero = std::all_of(s.reports.begin(), s.reports.end(),
                                    [&](const LevelReport& r) { return std::abs(r.W_value) <= zero; });
  Checks checks;
  if (all_zero) {
    report["slope"] = nullptr;
    report["status"] = "identically zero, slope undefined";
    std::printf("  W identically zero (|W| <= %.3e at every level): slope undefined\n", zero);
    return finish(report, checks, s.convex, out / "asymptotics.json");
  }
  const bool positive = std::all_of(s.reports.begin(), s.reports.end(),
                                    [](const LevelReport& r) { return r.W_value > 0.0; });
  checks.flag("W positive at every level (log-log fit defined)", positive);
  double slope = NAN, intercept = NAN;
  if (positive) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(s.levels.size());
    for (std::size_t k = 0; k < s.levels.size(); ++k) {
      const double x = std::log(s.levels[k]), y = std::log(s.reports[k].W_value);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    intercept = (sy - slope * sx) / n;
  }
  std::string bound = cfg.asymptotics.bound;
  if (bound == "auto") bound = has_higher_modes(field) ? "lower" : "two_sided";
  report["slope"] = std::isfinite(slope) ? json(slope) : json(nullptr);
  report["intercept"] = std::isfinite(intercept) ? json(intercept) : json(nullptr);
  report["bound"] = bound;
  report["status"] = "fitted";
  checks.add("slope", slope, ">=", cfg.tol.get("slope_min"));
  if (bound == "two_sided") checks.add("slope", slope, "<=", cfg.tol.get("slope_max"));
  return finish(report, checks, s.convex, out / "asymptotics.json");
}

// ---------------------------------------------------------------------------
// flow

/// Exact end point of a radial flow line for single-source fields.
std::optional<Vec3> radial_endpoint(const Field& field, const Vec3& start, double target) {
  if (const auto* e = std::get_if<ChargeEnsemble>(&field.model())) {
    if (e->charges().size() != 1) return std::nullopt;
    const auto& c = e->charges().front();
    const double r = c.strength / (4.0 * kPi * (target - e->offset()));
    return c.position + r * (start - c.position).normalized();
  }
  if (const auto* d = std::get_if<AxialDipoleField>(&field.model())) {
    if (d->c10() != 0.0) return std::nullopt;
    return (d->c00() / target) * start.normalized();
  }
  return std::nullopt;
}

int cmd_flow(const RunConfig& cfg, const fs::path& out) {
  const Field field = build_field(cfg);
  const LevelsetTolerances lt = levelset_tolerances(cfg);
  const auto& levels = require_levels(cfg, cfg.flow.target_level ? 1 : 2);
  const double from = levels.front();
  const double to = cfg.flow.target_level ? *cfg.flow.target_level : levels[1];

  std::optional<LevelSurfaceGrid> grid;
  bool convex = true;
  if (cfg.flow.starts.empty() || cfg.flow.area_check) {
    grid = sample_surface(field, from, cfg.grid, Execution::Parallel, lt);
    convex = grid->diagnostics.convex;
  }
  std::vector<Vec3> starts = cfg.flow.starts;
  if (starts.empty())
    for (const auto& n : grid->nodes) starts.push_back(n.position);

  const std::size_t n = starts.size();
  std::vector<Vec3> ends(n), backs(n);
  std::vector<double> defects(n), trips(n, 0.0), radial(n, NAN);
  for_each_index(n, Execution::Parallel, [&](std::size_t i) {
    const auto tr = flow_trace(field, starts[i], to, cfg.flow.steps, lt);
    ends[i] = tr.end();
    defects[i] = tr.terminal_defect / std::max(1.0, std::abs(to));
    if (cfg.flow.round_trip) {
      backs[i] = flow_endpoint(field, ends[i], field.value(starts[i]), cfg.flow.steps, lt);
      trips[i] = (backs[i] - starts[i]).norm() / starts[i].norm();
    }
    if (auto exact = radial_endpoint(field, starts[i], to))
      radial[i] = (ends[i] - *exact).norm() / exact->norm();
  });

  Checks checks;
  const auto max_of = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::isnan(x) ? m : std::max(m, x);
    return m;
  };
  checks.add("max terminal defect", max_of(defects), "<=", cfg.tol.get("flow_defect"));
  if (cfg.flow.round_trip) checks.add("max round trip", max_of(trips), "<=", cfg.tol.get("flow_round_trip"));
  const bool has_radial = n > 0 && !std::isnan(radial.front());
  if (has_radial) checks.add("max radial error", max_of(radial), "<=", cfg.tol.get("flow_radial"));

  json report = report_header("flow", cfg);
  report["field"] = field_to_json(field);
  report["from_level"] = from;
  report["to_level"] = to;
  report["traces"] = n;
  report["max_terminal_defect"] = max_of(defects);
  if (cfg.flow.round_trip) report["max_round_trip"] = max_of(trips);
  if (has_radial) report["max_radial_error"] = max_of(radial);

  if (cfg.flow.area_check) {
    IdentityOptions io;
    io.spatial_step = cfg.identities.spatial_step;
    io.flow_step = cfg.identities.flow_step;
    io.center = cfg.grid.center;
    io.tol = lt;
    const GridSuite gs = grid_identity_suite(field, *grid, io);
    report["area_evolution"] = stats_to_json(gs.area_evolution);
    report["mean_curvature_evolution"] = stats_to_json(gs.mean_curvature_evolution);
    checks.add("area_evolution", gs.area_evolution.max, "<=", cfg.tol.get("evolution"));
  }

  write_stream(out / "flow.csv", [&](std::ostream& os) {
    os << "index,x0,y0,z0,x1,y1,z1,defect,round_trip,radial_error\n" << std::setprecision(17);
    for (std::size_t i = 0; i < n; ++i) {
      os << i << ',' << starts[i].x() << ',' << starts[i].y() << ',' << starts[i].z() << ','
         << ends[i].x() << ',' << ends[i].y() << ',' << ends[i].z() << ',' << defects[i] << ','
         << trips[i] << ',';
      if (!std::isnan(radial[i])) os << radial[i];
      os << '\n';
    }
  });
  return finish(report, checks, convex, out / "flow.json");
}

// ---------------------------------------------------------------------------
// mfs

ConvexShape build_shape(const MfsSection& m) {
  try {
    return m.shape_type == "ellipsoid" ? ConvexShape::ellipsoid(m.semi_axes, m.shape_center)
                                       : ConvexShape::superellipsoid(m.semi_axes, m.exponent, m.shape_center);
  } catch (const std::exception& e) {
    throw FieldBuildFailure(std::string("shape construction failed: ") + e.what());
  }
}

int cmd_mfs(const RunConfig& cfg, const fs::path& out) {
  const MfsSection& m = cfg.mfs;
  const ConvexShape shape = build_shape(m);
  FitOptions fo;
  fo.sources = m.sources;
  fo.collocation_ratio = m.collocation_ratio;
  fo.source_scale = m.source_scale;
  fo.check_points = m.check_points;
  fo.seed = cfg.seed;
  fo.residual_tolerance = cfg.tol.get("mfs_residual");
  fo.enforce_residual = false;
  const bool cavity = m.problem == "cavity";
  MfsFit fit;
  try {
    fit = cavity ? solve_cavity(shape, fo) : solve_exterior(shape, m.flux, fo);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    throw FieldBuildFailure(std::string("MFS fit failed: ") + e.what());
  }
  const Field field(fit.ensemble);

  Checks checks;
  checks.add("residual_max", fit.report.residual_max, "<=", cfg.tol.get("mfs_residual"));

  // Sweep of the fitted field. Exterior levels are fractions of the boundary
  // value; rays start on the sphere through the farthest boundary point.
  GridSpec spec = cfg.grid;
  std::vector<double> levels;
  if (cavity) {
    levels = require_levels(cfg, 5);
    spec.center = Vec3::Zero();
  } else {
    for (double f : m.level_fractions) levels.push_back(f * fit.report.boundary_value);
    spec.center = shape.center();
    spec.r_min = shape.max_semi_axis();
  }
  SweepOptions so;
  so.tol = levelset_tolerances(cfg);
  so.monotone_slack = cfg.tol.get("monotone_slack");
  const SweepReport s = sweep(field, levels, spec, so);
  const auto dW_local = local_W_derivative(field, s, spec, so.tol, cfg.sweep.derivative_step);
  json detail;
  check_sweep(s, {}, dW_local, cavity, cfg.tol.get("mfs_F_floor"), cfg, checks, detail);

  json report = report_header("mfs", cfg);
  report["shape"] = shape_to_json(shape);
  report["fit"] = fit_report_to_json(fit.report);
  report["sweep_grid"] = grid_spec_to_json(spec);
  report["sweep"] = sweep_to_json(s);
  report["sign_check"] = detail;

  write_stream(out / "mfs_sweep.csv", [&](std::ostream& os) { write_sweep_csv(s, os); });
  write_stream(out / "mfs_charges.csv", [&](std::ostream& os) {
    os << "x,y,z,strength\n" << std::setprecision(17);
    for (const auto& c : fit.ensemble.charges())
      os << c.position.x() << ',' << c.position.y() << ',' << c.position.z() << ',' << c.strength << '\n';
  });
  return finish(report, checks, s.convex, out / "mfs.json");
}

// ---------------------------------------------------------------------------
// planar

int cmd_planar(const RunConfig& cfg, const fs::path& out) {
  if (!cfg.planar) throw ConfigError("config field 'planar' is required for the planar command");
  const PlanarSection& p = *cfg.planar;
  std::optional<PlanarField> field;
  try {
    field = planar_field_from_json(p.field);
  } catch (const std::exception& e) {
    throw FieldBuildFailure(std::string("planar field construction failed: ") + e.what());
  }
  CurveSpec spec;
  spec.n_nodes = p.n_nodes;
  spec.center = Vec2(p.center_x, p.center_y);
  spec.r_min = p.r_min;
  spec.r_max = p.r_max;
  spec.validate();
  if (p.levels.size() < 2) throw ConfigError("config field 'planar.levels' needs at least 2 levels");

  const PlanarSweep s = planar_sweep(*field, p.levels, spec);
  Checks checks;
  checks.add("conserved_spread", s.conserved_spread, "<=", cfg.tol.get("planar_spread"));
  checks.add("max_variance_rel_error", s.max_variance_rel_error, "<=", cfg.tol.get("planar_variance"));
  checks.add("max_turning_deviation", s.max_turning_deviation, "<=", cfg.tol.get("planar_turning"));
  checks.add("max_flux_deviation", s.max_flux_deviation, "<=", cfg.tol.get("planar_flux"));
  const double gp = cfg.tol.get("grad_product");
  for (const auto& r : s.levels) {
    const std::string tag = "level " + std::to_string(r.level) + ": ";
    checks.add(tag + "grad_product (normalized)", r.grad_product.normalized, "<=", gp);
    // Circles are the equality case; anything measurably non-circular must be strict.
    if (r.curvature_spread > 1e-6) checks.add(tag + "grad_product strict", r.grad_product.value, "<", 0.0);
  }

  json report = report_header("planar", cfg);
  report["field"] = planar_field_to_json(*field);
  report["sweep"] = planar_sweep_to_json(s);

  write_stream(out / "planar_levels.csv", [&](std::ostream& os) {
    os << "level,flux,turning,length,conserved,grad_product,grad_product_normalized,"
          "variance_rel_error,curvature_spread,min_curvature\n"
       << std::setprecision(17);
    for (const auto& r : s.levels)
      os << r.level << ',' << r.flux << ',' << r.turning << ',' << r.length << ',' << r.conserved << ','
         << r.grad_product.value << ',' << r.grad_product.normalized << ',' << r.variance.rel_error << ','
         << r.curvature_spread << ',' << r.min_curvature << '\n';
  });
  for (std::size_t k = 0; k < p.levels.size(); ++k) {
    const auto curve = sample_curve(*field, p.levels[k], spec);
    write_stream(out / ("planar_curve_" + std::to_string(k) + ".csv"),
                 [&](std::ostream& os) { write_curve_csv(curve, os); });
  }
  return finish(report, checks, s.convex, out / "planar.json");
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config:
    case ErrorKind::Bracket:
      return kExitConfigError;
    case ErrorKind::Geometry:
    case ErrorKind::NotImplemented:
    case ErrorKind::IllConditioned:
    case ErrorKind::OriginOutside:
      return kExitFieldError;
    default:
      return kExitToleranceFailure;
  }
}

void configure_logging() {
  auto logger = spdlog::get("eqlab");
  if (!logger) {
    logger = spdlog::stderr_color_mt("eqlab");
    spdlog::set_default_logger(logger);
  }
  spdlog::set_pattern("[%l] %v");
  spdlog::level::level_enum lvl = spdlog::level::warn;
  if (const char* env = std::getenv("EQLAB_LOG")) {
    const std::string v = env;
    if (v == "error") lvl = spdlog::level::err;
    else if (v == "warn") lvl = spdlog::level::warn;
    else if (v == "info") lvl = spdlog::level::info;
    else if (v == "debug") lvl = spdlog::level::debug;
    else throw ConfigError("EQLAB_LOG must be one of error, warn, info, debug (got '" + v + "')");
  }
  spdlog::set_level(lvl);
}

}  // namespace

int run_command(const std::string& command, const RunConfig& config, const fs::path& out) {
  try {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out.string() + "': " + ec.message());
    std::printf("eqlab %s — %s\n", command.c_str(), flux_convention());
    if (command == "identities") return cmd_identities(config, out);
    if (command == "sweep") return cmd_sweep(config, out);
    if (command == "asymptotics") return cmd_asymptotics(config, out);
    if (command == "flow") return cmd_flow(config, out);
    if (command == "mfs") return cmd_mfs(config, out);
    if (command == "planar") return cmd_planar(config, out);
    throw ConfigError("unknown command '" + command + "'");
  } catch (const FieldBuildFailure& e) {
    spdlog::error("{}", e.what());
    return kExitFieldError;
  } catch (const Error& e) {
    spdlog::error("{} ({})", e.what(), to_string(e.kind()));
    return exit_code_for(e);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitToleranceFailure;
  }
}

int run_cli(int argc, char** argv) {
  try {
    configure_logging();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfigError;
  }

  // --tol-KEY=VALUE flags are open-ended, so they are taken out before CLI11
  // sees the rest of the command line.
  Overrides ov;
  std::vector<std::string> rest;
  try {
    for (int i = 0; i < argc; ++i) {
      std::string a = argv[i];
      if (i == 0 || a.rfind("--tol-", 0) != 0) {
        rest.push_back(a);
        continue;
      }
      std::string kv = a.substr(6);
      std::string key, value;
      if (const auto eq = kv.find('='); eq != std::string::npos) {
        key = kv.substr(0, eq);
        value = kv.substr(eq + 1);
      } else if (i + 1 < argc) {
        key = kv;
        value = argv[++i];
      } else {
        throw ConfigError("flag '" + a + "' needs a value");
      }
      std::replace(key.begin(), key.end(), '-', '_');
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size()) {
        throw ConfigError("flag '--tol-" + kv + "': '" + value + "' is not a number");
      }
      ov.tolerances.emplace_back(key, v);
    }
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfigError;
  }

  CLI::App app{"eqlab: potential-theory and level-set geometry laboratory"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "eqlab_out";
  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_theta, n_phi;
  for (const char* name : {"identities", "sweep", "asymptotics", "flow", "mfs", "planar"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_dir, "output directory (created if missing)");
    sub->add_option("--threads", threads, "worker threads (default: hardware parallelism)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--seed", seed, "random seed (overrides the config)");
    sub->add_option("--n-theta", n_theta, "grid points in theta (overrides the config)");
    sub->add_option("--n-phi", n_phi, "grid points in phi (overrides the config)");
  }
  app.footer("Tolerances: --tol-KEY=VALUE for any key of the 'tolerances' config section.");

  std::vector<const char*> cargs;
  for (const auto& s : rest) cargs.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), const_cast<char**>(cargs.data()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  ov.seed = seed;
  ov.n_theta = n_theta;
  ov.n_phi = n_phi;

  if (threads > 0) omp_set_num_threads(threads);

  RunConfig cfg;
  try {
    json doc = config_path.empty() ? json::object() : read_json_file(config_path);
    cfg = parse_config(std::move(doc), ov);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    spdlog::error("config: {}", e.what());
    return kExitConfigError;
  }
  return run_command(command, cfg, out_dir);
}

}  // namespace eqlab::cli
