#include "eqlab/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "eqlab/error.hpp"
#include "eqlab/field_io.hpp"

namespace eqlab::cli {

using nlohmann::json;

namespace {

struct TolDefault {
  const char* key;
  double value;
  const char* what;
};

// clang-format off
constexpr TolDefault kTolerances[] = {
    {"closed_form",       1e-10, "closed-form pointwise identities (relative)"},
    {"finite_difference", 1e-4,  "finite-difference and surface-calculus identities (relative)"},
    {"evolution",         1e-4,  "flow-based evolution identities: H and area element (relative)"},
    {"flux_spread",       1e-7,  "relative flux spread across a sweep"},
    {"gauss_bonnet",      1e-7,  "|oint K dS - 4 pi|"},
    {"monotone_slack",    1e-9,  "allowed decrease of W between levels"},
    {"derivative_rel",    1e-2,  "finite-difference dW vs -(3/2) beta (relative)"},
    {"rigidity",          1e-10, "|F|, |W| below which a level counts as the rigid (spherical) case"},
    {"sign_margin",       10.0,  "required |F| / quadrature-noise ratio for strict signs"},
    {"slope_min",         1.9,   "lower bound of the asymptotic log-log slope"},
    {"slope_max",         2.1,   "upper bound of the asymptotic log-log slope"},
    {"zero_W",            1e-12, "max |W| treated as identically zero in asymptotics"},
    {"mfs_residual",      1e-6,  "MFS residual_max on the check set"},
    {"mfs_F_floor",       1e-8,  "allowed wrong-sign F on MFS sweeps"},
    {"planar_spread",     1e-6,  "relative spread of the 2D conserved integral"},
    {"planar_variance",   1e-6,  "2D variance identity (relative)"},
    {"planar_turning",    1e-10, "|oint kappa ds - 2 pi|"},
    {"planar_flux",       1e-10, "relative deviation of oint E ds from the flux"},
    {"grad_product",      1e-10, "upper bound of the normalized 2D grad-product integral"},
    {"flow_defect",       1e-10, "|U(end) - target| after a flow trace (relative to max(1, |target|))"},
    {"flow_round_trip",   1e-8,  "|end - start| after a there-and-back trace (relative to |start|)"},
    {"flow_radial",       1e-10, "monopole trace vs the exact radial end point (relative)"},
    {"radial_root",       1e-13, "radial root defect |U - level| / max(1, |level|)"},
};
// clang-format on

std::string where(const std::string& key) { return "config field '" + key + "'"; }

double get_number(const json& obj, const std::string& parent, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where(parent + key) + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(where(parent + key) + " must be finite");
  return d;
}

long long get_integer(const json& obj, const std::string& parent, const char* key, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where(parent + key) + " must be an integer");
  return v.get<long long>();
}

bool get_bool(const json& obj, const std::string& parent, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) throw ConfigError(where(parent + key) + " must be true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& parent, const char* key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where(parent + key) + " must be a string");
  return v.get<std::string>();
}

const json& section(const json& doc, const char* key) {
  static const json empty = json::object();
  if (!doc.contains(key)) return empty;
  const json& s = doc.at(key);
  if (!s.is_object()) throw ConfigError(where(key) + " must be an object");
  return s;
}

Vec3 get_vec3(const json& obj, const std::string& parent, const char* key, const Vec3& fallback) {
  if (!obj.contains(key)) return fallback;
  return vec3_from_json(obj.at(key), (parent + key).c_str());
}

void check_keys(const json& obj, const std::string& parent, std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return it.key() == k; })) {
      throw ConfigError(where(parent + it.key()) + " is not a recognized setting");
    }
  }
}

}  // namespace

Tolerances::Tolerances() {
  for (const auto& t : kTolerances) values_[t.key] = t.value;
}

double Tolerances::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown tolerance '" + key + "'");
  return it->second;
}

void Tolerances::set(const std::string& key, double value) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError(where("tolerances." + key) + ": unknown tolerance");
  if (!std::isfinite(value) || value < 0.0) {
    throw ConfigError(where("tolerances." + key) + " must be finite and non-negative");
  }
  it->second = value;
}

const std::map<std::string, std::string>& Tolerances::descriptions() {
  static const std::map<std::string, std::string> d = [] {
    std::map<std::string, std::string> m;
    for (const auto& t : kTolerances) m[t.key] = t.what;
    return m;
  }();
  return d;
}

std::vector<double> parse_levels(const json& j, const std::string& key, bool require_positive) {
  std::vector<double> levels;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) {
        throw ConfigError(where(key + "[" + std::to_string(i) + "]") + " must be a number");
      }
      levels.push_back(j[i].get<double>());
    }
  } else if (j.is_object() && (j.contains("geometric") || j.contains("linear"))) {
    const bool geometric = j.contains("geometric");
    const std::string sub = key + (geometric ? ".geometric." : ".linear.");
    const json& r = j.at(geometric ? "geometric" : "linear");
    if (!r.is_object()) throw ConfigError(where(sub) + " must be an object");
    const double lo = get_number(r, sub, "min", NAN);
    const double hi = get_number(r, sub, "max", NAN);
    const long long count = get_integer(r, sub, "count", 0);
    if (!r.contains("min") || !r.contains("max")) throw ConfigError(where(sub) + " needs 'min' and 'max'");
    if (count < 2) throw ConfigError(where(sub + "count") + " must be >= 2");
    if (geometric && !(lo > 0.0 && hi > 0.0)) {
      throw ConfigError(where(sub + "min") + " and 'max' must be positive for a geometric range");
    }
    for (long long k = 0; k < count; ++k) {
      const double t = double(k) / double(count - 1);
      levels.push_back(geometric ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
    }
  } else {
    throw ConfigError(where(key) + " must be an array or {\"geometric\"|\"linear\": {min, max, count}}");
  }
  if (levels.empty()) throw ConfigError(where(key) + " must not be empty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!std::isfinite(levels[i])) {
      throw ConfigError(where(key + "[" + std::to_string(i) + "]") + " must be finite");
    }
    if (require_positive && !(levels[i] > 0.0)) {
      std::ostringstream os;
      os << where(key + "[" + std::to_string(i) + "]") << " must be positive, got " << levels[i];
      throw ConfigError(os.str());
    }
  }
  std::sort(levels.begin(), levels.end());
  if (std::adjacent_find(levels.begin(), levels.end()) != levels.end()) {
    throw ConfigError(where(key) + " must not repeat a level");
  }
  return levels;
}

RunConfig parse_config(json doc, const Overrides& ov) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(doc, "", {"field", "kind", "levels", "grid", "seed", "tolerances", "identities", "sweep",
                       "asymptotics", "flow", "mfs", "planar", "description"});
  RunConfig cfg;

  if (doc.contains("field")) {
    if (!doc["field"].is_object()) throw ConfigError(where("field") + " must be an object");
    cfg.field = doc["field"];
  }
  const bool cavity = cfg.field && cfg.field->value("type", "") == "cavity_green";
  cfg.kind = get_string(doc, "", "kind", cavity ? "interior" : "exterior");
  if (cfg.kind != "exterior" && cfg.kind != "interior") {
    throw ConfigError(where("kind") + " must be 'exterior' or 'interior'");
  }
  if (doc.contains("levels")) cfg.levels = parse_levels(doc["levels"], "levels", true);

  const json& grid = section(doc, "grid");
  check_keys(grid, "grid.", {"n_theta", "n_phi", "center", "bracket"});
  cfg.grid.n_theta = static_cast<int>(get_integer(grid, "grid.", "n_theta", cfg.grid.n_theta));
  cfg.grid.n_phi = static_cast<int>(get_integer(grid, "grid.", "n_phi", cfg.grid.n_phi));
  if (ov.n_theta) cfg.grid.n_theta = *ov.n_theta;
  if (ov.n_phi) cfg.grid.n_phi = *ov.n_phi;
  cfg.grid.center = get_vec3(grid, "grid.", "center", cfg.grid.center);
  if (grid.contains("bracket")) {
    const json& b = grid["bracket"];
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
      throw ConfigError(where("grid.bracket") + " must be [r_min, r_max]");
    }
    cfg.grid.r_min = b[0].get<double>();
    cfg.grid.r_max = b[1].get<double>();
  }
  cfg.grid.validate();

  const long long seed = get_integer(doc, "", "seed", 1);
  if (seed < 0) throw ConfigError(where("seed") + " must be non-negative");
  cfg.seed = ov.seed ? *ov.seed : static_cast<std::uint64_t>(seed);

  const json& tol = section(doc, "tolerances");
  for (auto it = tol.begin(); it != tol.end(); ++it) {
    if (!it.value().is_number()) throw ConfigError(where("tolerances." + it.key()) + " must be a number");
    cfg.tol.set(it.key(), it.value().get<double>());
  }
  for (const auto& [k, v] : ov.tolerances) cfg.tol.set(k, v);

  const json& ids = section(doc, "identities");
  check_keys(ids, "identities.", {"points", "shell", "spatial_step", "flow_step"});
  const long long pts = get_integer(ids, "identities.", "points", 1000);
  if (pts < 1) throw ConfigError(where("identities.points") + " must be >= 1");
  cfg.identities.points = static_cast<std::size_t>(pts);
  if (ids.contains("shell")) {
    const json& s = ids["shell"];
    if (!s.is_array() || s.size() != 2 || !s[0].is_number() || !s[1].is_number()) {
      throw ConfigError(where("identities.shell") + " must be [r_inner, r_outer]");
    }
    cfg.identities.shell_inner = s[0].get<double>();
    cfg.identities.shell_outer = s[1].get<double>();
    if (!(cfg.identities.shell_inner > 0.0 && cfg.identities.shell_outer >= cfg.identities.shell_inner)) {
      throw ConfigError(where("identities.shell") + " needs 0 < r_inner <= r_outer");
    }
  }
  cfg.identities.spatial_step = get_number(ids, "identities.", "spatial_step", 1e-4);
  cfg.identities.flow_step = get_number(ids, "identities.", "flow_step", 1e-3);
  if (!(cfg.identities.spatial_step > 0.0)) throw ConfigError(where("identities.spatial_step") + " must be positive");
  if (!(cfg.identities.flow_step > 0.0)) throw ConfigError(where("identities.flow_step") + " must be positive");

  const json& sw = section(doc, "sweep");
  check_keys(sw, "sweep.", {"refine", "export_grids", "derivative_step"});
  cfg.sweep.refine = get_bool(sw, "sweep.", "refine", true);
  cfg.sweep.export_grids = get_bool(sw, "sweep.", "export_grids", false);
  cfg.sweep.derivative_step = get_number(sw, "sweep.", "derivative_step", 1e-3);
  if (!(cfg.sweep.derivative_step > 0.0 && cfg.sweep.derivative_step < 0.1)) {
    throw ConfigError(where("sweep.derivative_step") + " must lie in (0, 0.1)");
  }

  const json& as = section(doc, "asymptotics");
  check_keys(as, "asymptotics.", {"bound"});
  cfg.asymptotics.bound = get_string(as, "asymptotics.", "bound", "auto");
  if (cfg.asymptotics.bound != "auto" && cfg.asymptotics.bound != "two_sided" &&
      cfg.asymptotics.bound != "lower") {
    throw ConfigError(where("asymptotics.bound") + " must be 'auto', 'two_sided' or 'lower'");
  }

  const json& fl = section(doc, "flow");
  check_keys(fl, "flow.", {"starts", "target_level", "steps", "round_trip", "area_check"});
  if (fl.contains("starts")) {
    if (!fl["starts"].is_array()) throw ConfigError(where("flow.starts") + " must be an array of points");
    for (std::size_t i = 0; i < fl["starts"].size(); ++i) {
      cfg.flow.starts.push_back(
          vec3_from_json(fl["starts"][i], ("flow.starts[" + std::to_string(i) + "]").c_str()));
    }
  }
  if (fl.contains("target_level")) {
    cfg.flow.target_level = get_number(fl, "flow.", "target_level", 0.0);
    if (!(*cfg.flow.target_level > 0.0)) {
      throw ConfigError(where("flow.target_level") + " must be positive");
    }
  }
  cfg.flow.steps = static_cast<int>(get_integer(fl, "flow.", "steps", 64));
  if (cfg.flow.steps < 1) throw ConfigError(where("flow.steps") + " must be >= 1");
  cfg.flow.round_trip = get_bool(fl, "flow.", "round_trip", true);
  cfg.flow.area_check = get_bool(fl, "flow.", "area_check", true);

  const json& mf = section(doc, "mfs");
  check_keys(mf, "mfs.", {"problem", "shape", "flux", "sources", "collocation_ratio", "source_scale",
                          "check_points", "level_fractions"});
  cfg.mfs.problem = get_string(mf, "mfs.", "problem", "exterior");
  if (cfg.mfs.problem != "exterior" && cfg.mfs.problem != "cavity") {
    throw ConfigError(where("mfs.problem") + " must be 'exterior' or 'cavity'");
  }
  if (mf.contains("shape")) {
    const json& sh = mf["shape"];
    if (!sh.is_object()) throw ConfigError(where("mfs.shape") + " must be an object");
    check_keys(sh, "mfs.shape.", {"type", "semi_axes", "exponent", "center"});
    cfg.mfs.shape_type = get_string(sh, "mfs.shape.", "type", "ellipsoid");
    if (cfg.mfs.shape_type != "ellipsoid" && cfg.mfs.shape_type != "superellipsoid") {
      throw ConfigError(where("mfs.shape.type") + " must be 'ellipsoid' or 'superellipsoid'");
    }
    cfg.mfs.semi_axes = get_vec3(sh, "mfs.shape.", "semi_axes", cfg.mfs.semi_axes);
    cfg.mfs.exponent = get_number(sh, "mfs.shape.", "exponent", cfg.mfs.shape_type == "ellipsoid" ? 2.0 : 4.0);
    if (cfg.mfs.shape_type == "ellipsoid" && cfg.mfs.exponent != 2.0) {
      throw ConfigError(where("mfs.shape.exponent") + " must be 2 for an ellipsoid");
    }
    cfg.mfs.shape_center = get_vec3(sh, "mfs.shape.", "center", cfg.mfs.shape_center);
  }
  cfg.mfs.flux = get_number(mf, "mfs.", "flux", 1.0);
  cfg.mfs.sources = static_cast<int>(get_integer(mf, "mfs.", "sources", 400));
  cfg.mfs.collocation_ratio = static_cast<int>(get_integer(mf, "mfs.", "collocation_ratio", 4));
  cfg.mfs.source_scale = get_number(mf, "mfs.", "source_scale", 0.0);
  const long long checks = get_integer(mf, "mfs.", "check_points", 10000);
  if (checks < 1) throw ConfigError(where("mfs.check_points") + " must be >= 1");
  cfg.mfs.check_points = static_cast<std::size_t>(checks);
  if (mf.contains("level_fractions")) {
    cfg.mfs.level_fractions = parse_levels(mf["level_fractions"], "mfs.level_fractions", true);
    if (cfg.mfs.level_fractions.back() >= 1.0) {
      throw ConfigError(where("mfs.level_fractions") + " must lie below 1 (the boundary value)");
    }
  } else {
    for (int k = 0; k < 6; ++k) cfg.mfs.level_fractions.push_back(0.1 * std::pow(6.0, k / 5.0));
  }

  if (doc.contains("planar")) {
    const json& pl = section(doc, "planar");
    check_keys(pl, "planar.", {"field", "levels", "n_nodes", "center", "bracket"});
    PlanarSection p;
    if (!pl.contains("field") || !pl["field"].is_object()) {
      throw ConfigError(where("planar.field") + " must be an object");
    }
    p.field = pl["field"];
    if (!pl.contains("levels")) throw ConfigError(where("planar.levels") + " is required");
    p.levels = parse_levels(pl["levels"], "planar.levels", false);
    p.n_nodes = static_cast<int>(get_integer(pl, "planar.", "n_nodes", 512));
    if (pl.contains("center")) {
      const json& c = pl["center"];
      if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number()) {
        throw ConfigError(where("planar.center") + " must be [x, y]");
      }
      p.center_x = c[0].get<double>();
      p.center_y = c[1].get<double>();
    }
    if (pl.contains("bracket")) {
      const json& b = pl["bracket"];
      if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
        throw ConfigError(where("planar.bracket") + " must be [r_min, r_max]");
      }
      p.r_min = b[0].get<double>();
      p.r_max = b[1].get<double>();
    }
    cfg.planar = std::move(p);
  }
  return cfg;
}

json RunConfig::to_json() const {
  json j;
  if (field) j["field"] = *field;
  j["kind"] = kind;
  j["levels"] = levels;
  j["grid"] = grid_spec_to_json(grid);
  j["seed"] = seed;
  j["tolerances"] = tol.values();
  j["identities"] = {{"points", identities.points},
                     {"shell", {identities.shell_inner, identities.shell_outer}},
                     {"spatial_step", identities.spatial_step},
                     {"flow_step", identities.flow_step}};
  j["sweep"] = {{"refine", sweep.refine},
                {"export_grids", sweep.export_grids},
                {"derivative_step", sweep.derivative_step}};
  j["asymptotics"] = {{"bound", asymptotics.bound}};
  json starts = json::array();
  for (const auto& s : flow.starts) starts.push_back(vec3_to_json(s));
  j["flow"] = {{"starts", starts},
               {"target_level", flow.target_level ? json(*flow.target_level) : json(nullptr)},
               {"steps", flow.steps},
               {"round_trip", flow.round_trip},
               {"area_check", flow.area_check}};
  j["mfs"] = {{"problem", mfs.problem},
              {"shape",
               {{"type", mfs.shape_type},
                {"semi_axes", vec3_to_json(mfs.semi_axes)},
                {"exponent", mfs.exponent},
                {"center", vec3_to_json(mfs.shape_center)}}},
              {"flux", mfs.flux},
              {"sources", mfs.sources},
              {"collocation_ratio", mfs.collocation_ratio},
              {"source_scale", mfs.source_scale},
              {"check_points", mfs.check_points},
              {"level_fractions", mfs.level_fractions}};
  if (planar) {
    j["planar"] = {{"field", planar->field},
                   {"levels", planar->levels},
                   {"n_nodes", planar->n_nodes},
                   {"center", {planar->center_x, planar->center_y}},
                   {"bracket", {planar->r_min, planar->r_max}}};
  }
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace eqlab::cli
