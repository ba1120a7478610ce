#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqlab/levelset.hpp"

namespace eqlab::cli {

/// Named tolerances. Every key has a default; config files and --tol-KEY=VALUE
/// flags may override known keys only.
class Tolerances {
 public:
  Tolerances();
  double get(const std::string& key) const;
  void set(const std::string& key, double value);  // ConfigError on unknown key
  const std::map<std::string, double>& values() const { return values_; }
  static const std::map<std::string, std::string>& descriptions();

 private:
  std::map<std::string, double> values_;
};

struct IdentitiesSection {
  std::size_t points = 1000;
  double shell_inner = 1.0;
  double shell_outer = 3.0;
  double spatial_step = 1e-4;
  double flow_step = 1e-3;
};

struct SweepSection {
  bool refine = true;          // second grid for the quadrature-noise estimate
  bool export_grids = false;   // grid_<k>.csv + grid_<k>.json per level
  /// Relative step of the per-level centred difference of W used to check
  /// dW/dphi = -(3/2) beta independently of the level spacing.
  double derivative_step = 1e-3;
};

struct AsymptoticsSection {
  std::string bound = "auto";  // auto | two_sided | lower
};

struct FlowSection {
  std::vector<Vec3> starts;    // empty: every node of the grid at levels[0]
  std::optional<double> target_level;
  int steps = 64;
  bool round_trip = true;
  bool area_check = true;
};

struct MfsSection {
  std::string problem = "exterior";  // exterior | cavity
  std::string shape_type = "ellipsoid";
  Vec3 semi_axes = Vec3(1.0, 0.8, 0.7);
  double exponent = 2.0;
  Vec3 shape_center = Vec3::Zero();
  double flux = 1.0;
  int sources = 400;
  int collocation_ratio = 4;
  double source_scale = 0.0;
  std::size_t check_points = 10000;
  /// Exterior sweep levels as fractions of the fitted boundary value.
  std::vector<double> level_fractions;
};

struct PlanarSection {
  nlohmann::json field;
  std::vector<double> levels;  // may be negative (ellipse boundary at 0)
  int n_nodes = 512;
  double center_x = 0.0, center_y = 0.0;
  double r_min = 1e-3, r_max = 1e3;
};

/// Fully resolved run configuration.
struct RunConfig {
  std::optional<nlohmann::json> field;
  std::string kind;                  // exterior | interior
  std::vector<double> levels;        // sorted ascending, all > 0
  GridSpec grid;
  std::uint64_t seed = 1;
  Tolerances tol;
  IdentitiesSection identities;
  SweepSection sweep;
  AsymptoticsSection asymptotics;
  FlowSection flow;
  MfsSection mfs;
  std::optional<PlanarSection> planar;

  /// The resolved configuration (defaults filled in) embedded in reports.
  nlohmann::json to_json() const;
};

/// Command-line overrides; flags win over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> n_theta;
  std::optional<int> n_phi;
  std::vector<std::pair<std::string, double>> tolerances;
};

/// Parses a config document. Throws ConfigError naming the offending field.
RunConfig parse_config(nlohmann::json doc, const Overrides& overrides = {});

/// Reads and parses a JSON file (ConfigError if unreadable or malformed).
nlohmann::json read_json_file(const std::string& path);

/// Level list from an array or {"geometric"|"linear": {"min", "max", "count"}}.
std::vector<double> parse_levels(const nlohmann::json& j, const std::string& key,
                                 bool require_positive);

}  // namespace eqlab::cli
