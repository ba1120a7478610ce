#include "eqlab/field_io.hpp"

#include <string>

#include "eqlab/error.hpp"

namespace eqlab {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(std::string("field: missing required key '") + key + "'");
  }
  return j.at(key);
}

double number(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw ConfigError(std::string("field: '") + key + "' must be a number");
  return v.get<double>();
}

}  // namespace

Vec3 vec3_from_json(const json& j, const char* key) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(std::string("'") + key + "' must be an array of 3 numbers");
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) {
      throw ConfigError(std::string("'") + key + "' must be an array of 3 numbers");
    }
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Field field_from_json(const json& j) {
  const json& type_node = require(j, "type");
  if (!type_node.is_string()) throw ConfigError("field: 'type' must be a string");
  const std::string type = type_node.get<std::string>();

  if (type == "ensemble") {
    const json& list = require(j, "charges");
    if (!list.is_array() || list.empty()) {
      throw ConfigError("field: 'charges' must be a non-empty array");
    }
    std::vector<PointCharge> charges;
    for (const auto& c : list) {
      charges.push_back({vec3_from_json(require(c, "position"), "position"), number(c, "strength")});
    }
    const double offset = j.contains("offset") ? number(j, "offset") : 0.0;
    return ChargeEnsemble(std::move(charges), offset);
  }
  if (type == "dipole") {
    const double c00 = number(j, "c00");
    const double c10 = number(j, "c10");
    if (!(c00 > 0.0)) throw ConfigError("field: 'c00' must be positive");
    return AxialDipoleField(c00, c10);
  }
  if (type == "multipole") {
    const json& deg = require(j, "degree");
    if (!deg.is_number_integer()) throw ConfigError("field: 'degree' must be an integer");
    MultipoleField field(deg.get<int>());
    if (j.contains("coefficients")) {
      for (const auto& c : j.at("coefficients")) {
        const json& l = require(c, "l");
        const json& m = require(c, "m");
        if (!l.is_number_integer() || !m.is_number_integer()) {
          throw ConfigError("field: coefficient indices 'l', 'm' must be integers");
        }
        field.set_coefficient(l.get<int>(), m.get<int>(), number(c, "c"));
      }
    }
    return field;
  }
  if (type == "cavity_green") {
    return make_cavity_green(vec3_from_json(require(j, "center"), "center"), number(j, "radius"));
  }
  throw ConfigError("field: unknown type '" + type + "'");
}

json field_to_json(const Field& field) {
  return std::visit(
      [](const auto& m) -> json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ChargeEnsemble>) {
          json charges = json::array();
          for (const auto& c : m.charges()) {
            charges.push_back({{"position", vec3_to_json(c.position)}, {"strength", c.strength}});
          }
          return {{"type", "ensemble"}, {"charges", charges}, {"offset", m.offset()}};
        } else if constexpr (std::is_same_v<M, AxialDipoleField>) {
          return {{"type", "dipole"}, {"c00", m.c00()}, {"c10", m.c10()}};
        } else {
          json coeffs = json::array();
          for (int l = 0; l <= m.degree(); ++l) {
            for (int k = -l; k <= l; ++k) {
              const double c = m.coefficient(l, k);
              if (c != 0.0) coeffs.push_back({{"l", l}, {"m", k}, {"c", c}});
            }
          }
          return {{"type", "multipole"}, {"degree", m.degree()}, {"coefficients", coeffs}};
        }
      },
      field.model());
}

}  // namespace eqlab
