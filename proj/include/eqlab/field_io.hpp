#pragma once

#include <json.hpp>

#include "eqlab/fields.hpp"

namespace eqlab {

/// JSON schema for field definitions (all lengths in the same unit):
///
///   {"type": "ensemble",
///    "charges": [{"position": [x, y, z], "strength": q}, ...],
///    "offset": 0.0}                                  // offset optional
///   {"type": "dipole", "c00": 1.0, "c10": 0.1}
///   {"type": "multipole", "degree": 4,
///    "coefficients": [{"l": 0, "m": 0, "c": 1.0}, ...]}
///   {"type": "cavity_green", "center": [cx, cy, cz], "radius": a}
///
/// A unit charge contributes 1/(4 pi |r - p|) and carries unit flux. Dipole and
/// multipole coefficients carry no 1/(4 pi) (flux = 4 pi c00).
///
/// Throws ConfigError naming the offending key on malformed input, and the
/// model's own errors (GeometryError, NotImplemented) on invalid parameters.
Field field_from_json(const nlohmann::json& j);

/// Serializes the concrete model. A cavity_green input comes back as the
/// equivalent "ensemble" document.
nlohmann::json field_to_json(const Field& field);

Vec3 vec3_from_json(const nlohmann::json& j, const char* key);
nlohmann::json vec3_to_json(const Vec3& v);

}  // namespace eqlab
